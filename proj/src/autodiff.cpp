#include "xdrs/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xdrs/error.hpp"
#include "xdrs/kernels.hpp"

namespace xdrs {

namespace {

std::string shape_str(Shape s) { return std::to_string(s.rows) + "x" + std::to_string(s.cols); }

[[noreturn]] void shape_error(const std::string& op, Shape a, Shape b) {
  fail(ErrorKind::ShapeError, op + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

bool is_vector(Shape s) { return s.cols == 1; }

}  // namespace

Parameter::Parameter(std::string name, Shape shape, bool trainable)
    : value(shape.size(), 0.0), name_(std::move(name)), shape_(shape), trainable_(trainable) {
  if (trainable_) grad.assign(shape.size(), 0.0);
}

void Parameter::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

void init_uniform(Parameter& p, Rng& rng, double scale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (auto& v : p.value) v = dist(rng);
}

void init_constant(Parameter& p, double v) { std::fill(p.value.begin(), p.value.end(), v); }

Parameter& ParameterStore::add(const std::string& name, Shape shape, bool trainable) {
  if (find(name)) fail(ErrorKind::ConfigError, "duplicate parameter " + name);
  if (shape.rows <= 0 || shape.cols <= 0) fail(ErrorKind::ShapeError, "parameter " + name + " has empty shape");
  params_.push_back(std::make_unique<Parameter>(name, shape, trainable));
  return *params_.back();
}

Parameter* ParameterStore::find(const std::string& name) {
  for (auto& p : params_)
    if (p->name() == name) return p.get();
  return nullptr;
}

const Parameter* ParameterStore::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p->name() == name) return p.get();
  return nullptr;
}

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<Parameter*> ParameterStore::trainable() {
  std::vector<Parameter*> out;
  for (auto& p : params_)
    if (p->trainable()) out.push_back(p.get());
  return out;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

// ---------------------------------------------------------------------------

Expr Graph::push(Node n) {
  if (n.op != Op::Param) {
    if (n.value.size() != n.shape.size()) n.value.resize(n.shape.size(), 0.0);
  }
  if (!n.needs_grad)
    for (int a : n.args) n.needs_grad = n.needs_grad || nodes_[static_cast<std::size_t>(a)].needs_grad;
  if (n.needs_grad && n.op != Op::Param) n.grad.assign(n.shape.size(), 0.0);
  nodes_.push_back(std::move(n));
  return Expr{static_cast<int>(nodes_.size()) - 1};
}

Graph::Node& Graph::node(Expr e) {
  if (e.id < 0 || e.id >= static_cast<int>(nodes_.size()))
    fail(ErrorKind::InternalContractViolation, "expression does not belong to this graph");
  return nodes_[static_cast<std::size_t>(e.id)];
}

const Graph::Node& Graph::node(Expr e) const {
  if (e.id < 0 || e.id >= static_cast<int>(nodes_.size()))
    fail(ErrorKind::InternalContractViolation, "expression does not belong to this graph");
  return nodes_[static_cast<std::size_t>(e.id)];
}

const double* Graph::data(int id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  return n.op == Op::Param ? n.param->value.data() : n.value.data();
}

double* Graph::grad_data(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  return n.op == Op::Param ? n.param->grad.data() : n.grad.data();
}

std::span<const double> Graph::value(Expr e) const {
  const Node& n = node(e);
  return {data(e.id), n.shape.size()};
}

std::span<const double> Graph::grad(Expr e) const {
  const Node& n = node(e);
  if (n.op == Op::Param) return n.param->grad;
  return n.grad;
}

Shape Graph::shape(Expr e) const { return node(e).shape; }

Expr Graph::constant(std::vector<double> values, Shape shape) {
  if (values.size() != shape.size()) fail(ErrorKind::ShapeError, "constant: value count does not match shape");
  Node n;
  n.op = Op::Constant;
  n.shape = shape;
  n.value = std::move(values);
  return push(std::move(n));
}

Expr Graph::param(Parameter& p) {
  Node n;
  n.op = Op::Param;
  n.shape = p.shape();
  n.param = &p;
  n.needs_grad = p.trainable();
  return push(std::move(n));
}

Expr Graph::lookup(Parameter& table, int row) {
  if (row < 0 || row >= table.shape().rows)
    fail(ErrorKind::ShapeError, "lookup row " + std::to_string(row) + " outside table " + table.name());
  Node n;
  n.op = Op::Lookup;
  n.shape = vec_shape(table.shape().cols);
  n.param = &table;
  n.aux = row;
  n.needs_grad = table.trainable();
  const double* src = table.value.data() + static_cast<std::size_t>(row) * table.shape().cols;
  n.value.assign(src, src + table.shape().cols);
  return push(std::move(n));
}

Expr Graph::matvec(Expr W, Expr x) {
  Shape ws = shape(W), xs = shape(x);
  if (!is_vector(xs) || ws.cols != xs.rows) shape_error("matvec", ws, xs);
  Node n;
  n.op = Op::MatVec;
  n.shape = vec_shape(ws.rows);
  n.args = {W.id, x.id};
  n.value.assign(n.shape.size(), 0.0);
  kernels::gemv(data(W.id), data(x.id), n.value.data(), ws.rows, ws.cols);
  return push(std::move(n));
}

Expr Graph::affine(Expr W, Expr x, Expr b) {
  Shape ws = shape(W), xs = shape(x), bs = shape(b);
  if (!is_vector(xs) || ws.cols != xs.rows) shape_error("affine", ws, xs);
  if (!is_vector(bs) || bs.rows != ws.rows) shape_error("affine bias", ws, bs);
  Node n;
  n.op = Op::Affine;
  n.shape = vec_shape(ws.rows);
  n.args = {W.id, x.id, b.id};
  const double* bd = data(b.id);
  n.value.assign(bd, bd + ws.rows);
  kernels::gemv(data(W.id), data(x.id), n.value.data(), ws.rows, ws.cols);
  return push(std::move(n));
}

Expr Graph::tmatvec(Expr M, Expr p) {
  Shape ms = shape(M), ps = shape(p);
  if (!is_vector(ps) || ms.rows != ps.rows) shape_error("tmatvec", ms, ps);
  Node n;
  n.op = Op::TMatVec;
  n.shape = vec_shape(ms.cols);
  n.args = {M.id, p.id};
  n.value.assign(n.shape.size(), 0.0);
  kernels::gemv_t(data(M.id), data(p.id), n.value.data(), ms.rows, ms.cols);
  return push(std::move(n));
}

namespace {

template <class F>
void elementwise(const double* a, const double* b, double* out, std::size_t n, F f) {
  for (std::size_t i = 0; i < n; ++i) out[i] = f(a[i], b[i]);
}

}  // namespace

Expr Graph::add(Expr a, Expr b) {
  if (shape(a) != shape(b)) shape_error("add", shape(a), shape(b));
  Node n;
  n.op = Op::Add;
  n.shape = shape(a);
  n.args = {a.id, b.id};
  n.value.resize(n.shape.size());
  elementwise(data(a.id), data(b.id), n.value.data(), n.value.size(), [](double x, double y) { return x + y; });
  return push(std::move(n));
}

Expr Graph::sub(Expr a, Expr b) {
  if (shape(a) != shape(b)) shape_error("sub", shape(a), shape(b));
  Node n;
  n.op = Op::Sub;
  n.shape = shape(a);
  n.args = {a.id, b.id};
  n.value.resize(n.shape.size());
  elementwise(data(a.id), data(b.id), n.value.data(), n.value.size(), [](double x, double y) { return x - y; });
  return push(std::move(n));
}

Expr Graph::mul(Expr a, Expr b) {
  if (shape(a) != shape(b)) shape_error("mul", shape(a), shape(b));
  Node n;
  n.op = Op::Mul;
  n.shape = shape(a);
  n.args = {a.id, b.id};
  n.value.resize(n.shape.size());
  elementwise(data(a.id), data(b.id), n.value.data(), n.value.size(), [](double x, double y) { return x * y; });
  return push(std::move(n));
}

Expr Graph::scale(Expr a, double s) {
  Node n;
  n.op = Op::Scale;
  n.shape = shape(a);
  n.args = {a.id};
  n.scalar = s;
  const double* ad = data(a.id);
  n.value.resize(n.shape.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = s * ad[i];
  return push(std::move(n));
}

Expr Graph::tanh(Expr a) {
  Node n;
  n.op = Op::Tanh;
  n.shape = shape(a);
  n.args = {a.id};
  const double* ad = data(a.id);
  n.value.resize(n.shape.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = std::tanh(ad[i]);
  return push(std::move(n));
}

Expr Graph::sigmoid(Expr a) {
  Node n;
  n.op = Op::Sigmoid;
  n.shape = shape(a);
  n.args = {a.id};
  const double* ad = data(a.id);
  n.value.resize(n.shape.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = 1.0 / (1.0 + std::exp(-ad[i]));
  return push(std::move(n));
}

Expr Graph::concat(std::span<const Expr> parts) {
  if (parts.empty()) fail(ErrorKind::ShapeError, "concat of nothing");
  Node n;
  n.op = Op::Concat;
  int total = 0;
  for (Expr p : parts) {
    if (!is_vector(shape(p))) shape_error("concat", shape(p), shape(parts[0]));
    total += shape(p).rows;
    n.args.push_back(p.id);
  }
  n.shape = vec_shape(total);
  n.value.reserve(static_cast<std::size_t>(total));
  for (Expr p : parts) {
    auto v = value(p);
    n.value.insert(n.value.end(), v.begin(), v.end());
  }
  return push(std::move(n));
}

Expr Graph::sum(std::span<const Expr> parts) {
  if (parts.empty()) fail(ErrorKind::ShapeError, "sum of nothing");
  Node n;
  n.op = Op::Sum;
  n.shape = shape(parts[0]);
  n.value.assign(n.shape.size(), 0.0);
  for (Expr p : parts) {
    if (shape(p) != n.shape) shape_error("sum", shape(p), n.shape);
    n.args.push_back(p.id);
    const double* pd = data(p.id);
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] += pd[i];
  }
  return push(std::move(n));
}

Expr Graph::slice(Expr a, int offset, int length) {
  Shape s = shape(a);
  if (!is_vector(s) || offset < 0 || length <= 0 || offset + length > s.rows)
    fail(ErrorKind::ShapeError, "slice [" + std::to_string(offset) + ", +" + std::to_string(length) + ") of " +
                                    shape_str(s));
  Node n;
  n.op = Op::Slice;
  n.shape = vec_shape(length);
  n.args = {a.id};
  n.aux = offset;
  const double* ad = data(a.id) + offset;
  n.value.assign(ad, ad + length);
  return push(std::move(n));
}

Expr Graph::stack_rows(std::span<const Expr> rows) {
  if (rows.empty()) fail(ErrorKind::ShapeError, "stack of nothing");
  const Shape s0 = shape(rows[0]);
  Node n;
  n.op = Op::StackRows;
  n.shape = Shape{static_cast<int>(rows.size()), s0.rows};
  for (Expr r : rows) {
    if (shape(r) != s0 || !is_vector(s0)) shape_error("stack_rows", shape(r), s0);
    n.args.push_back(r.id);
    auto v = value(r);
    n.value.insert(n.value.end(), v.begin(), v.end());
  }
  return push(std::move(n));
}

Expr Graph::dot(Expr a, Expr b) {
  if (shape(a) != shape(b)) shape_error("dot", shape(a), shape(b));
  Node n;
  n.op = Op::Dot;
  n.shape = vec_shape(1);
  n.args = {a.id, b.id};
  n.value = {kernels::dot(data(a.id), data(b.id), shape(a).size())};
  return push(std::move(n));
}

Expr Graph::sum_elements(Expr a) {
  Node n;
  n.op = Op::SumElements;
  n.shape = vec_shape(1);
  n.args = {a.id};
  double s = 0.0;
  for (double v : value(a)) s += v;
  n.value = {s};
  return push(std::move(n));
}

Expr Graph::softmax(Expr a) {
  Shape s = shape(a);
  if (!is_vector(s)) fail(ErrorKind::ShapeError, "softmax over a matrix");
  auto z = value(a);
  const double m = *std::max_element(z.begin(), z.end());
  Node n;
  n.op = Op::Softmax;
  n.shape = s;
  n.args = {a.id};
  n.value.resize(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) total += n.value[i] = std::exp(z[i] - m);
  for (auto& v : n.value) v /= total;
  return push(std::move(n));
}

Expr Graph::gather(Expr a, std::span<const int> indices) {
  Shape s = shape(a);
  if (!is_vector(s) || indices.empty()) fail(ErrorKind::ShapeError, "gather needs a vector and at least one index");
  auto v = value(a);
  Node n;
  n.op = Op::Gather;
  n.shape = vec_shape(static_cast<int>(indices.size()));
  n.args = {a.id};
  for (int i : indices) {
    if (i < 0 || i >= s.rows) fail(ErrorKind::ShapeError, "gather index " + std::to_string(i) + " outside " + shape_str(s));
    n.targets.push_back(i);
    n.value.push_back(v[static_cast<std::size_t>(i)]);
  }
  return push(std::move(n));
}

Expr Graph::softmax_cross_entropy(Expr logits, int target) {
  const int t[1] = {target};
  return softmax_nll(logits, t);
}

Expr Graph::softmax_nll(Expr logits, std::span<const int> targets) {
  Shape s = shape(logits);
  if (!is_vector(s)) fail(ErrorKind::ShapeError, "softmax over a matrix");
  if (targets.empty()) fail(ErrorKind::ShapeError, "softmax_nll without targets");
  auto z = value(logits);
  for (int t : targets)
    if (t < 0 || t >= s.rows) fail(ErrorKind::ShapeError, "target " + std::to_string(t) + " outside " + shape_str(s));
  const double m = *std::max_element(z.begin(), z.end());
  Node n;
  n.op = Op::SoftmaxNll;
  n.shape = vec_shape(1);
  n.args = {logits.id};
  n.cache.resize(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) total += n.cache[i] = std::exp(z[i] - m);
  for (auto& p : n.cache) p /= total;
  n.targets.assign(targets.begin(), targets.end());
  std::sort(n.targets.begin(), n.targets.end());
  n.targets.erase(std::unique(n.targets.begin(), n.targets.end()), n.targets.end());
  // log-sum-exp over the target subset, computed from logits for accuracy
  double tm = -std::numeric_limits<double>::infinity();
  for (int t : n.targets) tm = std::max(tm, z[static_cast<std::size_t>(t)]);
  double tsum = 0.0;
  for (int t : n.targets) tsum += std::exp(z[static_cast<std::size_t>(t)] - tm);
  n.value = {(m + std::log(total)) - (tm + std::log(tsum))};
  return push(std::move(n));
}

// ---------------------------------------------------------------------------

void Graph::backward(Expr loss) {
  Node& l = node(loss);
  if (l.shape.size() != 1) fail(ErrorKind::ShapeError, "backward needs a scalar loss, got " + shape_str(l.shape));
  visits_ = 0;
  if (!l.needs_grad) return;
  for (int i = 0; i <= loss.id; ++i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.op != Op::Param) std::fill(n.grad.begin(), n.grad.end(), 0.0);
  }
  l.grad[0] = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    if (!nodes_[static_cast<std::size_t>(i)].needs_grad) continue;
    ++visits_;
    backward_node(i);
  }
}

void Graph::backward_node(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.op == Op::Param || n.op == Op::Constant) return;
  const double* g = n.grad.data();
  const std::size_t size = n.shape.size();
  auto wants = [&](int arg) { return nodes_[static_cast<std::size_t>(arg)].needs_grad; };

  switch (n.op) {
    case Op::Lookup: {
      const int cols = n.param->shape().cols;
      kernels::axpy(1.0, g, n.param->grad.data() + static_cast<std::size_t>(n.aux) * cols, cols);
      break;
    }
    case Op::MatVec:
    case Op::Affine: {
      const int W = n.args[0], x = n.args[1];
      const Shape ws = nodes_[static_cast<std::size_t>(W)].shape;
      if (wants(W)) kernels::ger(g, data(x), grad_data(W), ws.rows, ws.cols);
      if (wants(x)) kernels::gemv_t(data(W), g, grad_data(x), ws.rows, ws.cols);
      if (n.op == Op::Affine && wants(n.args[2])) kernels::axpy(1.0, g, grad_data(n.args[2]), size);
      break;
    }
    case Op::TMatVec: {
      const int M = n.args[0], p = n.args[1];
      const Shape ms = nodes_[static_cast<std::size_t>(M)].shape;
      if (wants(M)) kernels::ger(data(p), g, grad_data(M), ms.rows, ms.cols);
      if (wants(p)) kernels::gemv(data(M), g, grad_data(p), ms.rows, ms.cols);
      break;
    }
    case Op::Add:
      if (wants(n.args[0])) kernels::axpy(1.0, g, grad_data(n.args[0]), size);
      if (wants(n.args[1])) kernels::axpy(1.0, g, grad_data(n.args[1]), size);
      break;
    case Op::Sub:
      if (wants(n.args[0])) kernels::axpy(1.0, g, grad_data(n.args[0]), size);
      if (wants(n.args[1])) kernels::axpy(-1.0, g, grad_data(n.args[1]), size);
      break;
    case Op::Mul: {
      const int a = n.args[0], b = n.args[1];
      if (wants(a)) {
        double* ga = grad_data(a);
        const double* bd = data(b);
        for (std::size_t i = 0; i < size; ++i) ga[i] += g[i] * bd[i];
      }
      if (wants(b)) {
        double* gb = grad_data(b);
        const double* ad = data(a);
        for (std::size_t i = 0; i < size; ++i) gb[i] += g[i] * ad[i];
      }
      break;
    }
    case Op::Scale:
      if (wants(n.args[0])) kernels::axpy(n.scalar, g, grad_data(n.args[0]), size);
      break;
    case Op::Tanh:
      if (wants(n.args[0])) {
        double* ga = grad_data(n.args[0]);
        for (std::size_t i = 0; i < size; ++i) ga[i] += g[i] * (1.0 - n.value[i] * n.value[i]);
      }
      break;
    case Op::Sigmoid:
      if (wants(n.args[0])) {
        double* ga = grad_data(n.args[0]);
        for (std::size_t i = 0; i < size; ++i) ga[i] += g[i] * n.value[i] * (1.0 - n.value[i]);
      }
      break;
    case Op::Concat: {
      std::size_t off = 0;
      for (int a : n.args) {
        const std::size_t len = nodes_[static_cast<std::size_t>(a)].shape.size();
        if (wants(a)) kernels::axpy(1.0, g + off, grad_data(a), len);
        off += len;
      }
      break;
    }
    case Op::Sum:
      for (int a : n.args)
        if (wants(a)) kernels::axpy(1.0, g, grad_data(a), size);
      break;
    case Op::Slice:
      if (wants(n.args[0])) kernels::axpy(1.0, g, grad_data(n.args[0]) + n.aux, size);
      break;
    case Op::StackRows: {
      const std::size_t d = static_cast<std::size_t>(n.shape.cols);
      for (std::size_t r = 0; r < n.args.size(); ++r)
        if (wants(n.args[r])) kernels::axpy(1.0, g + r * d, grad_data(n.args[r]), d);
      break;
    }
    case Op::Dot: {
      const int a = n.args[0], b = n.args[1];
      const std::size_t len = nodes_[static_cast<std::size_t>(a)].shape.size();
      if (wants(a)) kernels::axpy(g[0], data(b), grad_data(a), len);
      if (wants(b)) kernels::axpy(g[0], data(a), grad_data(b), len);
      break;
    }
    case Op::SumElements: {
      const int a = n.args[0];
      if (wants(a)) {
        double* ga = grad_data(a);
        const std::size_t len = nodes_[static_cast<std::size_t>(a)].shape.size();
        for (std::size_t i = 0; i < len; ++i) ga[i] += g[0];
      }
      break;
    }
    case Op::Softmax: {
      const int a = n.args[0];
      if (!wants(a)) break;
      double* ga = grad_data(a);
      const double gy = kernels::dot(g, n.value.data(), size);
      for (std::size_t i = 0; i < size; ++i) ga[i] += n.value[i] * (g[i] - gy);
      break;
    }
    case Op::Gather: {
      const int a = n.args[0];
      if (!wants(a)) break;
      double* ga = grad_data(a);
      for (std::size_t k = 0; k < size; ++k) ga[n.targets[k]] += g[k];
      break;
    }
    case Op::SoftmaxNll: {
      const int a = n.args[0];
      if (!wants(a)) break;
      double* ga = grad_data(a);
      double mass = 0.0;
      for (int t : n.targets) mass += n.cache[static_cast<std::size_t>(t)];
      for (std::size_t i = 0; i < n.cache.size(); ++i) ga[i] += g[0] * n.cache[i];
      for (int t : n.targets) ga[t] -= g[0] * n.cache[static_cast<std::size_t>(t)] / mass;
      break;
    }
    case Op::Param:
    case Op::Constant:
      break;
  }
}

}  // namespace xdrs
