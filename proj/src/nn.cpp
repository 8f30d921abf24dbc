#include "xdrs/nn.hpp"

#include <algorithm>

#include "xdrs/error.hpp"

namespace xdrs {

namespace {

Parameter& weight(ParameterStore& store, const std::string& name, int rows, int cols, Rng& rng) {
  Parameter& p = store.add(name, Shape{rows, cols});
  init_uniform(p, rng, kInitScale);
  return p;
}

Parameter& bias(ParameterStore& store, const std::string& name, int rows) {
  return store.add(name, vec_shape(rows));
}

}  // namespace

Linear::Linear(ParameterStore& store, const std::string& name, int in, int out, Rng& rng)
    : W_(&weight(store, name + ".W", out, in, rng)), b_(&bias(store, name + ".b", out)), in_(in), out_(out) {}

Expr Linear::operator()(Graph& g, Expr x) const { return g.affine(g.param(*W_), x, g.param(*b_)); }

LstmCell::LstmCell(ParameterStore& store, const std::string& name, int input, int hidden, Rng& rng)
    : W_(&weight(store, name + ".W", 4 * hidden, input + hidden, rng)),
      b_(&bias(store, name + ".b", 4 * hidden)),
      input_(input),
      hidden_(hidden) {
  std::fill(b_->value.begin() + hidden, b_->value.begin() + 2 * hidden, 1.0);
}

LstmState LstmCell::zero_state(Graph& g) const { return {g.zeros(hidden_), g.zeros(hidden_)}; }

LstmState LstmCell::step(Graph& g, Expr x, const LstmState& prev) const {
  const Expr xh[] = {x, prev.h};
  Expr z = g.affine(g.param(*W_), g.concat(xh), g.param(*b_));
  const int H = hidden_;
  Expr i = g.sigmoid(g.slice(z, 0, H));
  Expr f = g.sigmoid(g.slice(z, H, H));
  Expr u = g.tanh(g.slice(z, 2 * H, H));
  Expr o = g.sigmoid(g.slice(z, 3 * H, H));
  Expr c = g.add(g.mul(f, prev.c), g.mul(i, u));
  return {g.mul(o, g.tanh(c)), c};
}

BiLstm::BiLstm(ParameterStore& store, const std::string& name, int input, int hidden, Rng& rng)
    : fwd_(store, name + ".fwd", input, hidden, rng), bwd_(store, name + ".bwd", input, hidden, rng) {}

BiLstmOutput BiLstm::run(Graph& g, const std::vector<Expr>& xs) const {
  if (xs.empty()) fail(ErrorKind::EmptyInput, "BiLSTM over an empty sequence");
  const std::size_t n = xs.size();
  std::vector<Expr> f(n), b(n);
  LstmState s = fwd_.zero_state(g);
  for (std::size_t i = 0; i < n; ++i) f[i] = (s = fwd_.step(g, xs[i], s)).h;
  s = bwd_.zero_state(g);
  for (std::size_t i = n; i-- > 0;) b[i] = (s = bwd_.step(g, xs[i], s)).h;
  BiLstmOutput out;
  for (std::size_t i = 0; i < n; ++i) {
    const Expr parts[] = {f[i], b[i]};
    out.states.push_back(g.concat(parts));
  }
  const Expr ends[] = {f[n - 1], b[0]};
  out.summary = g.concat(ends);
  return out;
}

ChildSumCell::ChildSumCell(ParameterStore& store, const std::string& name, int input, int hidden, Rng& rng)
    : Wiou_(&weight(store, name + ".iou.W", 3 * hidden, input + hidden, rng)),
      biou_(&bias(store, name + ".iou.b", 3 * hidden)),
      Wf_(&weight(store, name + ".f.W", hidden, input + hidden, rng)),
      bf_(&bias(store, name + ".f.b", hidden)),
      input_(input),
      hidden_(hidden) {
  init_constant(*bf_, 1.0);
}

LstmState ChildSumCell::step(Graph& g, Expr x, std::vector<LstmState> children) const {
  const int H = hidden_;
  std::sort(children.begin(), children.end(), [&](const LstmState& a, const LstmState& b) {
    auto ha = g.value(a.h), hb = g.value(b.h);
    if (!std::equal(ha.begin(), ha.end(), hb.begin()))
      return std::lexicographical_compare(ha.begin(), ha.end(), hb.begin(), hb.end());
    auto ca = g.value(a.c), cb = g.value(b.c);
    return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
  });

  Expr h_sum;
  if (children.empty()) {
    h_sum = g.zeros(H);
  } else {
    std::vector<Expr> hs;
    for (const auto& c : children) hs.push_back(c.h);
    h_sum = g.sum(hs);
  }
  const Expr xh[] = {x, h_sum};
  Expr z = g.affine(g.param(*Wiou_), g.concat(xh), g.param(*biou_));
  Expr i = g.sigmoid(g.slice(z, 0, H));
  Expr o = g.sigmoid(g.slice(z, H, H));
  Expr u = g.tanh(g.slice(z, 2 * H, H));

  std::vector<Expr> cell_terms{g.mul(i, u)};
  for (const auto& ch : children) {
    const Expr xk[] = {x, ch.h};
    Expr f = g.sigmoid(g.affine(g.param(*Wf_), g.concat(xk), g.param(*bf_)));
    cell_terms.push_back(g.mul(f, ch.c));
  }
  Expr c = cell_terms.size() == 1 ? cell_terms[0] : g.sum(cell_terms);
  return {g.mul(o, g.tanh(c)), c};
}

std::vector<int> postorder(const std::vector<int>& heads) {
  const int n = static_cast<int>(heads.size());
  std::vector<std::vector<int>> kids(static_cast<std::size_t>(n));
  int root = -1;
  for (int i = 0; i < n; ++i) {
    const int h = heads[static_cast<std::size_t>(i)];
    if (h < 0 || h > n || h == i + 1) fail(ErrorKind::MalformedTree, "bad head " + std::to_string(h) + " for token " + std::to_string(i + 1));
    if (h == 0) {
      if (root >= 0) fail(ErrorKind::MalformedTree, "several root tokens");
      root = i;
    } else {
      kids[static_cast<std::size_t>(h - 1)].push_back(i);
    }
  }
  if (root < 0) fail(ErrorKind::MalformedTree, "no root token (cyclic heads)");
  std::vector<int> order;
  std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    const auto& ks = kids[static_cast<std::size_t>(node)];
    if (next < ks.size()) {
      stack.emplace_back(ks[next++], 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  if (static_cast<int>(order.size()) != n) fail(ErrorKind::MalformedTree, "heads contain a cycle");
  return order;
}

std::vector<LstmState> run_child_sum(Graph& g, const ChildSumCell& cell, const std::vector<Expr>& xs,
                                     const std::vector<int>& heads) {
  if (xs.size() != heads.size()) fail(ErrorKind::ShapeError, "tree inputs and heads differ in length");
  if (xs.empty()) fail(ErrorKind::EmptyInput, "tree-LSTM over an empty sentence");
  std::vector<LstmState> states(xs.size());
  std::vector<std::vector<int>> kids(xs.size());
  for (std::size_t i = 0; i < heads.size(); ++i)
    if (heads[i] > 0) kids[static_cast<std::size_t>(heads[i] - 1)].push_back(static_cast<int>(i));
  for (int node : postorder(heads)) {
    std::vector<LstmState> ch;
    for (int k : kids[static_cast<std::size_t>(node)]) ch.push_back(states[static_cast<std::size_t>(k)]);
    states[static_cast<std::size_t>(node)] = cell.step(g, xs[static_cast<std::size_t>(node)], std::move(ch));
  }
  return states;
}

Attention::Attention(ParameterStore& store, const std::string& name, int memory_dim, int query_dim, Rng& rng)
    : W_(&weight(store, name + ".W", memory_dim, query_dim, rng)) {}

Attention::Result Attention::attend(Graph& g, Expr memory, Expr query) const {
  Expr q = g.matvec(g.param(*W_), query);
  Expr a = g.softmax(g.matvec(memory, q));
  return {g.tmatvec(memory, a), a};
}

CopyScorer::CopyScorer(ParameterStore& store, const std::string& name, int memory_dim, int query_dim, Rng& rng)
    : W_(&weight(store, name + ".W", memory_dim, query_dim, rng)) {}

Expr CopyScorer::scores(Graph& g, Expr memory, Expr query) const {
  return g.matvec(memory, g.matvec(g.param(*W_), query));
}

}  // namespace xdrs
