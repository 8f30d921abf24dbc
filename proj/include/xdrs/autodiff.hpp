#pragma once

// Tape-based reverse-mode differentiation over dense double vectors and
// row-major matrices. A Graph records one forward computation (one
// sentence); parameters live outside the graph and receive gradients
// directly during backward().

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace xdrs {

struct Shape {
  int rows = 1;
  int cols = 1;
  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
  friend bool operator==(const Shape&, const Shape&) = default;
};

inline Shape vec_shape(int n) { return Shape{n, 1}; }

class Parameter {
 public:
  Parameter(std::string name, Shape shape, bool trainable);

  const std::string& name() const { return name_; }
  Shape shape() const { return shape_; }
  bool trainable() const { return trainable_; }

  std::vector<double> value;
  std::vector<double> grad;  // empty when not trainable

  void zero_grad();

 private:
  std::string name_;
  Shape shape_;
  bool trainable_;
};

using Rng = std::mt19937_64;

void init_uniform(Parameter& p, Rng& rng, double scale);
void init_constant(Parameter& p, double v);

// Owns parameters in creation order; names are unique.
class ParameterStore {
 public:
  Parameter& add(const std::string& name, Shape shape, bool trainable = true);
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;
  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  std::vector<Parameter*> trainable();
  void zero_grad();
  std::size_t size() const { return params_.size(); }

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

struct Expr {
  int id = -1;
  bool valid() const { return id >= 0; }
};

class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Expr constant(std::vector<double> values, Shape shape);
  Expr constant(std::span<const double> values) {
    return constant(std::vector<double>(values.begin(), values.end()), vec_shape(static_cast<int>(values.size())));
  }
  Expr zeros(int n) { return constant(std::vector<double>(static_cast<std::size_t>(n), 0.0), vec_shape(n)); }
  Expr param(Parameter& p);
  // Row `row` of a [vocab x dim] table as a dim-vector.
  Expr lookup(Parameter& table, int row);

  Expr matvec(Expr W, Expr x);             // [m x n] * [n] -> [m]
  Expr affine(Expr W, Expr x, Expr b);     // W x + b
  Expr tmatvec(Expr M, Expr p);            // [k x d]^T * [k] -> [d]
  Expr add(Expr a, Expr b);
  Expr sub(Expr a, Expr b);
  Expr mul(Expr a, Expr b);                // elementwise
  Expr scale(Expr a, double s);
  Expr tanh(Expr a);
  Expr sigmoid(Expr a);
  Expr concat(std::span<const Expr> parts);
  Expr sum(std::span<const Expr> parts);   // elementwise sum of equal shapes
  Expr slice(Expr a, int offset, int length);
  Expr stack_rows(std::span<const Expr> rows);  // k vectors of dim d -> [k x d]
  Expr dot(Expr a, Expr b);                // -> scalar
  Expr sum_elements(Expr a);               // -> scalar
  Expr softmax(Expr a);
  Expr gather(Expr a, std::span<const int> indices);  // picks a[indices[k]]

  // -log softmax(logits)[target]
  Expr softmax_cross_entropy(Expr logits, int target);
  // -log sum_{t in targets} softmax(logits)[t]
  Expr softmax_nll(Expr logits, std::span<const int> targets);

  std::span<const double> value(Expr e) const;
  std::span<const double> grad(Expr e) const;
  Shape shape(Expr e) const;
  double scalar(Expr e) const { return value(e)[0]; }

  // Populates gradients of every trainable parameter reachable from `loss`;
  // gradients accumulate into Parameter::grad.
  void backward(Expr loss);

  std::size_t size() const { return nodes_.size(); }
  std::size_t last_backward_visits() const { return visits_; }

 private:
  enum class Op : std::uint8_t {
    Constant, Param, Lookup, MatVec, Affine, TMatVec, Add, Sub, Mul, Scale, Tanh, Sigmoid,
    Concat, Sum, Slice, StackRows, Dot, SumElements, Softmax, Gather, SoftmaxNll,
  };
  struct Node {
    Op op = Op::Constant;
    Shape shape;
    std::vector<int> args;
    std::vector<double> value;  // unused for Param nodes
    std::vector<double> grad;
    std::vector<double> cache;  // softmax probabilities
    std::vector<int> targets;
    Parameter* param = nullptr;
    int aux = 0;
    double scalar = 0.0;
    bool needs_grad = false;
  };

  Expr push(Node node);
  Node& node(Expr e);
  const Node& node(Expr e) const;
  const double* data(int id) const;
  double* grad_data(int id);
  void backward_node(int id);

  std::vector<Node> nodes_;
  std::size_t visits_ = 0;
};

}  // namespace xdrs
