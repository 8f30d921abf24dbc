#pragma once

#include <string>
#include <vector>

#include "xdrs/autodiff.hpp"

namespace xdrs {

inline constexpr double kInitScale = 0.08;

// y = W x + b
class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, int in, int out, Rng& rng);
  Expr operator()(Graph& g, Expr x) const;
  int in() const { return in_; }
  int out() const { return out_; }

 private:
  Parameter* W_ = nullptr;
  Parameter* b_ = nullptr;
  int in_ = 0, out_ = 0;
};

struct LstmState {
  Expr h;
  Expr c;
};

// Standard LSTM cell; gates are computed from [x ; h] in one affine map,
// ordered input, forget, candidate, output. Forget bias starts at 1.
class LstmCell {
 public:
  LstmCell() = default;
  LstmCell(ParameterStore& store, const std::string& name, int input, int hidden, Rng& rng);
  LstmState zero_state(Graph& g) const;
  LstmState step(Graph& g, Expr x, const LstmState& prev) const;
  int input_dim() const { return input_; }
  int hidden_dim() const { return hidden_; }

 private:
  Parameter* W_ = nullptr;
  Parameter* b_ = nullptr;
  int input_ = 0, hidden_ = 0;
};

struct BiLstmOutput {
  std::vector<Expr> states;  // [fwd_i ; bwd_i]
  Expr summary;              // [fwd_n ; bwd_1]
};

class BiLstm {
 public:
  BiLstm() = default;
  BiLstm(ParameterStore& store, const std::string& name, int input, int hidden, Rng& rng);
  BiLstmOutput run(Graph& g, const std::vector<Expr>& xs) const;
  int output_dim() const { return 2 * fwd_.hidden_dim(); }

 private:
  LstmCell fwd_, bwd_;
};

// Child-sum tree-LSTM cell:
//   h~ = sum_k h_k
//   i, o, u from [x ; h~];  f_k from [x ; h_k] for every child
//   c = i*u + sum_k f_k*c_k;  h = o*tanh(c)
// Children are summed in a canonical order (sorted by their state values),
// which makes the result bit-identical under any permutation of children.
class ChildSumCell {
 public:
  ChildSumCell() = default;
  ChildSumCell(ParameterStore& store, const std::string& name, int input, int hidden, Rng& rng);
  LstmState step(Graph& g, Expr x, std::vector<LstmState> children) const;
  int input_dim() const { return input_; }
  int hidden_dim() const { return hidden_; }

 private:
  Parameter* Wiou_ = nullptr;
  Parameter* biou_ = nullptr;
  Parameter* Wf_ = nullptr;
  Parameter* bf_ = nullptr;
  int input_ = 0, hidden_ = 0;
};

// Runs `cell` bottom-up over a dependency tree given by CoNLL heads
// (0 = root, k = token k-1). Returns one state per token.
std::vector<LstmState> run_child_sum(Graph& g, const ChildSumCell& cell, const std::vector<Expr>& xs,
                                     const std::vector<int>& heads);
// Bottom-up visiting order; MalformedTree on cycles, bad heads or several roots.
std::vector<int> postorder(const std::vector<int>& heads);

// Dot-product attention with a learned query projection:
//   a = softmax(M (W q)),  context = M^T a
class Attention {
 public:
  struct Result {
    Expr context;
    Expr weights;
  };
  Attention() = default;
  Attention(ParameterStore& store, const std::string& name, int memory_dim, int query_dim, Rng& rng);
  Result attend(Graph& g, Expr memory, Expr query) const;

 private:
  Parameter* W_ = nullptr;
};

// Copy scores, one per memory row: M (W o). Concatenated with generation
// logits they form a single softmax over [vocabulary ; input positions].
class CopyScorer {
 public:
  CopyScorer() = default;
  CopyScorer(ParameterStore& store, const std::string& name, int memory_dim, int query_dim, Rng& rng);
  Expr scores(Graph& g, Expr memory, Expr query) const;

 private:
  Parameter* W_ = nullptr;
};

}  // namespace xdrs
