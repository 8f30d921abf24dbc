#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "xdrs/autodiff.hpp"
#include "xdrs/nn.hpp"

namespace xdrs {

enum class EncoderKind { Bi, Tree, PoTree, BiTree };

std::string_view to_string(EncoderKind kind);
EncoderKind parse_encoder_kind(std::string_view s);  // bi | tree | po_tree | bi_tree

// Input feature families: word (WE), part of speech (PE), dependency
// relation (DE) embeddings.
struct FeatureSet {
  bool we = true;
  bool pe = true;
  bool de = true;

  bool empty() const { return !we && !pe && !de; }
  bool only_de() const { return de && !we && !pe; }
  std::string str() const;  // "we,pe,de"
  static FeatureSet parse(std::string_view s);
  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

struct EncoderConfig {
  EncoderKind kind = EncoderKind::Bi;
  FeatureSet features;
  int word_vocab = 0;
  int upos_vocab = 0;
  int deprel_vocab = 0;
  int word_dim = 300;
  int upos_dim = 64;
  int deprel_dim = 64;
  int hidden = 300;       // per direction in BiLSTM stages
  int tree_hidden = 0;    // 0 means 2 * hidden
  int positional_dim = 0; // po_tree only; 0 means word_dim
  double positional_base = 1000.0;
  double positional_scale = 1.0;
  bool train_word_embeddings = false;

  int effective_tree_hidden() const { return tree_hidden > 0 ? tree_hidden : 2 * hidden; }
  int effective_positional_dim() const { return positional_dim > 0 ? positional_dim : word_dim; }
};

struct EncoderInput {
  std::vector<int> word_ids;
  std::vector<int> upos_ids;
  std::vector<int> deprel_ids;
  std::vector<int> heads;  // CoNLL numbering, 0 = root

  std::size_t size() const { return word_ids.size(); }
};

struct EncoderOutput {
  std::vector<Expr> states;
  Expr memory;  // states stacked as rows, [n x state_dim]
  Expr summary;
  int state_dim = 0;
  int summary_dim = 0;
};

// P(i, 2j) = sin(i / base^(2j/d)), P(i, 2j+1) = cos(i / base^(2j/d)).
std::vector<double> positional_encoding(int i, int d, double base = 1000.0);

// The four encoder variants:
//   bi      BiLSTM over raw concatenated embeddings
//   tree    child-sum tree-LSTM over tanh(W1 [e_w; e_p; e_d] + b1)
//   po_tree as tree, with P_i added to every embedding before projection
//   bi_tree BiLSTM over tanh(W1 [e_w; e_p] + b1), then a child-sum
//           tree-LSTM over [h_i ; e_d]
// Only the families in `features` are looked up and concatenated.
class Encoder {
 public:
  Encoder(ParameterStore& store, const EncoderConfig& config, Rng& rng);

  EncoderOutput encode(Graph& g, const EncoderInput& input) const;

  const EncoderConfig& config() const { return config_; }
  int state_dim() const;
  int summary_dim() const;
  Parameter* word_table() const { return word_; }
  Parameter* upos_table() const { return upos_; }
  Parameter* deprel_table() const { return deprel_; }

 private:
  std::vector<Expr> embed(Graph& g, const EncoderInput& in, bool with_we, bool with_pe, bool with_de,
                          bool positional) const;

  EncoderConfig config_;
  Parameter* word_ = nullptr;
  Parameter* upos_ = nullptr;
  Parameter* deprel_ = nullptr;
  Linear proj_;
  BiLstm bilstm_;
  ChildSumCell tree_;
};

}  // namespace xdrs
