#pragma once

// Three-stage decoder: skeleton (boxes, operators, relations, REF markers,
// predicate placeholders), then one predicate per placeholder with a joint
// generate/copy softmax, then one referent per REF marker and argument.
// Every stage is an attentional LSTM whose inputs carry the final state of
// the previous stage and the previous stage's state at the same position.

#include <string>
#include <vector>

#include "xdrs/autodiff.hpp"
#include "xdrs/drs_tree.hpp"
#include "xdrs/encoders.hpp"
#include "xdrs/nn.hpp"
#include "xdrs/stages.hpp"
#include "xdrs/vocab.hpp"

namespace xdrs {

struct DecoderConfig {
  int embed_dim = 64;
  int hidden = 300;
  int max_skeleton = 64;
  int max_predicates = 64;
  int max_referents = 96;
};

struct StageLosses {
  Expr skeleton;
  Expr predicates;
  Expr referents;
  Expr total;
};

struct DecodeResult {
  StageTargets stages;
  std::vector<int> copies;  // per placeholder: copied input position, or -1
  bool truncated = false;
  DrsTree tree;
  LinearSeq seq;
  Drs drs;
};

class Decoder {
 public:
  Decoder(ParameterStore& store, const DecoderConfig& config, const VocabularySet& vocab, int memory_dim,
          int summary_dim, Rng& rng);

  // Teacher-forced negative log-likelihood of the gold stage streams.
  StageLosses loss(Graph& g, const EncoderOutput& enc, const StageTargets& gold,
                   const std::vector<std::string>& lemmas) const;

  // Greedy decoding under the legality masks.
  DecodeResult decode(Graph& g, const EncoderOutput& enc, const std::vector<std::string>& lemmas) const;

  const DecoderConfig& config() const { return config_; }

 private:
  struct Run;
  void run(Run& r) const;
  void skeleton_stage(Run& r) const;
  void predicate_stage(Run& r) const;
  void referent_stage(Run& r) const;

  DecoderConfig config_;
  Vocabulary skeleton_vocab_, predicate_vocab_, referent_vocab_;
  std::vector<PredicateClass> predicate_class_;
  std::vector<int> unary_ids_, role_ids_, constant_ids_;
  int new_ids_[4] = {};  // NEW:x NEW:e NEW:t NEW:s
  int memory_dim_;

  Parameter* skel_emb_ = nullptr;
  Linear skel_init_;
  LstmCell skel_lstm_;
  Attention skel_att_;
  Linear skel_out_, skel_logits_;

  Parameter* pred_emb_ = nullptr;
  LstmCell pred_lstm_;
  Attention pred_att_;
  Linear pred_out_, pred_logits_;
  CopyScorer pred_copy_;

  Parameter* ref_emb_ = nullptr;
  Parameter* ref_kind_ = nullptr;
  LstmCell ref_lstm_;
  Attention ref_att_;
  Linear ref_out_, ref_logits_;
};

}  // namespace xdrs
