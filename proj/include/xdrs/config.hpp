#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "xdrs/decoder.hpp"
#include "xdrs/encoders.hpp"

namespace xdrs {

// Everything a training run depends on. Plain key = value text; see
// to_kv() for the key names.
struct TrainConfig {
  EncoderKind encoder = EncoderKind::Bi;
  FeatureSet features;
  int word_dim = 300;
  int upos_dim = 64;
  int deprel_dim = 64;
  int hidden = 300;
  int tree_hidden = 0;  // 0 means 2 * hidden
  double positional_base = 1000.0;
  int embed_dim = 64;        // decoder symbol embeddings
  int decoder_hidden = 300;
  int max_skeleton = 64;
  int max_predicates = 64;
  int max_referents = 96;
  double lr = 1e-3;
  double clip = 5.0;
  int epochs = 30;
  int patience = 5;
  int batch_size = 16;
  std::uint64_t seed = 1;
  std::string select = "f1";  // f1 | loss
  double target_f1 = 0.0;     // stop as soon as dev F1 reaches it; 0 disables
  bool train_word_embeddings = false;
  int eval_restarts = 20;
  int workers = 1;

  // ConfigError on any violated invariant, including bi_tree over {de}.
  void validate() const;
  EncoderConfig encoder_config(int word_vocab, int upos_vocab, int deprel_vocab) const;
  DecoderConfig decoder_config() const;

  std::map<std::string, std::string> to_kv() const;
  // Unknown keys and unparsable values raise ConfigError.
  void apply(const std::map<std::string, std::string>& kv);
  std::string hash() const;
  std::string name() const;  // e.g. "bi_tree[we,pe,de]"
};

TrainConfig load_train_config(const std::string& path);

}  // namespace xdrs
