#include "xdrs/config.hpp"

#include <charconv>
#include <cstdio>

#include "xdrs/checkpoint.hpp"
#include "xdrs/error.hpp"
#include "xdrs/text_util.hpp"

namespace xdrs {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) fail(ErrorKind::ConfigError, key + ": cannot parse '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorKind::ConfigError, key + ": expected true or false, got '" + v + "'");
}

}  // namespace

void TrainConfig::validate() const {
  if (features.empty()) fail(ErrorKind::ConfigError, "feature set is empty");
  if (encoder == EncoderKind::BiTree && features.only_de())
    fail(ErrorKind::ConfigError,
         "unsupported feature combination: encoder bi_tree cannot be trained with dependency features only (de)");
  for (auto [key, v] : {std::pair{"word_dim", word_dim}, {"upos_dim", upos_dim}, {"deprel_dim", deprel_dim},
                        {"hidden", hidden}, {"embed_dim", embed_dim}, {"decoder_hidden", decoder_hidden},
                        {"max_skeleton", max_skeleton}, {"max_predicates", max_predicates},
                        {"max_referents", max_referents}, {"epochs", epochs}, {"batch_size", batch_size},
                        {"workers", workers}, {"eval_restarts", eval_restarts}})
    if (v <= 0) fail(ErrorKind::ConfigError, std::string(key) + " must be positive");
  if (tree_hidden < 0) fail(ErrorKind::ConfigError, "tree_hidden must be non-negative");
  if (patience < 1) fail(ErrorKind::ConfigError, "patience must be at least 1");
  if (!(lr > 0)) fail(ErrorKind::ConfigError, "lr must be positive");
  if (!(clip > 0)) fail(ErrorKind::ConfigError, "clip must be positive");
  if (!(positional_base > 1)) fail(ErrorKind::ConfigError, "positional_base must exceed 1");
  if (select != "f1" && select != "loss") fail(ErrorKind::ConfigError, "select must be f1 or loss");
  if (encoder == EncoderKind::PoTree && word_dim % 2 != 0)
    fail(ErrorKind::ConfigError, "po_tree needs an even word_dim (it is the positional dimension)");
}

EncoderConfig TrainConfig::encoder_config(int word_vocab, int upos_vocab, int deprel_vocab) const {
  EncoderConfig c;
  c.kind = encoder;
  c.features = features;
  c.word_vocab = word_vocab;
  c.upos_vocab = upos_vocab;
  c.deprel_vocab = deprel_vocab;
  c.word_dim = word_dim;
  c.upos_dim = upos_dim;
  c.deprel_dim = deprel_dim;
  if (encoder == EncoderKind::PoTree) {
    // P_i is added to every family, so all of them take the word dimension.
    c.upos_dim = word_dim;
    c.deprel_dim = word_dim;
    c.positional_dim = word_dim;
  }
  c.hidden = hidden;
  c.tree_hidden = tree_hidden;
  c.positional_base = positional_base;
  c.train_word_embeddings = train_word_embeddings;
  return c;
}

DecoderConfig TrainConfig::decoder_config() const {
  return DecoderConfig{embed_dim, decoder_hidden, max_skeleton, max_predicates, max_referents};
}

std::map<std::string, std::string> TrainConfig::to_kv() const {
  return {
      {"encoder", std::string(to_string(encoder))},
      {"features", features.str()},
      {"word_dim", std::to_string(word_dim)},
      {"upos_dim", std::to_string(upos_dim)},
      {"deprel_dim", std::to_string(deprel_dim)},
      {"hidden", std::to_string(hidden)},
      {"tree_hidden", std::to_string(tree_hidden)},
      {"positional_base", num(positional_base)},
      {"embed_dim", std::to_string(embed_dim)},
      {"decoder_hidden", std::to_string(decoder_hidden)},
      {"max_skeleton", std::to_string(max_skeleton)},
      {"max_predicates", std::to_string(max_predicates)},
      {"max_referents", std::to_string(max_referents)},
      {"lr", num(lr)},
      {"clip", num(clip)},
      {"epochs", std::to_string(epochs)},
      {"patience", std::to_string(patience)},
      {"batch_size", std::to_string(batch_size)},
      {"seed", std::to_string(seed)},
      {"select", select},
      {"target_f1", num(target_f1)},
      {"train_word_embeddings", train_word_embeddings ? "true" : "false"},
      {"eval_restarts", std::to_string(eval_restarts)},
      {"workers", std::to_string(workers)},
  };
}

void TrainConfig::apply(const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) {
    if (k == "encoder") encoder = parse_encoder_kind(v);
    else if (k == "features") features = FeatureSet::parse(v);
    else if (k == "word_dim") word_dim = parse_number<int>(k, v);
    else if (k == "upos_dim") upos_dim = parse_number<int>(k, v);
    else if (k == "deprel_dim") deprel_dim = parse_number<int>(k, v);
    else if (k == "hidden") hidden = parse_number<int>(k, v);
    else if (k == "tree_hidden") tree_hidden = parse_number<int>(k, v);
    else if (k == "positional_base") positional_base = parse_number<double>(k, v);
    else if (k == "embed_dim") embed_dim = parse_number<int>(k, v);
    else if (k == "decoder_hidden") decoder_hidden = parse_number<int>(k, v);
    else if (k == "max_skeleton") max_skeleton = parse_number<int>(k, v);
    else if (k == "max_predicates") max_predicates = parse_number<int>(k, v);
    else if (k == "max_referents") max_referents = parse_number<int>(k, v);
    else if (k == "lr") lr = parse_number<double>(k, v);
    else if (k == "clip") clip = parse_number<double>(k, v);
    else if (k == "epochs") epochs = parse_number<int>(k, v);
    else if (k == "patience") patience = parse_number<int>(k, v);
    else if (k == "batch_size") batch_size = parse_number<int>(k, v);
    else if (k == "seed") seed = parse_number<std::uint64_t>(k, v);
    else if (k == "select") select = v;
    else if (k == "target_f1") target_f1 = parse_number<double>(k, v);
    else if (k == "train_word_embeddings") train_word_embeddings = parse_bool(k, v);
    else if (k == "eval_restarts") eval_restarts = parse_number<int>(k, v);
    else if (k == "workers") workers = parse_number<int>(k, v);
    else fail(ErrorKind::ConfigError, "unknown config key '" + k + "'");
  }
}

std::string TrainConfig::hash() const { return hex64(fnv1a(format_kv(to_kv()))); }

std::string TrainConfig::name() const { return std::string(to_string(encoder)) + "[" + features.str() + "]"; }

TrainConfig load_train_config(const std::string& path) {
  TrainConfig c;
  c.apply(parse_kv(read_file(path)));
  return c;
}

}  // namespace xdrs
