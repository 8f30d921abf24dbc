#include "xdrs/model.hpp"

#include <algorithm>

#include "xdrs/drs_tree.hpp"
#include "xdrs/error.hpp"
#include "xdrs/text_util.hpp"

namespace xdrs {

WordIndex::WordIndex(std::vector<std::string> rows, int unk_row) : rows_(std::move(rows)), unk_(unk_row) {
  for (int i = 0; i < static_cast<int>(rows_.size()); ++i) {
    exact_.emplace(rows_[static_cast<std::size_t>(i)], i);
    folded_.emplace(fold_case(rows_[static_cast<std::size_t>(i)]), i);
  }
}

int WordIndex::row(std::string_view word) const {
  if (auto it = exact_.find(std::string(word)); it != exact_.end()) return it->second;
  if (auto it = folded_.find(fold_case(word)); it != folded_.end()) return it->second;
  return unk_;
}

StageTargets gold_stages(const Drs& drs) { return split_stages(to_tree(canonicalize(drs))); }

ParserModel::ParserModel(const TrainConfig& config, const VocabularySet& vocab, const EmbeddingTable* pretrained)
    : config_(config), vocab_(vocab) {
  config_.validate();
  if (pretrained) {
    if (pretrained->dim() != config_.word_dim)
      fail(ErrorKind::DimensionMismatch, "embeddings have dimension " + std::to_string(pretrained->dim()) +
                                             ", config word_dim is " + std::to_string(config_.word_dim));
    std::vector<std::string> rows{"<unk>"};
    rows.insert(rows.end(), pretrained->words().begin(), pretrained->words().end());
    words_ = WordIndex(std::move(rows), 0);
    build(config_.train_word_embeddings);
    if (Parameter* table = encoder_->word_table()) {
      const int d = config_.word_dim;
      auto unk = pretrained->unk();
      std::copy(unk.begin(), unk.end(), table->value.begin());
      for (int i = 0; i < static_cast<int>(pretrained->size()); ++i) {
        auto r = pretrained->row(i);
        std::copy(r.begin(), r.end(), table->value.begin() + static_cast<std::ptrdiff_t>(i + 1) * d);
      }
    }
  } else {
    words_ = WordIndex(vocab_.words.symbols(), Vocabulary::kUnk);
    build(true);
  }
}

ParserModel::ParserModel(const TrainConfig& config, const VocabularySet& vocab, WordIndex words, bool word_trainable)
    : config_(config), vocab_(vocab), words_(std::move(words)) {
  config_.validate();
  build(word_trainable);
}

void ParserModel::build(bool word_trainable) {
  Rng rng(config_.seed);
  TrainConfig c = config_;
  c.train_word_embeddings = word_trainable;
  EncoderConfig ec = c.encoder_config(static_cast<int>(words_.rows().size()), vocab_.upos.size(), vocab_.deprels.size());
  encoder_ = std::make_unique<Encoder>(store_, ec, rng);
  decoder_ = std::make_unique<Decoder>(store_, config_.decoder_config(), vocab_, encoder_->state_dim(),
                                       encoder_->summary_dim(), rng);
}

EncoderInput ParserModel::make_input(const SentenceAnnotation& s) const {
  EncoderInput in;
  for (std::size_t i = 0; i < s.size(); ++i) {
    in.word_ids.push_back(words_.row(s.tokens[i]));
    in.upos_ids.push_back(vocab_.upos.id(s.upos.at(i)));
    in.deprel_ids.push_back(vocab_.deprels.id(s.deprels.at(i)));
  }
  in.heads = s.heads;
  return in;
}

StageLosses ParserModel::loss(Graph& g, const SentenceAnnotation& s, const StageTargets& gold) const {
  EncoderOutput enc = encoder_->encode(g, make_input(s));
  return decoder_->loss(g, enc, gold, s.lemmas);
}

DecodeResult ParserModel::parse(const SentenceAnnotation& s) const {
  Graph g;
  EncoderOutput enc = encoder_->encode(g, make_input(s));
  return decoder_->decode(g, enc, s.lemmas);
}

namespace {

std::string serialize_classes(const std::vector<PredicateClass>& classes) {
  std::string out;
  for (PredicateClass c : classes) out += std::to_string(static_cast<int>(c)) + "\n";
  return out;
}

std::vector<PredicateClass> deserialize_classes(std::string_view text) {
  std::vector<PredicateClass> out;
  for (auto line : split_lines(text)) {
    if (line.empty()) continue;
    const int v = std::stoi(std::string(line));
    if (v < 0 || v > static_cast<int>(PredicateClass::Lexical)) fail(ErrorKind::ConfigError, "bad predicate class");
    out.push_back(static_cast<PredicateClass>(v));
  }
  return out;
}

std::string join_lines(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += s + "\n";
  return out;
}

}  // namespace

Checkpoint ParserModel::checkpoint(const std::map<std::string, std::string>& extra) const {
  Checkpoint c = Checkpoint::capture(store_);
  for (const auto& [k, v] : config_.to_kv()) c.manifest["config." + k] = v;
  c.manifest["config.hash"] = config_.hash();
  c.manifest["vocab.hashes"] = vocab_.hash_summary();
  c.manifest["word_rows"] = std::to_string(words_.rows().size());
  c.manifest["word_unk_row"] = std::to_string(words_.unk_row());
  const Parameter* table = encoder_->word_table();
  c.manifest["word_trainable"] = table && table->trainable() ? "true" : "false";
  for (const auto& [k, v] : extra) c.manifest[k] = v;
  c.blobs["vocab.words"] = vocab_.words.serialize();
  c.blobs["vocab.lemmas"] = vocab_.lemmas.serialize();
  c.blobs["vocab.upos"] = vocab_.upos.serialize();
  c.blobs["vocab.deprels"] = vocab_.deprels.serialize();
  c.blobs["vocab.skeleton"] = vocab_.skeleton.serialize();
  c.blobs["vocab.predicates"] = vocab_.predicates.serialize();
  c.blobs["vocab.referents"] = vocab_.referents.serialize();
  c.blobs["vocab.predicate_class"] = serialize_classes(vocab_.predicate_class);
  c.blobs["word_rows"] = join_lines(words_.rows());
  return c;
}

void ParserModel::save(const std::filesystem::path& path, const std::map<std::string, std::string>& extra) const {
  save_checkpoint(path, checkpoint(extra));
}

std::unique_ptr<ParserModel> ParserModel::from_checkpoint(const Checkpoint& ckpt) {
  auto blob = [&](const std::string& name) -> const std::string& {
    auto it = ckpt.blobs.find(name);
    if (it == ckpt.blobs.end()) fail(ErrorKind::ConfigError, "checkpoint lacks " + name);
    return it->second;
  };
  auto meta = [&](const std::string& name) -> const std::string& {
    auto it = ckpt.manifest.find(name);
    if (it == ckpt.manifest.end()) fail(ErrorKind::ConfigError, "checkpoint manifest lacks " + name);
    return it->second;
  };
  TrainConfig config;
  std::map<std::string, std::string> kv;
  for (const auto& [k, v] : ckpt.manifest)
    if (k.rfind("config.", 0) == 0 && k != "config.hash") kv[k.substr(7)] = v;
  config.apply(kv);

  VocabularySet vocab;
  vocab.words = Vocabulary::deserialize(blob("vocab.words"));
  vocab.lemmas = Vocabulary::deserialize(blob("vocab.lemmas"));
  vocab.upos = Vocabulary::deserialize(blob("vocab.upos"));
  vocab.deprels = Vocabulary::deserialize(blob("vocab.deprels"));
  vocab.skeleton = Vocabulary::deserialize(blob("vocab.skeleton"));
  vocab.predicates = Vocabulary::deserialize(blob("vocab.predicates"));
  vocab.referents = Vocabulary::deserialize(blob("vocab.referents"));
  vocab.predicate_class = deserialize_classes(blob("vocab.predicate_class"));
  if (vocab.hash_summary() != meta("vocab.hashes")) fail(ErrorKind::ConfigError, "checkpoint vocabulary hashes do not match");

  std::vector<std::string> rows;
  for (auto line : split_lines(blob("word_rows"))) rows.emplace_back(line);
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  if (std::to_string(rows.size()) != meta("word_rows")) fail(ErrorKind::ConfigError, "checkpoint word rows are inconsistent");
  WordIndex words(std::move(rows), std::stoi(meta("word_unk_row")));
  std::unique_ptr<ParserModel> m(new ParserModel(config, vocab, std::move(words), meta("word_trainable") == "true"));
  ckpt.restore(m->store_);
  return m;
}

std::unique_ptr<ParserModel> ParserModel::load(const std::filesystem::path& path) {
  return from_checkpoint(load_checkpoint(path));
}

}  // namespace xdrs
