#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "xdrs/checkpoint.hpp"
#include "xdrs/config.hpp"
#include "xdrs/dataset.hpp"
#include "xdrs/decoder.hpp"
#include "xdrs/encoders.hpp"

namespace xdrs {

// Token -> row of the word embedding table: exact form, then case-folded,
// then the UNK row.
class WordIndex {
 public:
  WordIndex() = default;
  WordIndex(std::vector<std::string> rows, int unk_row);
  int row(std::string_view word) const;
  const std::vector<std::string>& rows() const { return rows_; }
  int unk_row() const { return unk_; }

 private:
  std::vector<std::string> rows_;
  std::unordered_map<std::string, int> exact_, folded_;
  int unk_ = 0;
};

// Gold decoder targets for a training DRS.
StageTargets gold_stages(const Drs& drs);

class ParserModel {
 public:
  // With `pretrained`, the word table holds its rows (plus UNK in row 0)
  // and stays frozen unless the config says otherwise; without it, words
  // come from the training vocabulary and the table is trained.
  ParserModel(const TrainConfig& config, const VocabularySet& vocab, const EmbeddingTable* pretrained);

  ParserModel(const ParserModel&) = delete;
  ParserModel& operator=(const ParserModel&) = delete;

  EncoderInput make_input(const SentenceAnnotation& s) const;
  StageLosses loss(Graph& g, const SentenceAnnotation& s, const StageTargets& gold) const;
  DecodeResult parse(const SentenceAnnotation& s) const;

  const TrainConfig& config() const { return config_; }
  const VocabularySet& vocab() const { return vocab_; }
  ParameterStore& params() { return store_; }
  const ParameterStore& params() const { return store_; }
  const Encoder& encoder() const { return *encoder_; }
  const Decoder& decoder() const { return *decoder_; }

  Checkpoint checkpoint(const std::map<std::string, std::string>& extra = {}) const;
  void save(const std::filesystem::path& path, const std::map<std::string, std::string>& extra = {}) const;
  static std::unique_ptr<ParserModel> from_checkpoint(const Checkpoint& ckpt);
  static std::unique_ptr<ParserModel> load(const std::filesystem::path& path);

 private:
  ParserModel(const TrainConfig& config, const VocabularySet& vocab, WordIndex words, bool word_trainable);
  void build(bool word_trainable);

  TrainConfig config_;
  VocabularySet vocab_;
  WordIndex words_;
  ParameterStore store_;
  std::unique_ptr<Encoder> encoder_;
  std::unique_ptr<Decoder> decoder_;
};

}  // namespace xdrs
