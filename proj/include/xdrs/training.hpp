#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "xdrs/config.hpp"
#include "xdrs/dataset.hpp"
#include "xdrs/evaluator.hpp"
#include "xdrs/model.hpp"

namespace xdrs {

struct TrainData {
  const std::vector<Example>* train = nullptr;
  const std::vector<Example>* dev = nullptr;
  const EmbeddingTable* embeddings = nullptr;
  VocabularySet vocab;
  Lexicon lexicon = Lexicon::standard();
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // mean per training example
  double dev_loss = 0.0;    // mean teacher-forced loss; only under select=loss
  ScoreReport dev;
};

struct TrainReport {
  std::string name;
  std::string config_hash;
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 1-based
  ScoreReport best_dev;
  std::string stop_reason;
  std::filesystem::path checkpoint;

  std::string to_text() const;
};

struct TrainResult {
  TrainReport report;
  std::unique_ptr<ParserModel> model;  // holds the best epoch's weights
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// With a non-empty out_dir the best checkpoint goes to out_dir/model.ckpt
// and the report to out_dir/train.report.
TrainResult train(const TrainConfig& config, const TrainData& data, const std::filesystem::path& out_dir = {},
                  const EpochCallback& on_epoch = {});

struct ParseBatch {
  std::vector<DecodeResult> outputs;
  std::vector<std::string> failures;  // "id: message" for decodes that threw; their output is empty
};

ParseBatch parse_all(const ParserModel& model, const std::vector<Example>& examples, int workers = 1);

struct Evaluation {
  CorpusScore score;
  std::vector<DecodeResult> outputs;
  std::vector<std::string> failures;  // ids whose decoding threw; scored as empty
};

Evaluation evaluate_model(const ParserModel& model, const std::vector<Example>& examples, const Lexicon& lexicon,
                          const AlignOptions& align = {}, int workers = 1);

// Mean teacher-forced loss, no gradients kept.
double mean_loss(const ParserModel& model, const std::vector<Example>& examples);

// --- ablation matrix -------------------------------------------------------

struct MatrixCell {
  EncoderKind encoder = EncoderKind::Bi;
  FeatureSet features;
  std::string name() const;
};

// 4 encoders x {we,pe} {we,pe,de} {de} {we,de}, in table order.
std::vector<MatrixCell> full_matrix();
bool cell_supported(const MatrixCell& cell);

struct MatrixRow {
  MatrixCell cell;
  bool skipped = false;
  std::optional<TrainReport> report;
  std::vector<std::pair<std::string, ScoreReport>> languages;  // test score per language
};

struct MatrixOptions {
  // Unsupported cells are skipped when the full matrix was requested and
  // rejected with ConfigError when named explicitly.
  bool explicit_cells = false;
  std::filesystem::path out_dir;
  std::vector<std::pair<std::string, const std::vector<Example>*>> test_sets;
  int workers = 1;
};

std::vector<MatrixRow> run_ablation_matrix(const TrainConfig& base, const std::vector<MatrixCell>& cells,
                                           const TrainData& data, const MatrixOptions& options);

// P R F columns per language; skipped cells print "--".
std::string render_matrix_table(const std::vector<MatrixRow>& rows);

}  // namespace xdrs
