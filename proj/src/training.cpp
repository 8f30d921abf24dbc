#include "xdrs/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <thread>

#include "xdrs/error.hpp"
#include "xdrs/optimizer.hpp"
#include "xdrs/text_util.hpp"

namespace xdrs {

namespace {

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

bool improves(const EpochRecord& e, const EpochRecord* best, bool by_loss) {
  if (!best) return true;
  return by_loss ? e.dev_loss < best->dev_loss : e.dev.f1() > best->dev.f1();
}

std::string dir_name(const MatrixCell& c) {
  std::string f = c.features.str();
  std::replace(f.begin(), f.end(), ',', '-');
  return std::string(to_string(c.encoder)) + "_" + f;
}

}  // namespace

std::string TrainReport::to_text() const {
  std::string out = "name = " + name + "\nconfig_hash = " + config_hash + "\nbest_epoch = " +
                    std::to_string(best_epoch) + "\nbest_dev_f1 = " + fixed(best_dev.f1()) +
                    "\nstop_reason = " + stop_reason + "\ncheckpoint = " + checkpoint.string() + "\n";
  for (const auto& e : epochs)
    out += "epoch " + std::to_string(e.epoch) + " loss=" + fixed(e.train_loss, 6) + " dev_p=" +
           fixed(e.dev.precision()) + " dev_r=" + fixed(e.dev.recall()) + " dev_f1=" + fixed(e.dev.f1()) + "\n";
  return out;
}

double mean_loss(const ParserModel& model, const std::vector<Example>& examples) {
  if (examples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : examples) {
    Graph g;
    total += g.scalar(model.loss(g, ex.sentence, gold_stages(ex.drs)).total);
  }
  return total / static_cast<double>(examples.size());
}

namespace {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  const int threads = std::clamp(workers, 1, static_cast<int>(std::max<std::size_t>(n, 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

}  // namespace

ParseBatch parse_all(const ParserModel& model, const std::vector<Example>& examples, int workers) {
  ParseBatch out;
  out.outputs.resize(examples.size());
  std::vector<std::string> errors(examples.size());
  parallel_for(examples.size(), workers, [&](std::size_t i) {
    try {
      out.outputs[i] = model.parse(examples[i].sentence);
    } catch (const Error& e) {
      errors[i] = examples[i].id + ": " + e.what();
      out.outputs[i] = DecodeResult{};
    }
  });
  for (auto& e : errors)
    if (!e.empty()) out.failures.push_back(std::move(e));
  return out;
}

Evaluation evaluate_model(const ParserModel& model, const std::vector<Example>& examples, const Lexicon& lexicon,
                          const AlignOptions& align, int workers) {
  ParseBatch parsed = parse_all(model, examples, workers);
  std::vector<DocumentScore> scores(examples.size());
  parallel_for(examples.size(), workers,
               [&](std::size_t i) { scores[i] = score(parsed.outputs[i].drs, examples[i].drs, lexicon, align); });
  Evaluation ev;
  for (const auto& s : scores) ev.score.add(s);
  ev.outputs = std::move(parsed.outputs);
  ev.failures = std::move(parsed.failures);
  return ev;
}

TrainResult train(const TrainConfig& config, const TrainData& data, const std::filesystem::path& out_dir,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (!data.train || data.train->empty()) fail(ErrorKind::ConfigError, "training split is empty");
  const std::vector<Example>& dev = data.dev && !data.dev->empty() ? *data.dev : *data.train;

  TrainResult result;
  result.model = std::make_unique<ParserModel>(config, data.vocab, data.embeddings);
  ParserModel& model = *result.model;
  TrainReport& report = result.report;
  report.name = config.name();
  report.config_hash = config.hash();

  std::vector<StageTargets> gold;
  gold.reserve(data.train->size());
  for (const auto& ex : *data.train) gold.push_back(gold_stages(ex.drs));

  Adam adam(model.params(), AdamOptions{config.lr});
  Rng shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(data.train->size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  AlignOptions align;
  align.restarts = config.eval_restarts;
  const bool by_loss = config.select == "loss";
  std::optional<Checkpoint> best_ckpt;
  int since_best = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const double inv = 1.0 / static_cast<double>(end - start);
      model.params().zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        const Example& ex = (*data.train)[order[k]];
        Graph g;
        StageLosses l = model.loss(g, ex.sentence, gold[order[k]]);
        const double v = g.scalar(l.total);
        if (!std::isfinite(v))
          fail(ErrorKind::NumericError, "non-finite loss on '" + ex.id + "' in epoch " + std::to_string(epoch));
        epoch_loss += v;
        g.backward(g.scale(l.total, inv));
      }
      clip_grad_norm(model.params().trainable(), config.clip);
      adam.step();
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(order.size());
    rec.dev = evaluate_model(model, dev, data.lexicon, align, config.workers).score.overall;
    if (by_loss) rec.dev_loss = mean_loss(model, dev);
    report.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    const EpochRecord* best = report.best_epoch ? &report.epochs[static_cast<std::size_t>(report.best_epoch - 1)] : nullptr;
    if (improves(rec, best, by_loss)) {
      report.best_epoch = epoch;
      report.best_dev = rec.dev;
      best_ckpt = model.checkpoint();
      since_best = 0;
    } else {
      ++since_best;
    }
    if (config.target_f1 > 0 && rec.dev.f1() >= config.target_f1) {
      report.stop_reason = "target_f1";
      break;
    }
    if (since_best >= config.patience) {
      report.stop_reason = "patience";
      break;
    }
  }
  if (report.stop_reason.empty()) report.stop_reason = "max_epochs";
  if (best_ckpt) best_ckpt->restore(model.params());

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    report.checkpoint = out_dir / "model.ckpt";
    model.save(report.checkpoint, {{"best_epoch", std::to_string(report.best_epoch)}});
    std::ofstream(out_dir / "train.report") << report.to_text();
  }
  return result;
}

std::string MatrixCell::name() const { return std::string(to_string(encoder)) + "[" + features.str() + "]"; }

std::vector<MatrixCell> full_matrix() {
  std::vector<MatrixCell> cells;
  for (EncoderKind e : {EncoderKind::Bi, EncoderKind::Tree, EncoderKind::PoTree, EncoderKind::BiTree})
    for (const char* f : {"we,pe", "we,pe,de", "de", "we,de"}) cells.push_back({e, FeatureSet::parse(f)});
  return cells;
}

bool cell_supported(const MatrixCell& cell) { return !(cell.encoder == EncoderKind::BiTree && cell.features.only_de()); }

std::vector<MatrixRow> run_ablation_matrix(const TrainConfig& base, const std::vector<MatrixCell>& cells,
                                           const TrainData& data, const MatrixOptions& options) {
  if (options.explicit_cells)
    for (const auto& c : cells)
      if (!cell_supported(c))
        fail(ErrorKind::UnsupportedFeatureCombination,
             c.name() + ": the bi_tree encoder cannot be used with dependency features only");

  std::vector<MatrixRow> rows;
  AlignOptions align;
  align.restarts = base.eval_restarts;
  for (const auto& cell : cells) {
    MatrixRow row;
    row.cell = cell;
    if (!cell_supported(cell)) {
      row.skipped = true;
      rows.push_back(std::move(row));
      continue;
    }
    TrainConfig c = base;
    c.encoder = cell.encoder;
    c.features = cell.features;
    const std::filesystem::path dir = options.out_dir.empty() ? std::filesystem::path{} : options.out_dir / dir_name(cell);
    TrainResult r = train(c, data, dir);
    for (const auto& [lang, set] : options.test_sets)
      row.languages.emplace_back(lang, evaluate_model(*r.model, *set, data.lexicon, align, options.workers).score.overall);
    row.report = std::move(r.report);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_matrix_table(const std::vector<MatrixRow>& rows) {
  std::vector<std::string> langs;
  for (const auto& r : rows)
    for (const auto& [l, s] : r.languages)
      if (std::find(langs.begin(), langs.end(), l) == langs.end()) langs.push_back(l);
  std::size_t w = 8;
  for (const auto& r : rows) w = std::max(w, r.cell.name().size());
  auto pad = [](std::string s, std::size_t n) {
    if (s.size() < n) s.insert(0, n - s.size(), ' ');
    return s;
  };
  std::string out = std::string(w, ' ');
  for (const auto& l : langs) out += " | " + pad(l, 20);
  out += "\n" + std::string(w, ' ');
  for (std::size_t i = 0; i < langs.size(); ++i) out += " | " + pad("P", 6) + " " + pad("R", 6) + " " + pad("F", 6);
  out += "\n";
  for (const auto& r : rows) {
    std::string name = r.cell.name();
    out += name + std::string(w - name.size(), ' ');
    for (const auto& l : langs) {
      auto it = std::find_if(r.languages.begin(), r.languages.end(), [&](const auto& p) { return p.first == l; });
      if (r.skipped || it == r.languages.end()) {
        out += " | " + pad("--", 6) + " " + pad("--", 6) + " " + pad("--", 6);
      } else {
        const ScoreReport& s = it->second;
        out += " | " + pad(fixed(s.precision()), 6) + " " + pad(fixed(s.recall()), 6) + " " + pad(fixed(s.f1()), 6);
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace xdrs
