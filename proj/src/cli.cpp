#include "xdrs/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "xdrs/clause_format.hpp"
#include "xdrs/conllu.hpp"
#include "xdrs/dataset.hpp"
#include "xdrs/error.hpp"
#include "xdrs/evaluator.hpp"
#include "xdrs/gradcheck_suite.hpp"
#include "xdrs/model.hpp"
#include "xdrs/text_util.hpp"
#include "xdrs/training.hpp"

namespace xdrs {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::map<std::string, std::string> inputs;  // path -> content hash
  std::map<std::string, std::string> extra;

  void input(const fs::path& p) {
    if (fs::is_regular_file(p)) {
      inputs[p.string()] = hex64(fnv1a(read_file(p)));
    } else if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::recursive_directory_iterator(p))
        if (e.is_regular_file()) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      std::string digest;
      for (const auto& f : files) digest += fs::relative(f, p).string() + " " + hex64(fnv1a(read_file(f))) + "\n";
      inputs[p.string()] = hex64(fnv1a(digest));
    }
  }

  void write(const fs::path& dir) const {
    fs::create_directories(dir);
    std::map<std::string, std::string> kv = extra;
    kv["command"] = command;
    kv["tool_version"] = kToolVersion;
    std::string line;
    for (const auto& a : argv) line += (line.empty() ? "" : " ") + a;
    kv["argv"] = line;
    int i = 0;
    for (const auto& [path, hash] : inputs) kv["input." + std::to_string(i++)] = path + " " + hash;
    write_file(dir / "run.manifest", format_kv(kv));
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

json score_json(const ScoreReport& s) {
  return json{{"matched", s.matched}, {"predicted", s.predicted}, {"gold", s.gold},
              {"precision", s.precision()}, {"recall", s.recall()}, {"f1", s.f1()}};
}

std::vector<ClauseDocument> read_documents(const fs::path& p) {
  if (fs::is_directory(p)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(p))
      if (e.path().extension() == ".clf") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<ClauseDocument> docs;
    for (const auto& f : files) {
      auto d = read_clause_documents(read_file(f));
      if (d.size() != 1) fail(ErrorKind::PairingError, f.string() + ": expected one document");
      if (d[0].id.empty()) d[0].id = f.stem().string();
      docs.push_back(std::move(d[0]));
    }
    return docs;
  }
  return read_clause_documents(read_file(p));
}

// Pairs documents by id when every document has one, else by position.
std::vector<std::pair<const ClauseDocument*, const ClauseDocument*>> pair_documents(
    const std::vector<ClauseDocument>& pred, const std::vector<ClauseDocument>& gold) {
  std::vector<std::pair<const ClauseDocument*, const ClauseDocument*>> out;
  const bool by_id = std::all_of(gold.begin(), gold.end(), [](const auto& d) { return !d.id.empty(); }) &&
                     std::all_of(pred.begin(), pred.end(), [](const auto& d) { return !d.id.empty(); });
  if (!by_id) {
    if (pred.size() != gold.size())
      fail(ErrorKind::PairingError, std::to_string(pred.size()) + " predicted documents for " +
                                        std::to_string(gold.size()) + " gold documents");
    for (std::size_t i = 0; i < gold.size(); ++i) out.emplace_back(&pred[i], &gold[i]);
    return out;
  }
  std::map<std::string, const ClauseDocument*> index;
  for (const auto& d : pred) index[d.id] = &d;
  for (const auto& g : gold) {
    auto it = index.find(g.id);
    if (it == index.end()) fail(ErrorKind::PairingError, "no prediction for document '" + g.id + "'");
    out.emplace_back(it->second, &g);
  }
  if (index.size() != gold.size()) fail(ErrorKind::PairingError, "predictions without a gold document");
  return out;
}

CorpusScore score_documents(const std::vector<ClauseDocument>& pred, const std::vector<ClauseDocument>& gold,
                            const Lexicon& lexicon, const AlignOptions& align) {
  CorpusScore c;
  for (const auto& [p, g] : pair_documents(pred, gold)) c.add(score(p->drs, g->drs, lexicon, align));
  return c;
}

std::vector<Example> test_set(const Bundle& b, const std::string& lang) {
  auto it = b.splits.find(lang);
  if (it == b.splits.end()) fail(ErrorKind::PairingError, "bundle has no language '" + lang + "'");
  return it->second.test;
}

struct TrainFlags {
  std::string config_file;
  std::string encoder, features, seed, epochs, patience, workers;
  std::vector<std::string> sets;

  TrainConfig resolve() const {
    TrainConfig c;
    if (!config_file.empty()) c = load_train_config(config_file);
    std::map<std::string, std::string> kv;
    for (const auto& s : sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos) fail(ErrorKind::ConfigError, "--set expects key=value, got '" + s + "'");
      kv[std::string(trim(std::string_view(s).substr(0, eq)))] = std::string(trim(std::string_view(s).substr(eq + 1)));
    }
    if (!encoder.empty()) kv["encoder"] = encoder;
    if (!features.empty()) kv["features"] = features;
    if (!seed.empty()) kv["seed"] = seed;
    if (!epochs.empty()) kv["epochs"] = epochs;
    if (!patience.empty()) kv["patience"] = patience;
    if (!workers.empty()) kv["workers"] = workers;
    c.apply(kv);
    c.validate();
    return c;
  }
};

MatrixCell parse_cell(const std::string& s) {
  auto colon = s.find(':');
  if (colon == std::string::npos) fail(ErrorKind::ConfigError, "--cell expects encoder:features, got '" + s + "'");
  return MatrixCell{parse_encoder_kind(s.substr(0, colon)), FeatureSet::parse(s.substr(colon + 1))};
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-shot cross-lingual DRS parsing", "xdrs"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable output");

  RunManifest manifest;
  for (int i = 0; i < argc; ++i) manifest.argv.emplace_back(argv[i]);

  // ingest
  IngestOptions ingest;
  std::string ingest_out, ingest_emb;
  auto* c_ingest = app.add_subcommand("ingest", "build a dataset bundle");
  c_ingest->add_option("--clauses", ingest.clauses_dir, "clause files, one per document")->required();
  c_ingest->add_option("--conllu", ingest.conllu_dir, "<lang>.conllu parses")->required();
  c_ingest->add_option("--embeddings", ingest_emb, "word vectors (text format)");
  c_ingest->add_option("--embedding-dim", ingest.embedding_dim);
  c_ingest->add_option("--manifest", ingest.manifest_prefix, "split prefix: <prefix>.train|dev|test")->required();
  c_ingest->add_option("--source-lang", ingest.source_lang);
  c_ingest->add_option("--min-freq", ingest.min_freq);
  c_ingest->add_option("--out", ingest_out)->required();

  // train
  TrainFlags tf;
  std::string train_bundle, train_out;
  bool matrix = false;
  std::vector<std::string> cells;
  auto* c_train = app.add_subcommand("train", "train one model or the ablation matrix");
  c_train->add_option("--bundle", train_bundle)->required();
  c_train->add_option("--out", train_out)->required();
  c_train->add_option("--config", tf.config_file, "key = value file; flags win");
  c_train->add_option("--encoder", tf.encoder, "bi | tree | po_tree | bi_tree");
  c_train->add_option("--features", tf.features, "subset of we,pe,de");
  c_train->add_option("--seed", tf.seed);
  c_train->add_option("--epochs", tf.epochs);
  c_train->add_option("--patience", tf.patience);
  c_train->add_option("--workers", tf.workers);
  c_train->add_option("--set", tf.sets, "key=value config override");
  c_train->add_flag("--matrix", matrix, "train every encoder x feature-set cell");
  c_train->add_option("--cell", cells, "encoder:features, restricts --matrix");

  // parse
  std::string parse_model, parse_bundle, parse_lang, parse_conllu, parse_out;
  int parse_workers = 1;
  auto* c_parse = app.add_subcommand("parse", "decode sentences with a trained model");
  c_parse->add_option("--model", parse_model)->required();
  c_parse->add_option("--bundle", parse_bundle);
  c_parse->add_option("--lang", parse_lang);
  c_parse->add_option("--conllu", parse_conllu, "parse this file instead of a bundle split");
  c_parse->add_option("--out", parse_out)->required();
  c_parse->add_option("--workers", parse_workers);

  // evaluate / analyze
  std::string ev_pred, ev_gold, ev_bundle, ev_model, ev_lang, ev_out = ".";
  int ev_restarts = 20, ev_workers = 1;
  std::uint64_t ev_seed = 1;
  auto* c_eval = app.add_subcommand("evaluate", "precision, recall and F1 against gold DRSs");
  auto* c_analyze = app.add_subcommand("analyze", "scores per clause category");
  for (auto* c : {c_eval, c_analyze}) {
    c->add_option("--pred", ev_pred, "predicted clause file or directory");
    c->add_option("--gold", ev_gold, "gold clause file or directory");
    c->add_option("--model", ev_model, "decode the bundle test split instead of reading --pred");
    c->add_option("--bundle", ev_bundle, "supplies the lexicon, and the gold data with --model");
    c->add_option("--lang", ev_lang);
    c->add_option("--restarts", ev_restarts);
    c->add_option("--seed", ev_seed);
    c->add_option("--workers", ev_workers);
    c->add_option("--out", ev_out, "directory for run.manifest");
  }

  // gradcheck
  GradSuiteOptions gs;
  std::string gc_out = ".";
  auto* c_grad = app.add_subcommand("gradcheck", "finite-difference checks of every composite module");
  c_grad->add_option("--only", gs.only, "restrict to named checks");
  c_grad->add_option("--dim", gs.dim);
  c_grad->add_option("--tolerance", gs.check.tolerance);
  c_grad->add_option("--out", gc_out, "directory for run.manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (c_ingest->parsed()) {
      manifest.command = "ingest";
      if (!ingest_emb.empty()) ingest.embeddings = ingest_emb;
      for (const auto& p : {ingest.clauses_dir, ingest.conllu_dir}) manifest.input(p);
      if (ingest.embeddings) manifest.input(*ingest.embeddings);
      for (const char* s : {".train", ".dev", ".test"}) manifest.input(ingest.manifest_prefix.string() + s);
      Bundle b = ingest_corpus(ingest);
      write_bundle(ingest_out, b);
      manifest.extra["vocab"] = b.vocab.hash_summary();
      manifest.write(ingest_out);
      if (as_json) {
        json j{{"command", "ingest"}, {"out", ingest_out}, {"info", b.info}};
        out << j.dump() << "\n";
      } else {
        for (const auto& [lang, split] : b.splits)
          out << lang << ": " << split.train.size() << " train, " << split.dev.size() << " dev, "
              << split.test.size() << " test\n";
      }
      return 0;
    }

    if (c_train->parsed()) {
      manifest.command = "train";
      TrainConfig config = tf.resolve();  // config errors surface before any data is read
      std::vector<MatrixCell> wanted;
      for (const auto& s : cells) wanted.push_back(parse_cell(s));
      if (!cells.empty() && !matrix) fail(ErrorKind::ConfigError, "--cell requires --matrix");
      for (const auto& c : wanted)
        if (!cell_supported(c))
          fail(ErrorKind::UnsupportedFeatureCombination,
               c.name() + ": the bi_tree encoder cannot be used with dependency features only");

      manifest.input(train_bundle);
      if (!tf.config_file.empty()) manifest.input(tf.config_file);
      Bundle b = load_bundle(train_bundle);
      const auto& src = b.splits.at(b.source_lang);
      TrainData data{&src.train, &src.dev, b.embeddings ? &*b.embeddings : nullptr, b.vocab, b.lexicon()};
      AlignOptions align;
      align.restarts = config.eval_restarts;
      std::map<std::string, std::vector<Example>> tests;
      for (const auto& lang : b.languages()) tests[lang] = test_set(b, lang);

      manifest.extra["config.hash"] = config.hash();
      manifest.extra["seed"] = std::to_string(config.seed);
      for (const auto& [k, v] : config.to_kv()) manifest.extra["config." + k] = v;

      if (matrix) {
        MatrixOptions mo;
        mo.explicit_cells = !wanted.empty();
        mo.out_dir = train_out;
        mo.workers = config.workers;
        for (const auto& [lang, set] : tests)
          if (lang != b.source_lang) mo.test_sets.emplace_back(lang, &set);
        if (tests.count(b.source_lang)) mo.test_sets.emplace_back(b.source_lang, &tests[b.source_lang]);
        auto rows = run_ablation_matrix(config, wanted.empty() ? full_matrix() : wanted, data, mo);
        const std::string table = render_matrix_table(rows);
        write_file(fs::path(train_out) / "matrix.txt", table);
        manifest.write(train_out);
        if (as_json) {
          json j = json::array();
          for (const auto& r : rows) {
            json row{{"cell", r.cell.name()}, {"skipped", r.skipped}};
            for (const auto& [lang, s] : r.languages) row["test"][lang] = score_json(s);
            if (r.report) row["best_epoch"] = r.report->best_epoch;
            j.push_back(row);
          }
          out << j.dump() << "\n";
        } else {
          out << table;
        }
        return 0;
      }

      TrainResult r = train(config, data, train_out, [&](const EpochRecord& e) {
        if (!as_json)
          err << "epoch " << e.epoch << " loss " << fmt(e.train_loss) << " dev F1 " << fmt(e.dev.f1()) << "\n";
      });
      json j{{"command", "train"}, {"name", r.report.name}, {"config_hash", r.report.config_hash},
             {"best_epoch", r.report.best_epoch}, {"stop_reason", r.report.stop_reason},
             {"checkpoint", r.report.checkpoint.string()}, {"dev", score_json(r.report.best_dev)}};
      std::vector<std::pair<std::string, ScoreReport>> rows;
      for (const auto& [lang, set] : tests) {
        if (set.empty()) continue;
        ScoreReport s = evaluate_model(*r.model, set, data.lexicon, align, config.workers).score.overall;
        rows.emplace_back(lang, s);
        j["test"][lang] = score_json(s);
      }
      manifest.write(train_out);
      if (as_json)
        out << j.dump() << "\n";
      else
        out << r.report.name << " best epoch " << r.report.best_epoch << " (" << r.report.stop_reason << ")\n"
            << render_score_table(rows);
      return 0;
    }

    if (c_parse->parsed()) {
      manifest.command = "parse";
      manifest.input(parse_model);
      auto model = ParserModel::load(parse_model);
      std::vector<Example> examples;
      std::string name = parse_lang;
      if (!parse_conllu.empty()) {
        manifest.input(parse_conllu);
        for (auto& s : read_conllu(read_file(parse_conllu))) examples.push_back(Example{s.id, parse_lang, s, {}, {}});
        if (name.empty()) name = fs::path(parse_conllu).stem().string();
      } else {
        if (parse_bundle.empty() || parse_lang.empty())
          fail(ErrorKind::ConfigError, "parse needs --conllu, or --bundle with --lang");
        manifest.input(parse_bundle);
        examples = test_set(load_bundle(parse_bundle), parse_lang);
      }
      ParseBatch parsed = parse_all(*model, examples, parse_workers);
      const auto& outputs = parsed.outputs;
      const auto& failures = parsed.failures;
      std::string seqs, clauses;
      for (std::size_t i = 0; i < examples.size(); ++i) {
        seqs += examples[i].id + "\t" + outputs[i].seq.str() + "\n";
        if (!clauses.empty()) clauses += "\n";
        clauses += write_clauses(ClauseDocument{examples[i].id, examples[i].text, outputs[i].drs, {}});
      }
      write_file(fs::path(parse_out) / (name + ".seq"), seqs);
      write_file(fs::path(parse_out) / (name + ".clf"), clauses);
      manifest.extra["config.hash"] = model->config().hash();
      manifest.extra["seed"] = std::to_string(model->config().seed);
      manifest.write(parse_out);
      for (const auto& f : failures) err << "decode failed: " << f << "\n";
      if (as_json)
        out << json{{"command", "parse"}, {"sentences", examples.size()}, {"failures", failures.size()}}.dump() << "\n";
      else
        out << "parsed " << examples.size() << " sentences into " << parse_out << "\n";
      return 0;
    }

    if (c_eval->parsed() || c_analyze->parsed()) {
      const bool analyze = c_analyze->parsed();
      manifest.command = analyze ? "analyze" : "evaluate";
      AlignOptions align{ev_restarts, 1000, ev_seed};
      std::optional<Bundle> bundle;
      if (!ev_bundle.empty()) {
        manifest.input(ev_bundle);
        bundle = load_bundle(ev_bundle);
      }
      const Lexicon lexicon = bundle ? bundle->lexicon() : Lexicon::standard();
      CorpusScore score;
      std::string label = ev_lang.empty() ? "all" : ev_lang;
      if (!ev_model.empty()) {
        if (!bundle || ev_lang.empty()) fail(ErrorKind::ConfigError, "--model needs --bundle and --lang");
        manifest.input(ev_model);
        auto model = ParserModel::load(ev_model);
        Evaluation ev = evaluate_model(*model, test_set(*bundle, ev_lang), lexicon, align, ev_workers);
        for (const auto& f : ev.failures) err << "decode failed: " << f << "\n";
        score = ev.score;
      } else {
        if (ev_pred.empty() || ev_gold.empty()) fail(ErrorKind::ConfigError, "give --pred and --gold, or --model");
        manifest.input(ev_pred);
        manifest.input(ev_gold);
        score = score_documents(read_documents(ev_pred), read_documents(ev_gold), lexicon, align);
      }
      manifest.extra["restarts"] = std::to_string(ev_restarts);
      manifest.extra["seed"] = std::to_string(ev_seed);
      manifest.write(ev_out);
      if (as_json) {
        json j{{"command", manifest.command}, {"documents", score.documents}, {"overall", score_json(score.overall)}};
        if (analyze)
          for (Category c : kCategories) j["categories"][std::string(to_string(c))] = score_json(score.categories.at(c));
        out << j.dump() << "\n";
      } else if (analyze) {
        out << render_category_table(score.categories);
      } else {
        out << render_score_table({{label, score.overall}});
      }
      return 0;
    }

    if (c_grad->parsed()) {
      manifest.command = "gradcheck";
      auto results = run_gradcheck_suite(gs);
      bool ok = true;
      json j = json::array();
      for (const auto& r : results) {
        ok = ok && r.passed;
        if (as_json)
          j.push_back({{"module", r.name}, {"passed", r.passed}, {"max_rel_error", r.max_rel_error},
                       {"checked", r.checked}, {"worst", r.worst}});
        else
          out << (r.passed ? "PASS " : "FAIL ") << r.name << " max_rel_error=" << r.max_rel_error
              << " checked=" << r.checked << "\n";
      }
      if (as_json) out << j.dump() << "\n";
      manifest.extra["tolerance"] = std::to_string(gs.check.tolerance);
      manifest.write(gc_out);
      return ok ? 0 : 4;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace xdrs
