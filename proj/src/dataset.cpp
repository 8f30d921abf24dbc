#include "xdrs/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "xdrs/conllu.hpp"
#include "xdrs/drs_transform.hpp"
#include "xdrs/drs_tree.hpp"
#include "xdrs/error.hpp"
#include "xdrs/stages.hpp"
#include "xdrs/text_util.hpp"

namespace fs = std::filesystem;

namespace xdrs {

namespace {

std::vector<std::string> read_id_list(const fs::path& path) {
  std::vector<std::string> ids;
  const std::string text = read_file(path);
  for (auto line : split_lines(text)) {
    auto t = trim(line);
    if (!t.empty()) ids.emplace_back(t);
  }
  return ids;
}

std::string join_lines(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) out += id + "\n";
  return out;
}

fs::path with_suffix(const fs::path& prefix, const std::string& suffix) {
  return fs::path(prefix.string() + "." + suffix);
}

[[noreturn]] void rethrow_with(const fs::path& where, const Error& e) {
  throw Error(e.kind(), where.string() + ": " + e.what());
}

}  // namespace

Manifest read_manifest(const fs::path& prefix) {
  Manifest m;
  m.train = read_id_list(with_suffix(prefix, "train"));
  m.dev = read_id_list(with_suffix(prefix, "dev"));
  m.test = read_id_list(with_suffix(prefix, "test"));
  return m;
}

void write_manifest(const fs::path& prefix, const Manifest& m) {
  write_file(with_suffix(prefix, "train"), join_lines(m.train));
  write_file(with_suffix(prefix, "dev"), join_lines(m.dev));
  write_file(with_suffix(prefix, "test"), join_lines(m.test));
}

Manifest manifest_by_counts(const std::vector<Example>& pairs, std::size_t n_train, std::size_t n_dev,
                            std::size_t n_test) {
  if (n_train + n_dev + n_test > pairs.size())
    fail(ErrorKind::PairingError, "split sizes exceed the " + std::to_string(pairs.size()) + " available pairs");
  Manifest m;
  std::size_t i = 0;
  for (; i < n_train; ++i) m.train.push_back(pairs[i].id);
  for (; i < n_train + n_dev; ++i) m.dev.push_back(pairs[i].id);
  for (; i < n_train + n_dev + n_test; ++i) m.test.push_back(pairs[i].id);
  return m;
}

DatasetSplit assemble_split(const std::vector<Example>& pairs, const Manifest& manifest) {
  std::map<std::string, const Example*> by_id;
  for (const auto& p : pairs) by_id.emplace(p.id, &p);
  std::set<std::string> used;
  auto take = [&](const std::vector<std::string>& ids, std::vector<Example>& out) {
    for (const auto& id : ids) {
      if (!used.insert(id).second) fail(ErrorKind::PairingError, "sentence " + id + " listed in two splits");
      auto it = by_id.find(id);
      if (it == by_id.end()) fail(ErrorKind::PairingError, "manifest id " + id + " has no sentence/DRS pair");
      out.push_back(*it->second);
    }
  };
  DatasetSplit split;
  take(manifest.train, split.train);
  take(manifest.dev, split.dev);
  take(manifest.test, split.test);
  return split;
}

DatasetSplit assemble_test_split(const std::vector<Example>& pairs) {
  DatasetSplit split;
  split.test = pairs;
  return split;
}

VocabularySet build_vocab(const std::vector<Example>& train, int min_freq, const Lexicon& lexicon) {
  std::map<std::string, int> words, lemmas, upos, deprels, relations, predicates, roles, constants;
  for (const auto& ex : train) {
    const auto& s = ex.sentence;
    for (const auto& w : s.tokens) ++words[w];
    for (const auto& w : s.lemmas) ++lemmas[w];
    for (const auto& w : s.upos) ++upos[w];
    for (const auto& w : s.deprels) ++deprels[w];
    StageTargets t = split_stages(to_tree(canonicalize(ex.drs)));
    for (const auto& tok : t.skeleton)
      if (tok.rfind(skeleton_tokens::kRelPrefix, 0) == 0) ++relations[tok];
    std::size_t p = 0;
    for (const auto& tok : t.skeleton) {
      if (tok == skeleton_tokens::kUnary) ++predicates[t.predicates[p++]];
      if (tok == skeleton_tokens::kBinary) {
        ++predicates[t.predicates[p]];
        ++roles[t.predicates[p++]];
      }
    }
    for (const auto& r : t.referents)
      if (!r.empty() && r.front() == '"') ++constants[r];
  }
  VocabularySet v;
  v.words = Vocabulary::from_counts(words, min_freq);
  v.lemmas = Vocabulary::from_counts(lemmas, min_freq);
  v.upos = Vocabulary::from_counts(upos, 1);
  v.deprels = Vocabulary::from_counts(deprels, 1);

  for (auto tok : {skeleton_tokens::kOpenDrs, skeleton_tokens::kClose, skeleton_tokens::kRef,
                   skeleton_tokens::kUnary, skeleton_tokens::kBinary})
    v.skeleton.add(tok);
  for (const char* op : kOperatorLabels) v.skeleton.add(std::string(skeleton_tokens::kOpPrefix) + op);
  const Vocabulary rels = Vocabulary::from_counts(relations, 1);
  for (const auto& s : rels.symbols())
    if (s.front() == '(') v.skeleton.add(s);

  v.predicates = Vocabulary::from_counts(predicates, min_freq);
  v.classify_predicates(lexicon, roles);

  for (char sort : std::string_view("xets")) v.referents.add(new_variable_token(sort));
  for (char sort : std::string_view("xets"))
    for (int i = 1; i <= kMaxNamesPerSort; ++i) v.referents.add(std::string(1, sort) + std::to_string(i));
  const Vocabulary consts = Vocabulary::from_counts(constants, min_freq);
  for (const auto& s : consts.symbols())
    if (s.front() == '"') v.referents.add(s);
  return v;
}

Lexicon Bundle::lexicon() const {
  Lexicon lex = Lexicon::standard();
  for (const auto& [lang, split] : splits)
    for (const auto* part : {&split.train, &split.dev, &split.test})
      for (const auto& ex : *part)
        for (const auto& l : ex.sentence.lemmas) lex.add_lemma(l);
  return lex;
}

std::vector<std::string> Bundle::languages() const {
  std::vector<std::string> out;
  for (const auto& [lang, _] : splits) out.push_back(lang);
  return out;
}

// ---------------------------------------------------------------------------

Bundle ingest_corpus(const IngestOptions& opt) {
  if (!fs::is_directory(opt.conllu_dir)) fail(ErrorKind::IoError, "no CoNLL-U directory " + opt.conllu_dir.string());
  if (!fs::is_directory(opt.clauses_dir)) fail(ErrorKind::IoError, "no clause directory " + opt.clauses_dir.string());

  std::map<std::string, std::vector<SentenceAnnotation>> by_lang;
  std::vector<fs::path> conllu_files;
  for (const auto& e : fs::directory_iterator(opt.conllu_dir))
    if (e.path().extension() == ".conllu") conllu_files.push_back(e.path());
  std::sort(conllu_files.begin(), conllu_files.end());
  std::set<std::string> sentence_ids;
  for (const auto& path : conllu_files) {
    try {
      auto sents = read_conllu(read_file(path));
      for (const auto& s : sents) {
        if (s.id.empty()) fail(ErrorKind::MalformedConllu, "sentence without '# sent_id'");
        if (!sentence_ids.insert(s.id).second) fail(ErrorKind::PairingError, "duplicate sentence id " + s.id);
      }
      by_lang[path.stem().string()] = std::move(sents);
    } catch (const Error& e) {
      rethrow_with(path, e);
    }
  }
  if (!by_lang.count(opt.source_lang))
    fail(ErrorKind::PairingError, "no " + opt.source_lang + ".conllu in " + opt.conllu_dir.string());

  // Every clause file must belong to a parsed sentence.
  std::vector<fs::path> clause_files;
  for (const auto& e : fs::recursive_directory_iterator(opt.clauses_dir))
    if (e.is_regular_file() && e.path().extension() == ".clf") clause_files.push_back(e.path());
  std::sort(clause_files.begin(), clause_files.end());
  for (const auto& path : clause_files) {
    auto rel = fs::relative(path, opt.clauses_dir);
    rel.replace_extension();
    if (!sentence_ids.count(rel.generic_string()))
      fail(ErrorKind::PairingError, path.string() + ": no CoNLL-U sentence with id " + rel.generic_string());
  }

  Bundle bundle;
  bundle.source_lang = opt.source_lang;
  const Lexicon base = Lexicon::standard();
  int reverted = 0, unaligned = 0;
  std::map<std::string, std::vector<Example>> pairs;
  for (auto& [lang, sents] : by_lang) {
    for (auto& s : sents) {
      fs::path path = opt.clauses_dir / (s.id + ".clf");
      if (!fs::exists(path)) fail(ErrorKind::PairingError, "sentence " + s.id + " (" + lang + ") has no clause file");
      try {
        ClauseDocument doc = parse_clause_document(read_file(path));
        s.alignments = doc.alignments;
        Drs drs = strip_senses(merge_presuppositions(doc.drs));
        if (lang != opt.source_lang) {
          RevertResult r = revert_predicates(drs, s, base);
          drs = std::move(r.drs);
          reverted += r.reverted;
          unaligned += r.unaligned;
        }
        to_tree(drs);  // precondition check for the tree encoding
        pairs[lang].push_back(Example{s.id, lang, s, std::move(drs), doc.text});
      } catch (const Error& e) {
        rethrow_with(path, e);
      }
    }
  }

  // Manifest ids must all exist among the source-language pairs.
  Manifest manifest;
  try {
    manifest = read_manifest(opt.manifest_prefix);
  } catch (const Error& e) {
    rethrow_with(opt.manifest_prefix, e);
  }
  std::set<std::string> known;
  for (const auto& [lang, list] : by_lang)
    for (const auto& s : list) known.insert(s.id);
  for (const auto* ids : {&manifest.train, &manifest.dev, &manifest.test})
    for (const auto& id : *ids)
      if (!known.count(id)) fail(ErrorKind::PairingError, "manifest id " + id + " has no CoNLL-U sentence");

  for (auto& [lang, list] : pairs)
    bundle.splits[lang] = lang == opt.source_lang ? assemble_split(list, manifest) : assemble_test_split(list);

  bundle.vocab = build_vocab(bundle.splits[opt.source_lang].train, opt.min_freq, bundle.lexicon());

  if (opt.embeddings) {
    EmbeddingTable full(opt.embedding_dim);
    try {
      full = load_embeddings(read_file(*opt.embeddings), opt.embedding_dim);
    } catch (const Error& e) {
      rethrow_with(*opt.embeddings, e);
    }
    EmbeddingTable kept(opt.embedding_dim);
    for (const auto& [lang, split] : bundle.splits)
      for (const auto* part : {&split.train, &split.dev, &split.test})
        for (const auto& ex : *part)
          for (const auto& w : ex.sentence.tokens)
            if (auto i = full.index_of(w)) kept.add(full.words()[*i], full.row(*i));
    kept.set_unk(full.unk());
    bundle.embeddings = std::move(kept);
    bundle.info["embeddings.source_rows"] = std::to_string(full.size());
  }

  bundle.info["reverted_predicates"] = std::to_string(reverted);
  bundle.info["unaligned_lexical_predicates"] = std::to_string(unaligned);
  return bundle;
}

void write_bundle(const fs::path& dir, const Bundle& bundle) {
  fs::create_directories(dir);
  std::map<std::string, std::string> info = bundle.info;
  info["source_lang"] = bundle.source_lang;
  for (const auto& [lang, split] : bundle.splits) {
    std::vector<SentenceAnnotation> sents;
    for (const auto* part : {&split.train, &split.dev, &split.test})
      for (const auto& ex : *part) {
        sents.push_back(ex.sentence);
        write_file(dir / "clauses" / (ex.id + ".clf"),
                   write_clauses(ClauseDocument{ex.id, ex.text, ex.drs, ex.sentence.alignments}));
      }
    write_file(dir / "conllu" / (lang + ".conllu"), write_conllu(sents));
    auto ids = [](const std::vector<Example>& xs) {
      std::vector<std::string> out;
      for (const auto& x : xs) out.push_back(x.id);
      return out;
    };
    if (lang == bundle.source_lang) {
      write_manifest(dir / "manifest", Manifest{ids(split.train), ids(split.dev), ids(split.test)});
    } else {
      write_file(dir / ("manifest." + lang), join_lines(ids(split.test)));
    }
    info["size." + lang + ".train"] = std::to_string(split.train.size());
    info["size." + lang + ".dev"] = std::to_string(split.dev.size());
    info["size." + lang + ".test"] = std::to_string(split.test.size());
  }
  const auto& v = bundle.vocab;
  write_file(dir / "vocab" / "words.txt", v.words.serialize());
  write_file(dir / "vocab" / "lemmas.txt", v.lemmas.serialize());
  write_file(dir / "vocab" / "upos.txt", v.upos.serialize());
  write_file(dir / "vocab" / "deprels.txt", v.deprels.serialize());
  write_file(dir / "vocab" / "skeleton.txt", v.skeleton.serialize());
  write_file(dir / "vocab" / "predicates.txt", v.predicates.serialize());
  write_file(dir / "vocab" / "referents.txt", v.referents.serialize());
  if (bundle.embeddings) {
    write_file(dir / "embeddings.vec", bundle.embeddings->to_text());
    std::string unk;
    char buf[32];
    for (double x : bundle.embeddings->unk()) {
      std::snprintf(buf, sizeof buf, "%s%.17g", unk.empty() ? "" : " ", x);
      unk += buf;
    }
    write_file(dir / "embeddings.unk", unk + "\n");
    info["embeddings.dim"] = std::to_string(bundle.embeddings->dim());
  }
  info["vocab"] = v.hash_summary();
  std::string text;
  for (const auto& [k, val] : info) text += k + " = " + val + "\n";
  write_file(dir / "bundle.manifest", text);
}

Bundle load_bundle(const fs::path& dir) {
  Bundle bundle;
  const std::string manifest_text = read_file(dir / "bundle.manifest");
  for (auto line : split_lines(manifest_text)) {
    auto eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    bundle.info[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  bundle.source_lang = bundle.info.count("source_lang") ? bundle.info["source_lang"] : "en";

  for (const auto& e : fs::directory_iterator(dir / "conllu")) {
    if (e.path().extension() != ".conllu") continue;
    const std::string lang = e.path().stem().string();
    std::map<std::string, Example> pairs;
    for (auto& s : read_conllu(read_file(e.path()))) {
      fs::path clf = dir / "clauses" / (s.id + ".clf");
      try {
        ClauseDocument doc = parse_clause_document(read_file(clf));
        s.alignments = doc.alignments;
        pairs.emplace(s.id, Example{s.id, lang, s, std::move(doc.drs), doc.text});
      } catch (const Error& err) {
        rethrow_with(clf, err);
      }
    }
    std::vector<Example> list;
    for (auto& [id, ex] : pairs) list.push_back(ex);
    if (lang == bundle.source_lang) {
      bundle.splits[lang] = assemble_split(list, read_manifest(dir / "manifest"));
    } else {
      Manifest m;
      m.test = read_id_list(dir / ("manifest." + lang));
      bundle.splits[lang] = assemble_split(list, m);
    }
  }
  auto vocab = [&](const char* name) { return Vocabulary::deserialize(read_file(dir / "vocab" / name)); };
  bundle.vocab.words = vocab("words.txt");
  bundle.vocab.lemmas = vocab("lemmas.txt");
  bundle.vocab.upos = vocab("upos.txt");
  bundle.vocab.deprels = vocab("deprels.txt");
  bundle.vocab.skeleton = vocab("skeleton.txt");
  bundle.vocab.predicates = vocab("predicates.txt");
  bundle.vocab.referents = vocab("referents.txt");

  std::map<std::string, int> roles;
  for (const auto& ex : bundle.splits[bundle.source_lang].train)
    for (const auto& b : ex.drs.boxes)
      for (const auto& c : b.conditions)
        if (const auto* bi = std::get_if<Binary>(&c.body)) roles[bi->role] = 1;
  bundle.vocab.classify_predicates(bundle.lexicon(), roles);

  if (fs::exists(dir / "embeddings.vec")) {
    const int dim = std::stoi(bundle.info.at("embeddings.dim"));
    EmbeddingTable table = load_embeddings(read_file(dir / "embeddings.vec"), dim);
    std::vector<double> unk;
    const std::string unk_text = read_file(dir / "embeddings.unk");
    for (auto t : split_whitespace(unk_text)) unk.push_back(std::stod(std::string(t)));
    table.set_unk(unk);
    bundle.embeddings = std::move(table);
  }
  return bundle;
}

}  // namespace xdrs
