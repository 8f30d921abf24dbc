#include <doctest.h>

#include <filesystem>
#include <functional>

#include "support.hpp"
#include "xdrs/conllu.hpp"
#include "xdrs/dataset.hpp"
#include "xdrs/embeddings.hpp"
#include "xdrs/error.hpp"
#include "xdrs/text_util.hpp"

using namespace xdrs;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InternalContractViolation;
}

std::string conllu_line(int id, const std::string& form, const std::string& head, const std::string& rel) {
  return std::to_string(id) + "\t" + form + "\t" + form + "\tX\t_\t_\t" + head + "\t" + rel + "\t_\t_\n";
}

IngestOptions fixture_ingest() {
  IngestOptions o;
  o.clauses_dir = xdrs::testing::fixture_path("corpus/clauses");
  o.conllu_dir = xdrs::testing::fixture_path("corpus/conllu");
  o.embeddings = xdrs::testing::fixture_path("corpus/embeddings.vec");
  o.embedding_dim = 4;
  o.manifest_prefix = xdrs::testing::fixture_path("corpus/split");
  return o;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file(e.path());
  return out;
}

}  // namespace

TEST_CASE("two-token Italian sentence") {
  auto s = read_conllu(read_file(xdrs::testing::fixture_path("io_dormo.conllu")));
  REQUIRE(s.size() == 1);
  CHECK(s[0].size() == 2);
  CHECK(s[0].id == "it-io");
  CHECK(s[0].heads == std::vector<int>{2, 0});
  CHECK(s[0].deprels == std::vector<std::string>{"nsubj", "root"});
  CHECK(s[0].lemmas[1] == "dormire");
  CHECK(root_of(s[0]) == 1);
}

TEST_CASE("conllu edge cases") {
  CHECK(read_conllu("").empty());
  CHECK(kind_of([] { read_conllu(conllu_line(1, "a", "x", "root")); }) == ErrorKind::MalformedConllu);
  CHECK(kind_of([] { read_conllu(conllu_line(1, "a", "2", "dep") + conllu_line(2, "b", "1", "dep")); }) ==
        ErrorKind::MalformedConllu);
  CHECK(kind_of([] { read_conllu(conllu_line(1, "a", "0", "root") + conllu_line(2, "b", "0", "root")); }) ==
        ErrorKind::MalformedConllu);
  CHECK(kind_of([] { read_conllu(conllu_line(1, "a", "0", "nsubj")); }) == ErrorKind::MalformedConllu);
  // Multiword ranges and empty nodes are skipped.
  std::string text = "1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n" + conllu_line(1, "di", "2", "case") +
                     conllu_line(2, "il", "0", "root") + "2.1\tx\t_\t_\t_\t_\t_\t_\t_\t_\n";
  auto s = read_conllu(text);
  REQUIRE(s.size() == 1);
  CHECK(s[0].size() == 2);
}

TEST_CASE("conllu write then read is the identity") {
  auto corpus = xdrs::testing::synthetic_corpus();
  std::vector<SentenceAnnotation> sents;
  for (const auto& ex : corpus) sents.push_back(ex.sentence);
  auto back = read_conllu(write_conllu(sents));
  REQUIRE(back.size() == sents.size());
  for (std::size_t i = 0; i < sents.size(); ++i) {
    CHECK(back[i].id == sents[i].id);
    CHECK(back[i].tokens == sents[i].tokens);
    CHECK(back[i].lemmas == sents[i].lemmas);
    CHECK(back[i].upos == sents[i].upos);
    CHECK(back[i].heads == sents[i].heads);
    CHECK(back[i].deprels == sents[i].deprels);
  }
}

TEST_CASE("embedding loading") {
  std::string text;
  for (const char* w : {"cane", "gatto", "casa"}) {
    text += w;
    for (int k = 0; k < 300; ++k) text += " " + std::to_string((k % 7) * 0.01);
    text += "\n";
  }
  EmbeddingTable t = load_embeddings(text, 300);
  CHECK(t.size() == 3);
  CHECK(t.dim() == 300);
  CHECK(t.lookup("Casa").data() == t.row(*t.index_of("casa")).data());

  EmbeddingTable empty = load_embeddings("0 300\n", 300);
  CHECK(empty.size() == 0);
  CHECK(empty.lookup("anything").size() == 300);

  CHECK(kind_of([] { load_embeddings("a 1 2 3\n", 4); }) == ErrorKind::DimensionMismatch);
  CHECK(kind_of([] { load_embeddings("2 5\n", 4); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("unknown words get the mean vector") {
  EmbeddingTable t = load_embeddings("2 2\na 1 2\nb 3 -2\n", 2);
  auto u = t.lookup("zzz");
  CHECK(u[0] == doctest::Approx(2.0));
  CHECK(u[1] == doctest::Approx(0.0));
  CHECK(fold_case("ÀBC") == "àbc");
}

TEST_CASE("vocabulary construction") {
  auto corpus = xdrs::testing::synthetic_corpus();
  std::vector<Example> two(corpus.begin(), corpus.begin() + 2);
  VocabularySet v = build_vocab(two, 1, Lexicon::standard());
  for (const auto& ex : two)
    for (const auto& w : ex.sentence.tokens) CHECK(v.words.contains(w));
  CHECK(v.words.symbol(Vocabulary::kUnk) == "<unk>");

  VocabularySet v2 = build_vocab(two, 2, Lexicon::standard());
  CHECK(v2.words.contains("the"));
  CHECK(v2.words.id("cat") == Vocabulary::kUnk);

  VocabularySet again = build_vocab(two, 1, Lexicon::standard());
  CHECK(again.hash_summary() == v.hash_summary());

  Vocabulary round = Vocabulary::deserialize(v.words.serialize());
  CHECK(round.symbols() == v.words.symbols());
  CHECK(kind_of([] { Vocabulary::deserialize("a\nb\n"); }) == ErrorKind::ConfigError);
}

TEST_CASE("relation and role labels are non-lexical output symbols") {
  Example fig = xdrs::testing::synthetic_corpus()[6];
  VocabularySet v = build_vocab({fig}, 1, Lexicon::standard());
  CHECK(v.skeleton.contains("(REL:CONTINUATION"));
  for (const char* role : {"Agent", "Theme", "Owner"}) {
    REQUIRE(v.predicates.contains(role));
    CHECK(v.predicate_class[static_cast<std::size_t>(v.predicates.id(role))] == PredicateClass::Role);
  }
  CHECK(v.predicate_class[static_cast<std::size_t>(v.predicates.id("laptop"))] == PredicateClass::Lexical);
}

TEST_CASE("splits by manifest") {
  std::vector<Example> en(4405);
  for (std::size_t i = 0; i < en.size(); ++i) en[i].id = "en" + std::to_string(i);
  Manifest m = manifest_by_counts(en, 3072, 663, 670);
  DatasetSplit s = assemble_split(en, m);
  CHECK(s.train.size() == 3072);
  CHECK(s.dev.size() == 663);
  CHECK(s.test.size() == 670);

  std::vector<Example> it(633);
  for (std::size_t i = 0; i < it.size(); ++i) it[i].id = "it" + std::to_string(i);
  DatasetSplit t = assemble_test_split(it);
  CHECK(t.test.size() == 633);
  CHECK(t.train.empty());

  Manifest overlap = m;
  overlap.dev.push_back(m.train[0]);
  CHECK(kind_of([&] { assemble_split(en, overlap); }) == ErrorKind::PairingError);
  Manifest unknown = m;
  unknown.test.push_back("nope");
  CHECK(kind_of([&] { assemble_split(en, unknown); }) == ErrorKind::PairingError);
}

TEST_CASE("fixture corpus ingestion") {
  Bundle b = ingest_corpus(fixture_ingest());
  REQUIRE(b.splits.count("en"));
  REQUIRE(b.splits.count("it"));
  CHECK(b.splits["en"].train.size() == 3);
  CHECK(b.splits["en"].dev.size() == 1);
  CHECK(b.splits["en"].test.size() == 1);
  CHECK(b.splits["it"].test.size() == 2);
  CHECK(b.splits["it"].train.empty());

  // Presupposition merged, senses stripped, Italian predicates reverted.
  for (const auto& ex : b.splits["en"].train)
    for (const auto& box : ex.drs.boxes) {
      CHECK_FALSE(box.presupposed);
      for (const auto& c : box.conditions)
        if (auto* u = std::get_if<Unary>(&c.body)) CHECK(u->predicate.find('.') == std::string::npos);
    }
  std::set<std::string> it_preds;
  for (const auto& ex : b.splits["it"].test)
    for (const auto& box : ex.drs.boxes)
      for (const auto& c : box.conditions)
        if (auto* u = std::get_if<Unary>(&c.body)) it_preds.insert(u->predicate);
  CHECK(it_preds.count("aprire"));
  CHECK(it_preds.count("gatto"));
  CHECK(it_preds.count("dormire"));
  CHECK_FALSE(it_preds.count("open"));

  for (const auto& ex : b.splits["en"].train)
    for (const auto& d : ex.sentence.deprels) CHECK(b.vocab.deprels.contains(d));
  REQUIRE(b.embeddings);
  CHECK(b.embeddings->dim() == 4);
}

TEST_CASE("bundles are deterministic and reload") {
  const fs::path a = fs::temp_directory_path() / "xdrs_bundle_a";
  const fs::path c = fs::temp_directory_path() / "xdrs_bundle_b";
  fs::remove_all(a);
  fs::remove_all(c);
  write_bundle(a, ingest_corpus(fixture_ingest()));
  write_bundle(c, ingest_corpus(fixture_ingest()));
  CHECK(snapshot(a) == snapshot(c));

  Bundle loaded = load_bundle(a);
  CHECK(loaded.vocab.hash_summary() == ingest_corpus(fixture_ingest()).vocab.hash_summary());
  CHECK(loaded.splits.at("en").train.size() == 3);
  CHECK(loaded.splits.at("it").test.size() == 2);
  fs::remove_all(a);
  fs::remove_all(c);
}

TEST_CASE("clause file without a parse is a pairing error") {
  const fs::path dir = fs::temp_directory_path() / "xdrs_pairing";
  fs::remove_all(dir);
  fs::copy(xdrs::testing::fixture_path("corpus"), dir, fs::copy_options::recursive);
  write_file(dir / "clauses" / "en99.clf", "b1 REF x1\nb1 cat x1\n");
  IngestOptions o = fixture_ingest();
  o.clauses_dir = dir / "clauses";
  CHECK(kind_of([&] { ingest_corpus(o); }) == ErrorKind::PairingError);
  fs::remove_all(dir);
}
