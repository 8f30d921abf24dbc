#include <doctest.h>

#include <string>

#include "support.hpp"
#include "xdrs/clause_format.hpp"
#include "xdrs/error.hpp"
#include "xdrs/evaluator.hpp"
#include "xdrs/text_util.hpp"

using namespace xdrs;

namespace {

Drs fig1() { return parse_clauses(read_file(testing::fixture_path("fig1.clf"))); }

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size())) s.replace(p, from.size(), to);
  return s;
}

// Small random pair whose clause sets have at most `max_symbols` symbols each.
std::pair<ClauseSet, ClauseSet> small_pair(testing::Rng& rng, std::size_t max_symbols) {
  testing::RandomDrsOptions opt;
  opt.max_boxes = 2;
  opt.max_conditions = 5;
  opt.max_referents_per_box = 2;
  while (true) {
    Drs gold = testing::random_drs(rng, opt);
    Drs pred = rng() % 3 == 0 ? testing::random_drs(rng, opt) : testing::perturb(testing::rename_symbols(gold, rng), rng);
    ClauseSet p = to_clauses(pred), g = to_clauses(gold);
    if (p.symbols.size() <= max_symbols && g.symbols.size() <= max_symbols) return {p, g};
  }
}

}  // namespace

TEST_CASE("figure one has eleven clauses") {
  const ClauseSet c = to_clauses(fig1());
  CHECK(c.size() == 11);
  CHECK(c.symbols.size() == 5);  // b2 b3 e1 e2 x1; the host box only carries the relation
  int refs = 0, rels = 0;
  for (const auto& cl : c.clauses) {
    refs += cl.kind == ClauseKind::Ref;
    rels += cl.kind == ClauseKind::Rel;
  }
  CHECK(refs == 3);
  CHECK(rels == 1);
  CHECK(to_clauses(parse_clauses("b1 REF x1\n")).size() == 1);
}

TEST_CASE("identical and renamed DRSs score one") {
  CHECK(score(fig1(), fig1()).overall.f1() == 1.0);
  testing::Rng rng(3);
  for (int i = 0; i < 40; ++i) {
    Drs d = testing::random_drs(rng);
    auto s = score(testing::rename_symbols(d, rng), d);
    CHECK(s.overall.f1() == 1.0);
    CHECK(s.overall.matched == static_cast<long>(to_clauses(d).size()));
  }
}

TEST_CASE("scores are symmetric in matched count") {
  testing::Rng rng(8);
  for (int i = 0; i < 30; ++i) {
    auto [p, g] = small_pair(rng, 6);
    CHECK(best_alignment(p, g).matched == best_alignment(g, p).matched);
  }
}

TEST_CASE("hill climbing finds the brute-force optimum") {
  testing::Rng rng(21);
  for (int i = 0; i < 60; ++i) {
    auto [p, g] = small_pair(rng, 6);
    const int brute = testing::brute_force_matched(p, g);
    const auto found = best_alignment(p, g, AlignOptions{20, 1000, static_cast<std::uint64_t>(i + 1)});
    CHECK(found.matched == brute);
    CHECK(matched_clauses(p, g, found.map) == found.matched);
  }
}

TEST_CASE("alignments are injective and respect sorts") {
  testing::Rng rng(4);
  for (int i = 0; i < 30; ++i) {
    auto [p, g] = small_pair(rng, 8);
    const auto a = best_alignment(p, g);
    std::vector<int> used(g.symbols.size(), 0);
    for (std::size_t s = 0; s < a.map.size(); ++s) {
      if (a.map[s] < 0) continue;
      CHECK(++used[static_cast<std::size_t>(a.map[s])] == 1);
      CHECK(p.sorts[s] == g.sorts[static_cast<std::size_t>(a.map[s])]);
    }
  }
}

TEST_CASE("full score exactly when equal up to renaming") {
  testing::Rng rng(12);
  for (int i = 0; i < 40; ++i) {
    auto [p, g] = small_pair(rng, 6);
    const bool same = testing::brute_force_normal_form(p) == testing::brute_force_normal_form(g);
    const int m = best_alignment(p, g).matched;
    CHECK(same == (m == static_cast<int>(p.size()) && m == static_cast<int>(g.size())));
  }
}

TEST_CASE("a prediction holding half the gold clauses") {
  const Drs gold = parse_clauses("b1 REF x1\nb1 cat x1\nb1 REF x2\nb1 dog x2\n");
  const Drs pred = parse_clauses("b1 REF x1\nb1 dog x1\n");
  const auto s = score(pred, gold).overall;
  CHECK(s.precision() == 1.0);
  CHECK(s.recall() == 0.5);
  CHECK(s.f1() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("dropping conditions keeps precision at one") {
  testing::Rng rng(30);
  for (int i = 0; i < 30; ++i) {
    Drs gold = testing::random_drs(rng);
    Drs pred = gold;
    for (auto& box : pred.boxes)
      if (box.conditions.size() > 1) box.conditions.pop_back();
    try {
      validate(pred);
    } catch (const Error&) {
      continue;
    }
    auto s = score(pred, gold).overall;
    CHECK(s.precision() == 1.0);
    CHECK(s.recall() <= 1.0);
  }
}

TEST_CASE("category breakdown") {
  const std::string text = read_file(testing::fixture_path("fig1.clf"));
  const Drs gold = parse_clauses(text);
  const Drs pred = parse_clauses(replace_all(text, "CONTINUATION", "NARRATION"));
  const auto s = score(pred, gold);
  CHECK(s.categories.at(Category::Operators).gold == 1);
  CHECK(s.categories.at(Category::Operators).recall() == 0.0);
  CHECK(s.categories.at(Category::Lexical).f1() == 1.0);
  CHECK(s.categories.at(Category::NonLexicalBinary).gold == 4);
  CHECK(s.overall.matched == 10);

  Clause pred_clause{ClauseKind::Pred, "person", {}};
  Clause lex_clause{ClauseKind::Pred, "laptop", {}};
  CHECK(category_of(pred_clause, Lexicon::standard()) == Category::NonLexicalUnary);
  CHECK(category_of(lex_clause, Lexicon::standard()) == Category::Lexical);
}

TEST_CASE("categories partition the clauses") {
  testing::Rng rng(44);
  for (int i = 0; i < 30; ++i) {
    Drs gold = testing::random_drs(rng);
    Drs pred = testing::perturb(testing::rename_symbols(gold, rng), rng);
    const auto s = score(pred, gold);
    ScoreReport sum;
    for (Category c : kCategories) sum += s.categories.at(c);
    CHECK(sum.matched == s.overall.matched);
    CHECK(sum.predicted == s.overall.predicted);
    CHECK(sum.gold == s.overall.gold);
  }
}

TEST_CASE("corpus scores are micro-averaged") {
  CorpusScore corpus;
  DocumentScore a, b;
  a.overall = {3, 4, 6};
  b.overall = {1, 1, 10};
  corpus.add(a);
  corpus.add(b);
  CHECK(corpus.documents == 2);
  CHECK(corpus.overall.precision() == doctest::Approx(4.0 / 5.0));
  CHECK(corpus.overall.recall() == doctest::Approx(4.0 / 16.0));
  CHECK(ScoreReport{}.f1() == 0.0);
}

TEST_CASE("rendering") {
  ScoreReport s{2, 4, 8};
  CHECK(score_record({{"lang", "it"}}, s) == "lang=it precision=0.5000 recall=0.2500 f1=0.3333 matched=2 predicted=4 gold=8");
  const std::string table = render_score_table({{"de", s}});
  CHECK(table.find("0.3333") != std::string::npos);
  CHECK(render_category_table(CategoryReport{}).find("non-lexical binary") != std::string::npos);
}
