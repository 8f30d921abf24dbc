#include <doctest.h>

#include <functional>
#include <regex>

#include "support.hpp"
#include "xdrs/clause_format.hpp"
#include "xdrs/drs_transform.hpp"
#include "xdrs/drs_tree.hpp"
#include "xdrs/error.hpp"
#include "xdrs/evaluator.hpp"
#include "xdrs/stages.hpp"
#include "xdrs/text_util.hpp"

using namespace xdrs;
using xdrs::testing::Rng;

namespace {

Drs fig1() { return parse_clauses(read_file(xdrs::testing::fixture_path("fig1.clf"))); }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InternalContractViolation;
}

int leaf_count(const TreeNode& n, const std::string& label) {
  if (n.is_leaf()) return n.label == label;
  int c = 0;
  for (const auto& ch : n.children) c += leaf_count(ch, label);
  return c;
}

}  // namespace

TEST_CASE("figure one parses into three boxes and one relation") {
  Drs d = fig1();
  CHECK(d.boxes.size() == 3);
  CHECK(d.relations.size() == 1);
  CHECK(d.relations[0].label == "CONTINUATION");
  CHECK(d.top == "b1");
  CHECK(d.referent_count() == 3);
  CHECK(d.condition_count() == 7);
}

TEST_CASE("clause parser errors") {
  CHECK(kind_of([] { parse_clauses(""); }) == ErrorKind::EmptyInput);
  CHECK(kind_of([] { parse_clauses("% only a comment\n"); }) == ErrorKind::EmptyInput);
  CHECK(kind_of([] { parse_clauses("b1 REF e1\nb1 Agent e1 x9\n"); }) == ErrorKind::UnboundVariable);
  CHECK(kind_of([] { parse_clauses("b1 XOR b2\nb2 REF x1\n"); }) == ErrorKind::UnknownOperator);
  CHECK(kind_of([] { parse_clauses("b1 NOT b2\nb2 NOT b1\n"); }) == ErrorKind::CyclicStructure);
  CHECK(kind_of([] { parse_clauses("b1 REF x1\nb1 REF x1\n"); }) == ErrorKind::InvalidDrs);
}

TEST_CASE("variables of an outer box are visible in embedded boxes but not the reverse") {
  CHECK_NOTHROW(parse_clauses("b1 REF x1\nb1 NOT b2\nb2 REF e1\nb2 Agent e1 x1\n"));
  CHECK(kind_of([] { parse_clauses("b1 REF x1\nb1 NOT b2\nb2 REF e1\nb1 Agent e1 x1\n"); }) ==
        ErrorKind::UnboundVariable);
  // The consequent of an implication sees the antecedent.
  CHECK_NOTHROW(parse_clauses("b1 IMP b2 b3\nb2 REF x1\nb2 dog x1\nb3 REF e1\nb3 Agent e1 x1\n"));
  CHECK(kind_of([] { parse_clauses("b1 DIS b2 b3\nb2 REF x1\nb3 REF e1\nb3 Agent e1 x1\n"); }) ==
        ErrorKind::UnboundVariable);
}

TEST_CASE("clause writer round-trips") {
  Drs d = fig1();
  Drs again = parse_clauses(write_clauses(d));
  CHECK(write_clauses(again) == write_clauses(d));
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    Drs r = xdrs::testing::random_drs(rng);
    const std::string once = write_clauses(parse_clauses(write_clauses(r)));
    CHECK(write_clauses(parse_clauses(once)) == once);
    CHECK(score(parse_clauses(once), r).overall.f1() == doctest::Approx(1.0));
  }
}

TEST_CASE("presupposed box merges into its only consumer") {
  Drs raw = parse_clauses(read_file(xdrs::testing::fixture_path("fig1_presup.clf")));
  CHECK(raw.boxes.size() == 4);
  Drs merged = merge_presuppositions(raw);
  CHECK(merged.boxes.size() == 3);
  const Box* b3 = merged.find("b3");
  REQUIRE(b3);
  CHECK(std::count(b3->referents.begin(), b3->referents.end(), "x1") == 1);
  for (const auto& b : merged.boxes) CHECK_FALSE(b.presupposed);
  CHECK(score(merged, fig1()).overall.f1() == doctest::Approx(1.0));
  CHECK(write_clauses(merge_presuppositions(merged)) == write_clauses(merged));
  CHECK(write_clauses(merge_presuppositions(fig1())) == write_clauses(fig1()));
}

TEST_CASE("presupposition used by two sibling boxes is ambiguous") {
  const char* text =
      "b1 CONTINUATION b2 b3\nb2 REF e1\nb2 Theme e1 x1\nb3 REF e2\nb3 Theme e2 x1\n"
      "b4 PRESUPPOSED\nb4 REF x1\nb4 laptop x1\n";
  CHECK(kind_of([&] { merge_presuppositions(parse_clauses(text)); }) == ErrorKind::AmbiguousMerge);
}

TEST_CASE("sense stripping") {
  CHECK(strip_sense("open.v.01") == "open");
  CHECK(strip_sense("laptop") == "laptop");
  CHECK(strip_sense(strip_sense("sit_down.v.01")) == "sit_down");
  const std::regex sense(R"(^(.+?)\.[a-z]\.\d+$)");
  for (const char* s : {"cat.n.01", "run.v.12", "red.a.03", "time.n.08"}) {
    std::cmatch m;
    REQUIRE(std::regex_match(s, m, sense));
    CHECK(strip_sense(s) == m[1].str());
  }
  Drs d = parse_clauses("b1 REF e1\nb1 open.v.01 e1\nb1 Agent e1 \"speaker\"\n");
  Drs once = strip_senses(d);
  CHECK(write_clauses(strip_senses(once)) == write_clauses(once));
  CHECK(std::get<Unary>(once.boxes[0].conditions[0].body).predicate == "open");
  CHECK(std::get<Binary>(once.boxes[0].conditions[1].body).role == "Agent");
}

TEST_CASE("tree duplicates re-entrant variables") {
  DrsTree t = to_tree(fig1());
  CHECK(leaf_count(t, "x1") == 4);  // REF x1, laptop, Owner, Theme
  CHECK(leaf_count(t, "e2") == 4);  // REF e2, open, Agent, Theme
  Drs one = parse_clauses("b1 REF x1\nb1 cat x1\n");
  DrsTree small = to_tree(one);
  CHECK(tree_depth(small) == 3);
  CHECK(node_count(small) == 1 + 2 + 3);
}

TEST_CASE("tree node count has a closed form") {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    Drs d = xdrs::testing::random_drs(rng);
    std::size_t expected = 0;
    for (const auto& b : d.boxes) {
      expected += 1 + 2 * b.referents.size();
      for (const auto& c : b.conditions) {
        if (c.is_unary()) expected += 3;
        if (c.is_binary()) expected += 4;
        if (c.is_operator()) expected += 2;  // OP node and its label leaf
      }
    }
    expected += 2 * d.relations.size();  // REL node and its label leaf
    CHECK(node_count(to_tree(d)) == expected);
  }
}

TEST_CASE("linearization round-trips") {
  DrsTree t = to_tree(fig1());
  LinearSeq s = linearize(t);
  CHECK(delinearize(s) == t);
  CHECK(linearize(delinearize(LinearSeq::parse(s.str()))).str() == s.str());
  TreeNode tiny{"root", {TreeNode{"leaf", {}}}};
  LinearSeq ts = linearize(tiny);
  CHECK(ts.tokens.size() == 4);
  CHECK(delinearize(ts) == tiny);
  CHECK(kind_of([] { delinearize(LinearSeq::parse("( (")); }) == ErrorKind::MalformedSequence);
  CHECK(kind_of([] { delinearize(LinearSeq{}); }) == ErrorKind::EmptyInput);
  CHECK(kind_of([] { delinearize(LinearSeq::parse("( DRS ) )")); }) == ErrorKind::MalformedSequence);
}

TEST_CASE("from_tree inverts to_tree up to renaming") {
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    Drs d = xdrs::testing::random_drs(rng);
    Drs back = from_tree(delinearize(linearize(to_tree(d))));
    CHECK(score(back, d).overall.f1() == doctest::Approx(1.0));
    CHECK(delinearize(linearize(to_tree(d))) == to_tree(d));
  }
  Drs one = from_tree(to_tree(parse_clauses("b1 REF x1\nb1 cat x1\n")));
  CHECK(one.boxes.size() == 1);
  CHECK(one.condition_count() == 1);
}

TEST_CASE("variable sorts survive the tree") {
  Rng rng(8);
  for (int i = 0; i < 30; ++i) {
    Drs d = xdrs::testing::random_drs(rng);
    Drs back = from_tree(to_tree(d));
    std::map<char, int> a, b;
    for (const auto& box : d.boxes)
      for (const auto& r : box.referents) ++a[r.front()];
    for (const auto& box : back.boxes)
      for (const auto& r : box.referents) ++b[r.front()];
    CHECK(a == b);
  }
}

TEST_CASE("malformed trees are rejected") {
  TreeNode cond_without_box{"PRED", {TreeNode{"cat", {}}, TreeNode{"x1", {}}}};
  CHECK(kind_of([&] { from_tree(cond_without_box); }) == ErrorKind::MalformedTree);
  TreeNode leaf_in_box{"DRS", {TreeNode{"x1", {}}}};
  CHECK(kind_of([&] { from_tree(leaf_in_box); }) == ErrorKind::MalformedTree);
}

TEST_CASE("predicate reversion uses aligned lemmas") {
  ClauseDocument doc = parse_clause_document(read_file(xdrs::testing::fixture_path("corpus/clauses/it01.clf")));
  SentenceAnnotation s;
  s.tokens = {"Io", "apro", "il", "portatile"};
  s.lemmas = {"io", "aprire", "il", "portatile"};
  s.upos = {"PRON", "VERB", "DET", "NOUN"};
  s.heads = {2, 0, 4, 2};
  s.deprels = {"nsubj", "root", "det", "obj"};
  s.alignments = doc.alignments;
  RevertResult r = revert_predicates(strip_senses(doc.drs), s);
  CHECK(r.reverted == 2);
  CHECK(r.unaligned == 0);
  std::vector<std::string> preds;
  for (const auto& c : r.drs.boxes[0].conditions)
    if (auto* u = std::get_if<Unary>(&c.body)) preds.push_back(u->predicate);
  CHECK(preds == std::vector<std::string>{"aprire", "portatile"});

  // Non-lexical conditions stay.
  Drs nl = parse_clauses("b1 REF x1\nb1 person x1\nb1 Name x1 \"io\"\n");
  s.alignments = {{1, 2, false}};
  CHECK(write_clauses(revert_predicates(nl, s).drs) == write_clauses(nl));

  // Two aligned tokens: the head wins; without a head the leftmost.
  Drs one = parse_clauses("b1 REF e1\nb1 open e1\n");
  s.alignments = {{1, 2, false}, {2, 2, true}};
  CHECK(std::get<Unary>(revert_predicates(one, s).drs.boxes[0].conditions[0].body).predicate == "aprire");
  s.alignments = {{4, 2, false}, {2, 2, false}};
  CHECK(std::get<Unary>(revert_predicates(one, s).drs.boxes[0].conditions[0].body).predicate == "aprire");
  s.alignments = {};
  RevertResult none = revert_predicates(one, s);
  CHECK(none.unaligned == 1);
  CHECK(std::get<Unary>(none.drs.boxes[0].conditions[0].body).predicate == "open");
}

TEST_CASE("stage split and assembly are inverse") {
  Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    DrsTree t = to_tree(canonicalize(xdrs::testing::random_drs(rng)));
    StageTargets s = split_stages(t);
    CHECK(assemble_tree(s.skeleton, s.predicates, s.referents) == t);
    SkeletonLayout layout = SkeletonLayout::analyze(s.skeleton);
    CHECK(layout.placeholders.size() == s.predicates.size());
    CHECK(layout.slots.size() == s.referents.size());
  }
  StageTargets f = split_stages(to_tree(fig1()));
  CHECK(kind_of([&] { assemble_tree(f.skeleton, {}, f.referents); }) == ErrorKind::InternalContractViolation);
}

TEST_CASE("skeleton grammar always admits a balanced completion") {
  Rng rng(10);
  const std::vector<std::string> vocab{"(DRS", ")", "REF", "P1", "P2", "(OP:NOT", "(OP:IMP", "(REL:CONTRAST"};
  for (int trial = 0; trial < 300; ++trial) {
    SkeletonGrammar g(24, 6, 10);
    std::vector<std::string> seq;
    while (!g.done()) {
      std::vector<std::string> legal;
      for (const auto& t : vocab)
        if (g.allows(t)) legal.push_back(t);
      REQUIRE_FALSE(legal.empty());
      const auto& t = legal[std::uniform_int_distribution<std::size_t>(0, legal.size() - 1)(rng)];
      g.push(t);
      seq.push_back(t);
    }
    CHECK(seq.size() <= 24);
    CHECK_NOTHROW(SkeletonLayout::analyze(seq));
  }
}

TEST_CASE("close_skeleton completes truncated prefixes") {
  auto closed = close_skeleton({"(DRS", "REF", "(OP:IMP", "(DRS", "P1"});
  CHECK(closed == std::vector<std::string>{"(DRS", "REF", "(OP:IMP", "(DRS", "P1", ")", "(DRS", ")", ")", ")"});
  CHECK_NOTHROW(SkeletonLayout::analyze(closed));
}

TEST_CASE("canonical names follow first appearance") {
  Drs c = canonicalize(parse_clauses("b7 REF x5\nb7 REF e9\nb7 cat x5\nb7 Agent e9 x5\n"));
  CHECK(c.top == "b1");
  CHECK(c.boxes[0].referents == std::vector<std::string>{"x1", "e1"});
}
