#pragma once

// Clause-level DRS scoring in the style of Counter: both DRSs are flattened
// into clauses over variables and box ids, and a sort-respecting injective
// alignment of the predicted symbols onto the gold symbols is searched for
// by hill climbing with restarts.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xdrs/drs.hpp"
#include "xdrs/lexicon.hpp"

namespace xdrs {

enum class ClauseKind { Ref, Pred, Role, Op, Rel };

struct Term {
  enum class Type { Symbol, Constant };
  Type type = Type::Symbol;
  int symbol = -1;       // index into ClauseSet::symbols
  std::string constant;  // unquoted
  friend bool operator==(const Term&, const Term&) = default;
};

struct Clause {
  ClauseKind kind = ClauseKind::Ref;
  std::string label;  // REF, predicate, role, operator or relation label
  std::vector<Term> terms;
  std::string str(const std::vector<std::string>& symbols) const;
};

//   (box REF var) (box pred var) (box role arg arg) (box OP box [box]) (REL label box box)
struct ClauseSet {
  std::vector<Clause> clauses;
  std::vector<std::string> symbols;  // variable names and box ids
  std::vector<char> sorts;           // x e t s for variables, b for boxes
  std::size_t size() const { return clauses.size(); }
};

ClauseSet to_clauses(const Drs& drs);

struct AlignOptions {
  int restarts = 20;
  int max_iters = 1000;
  std::uint64_t seed = 1;
};

struct AlignmentResult {
  std::vector<int> map;  // predicted symbol -> gold symbol, -1 unaligned
  int matched = 0;
};

// Clauses matched under a fixed alignment (multiset matching).
int matched_clauses(const ClauseSet& pred, const ClauseSet& gold, const std::vector<int>& map);
AlignmentResult best_alignment(const ClauseSet& pred, const ClauseSet& gold, const AlignOptions& options = {});

struct ScoreReport {
  long matched = 0;
  long predicted = 0;
  long gold = 0;

  double precision() const { return predicted ? static_cast<double>(matched) / predicted : 0.0; }
  double recall() const { return gold ? static_cast<double>(matched) / gold : 0.0; }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  ScoreReport& operator+=(const ScoreReport& o) {
    matched += o.matched;
    predicted += o.predicted;
    gold += o.gold;
    return *this;
  }
};

enum class Category { Operators, NonLexicalUnary, NonLexicalBinary, Lexical };
inline constexpr Category kCategories[] = {Category::Operators, Category::NonLexicalUnary,
                                           Category::NonLexicalBinary, Category::Lexical};
std::string_view to_string(Category c);
// Operators: logic operators and discourse relations. Roles are binary
// non-lexical. Unary predicates are lexical per the lexicon, otherwise
// non-lexical unary, which also holds the REF clauses.
Category category_of(const Clause& clause, const Lexicon& lexicon);

struct CategoryReport {
  std::map<Category, ScoreReport> buckets;
  ScoreReport& operator[](Category c) { return buckets[c]; }
  const ScoreReport& at(Category c) const;
  CategoryReport& operator+=(const CategoryReport& o);
};

// Per-bucket scores under an alignment fixed on the full clause sets.
CategoryReport category_breakdown(const ClauseSet& pred, const ClauseSet& gold, const std::vector<int>& map,
                                  const Lexicon& lexicon);

struct DocumentScore {
  ScoreReport overall;
  CategoryReport categories;
};

DocumentScore score(const Drs& pred, const Drs& gold, const Lexicon& lexicon = Lexicon::standard(),
                    const AlignOptions& options = {});

// Micro-average over documents: sums of matched and clause counts.
struct CorpusScore {
  ScoreReport overall;
  CategoryReport categories;
  long documents = 0;
  void add(const DocumentScore& d);
};

// Rendering: an aligned text table, and one key=value record per line.
std::string render_score_table(const std::vector<std::pair<std::string, ScoreReport>>& rows);
std::string render_category_table(const CategoryReport& report);
std::string score_record(const std::map<std::string, std::string>& keys, const ScoreReport& s);

}  // namespace xdrs
