#pragma once

#include <set>
#include <string>
#include <string_view>

namespace xdrs {

// Splits unary predicate labels into non-lexical sort predicates (a closed
// list) and lexical, open-class predicates. When a lemma inventory is
// present, an unlisted label only counts as lexical if it occurs as an
// input lemma.
class Lexicon {
 public:
  static Lexicon standard();

  void add_non_lexical(std::string label) { non_lexical_.insert(std::move(label)); }
  void add_lemma(std::string lemma) { lemmas_.insert(std::move(lemma)); }

  bool is_non_lexical(std::string_view label) const;
  bool is_lexical(std::string_view label) const;
  const std::set<std::string, std::less<>>& non_lexical() const { return non_lexical_; }
  const std::set<std::string, std::less<>>& lemmas() const { return lemmas_; }

 private:
  std::set<std::string, std::less<>> non_lexical_;
  std::set<std::string, std::less<>> lemmas_;
};

}  // namespace xdrs
