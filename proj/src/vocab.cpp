#include "xdrs/vocab.hpp"

#include <algorithm>

#include "xdrs/error.hpp"
#include "xdrs/lexicon.hpp"
#include "xdrs/text_util.hpp"

namespace xdrs {

Vocabulary::Vocabulary() {
  for (const char* s : {"<pad>", "<unk>", "<s>", "</s>", "<copy>"}) add(s);
}

Vocabulary Vocabulary::from_counts(const std::map<std::string, int>& counts, int min_freq) {
  std::vector<std::pair<std::string, int>> items(counts.begin(), counts.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  for (const auto& [s, c] : items)
    if (c >= min_freq) v.add(s);
  return v;
}

int Vocabulary::add(std::string_view symbol) {
  std::string key(symbol);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const int id = static_cast<int>(symbols_.size());
  index_.emplace(key, id);
  symbols_.push_back(std::move(key));
  return id;
}

int Vocabulary::id(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view symbol) const { return index_.count(std::string(symbol)) > 0; }

std::string Vocabulary::serialize() const {
  std::string out;
  for (const auto& s : symbols_) out += s + "\n";
  return out;
}

Vocabulary Vocabulary::deserialize(std::string_view text) {
  Vocabulary v;
  auto lines = split_lines(text);
  if (lines.size() < static_cast<std::size_t>(kReserved))
    fail(ErrorKind::ConfigError, "vocabulary is missing its reserved symbols");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i < static_cast<std::size_t>(kReserved)) {
      if (lines[i] != v.symbols_[i]) fail(ErrorKind::ConfigError, "vocabulary reserved symbols out of order");
      continue;
    }
    if (v.contains(lines[i])) fail(ErrorKind::ConfigError, "duplicate vocabulary symbol '" + std::string(lines[i]) + "'");
    v.add(lines[i]);
  }
  return v;
}

std::uint64_t Vocabulary::hash() const { return fnv1a(serialize()); }

void VocabularySet::classify_predicates(const Lexicon& lexicon, const std::map<std::string, int>& role_counts) {
  predicate_class.assign(static_cast<std::size_t>(predicates.size()), PredicateClass::Reserved);
  for (int i = Vocabulary::kReserved; i < predicates.size(); ++i) {
    const std::string& s = predicates.symbol(i);
    if (role_counts.count(s))
      predicate_class[i] = PredicateClass::Role;
    else if (lexicon.is_non_lexical(s))
      predicate_class[i] = PredicateClass::NonLexicalUnary;
    else
      predicate_class[i] = PredicateClass::Lexical;
  }
}

std::string VocabularySet::hash_summary() const {
  return "words=" + hex64(words.hash()) + " lemmas=" + hex64(lemmas.hash()) + " upos=" + hex64(upos.hash()) +
         " deprels=" + hex64(deprels.hash()) + " skeleton=" + hex64(skeleton.hash()) +
         " predicates=" + hex64(predicates.hash()) + " referents=" + hex64(referents.hash());
}

std::string new_variable_token(char sort) { return std::string("NEW:") + sort; }

}  // namespace xdrs
