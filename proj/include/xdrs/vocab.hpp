#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace xdrs {

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kCopy = 4;
  static constexpr int kReserved = 5;

  Vocabulary();

  // Symbols with count >= min_freq, most frequent first, ties in byte order.
  static Vocabulary from_counts(const std::map<std::string, int>& counts, int min_freq);

  int add(std::string_view symbol);
  int id(std::string_view symbol) const;  // kUnk when absent
  bool contains(std::string_view symbol) const;
  const std::string& symbol(int id) const { return symbols_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(symbols_.size()); }
  const std::vector<std::string>& symbols() const { return symbols_; }

  std::string serialize() const;  // one symbol per line, reserved included
  static Vocabulary deserialize(std::string_view text);
  std::uint64_t hash() const;

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

enum class PredicateClass { Reserved, NonLexicalUnary, Role, Lexical };

// Everything the encoder and the three decoder stages index by id.
struct VocabularySet {
  Vocabulary words;
  Vocabulary lemmas;
  Vocabulary upos;
  Vocabulary deprels;
  Vocabulary skeleton;    // structural tokens
  Vocabulary predicates;  // non-lexical unary, roles, generated lexical labels
  Vocabulary referents;   // NEW:<sort>, variable names, quoted constants
  std::vector<PredicateClass> predicate_class;

  void classify_predicates(const class Lexicon& lexicon, const std::map<std::string, int>& role_counts);
  std::string hash_summary() const;
};

inline constexpr int kMaxNamesPerSort = 96;
std::string new_variable_token(char sort);

}  // namespace xdrs
