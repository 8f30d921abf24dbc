#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace xdrs {

// Lowercases ASCII and the Latin-1 supplement block of UTF-8.
std::string fold_case(std::string_view s);

// Pre-trained word vectors. Lookups try the exact form, then the
// case-folded form; misses return the UNK vector (mean of all rows).
class EmbeddingTable {
 public:
  explicit EmbeddingTable(int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  bool trainable = false;

  // Returns false if the word is already present (first row wins).
  bool add(std::string word, std::span<const double> vector);

  std::optional<int> index_of(std::string_view word) const;
  std::span<const double> lookup(std::string_view word) const;
  std::span<const double> row(int index) const;
  std::span<const double> unk() const { return unk_; }
  // Overrides the mean, e.g. for a table filtered from a larger one.
  void set_unk(std::span<const double> v);
  const std::vector<std::string>& words() const { return words_; }

  // word2vec text with a "count dim" header.
  std::string to_text() const;

 private:
  int dim_;
  std::vector<std::string> words_;
  std::vector<double> data_;
  std::unordered_map<std::string, int> index_;
  std::vector<double> sum_;
  std::vector<double> unk_;
};

// word2vec text: optional "count dim" header, then "word v1 ... vd" rows.
// Any row (or header) disagreeing with expected_dim -> DimensionMismatch.
EmbeddingTable load_embeddings(std::string_view text, int expected_dim);

}  // namespace xdrs
