#include "xdrs/embeddings.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>

#include "xdrs/error.hpp"
#include "xdrs/text_util.hpp"

namespace xdrs {

std::string fold_case(std::string_view s) {
  std::string out(s);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto c = static_cast<unsigned char>(out[i]);
    if (c >= 'A' && c <= 'Z') {
      out[i] = static_cast<char>(c + 32);
    } else if (c == 0xC3 && i + 1 < out.size()) {
      auto d = static_cast<unsigned char>(out[i + 1]);
      if (d >= 0x80 && d <= 0x9E && d != 0x97) out[i + 1] = static_cast<char>(d + 0x20);
      ++i;
    }
  }
  return out;
}

EmbeddingTable::EmbeddingTable(int dim) : dim_(dim), sum_(dim, 0.0), unk_(dim, 0.0) {
  if (dim <= 0) fail(ErrorKind::DimensionMismatch, "embedding dimension must be positive");
}

bool EmbeddingTable::add(std::string word, std::span<const double> vector) {
  if (static_cast<int>(vector.size()) != dim_)
    fail(ErrorKind::DimensionMismatch, "vector for '" + word + "' has " + std::to_string(vector.size()) +
                                           " values, expected " + std::to_string(dim_));
  if (index_.count(word)) return false;
  index_.emplace(word, static_cast<int>(words_.size()));
  words_.push_back(std::move(word));
  data_.insert(data_.end(), vector.begin(), vector.end());
  const double n = static_cast<double>(words_.size());
  for (int j = 0; j < dim_; ++j) {
    sum_[j] += vector[j];
    unk_[j] = sum_[j] / n;
  }
  return true;
}

void EmbeddingTable::set_unk(std::span<const double> v) {
  if (static_cast<int>(v.size()) != dim_) fail(ErrorKind::DimensionMismatch, "UNK vector has wrong dimension");
  unk_.assign(v.begin(), v.end());
}

std::optional<int> EmbeddingTable::index_of(std::string_view word) const {
  if (auto it = index_.find(std::string(word)); it != index_.end()) return it->second;
  if (auto it = index_.find(fold_case(word)); it != index_.end()) return it->second;
  return std::nullopt;
}

std::span<const double> EmbeddingTable::lookup(std::string_view word) const {
  if (auto i = index_of(word)) return row(*i);
  return unk_;
}

std::span<const double> EmbeddingTable::row(int index) const {
  return {data_.data() + static_cast<std::size_t>(index) * dim_, static_cast<std::size_t>(dim_)};
}

std::string EmbeddingTable::to_text() const {
  std::string out = std::to_string(words_.size()) + " " + std::to_string(dim_) + "\n";
  char buf[32];
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out += words_[i];
    for (double v : row(static_cast<int>(i))) {
      std::snprintf(buf, sizeof buf, " %.17g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

EmbeddingTable load_embeddings(std::string_view text, int expected_dim) {
  EmbeddingTable table(expected_dim);
  bool first = true;
  int line_no = 0;
  std::vector<double> values;
  for (auto line : split_lines(text)) {
    ++line_no;
    auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (first) {
      first = false;
      if (fields.size() == 2) {
        long count = 0, dim = 0;
        auto r1 = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), count);
        auto r2 = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), dim);
        if (r1.ec == std::errc{} && r2.ec == std::errc{}) {
          if (dim != expected_dim)
            fail(ErrorKind::DimensionMismatch, "header declares dim " + std::to_string(dim) + ", expected " +
                                                   std::to_string(expected_dim));
          continue;
        }
      }
    }
    values.clear();
    for (std::size_t k = 1; k < fields.size(); ++k) {
      std::string tok(fields[k]);
      char* end = nullptr;
      double v = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size())
        fail(ErrorKind::DimensionMismatch, "line " + std::to_string(line_no) + ": non-numeric value '" + tok + "'");
      values.push_back(v);
    }
    if (static_cast<int>(values.size()) != expected_dim)
      fail(ErrorKind::DimensionMismatch, "line " + std::to_string(line_no) + ": " + std::to_string(values.size()) +
                                             " values, expected " + std::to_string(expected_dim));
    table.add(std::string(fields[0]), values);
  }
  return table;
}

}  // namespace xdrs
