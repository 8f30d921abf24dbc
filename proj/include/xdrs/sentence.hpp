#pragma once

#include <string>
#include <vector>

#include "xdrs/drs.hpp"

namespace xdrs {

// One dependency-parsed input sentence. Token positions are 0-based in the
// vectors; `heads` uses CoNLL-U numbering (0 = artificial root, k = token k-1).
struct SentenceAnnotation {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<std::string> lemmas;
  std::vector<std::string> upos;
  std::vector<int> heads;
  std::vector<std::string> deprels;
  std::vector<TokenAlignment> alignments;

  std::size_t size() const { return tokens.size(); }
};

// Throws MalformedConllu unless all columns have the same length n >= 1 and
// the heads form a single-rooted acyclic tree whose root relation is `root`.
void validate(const SentenceAnnotation& s);

// Children of every token (0-based), in token order.
std::vector<std::vector<int>> children_of(const SentenceAnnotation& s);
int root_of(const SentenceAnnotation& s);

}  // namespace xdrs
