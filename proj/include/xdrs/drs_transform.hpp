#pragma once

#include <string>

#include "xdrs/drs.hpp"
#include "xdrs/lexicon.hpp"
#include "xdrs/sentence.hpp"

namespace xdrs {

// Moves every presupposed box into the box that consumes its referents.
// With several consumers the merge goes to the one dominating all others;
// otherwise AmbiguousMerge is raised.
Drs merge_presuppositions(const Drs& drs);

// "open.v.01" -> "open" on unary predicates.
std::string strip_sense(std::string_view label);
Drs strip_senses(const Drs& drs);

struct RevertResult {
  Drs drs;
  int reverted = 0;
  int unaligned = 0;  // lexical predicates kept in their original form
};

// Replaces aligned lexical predicates by the lemma of the aligned token.
// Several aligned tokens: head-marked first, leftmost among equals.
RevertResult revert_predicates(const Drs& drs, const SentenceAnnotation& sentence,
                               const Lexicon& lexicon = Lexicon::standard());

// Makes an arbitrary string usable as a predicate label.
std::string sanitize_label(std::string_view s);

}  // namespace xdrs
