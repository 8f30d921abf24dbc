#pragma once

// Line-oriented clause notation for DRSs.
//
//   % id p00/d0001            document id (optional)
//   % text I opened my laptop raw sentence (optional)
//   % align 3 5 head          token 3 aligned to clause line 5, head token
//   b1 REF x1                 referent declaration
//   b1 laptop x1              unary condition
//   b1 Owner x1 "speaker"     binary condition; constants are quoted
//   b1 NOT b2                 logic operator (NOT POS NEC | IMP DIS DUP)
//   b1 CONTINUATION b2 b3     discourse relation hosted by b1
//   b4 PRESUPPOSED            marks b4 as a presupposed box
//   b5                        bare box declaration
//
// Clause lines are numbered from 1 in file order; comment and blank lines
// are not counted. Several documents in one file are separated by blank lines.

#include <string>
#include <string_view>
#include <vector>

#include "xdrs/drs.hpp"

namespace xdrs {

struct ClauseDocument {
  std::string id;
  std::string text;
  Drs drs;
  std::vector<TokenAlignment> alignments;
};

ClauseDocument parse_clause_document(std::string_view text);
Drs parse_clauses(std::string_view text);

// Splits on blank lines; empty input yields no documents.
std::vector<ClauseDocument> read_clause_documents(std::string_view text);

// Clause ids are renumbered to the emitted line order and alignments follow.
std::string write_clauses(const ClauseDocument& doc);
std::string write_clauses(const Drs& drs);

}  // namespace xdrs
