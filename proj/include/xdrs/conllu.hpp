#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "xdrs/sentence.hpp"

namespace xdrs {

// Reads 10-column CoNLL-U. Multiword-token ranges ("3-4") and empty nodes
// ("5.1") are skipped, the DEPS column is ignored, `# sent_id = ...` sets
// the sentence id.
std::vector<SentenceAnnotation> read_conllu(std::string_view text);

// Writes ID FORM LEMMA UPOS HEAD DEPREL; the remaining columns are "_".
std::string write_conllu(const std::vector<SentenceAnnotation>& sentences);

}  // namespace xdrs
