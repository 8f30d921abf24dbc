#include "xdrs/lexicon.hpp"

namespace xdrs {

Lexicon Lexicon::standard() {
  Lexicon lex;
  for (const char* s : {"time", "entity", "person", "location", "organization", "event", "state",
                        "thing", "quantity", "group", "measure", "artifact", "object"})
    lex.add_non_lexical(s);
  return lex;
}

bool Lexicon::is_non_lexical(std::string_view label) const { return non_lexical_.count(label) > 0; }

bool Lexicon::is_lexical(std::string_view label) const {
  if (is_non_lexical(label)) return false;
  return lemmas_.empty() || lemmas_.count(label) > 0;
}

}  // namespace xdrs
