#include "xdrs/drs_transform.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "xdrs/error.hpp"

namespace xdrs {

namespace {

bool uses_any(const Box& box, const std::set<std::string>& vars) {
  for (const auto& c : box.conditions)
    for (const auto& v : c.variables())
      if (vars.count(v)) return true;
  return false;
}

}  // namespace

Drs merge_presuppositions(const Drs& input) {
  Drs drs = input;
  while (true) {
    std::vector<BoxId> pending;
    for (const auto& b : drs.boxes)
      if (b.presupposed) pending.push_back(b.id);
    if (pending.empty()) break;

    bool progress = false;
    for (const auto& pid : pending) {
      const Box* p = drs.find(pid);
      std::set<std::string> vars(p->referents.begin(), p->referents.end());
      std::vector<BoxId> consumers;
      bool waits = false;
      for (const auto& b : drs.boxes) {
        if (b.id == pid || !uses_any(b, vars)) continue;
        if (b.presupposed) waits = true;
        consumers.push_back(b.id);
      }
      if (waits) continue;

      DrsStructure structure(drs);
      BoxId target;
      if (consumers.empty()) {
        target = drs.top;
      } else {
        auto dominator = std::find_if(consumers.begin(), consumers.end(), [&](const BoxId& c) {
          return std::all_of(consumers.begin(), consumers.end(),
                             [&](const BoxId& o) { return structure.dominates(c, o); });
        });
        if (dominator == consumers.end())
          fail(ErrorKind::AmbiguousMerge, "presupposed box " + pid + " is used by " +
                                              std::to_string(consumers.size()) + " unrelated boxes");
        target = *dominator;
      }

      Box moved = *p;
      drs.boxes.erase(std::find_if(drs.boxes.begin(), drs.boxes.end(), [&](const Box& b) { return b.id == pid; }));
      Box* t = drs.find(target);
      t->referents.insert(t->referents.end(), moved.referents.begin(), moved.referents.end());
      t->conditions.insert(t->conditions.end(), moved.conditions.begin(), moved.conditions.end());
      for (auto& r : drs.relations)
        if (r.host == pid) r.host = target;
      progress = true;
    }
    if (!progress) fail(ErrorKind::AmbiguousMerge, "presupposed boxes consume each other");
  }
  validate(drs);
  return drs;
}

std::string strip_sense(std::string_view label) {
  auto dot = label.find('.');
  if (dot == std::string_view::npos || dot == 0) return std::string(label);
  return std::string(label.substr(0, dot));
}

Drs strip_senses(const Drs& input) {
  Drs drs = input;
  for (auto& b : drs.boxes)
    for (auto& c : b.conditions)
      if (auto* u = std::get_if<Unary>(&c.body)) u->predicate = strip_sense(u->predicate);
  return drs;
}

std::string sanitize_label(std::string_view s) {
  std::string out;
  for (unsigned char c : s) out.push_back(std::isspace(c) || c == '(' || c == ')' || c == '"' ? '_' : static_cast<char>(c));
  return out;
}

RevertResult revert_predicates(const Drs& input, const SentenceAnnotation& sentence, const Lexicon& lexicon) {
  RevertResult result{input, 0, 0};
  for (auto& b : result.drs.boxes) {
    for (auto& c : b.conditions) {
      auto* u = std::get_if<Unary>(&c.body);
      if (!u || lexicon.is_non_lexical(u->predicate)) continue;
      int best = -1;
      bool best_head = false;
      for (const auto& a : sentence.alignments) {
        if (c.id == 0 || a.clause != c.id) continue;
        bool better = best < 0 || (a.head && !best_head) || (a.head == best_head && a.token < best);
        if (better) {
          best = a.token;
          best_head = a.head;
        }
      }
      const int index = best - 1;
      if (best < 0 || index >= static_cast<int>(sentence.lemmas.size()) || sentence.lemmas[index].empty() ||
          sentence.lemmas[index] == "_") {
        ++result.unaligned;
        continue;
      }
      u->predicate = sanitize_label(sentence.lemmas[index]);
      ++result.reverted;
    }
  }
  return result;
}

}  // namespace xdrs
