#include "support.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "xdrs/clause_format.hpp"
#include "xdrs/error.hpp"

namespace xdrs::testing {

namespace {

const char* const kUnaryPool[] = {"cat", "dog", "open", "laptop", "sleep", "person", "time", "entity", "run"};
const char* const kRolePool[] = {"Agent", "Theme", "Owner", "Time", "Patient"};
const char* const kConstPool[] = {"speaker", "now", "hearer"};
const char* const kRelPool[] = {"CONTINUATION", "CONTRAST", "RESULT"};
const char* const kUnaryOps[] = {"NOT", "POS", "NEC"};
const char* const kBinaryOps[] = {"IMP", "DIS", "DUP"};

template <class T, std::size_t N>
const T& pick(Rng& rng, const T (&pool)[N]) {
  return pool[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng)];
}

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

std::vector<std::string> accessible_referents(const Drs& d, const BoxId& box) {
  std::vector<std::string> out;
  for (const auto& b : DrsStructure(d).accessible_from(box))
    for (const auto& r : d.find(b)->referents) out.push_back(r);
  return out;
}

Condition unary(std::string pred, std::string var) { return Condition{Unary{std::move(pred), std::move(var)}, 0}; }

}  // namespace

Drs random_drs(Rng& rng, const RandomDrsOptions& o) {
  Drs d;
  d.top = "b1";
  d.boxes.push_back(Box{"b1", {}, {}, false});
  const int target = uniform(rng, 1, o.max_boxes);
  while (static_cast<int>(d.boxes.size()) < target) {
    const int room = target - static_cast<int>(d.boxes.size());
    Box& host = d.boxes[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(d.boxes.size()) - 1))];
    const BoxId host_id = host.id;
    const int kind = room >= 2 ? uniform(rng, 0, o.allow_relations ? 2 : 1) : 0;
    auto fresh = [&] { return "b" + std::to_string(d.boxes.size() + 1); };
    if (kind == 0) {
      BoxId child = fresh();
      host.conditions.push_back(Condition{Operator{pick(rng, kUnaryOps), {child}}, 0});
      d.boxes.push_back(Box{child, {}, {}, false});
    } else {
      BoxId a = fresh();
      d.boxes.push_back(Box{a, {}, {}, false});
      BoxId b = fresh();
      d.boxes.push_back(Box{b, {}, {}, false});
      if (kind == 1) {
        d.find(host_id)->conditions.push_back(Condition{Operator{pick(rng, kBinaryOps), {a, b}}, 0});
      } else {
        d.relations.push_back(Relation{pick(rng, kRelPool), host_id, a, b});
      }
    }
  }

  std::map<char, int> counters;
  auto new_ref = [&](Box& b) {
    static const char sorts[] = {'x', 'x', 'e', 'e', 't', 's'};
    const char s = sorts[uniform(rng, 0, 5)];
    b.referents.push_back(std::string(1, s) + std::to_string(++counters[s]));
  };
  for (auto& b : d.boxes) {
    const int n = uniform(rng, 0, o.max_referents_per_box);
    for (int i = 0; i < n; ++i) new_ref(b);
  }

  const int conditions = uniform(rng, 1, o.max_conditions);
  for (int k = 0; k < conditions; ++k) {
    const std::size_t bi = static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(d.boxes.size()) - 1));
    auto vars = accessible_referents(d, d.boxes[bi].id);
    if (vars.empty()) {
      new_ref(d.boxes[bi]);
      vars = accessible_referents(d, d.boxes[bi].id);
    }
    auto var = [&] { return vars[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(vars.size()) - 1))]; };
    if (uniform(rng, 0, 9) < 6) {
      d.boxes[bi].conditions.push_back(unary(pick(rng, kUnaryPool), var()));
    } else {
      Argument second = o.allow_constants && uniform(rng, 0, 3) == 0 ? Argument::constant(pick(rng, kConstPool))
                                                                       : Argument::variable(var());
      d.boxes[bi].conditions.push_back(
          Condition{Binary{pick(rng, kRolePool), Argument::variable(var()), std::move(second)}, 0});
    }
  }
  for (auto& b : d.boxes) std::shuffle(b.conditions.begin(), b.conditions.end(), rng);
  validate(d);
  return d;
}

Drs rename_symbols(const Drs& d, Rng& rng) {
  std::map<char, std::vector<std::string>> by_sort;
  for (const auto& b : d.boxes) {
    by_sort['b'].push_back(b.id);
    for (const auto& r : b.referents) by_sort[r.front()].push_back(r);
  }
  std::map<std::string, std::string> rename;
  for (auto& [sort, names] : by_sort) {
    std::vector<int> ids(names.size() + 20);
    std::iota(ids.begin(), ids.end(), 1);
    std::shuffle(ids.begin(), ids.end(), rng);
    for (std::size_t i = 0; i < names.size(); ++i) rename[names[i]] = std::string(1, sort) + std::to_string(ids[i]);
  }
  auto r = [&](const std::string& s) {
    auto it = rename.find(s);
    return it == rename.end() ? s : it->second;
  };
  Drs out = d;
  out.top = r(d.top);
  for (auto& b : out.boxes) {
    b.id = r(b.id);
    for (auto& x : b.referents) x = r(x);
    for (auto& c : b.conditions) {
      if (auto* u = std::get_if<Unary>(&c.body)) u->variable = r(u->variable);
      if (auto* bn = std::get_if<Binary>(&c.body)) {
        if (bn->first.is_variable()) bn->first.text = r(bn->first.text);
        if (bn->second.is_variable()) bn->second.text = r(bn->second.text);
      }
      if (auto* op = std::get_if<Operator>(&c.body))
        for (auto& x : op->boxes) x = r(x);
    }
  }
  for (auto& rel : out.relations) {
    rel.host = r(rel.host);
    rel.first = r(rel.first);
    rel.second = r(rel.second);
  }
  std::shuffle(out.boxes.begin(), out.boxes.end(), rng);
  validate(out);
  return out;
}

Drs perturb(const Drs& d, Rng& rng) {
  Drs out = d;
  const int edits = uniform(rng, 1, 3);
  for (int k = 0; k < edits; ++k) {
    Box& b = out.boxes[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(out.boxes.size()) - 1))];
    std::vector<std::size_t> plain;
    for (std::size_t i = 0; i < b.conditions.size(); ++i)
      if (!b.conditions[i].is_operator()) plain.push_back(i);
    const int what = uniform(rng, 0, 2);
    if (what == 0 && !plain.empty()) {
      b.conditions.erase(b.conditions.begin() + static_cast<std::ptrdiff_t>(plain[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(plain.size()) - 1))]));
    } else if (what == 1 && !plain.empty()) {
      Condition& c = b.conditions[plain[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(plain.size()) - 1))]];
      if (auto* u = std::get_if<Unary>(&c.body)) u->predicate = pick(rng, kUnaryPool);
      if (auto* bn = std::get_if<Binary>(&c.body)) bn->role = pick(rng, kRolePool);
    } else {
      auto vars = accessible_referents(out, b.id);
      if (!vars.empty())
        b.conditions.push_back(unary(pick(rng, kUnaryPool), vars[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(vars.size()) - 1))]));
    }
  }
  validate(out);
  return out;
}

int brute_force_matched(const ClauseSet& pred, const ClauseSet& gold) {
  const std::size_t n = pred.symbols.size();
  std::vector<int> map(n, -1);
  std::vector<bool> used(gold.symbols.size(), false);
  int best = 0;
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == n) {
      best = std::max(best, matched_clauses(pred, gold, map));
      return;
    }
    map[i] = -1;
    self(self, i + 1);
    for (std::size_t j = 0; j < gold.symbols.size(); ++j) {
      if (used[j] || gold.sorts[j] != pred.sorts[i]) continue;
      used[j] = true;
      map[i] = static_cast<int>(j);
      self(self, i + 1);
      used[j] = false;
    }
    map[i] = -1;
  };
  rec(rec, 0);
  return best;
}

std::vector<std::string> brute_force_normal_form(const ClauseSet& set) {
  std::map<char, std::vector<std::size_t>> by_sort;
  for (std::size_t i = 0; i < set.symbols.size(); ++i) by_sort[set.sorts[i]].push_back(i);
  std::vector<std::pair<char, std::vector<std::size_t>>> groups(by_sort.begin(), by_sort.end());
  std::vector<std::string> names(set.symbols.size());
  std::vector<std::string> best;
  bool have = false;
  auto rec = [&](auto&& self, std::size_t g) -> void {
    if (g == groups.size()) {
      std::vector<std::string> lines;
      for (const auto& c : set.clauses) lines.push_back(c.str(names));
      std::sort(lines.begin(), lines.end());
      if (!have || lines < best) {
        best = std::move(lines);
        have = true;
      }
      return;
    }
    auto perm = groups[g].second;
    std::sort(perm.begin(), perm.end());
    do {
      for (std::size_t k = 0; k < perm.size(); ++k)
        names[perm[k]] = std::string(1, groups[g].first) + std::to_string(k + 1);
      self(self, g + 1);
    } while (std::next_permutation(perm.begin(), perm.end()));
  };
  rec(rec, 0);
  return best;
}

namespace {

Example make_example(const std::string& id, std::vector<std::string> tokens, std::vector<std::string> lemmas,
                     std::vector<std::string> upos, std::vector<int> heads, std::vector<std::string> deprels,
                     const std::string& clauses) {
  Example ex;
  ex.id = id;
  ex.lang = "en";
  ex.sentence.id = id;
  ex.sentence.tokens = std::move(tokens);
  ex.sentence.lemmas = std::move(lemmas);
  ex.sentence.upos = std::move(upos);
  ex.sentence.heads = std::move(heads);
  ex.sentence.deprels = std::move(deprels);
  validate(ex.sentence);
  for (const auto& t : ex.sentence.tokens) ex.text += (ex.text.empty() ? "" : " ") + t;
  ex.drs = parse_clauses(clauses);
  return ex;
}

}  // namespace

std::vector<Example> synthetic_corpus() {
  std::vector<Example> c;
  c.push_back(make_example("s01", {"the", "cat", "sleeps"}, {"the", "cat", "sleep"}, {"DET", "NOUN", "VERB"},
                           {2, 3, 0}, {"det", "nsubj", "root"},
                           "b1 REF x1\nb1 REF e1\nb1 cat x1\nb1 sleep e1\nb1 Agent e1 x1\n"));
  c.push_back(make_example("s02", {"the", "dog", "runs"}, {"the", "dog", "run"}, {"DET", "NOUN", "VERB"},
                           {2, 3, 0}, {"det", "nsubj", "root"},
                           "b1 REF x1\nb1 REF e1\nb1 dog x1\nb1 run e1\nb1 Agent e1 x1\n"));
  c.push_back(make_example("s03", {"Mary", "sings"}, {"mary", "sing"}, {"PROPN", "VERB"}, {2, 0},
                           {"nsubj", "root"},
                           "b1 REF x1\nb1 REF e1\nb1 person x1\nb1 Name x1 \"mary\"\nb1 sing e1\nb1 Agent e1 x1\n"));
  c.push_back(make_example("s04", {"the", "cat", "does", "not", "sleep"}, {"the", "cat", "do", "not", "sleep"},
                           {"DET", "NOUN", "AUX", "PART", "VERB"}, {2, 5, 5, 5, 0},
                           {"det", "nsubj", "aux", "advmod", "root"},
                           "b1 REF x1\nb1 cat x1\nb1 NOT b2\nb2 REF e1\nb2 sleep e1\nb2 Agent e1 x1\n"));
  c.push_back(make_example("s05", {"the", "dog", "sees", "the", "cat"}, {"the", "dog", "see", "the", "cat"},
                           {"DET", "NOUN", "VERB", "DET", "NOUN"}, {2, 3, 0, 5, 3},
                           {"det", "nsubj", "root", "det", "obj"},
                           "b1 REF x1\nb1 REF x2\nb1 REF e1\nb1 dog x1\nb1 cat x2\nb1 see e1\nb1 Agent e1 x1\n"
                           "b1 Theme e1 x2\n"));
  c.push_back(make_example("s06", {"John", "opened", "my", "laptop"}, {"john", "open", "my", "laptop"},
                           {"PROPN", "VERB", "PRON", "NOUN"}, {2, 0, 4, 2}, {"nsubj", "root", "nmod:poss", "obj"},
                           "b1 REF x1\nb1 REF x2\nb1 REF e1\nb1 person x1\nb1 Name x1 \"john\"\nb1 laptop x2\n"
                           "b1 Owner x2 \"speaker\"\nb1 open e1\nb1 Agent e1 x1\nb1 Theme e1 x2\n"));
  c.push_back(make_example("s07", {"I", "sat", "down", "and", "opened", "my", "laptop"},
                           {"I", "sit", "down", "and", "open", "my", "laptop"},
                           {"PRON", "VERB", "ADP", "CCONJ", "VERB", "PRON", "NOUN"}, {2, 0, 2, 5, 2, 7, 5},
                           {"nsubj", "root", "compound:prt", "cc", "conj", "nmod:poss", "obj"},
                           "b1 CONTINUATION b2 b3\nb2 REF e1\nb2 sit_down e1\nb2 Agent e1 \"speaker\"\n"
                           "b3 REF e2\nb3 REF x1\nb3 open e2\nb3 laptop x1\nb3 Owner x1 \"speaker\"\n"
                           "b3 Agent e2 \"speaker\"\nb3 Theme e2 x1\n"));
  c.push_back(make_example("s08", {"it", "may", "rain"}, {"it", "may", "rain"}, {"PRON", "AUX", "VERB"},
                           {3, 3, 0}, {"expl", "aux", "root"}, "b1 POS b2\nb2 REF e1\nb2 rain e1\n"));
  c.push_back(make_example("s09", {"if", "the", "dog", "barks", "the", "cat", "runs"},
                           {"if", "the", "dog", "bark", "the", "cat", "run"},
                           {"SCONJ", "DET", "NOUN", "VERB", "DET", "NOUN", "VERB"}, {4, 3, 4, 7, 6, 7, 0},
                           {"mark", "det", "nsubj", "advcl", "det", "nsubj", "root"},
                           "b1 IMP b2 b3\nb2 REF x1\nb2 REF e1\nb2 dog x1\nb2 bark e1\nb2 Agent e1 x1\n"
                           "b3 REF x2\nb3 REF e2\nb3 cat x2\nb3 run e2\nb3 Agent e2 x2\n"));
  c.push_back(make_example("s10", {"the", "bird", "flew", "yesterday"}, {"the", "bird", "fly", "yesterday"},
                           {"DET", "NOUN", "VERB", "ADV"}, {2, 3, 0, 3}, {"det", "nsubj", "root", "obl:tmod"},
                           "b1 REF x1\nb1 REF e1\nb1 REF t1\nb1 bird x1\nb1 fly e1\nb1 time t1\nb1 Agent e1 x1\n"
                           "b1 Time e1 t1\nb1 TPR t1 \"now\"\n"));
  return c;
}

std::vector<int> random_heads(Rng& rng, int n) {
  // Random recursive tree over a random token order.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> heads(static_cast<std::size_t>(n), 0);
  for (int k = 1; k < n; ++k) {
    const int parent = order[static_cast<std::size_t>(uniform(rng, 0, k - 1))];
    heads[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = parent + 1;
  }
  return heads;
}

std::string fixture_path(const std::string& name) { return std::string(XDRS_FIXTURE_DIR) + "/" + name; }

}  // namespace xdrs::testing
