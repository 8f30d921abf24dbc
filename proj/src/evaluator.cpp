#include "xdrs/evaluator.hpp"

#include <algorithm>
#include <array>
#include <climits>
#include <cstdio>
#include <random>
#include <unordered_map>

#include "xdrs/error.hpp"

namespace xdrs {

std::string Clause::str(const std::vector<std::string>& symbols) const {
  std::string out;
  auto term = [&](const Term& t) {
    return t.type == Term::Type::Symbol ? symbols[static_cast<std::size_t>(t.symbol)] : "\"" + t.constant + "\"";
  };
  if (kind == ClauseKind::Rel) {
    out = "REL " + label;
    for (const auto& t : terms) out += " " + term(t);
    return out;
  }
  out = term(terms[0]) + " " + label;
  for (std::size_t i = 1; i < terms.size(); ++i) out += " " + term(terms[i]);
  return out;
}

ClauseSet to_clauses(const Drs& drs) {
  ClauseSet cs;
  std::map<std::string, int> index;
  auto sym = [&](const std::string& name, char sort) {
    auto it = index.find(name);
    if (it != index.end()) return Term{Term::Type::Symbol, it->second, {}};
    const int id = static_cast<int>(cs.symbols.size());
    index.emplace(name, id);
    cs.symbols.push_back(name);
    cs.sorts.push_back(sort);
    return Term{Term::Type::Symbol, id, {}};
  };
  auto var = [&](const std::string& name) { return sym(name, name.front()); };
  auto box = [&](const std::string& id) { return sym(id, 'b'); };
  auto arg = [&](const Argument& a) {
    return a.is_variable() ? var(a.text) : Term{Term::Type::Constant, -1, a.text};
  };

  for (const auto& b : drs.boxes) {
    for (const auto& r : b.referents) cs.clauses.push_back(Clause{ClauseKind::Ref, "REF", {box(b.id), var(r)}});
    for (const auto& c : b.conditions) {
      if (const auto* u = std::get_if<Unary>(&c.body)) {
        cs.clauses.push_back(Clause{ClauseKind::Pred, u->predicate, {box(b.id), var(u->variable)}});
      } else if (const auto* bi = std::get_if<Binary>(&c.body)) {
        cs.clauses.push_back(Clause{ClauseKind::Role, bi->role, {box(b.id), arg(bi->first), arg(bi->second)}});
      } else {
        const auto& op = std::get<Operator>(c.body);
        Clause cl{ClauseKind::Op, op.label, {box(b.id)}};
        for (const auto& x : op.boxes) cl.terms.push_back(box(x));
        cs.clauses.push_back(std::move(cl));
      }
    }
  }
  for (const auto& r : drs.relations)
    cs.clauses.push_back(Clause{ClauseKind::Rel, r.label, {box(r.first), box(r.second)}});
  return cs;
}

// ---------------------------------------------------------------------------

namespace {

using Key = std::array<int, 4>;

struct KeyHash {
  std::size_t operator()(const Key& k) const {
    std::size_t h = 1469598103934665603ull;
    for (int v : k) h = (h ^ static_cast<std::size_t>(static_cast<unsigned>(v))) * 1099511628211ull;
    return h;
  }
};

constexpr int kPad = INT_MIN;

// Clauses of one side compiled to integer form. Symbol terms keep their
// symbol index; constants become codes <= -2; missing positions are kPad.
struct Compiled {
  std::vector<int> label;
  std::vector<std::array<int, 3>> terms;
  std::vector<std::array<bool, 3>> is_symbol;
};

class Interner {
 public:
  int id(const std::string& s) {
    auto [it, inserted] = ids_.emplace(s, static_cast<int>(ids_.size()));
    return it->second;
  }

 private:
  std::unordered_map<std::string, int> ids_;
};

Compiled compile(const ClauseSet& cs, Interner& labels, Interner& constants) {
  Compiled c;
  for (const auto& cl : cs.clauses) {
    c.label.push_back(labels.id(std::to_string(static_cast<int>(cl.kind)) + ":" + cl.label + ":" +
                                std::to_string(cl.terms.size())));
    std::array<int, 3> t{kPad, kPad, kPad};
    std::array<bool, 3> s{false, false, false};
    for (std::size_t k = 0; k < cl.terms.size() && k < 3; ++k) {
      if (cl.terms[k].type == Term::Type::Symbol) {
        t[k] = cl.terms[k].symbol;
        s[k] = true;
      } else {
        t[k] = -2 - constants.id(cl.terms[k].constant);
      }
    }
    c.terms.push_back(t);
    c.is_symbol.push_back(s);
  }
  return c;
}

class Matcher {
 public:
  Matcher(const ClauseSet& pred, const ClauseSet& gold) {
    Interner labels, constants;
    gold_ = compile(gold, labels, constants);
    pred_ = compile(pred, labels, constants);
    for (std::size_t i = 0; i < gold_.label.size(); ++i) ++gold_count_[gold_key(i)];
    by_symbol_.resize(pred.symbols.size());
    for (std::size_t i = 0; i < pred_.label.size(); ++i)
      for (int k = 0; k < 3; ++k)
        if (pred_.is_symbol[i][k]) {
          auto& v = by_symbol_[static_cast<std::size_t>(pred_.terms[i][k])];
          if (v.empty() || v.back() != static_cast<int>(i)) v.push_back(static_cast<int>(i));
        }
    stamp_.assign(pred_.label.size(), 0);
  }

  void reset(const std::vector<int>& map) {
    pred_count_.clear();
    matched_ = 0;
    for (std::size_t i = 0; i < pred_.label.size(); ++i) add(i, map);
  }

  int matched() const { return matched_; }

  // Matched count after changing the given symbols' images; map is restored.
  int evaluate(std::vector<int>& map, const std::pair<int, int>* changes, int n_changes) {
    collect(changes, n_changes);
    for (int c : affected_) remove(static_cast<std::size_t>(c), map);
    std::array<int, 2> saved{};
    for (int k = 0; k < n_changes; ++k) {
      saved[k] = map[static_cast<std::size_t>(changes[k].first)];
      map[static_cast<std::size_t>(changes[k].first)] = changes[k].second;
    }
    for (int c : affected_) add(static_cast<std::size_t>(c), map);
    const int result = matched_;
    for (int c : affected_) remove(static_cast<std::size_t>(c), map);
    for (int k = n_changes; k-- > 0;) map[static_cast<std::size_t>(changes[k].first)] = saved[k];
    for (int c : affected_) add(static_cast<std::size_t>(c), map);
    return result;
  }

  void apply(std::vector<int>& map, const std::pair<int, int>* changes, int n_changes) {
    collect(changes, n_changes);
    for (int c : affected_) remove(static_cast<std::size_t>(c), map);
    for (int k = 0; k < n_changes; ++k) map[static_cast<std::size_t>(changes[k].first)] = changes[k].second;
    for (int c : affected_) add(static_cast<std::size_t>(c), map);
  }

  // Matched count restricted to clauses whose gold key satisfies `keep`.
  template <class F>
  int matched_where(const std::vector<int>& map, F keep) {
    reset(map);
    int m = 0;
    for (const auto& [key, pc] : pred_count_) {
      auto it = gold_count_.find(key);
      if (it != gold_count_.end() && keep(key[0])) m += std::min(pc, it->second);
    }
    return m;
  }

  const Compiled& pred() const { return pred_; }
  const Compiled& gold() const { return gold_; }

 private:
  Key gold_key(std::size_t i) const {
    return Key{gold_.label[i], gold_.terms[i][0], gold_.terms[i][1], gold_.terms[i][2]};
  }

  bool pred_key(std::size_t i, const std::vector<int>& map, Key& out) const {
    out[0] = pred_.label[i];
    for (int k = 0; k < 3; ++k) {
      int t = pred_.terms[i][k];
      if (pred_.is_symbol[i][k]) {
        t = map[static_cast<std::size_t>(t)];
        if (t < 0) return false;
      }
      out[static_cast<std::size_t>(k) + 1] = t;
    }
    return true;
  }

  int gold_count(const Key& k) const {
    auto it = gold_count_.find(k);
    return it == gold_count_.end() ? 0 : it->second;
  }

  void add(std::size_t i, const std::vector<int>& map) {
    Key k;
    if (!pred_key(i, map, k)) return;
    const int before = pred_count_[k]++;
    if (before < gold_count(k)) ++matched_;
  }

  void remove(std::size_t i, const std::vector<int>& map) {
    Key k;
    if (!pred_key(i, map, k)) return;
    const int after = --pred_count_[k];
    if (after < gold_count(k)) --matched_;
  }

  void collect(const std::pair<int, int>* changes, int n_changes) {
    ++epoch_;
    affected_.clear();
    for (int k = 0; k < n_changes; ++k)
      for (int c : by_symbol_[static_cast<std::size_t>(changes[k].first)])
        if (stamp_[static_cast<std::size_t>(c)] != epoch_) {
          stamp_[static_cast<std::size_t>(c)] = epoch_;
          affected_.push_back(c);
        }
  }

  Compiled pred_, gold_;
  std::unordered_map<Key, int, KeyHash> gold_count_, pred_count_;
  std::vector<std::vector<int>> by_symbol_;
  std::vector<int> affected_;
  std::vector<unsigned> stamp_;
  unsigned epoch_ = 0;
  int matched_ = 0;
};

// Aligns symbols of clauses whose label/constant signature is unique on
// both sides.
void smart_init(const ClauseSet& pred, const ClauseSet& gold, const Matcher& m, std::vector<int>& map,
                std::vector<int>& owner) {
  auto signature = [](const Compiled& c, std::size_t i) {
    Key k{c.label[i], 0, 0, 0};
    for (int t = 0; t < 3; ++t) k[static_cast<std::size_t>(t) + 1] = c.is_symbol[i][t] ? -1 : c.terms[i][t];
    return k;
  };
  std::unordered_map<Key, std::vector<int>, KeyHash> ps, gs;
  for (std::size_t i = 0; i < m.pred().label.size(); ++i) ps[signature(m.pred(), i)].push_back(static_cast<int>(i));
  for (std::size_t i = 0; i < m.gold().label.size(); ++i) gs[signature(m.gold(), i)].push_back(static_cast<int>(i));
  std::vector<std::pair<int, int>> pairs;
  for (const auto& [sig, pv] : ps) {
    auto it = gs.find(sig);
    if (pv.size() == 1 && it != gs.end() && it->second.size() == 1) pairs.emplace_back(pv[0], it->second[0]);
  }
  std::sort(pairs.begin(), pairs.end());
  for (auto [pi, gi] : pairs)
    for (int t = 0; t < 3; ++t) {
      if (!m.pred().is_symbol[static_cast<std::size_t>(pi)][t]) continue;
      const int p = m.pred().terms[static_cast<std::size_t>(pi)][t];
      const int q = m.gold().terms[static_cast<std::size_t>(gi)][t];
      if (map[static_cast<std::size_t>(p)] < 0 && owner[static_cast<std::size_t>(q)] < 0 &&
          pred.sorts[static_cast<std::size_t>(p)] == gold.sorts[static_cast<std::size_t>(q)]) {
        map[static_cast<std::size_t>(p)] = q;
        owner[static_cast<std::size_t>(q)] = p;
      }
    }
}

void random_fill(const ClauseSet& pred, const ClauseSet& gold, std::vector<int>& map, std::vector<int>& owner,
                 std::mt19937_64& rng) {
  std::vector<int> order(pred.symbols.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::shuffle(order.begin(), order.end(), rng);
  for (int p : order) {
    if (map[static_cast<std::size_t>(p)] >= 0) continue;
    std::vector<int> free;
    for (std::size_t q = 0; q < gold.symbols.size(); ++q)
      if (owner[q] < 0 && gold.sorts[q] == pred.sorts[static_cast<std::size_t>(p)]) free.push_back(static_cast<int>(q));
    if (free.empty()) continue;
    const int q = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
    map[static_cast<std::size_t>(p)] = q;
    owner[static_cast<std::size_t>(q)] = p;
  }
}

}  // namespace

int matched_clauses(const ClauseSet& pred, const ClauseSet& gold, const std::vector<int>& map) {
  if (map.size() != pred.symbols.size()) fail(ErrorKind::InternalContractViolation, "alignment size mismatch");
  Matcher m(pred, gold);
  m.reset(map);
  return m.matched();
}

AlignmentResult best_alignment(const ClauseSet& pred, const ClauseSet& gold, const AlignOptions& opt) {
  AlignmentResult best;
  best.map.assign(pred.symbols.size(), -1);
  if (pred.clauses.empty() || gold.clauses.empty()) return best;

  Matcher m(pred, gold);
  m.reset(best.map);
  best.matched = m.matched();
  const int ceiling = static_cast<int>(std::min(pred.size(), gold.size()));
  std::mt19937_64 rng(opt.seed);

  for (int restart = 0; restart < std::max(1, opt.restarts) && best.matched < ceiling; ++restart) {
    std::vector<int> map(pred.symbols.size(), -1), owner(gold.symbols.size(), -1);
    if (restart == 0) smart_init(pred, gold, m, map, owner);
    random_fill(pred, gold, map, owner, rng);
    m.reset(map);

    for (int iter = 0; iter < opt.max_iters && m.matched() < ceiling; ++iter) {
      int best_value = m.matched();
      std::pair<int, int> best_move[2];
      int best_n = 0;
      for (std::size_t p = 0; p < map.size(); ++p) {
        for (std::size_t q = 0; q < gold.symbols.size(); ++q) {
          if (gold.sorts[q] != pred.sorts[p] || map[p] == static_cast<int>(q)) continue;
          std::pair<int, int> moves[2] = {{static_cast<int>(p), static_cast<int>(q)}, {0, 0}};
          int n = 1;
          if (owner[q] >= 0) {
            moves[1] = {owner[q], map[p]};
            n = 2;
          }
          const int value = m.evaluate(map, moves, n);
          if (value > best_value) {
            best_value = value;
            best_move[0] = moves[0];
            best_move[1] = moves[1];
            best_n = n;
          }
        }
      }
      if (best_n == 0) break;
      for (int k = 0; k < best_n; ++k) {
        const int old = map[static_cast<std::size_t>(best_move[k].first)];
        if (old >= 0 && owner[static_cast<std::size_t>(old)] == best_move[k].first) owner[static_cast<std::size_t>(old)] = -1;
      }
      m.apply(map, best_move, best_n);
      for (int k = 0; k < best_n; ++k)
        if (best_move[k].second >= 0) owner[static_cast<std::size_t>(best_move[k].second)] = best_move[k].first;
    }
    if (m.matched() > best.matched) {
      best.matched = m.matched();
      best.map = map;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Category c) {
  switch (c) {
    case Category::Operators: return "operators";
    case Category::NonLexicalUnary: return "non-lexical unary";
    case Category::NonLexicalBinary: return "non-lexical binary";
    case Category::Lexical: return "lexical";
  }
  return "?";
}

Category category_of(const Clause& clause, const Lexicon& lexicon) {
  switch (clause.kind) {
    case ClauseKind::Op:
    case ClauseKind::Rel: return Category::Operators;
    case ClauseKind::Role: return Category::NonLexicalBinary;
    case ClauseKind::Ref: return Category::NonLexicalUnary;
    case ClauseKind::Pred: return lexicon.is_lexical(clause.label) ? Category::Lexical : Category::NonLexicalUnary;
  }
  return Category::Lexical;
}

const ScoreReport& CategoryReport::at(Category c) const {
  static const ScoreReport empty;
  auto it = buckets.find(c);
  return it == buckets.end() ? empty : it->second;
}

CategoryReport& CategoryReport::operator+=(const CategoryReport& o) {
  for (const auto& [c, s] : o.buckets) buckets[c] += s;
  return *this;
}

CategoryReport category_breakdown(const ClauseSet& pred, const ClauseSet& gold, const std::vector<int>& map,
                                  const Lexicon& lexicon) {
  if (map.size() != pred.symbols.size()) fail(ErrorKind::InternalContractViolation, "alignment size mismatch");
  CategoryReport r;
  for (Category c : kCategories) r[c] = ScoreReport{};
  for (const auto& cl : pred.clauses) ++r[category_of(cl, lexicon)].predicted;
  for (const auto& cl : gold.clauses) ++r[category_of(cl, lexicon)].gold;

  // Clauses with equal compiled labels share a category, so the matched
  // count splits by the gold clause category of each label.
  Matcher m(pred, gold);
  std::unordered_map<int, Category> label_category;
  for (std::size_t i = 0; i < gold.clauses.size(); ++i)
    label_category.emplace(m.gold().label[i], category_of(gold.clauses[i], lexicon));
  for (Category c : kCategories)
    r[c].matched = m.matched_where(map, [&](int label) {
      auto it = label_category.find(label);
      return it != label_category.end() && it->second == c;
    });
  return r;
}

DocumentScore score(const Drs& pred, const Drs& gold, const Lexicon& lexicon, const AlignOptions& options) {
  ClauseSet p = to_clauses(pred), g = to_clauses(gold);
  AlignmentResult a = best_alignment(p, g, options);
  DocumentScore d;
  d.overall = ScoreReport{a.matched, static_cast<long>(p.size()), static_cast<long>(g.size())};
  d.categories = category_breakdown(p, g, a.map, lexicon);
  return d;
}

void CorpusScore::add(const DocumentScore& d) {
  overall += d.overall;
  categories += d.categories;
  ++documents;
}

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t w, bool right = false) {
  if (s.size() >= w) return s;
  return right ? std::string(w - s.size(), ' ') + s : s + std::string(w - s.size(), ' ');
}

}  // namespace

std::string render_score_table(const std::vector<std::pair<std::string, ScoreReport>>& rows) {
  std::size_t w = 4;
  for (const auto& [name, _] : rows) w = std::max(w, name.size());
  std::string out = pad("", w) + "  " + pad("P", 6, true) + "  " + pad("R", 6, true) + "  " + pad("F1", 6, true) +
                    "  " + pad("matched", 8, true) + "  " + pad("pred", 7, true) + "  " + pad("gold", 7, true) + "\n";
  for (const auto& [name, s] : rows)
    out += pad(name, w) + "  " + fixed4(s.precision()) + "  " + fixed4(s.recall()) + "  " + fixed4(s.f1()) + "  " +
           pad(std::to_string(s.matched), 8, true) + "  " + pad(std::to_string(s.predicted), 7, true) + "  " +
           pad(std::to_string(s.gold), 7, true) + "\n";
  return out;
}

std::string render_category_table(const CategoryReport& report) {
  std::vector<std::pair<std::string, ScoreReport>> rows;
  for (Category c : kCategories) rows.emplace_back(std::string(to_string(c)), report.at(c));
  return render_score_table(rows);
}

std::string score_record(const std::map<std::string, std::string>& keys, const ScoreReport& s) {
  std::string out;
  for (const auto& [k, v] : keys) out += k + "=" + v + " ";
  out += "precision=" + fixed4(s.precision()) + " recall=" + fixed4(s.recall()) + " f1=" + fixed4(s.f1()) +
         " matched=" + std::to_string(s.matched) + " predicted=" + std::to_string(s.predicted) +
         " gold=" + std::to_string(s.gold);
  return out;
}

}  // namespace xdrs
