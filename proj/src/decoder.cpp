#include "xdrs/decoder.hpp"

#include <algorithm>

#include "xdrs/drs_transform.hpp"
#include "xdrs/error.hpp"

namespace xdrs {

namespace {

constexpr std::string_view kSorts = "xets";

Parameter* embedding(ParameterStore& store, const std::string& name, int rows, int dim, Rng& rng) {
  Parameter& p = store.add(name, Shape{rows, dim});
  init_uniform(p, rng, kInitScale);
  return &p;
}

int argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

int sort_index(char c) { return static_cast<int>(kSorts.find(c)); }

}  // namespace

struct Decoder::Run {
  Run(Graph& graph, const EncoderOutput& e, const std::vector<std::string>& l, const StageTargets* t)
      : g(graph), enc(e), lemmas(l), gold(t) {}

  Graph& g;
  const EncoderOutput& enc;
  const std::vector<std::string>& lemmas;
  const StageTargets* gold = nullptr;

  std::vector<Expr> skel_losses, pred_losses, ref_losses;
  DecodeResult out;
  SkeletonLayout layout;
  std::vector<Expr> skel_repr;  // state after reading skeleton token t
  Expr skel_final;
  std::vector<Expr> pred_state;
  std::vector<int> pred_ids;    // embedding id of each chosen predicate
  Expr pred_final;

  void score(std::vector<Expr>& losses, Expr logits, const std::vector<int>& targets) {
    if (gold && !targets.empty()) losses.push_back(g.softmax_nll(logits, targets));
  }
};

Decoder::Decoder(ParameterStore& store, const DecoderConfig& config, const VocabularySet& vocab, int memory_dim,
                 int summary_dim, Rng& rng)
    : config_(config),
      skeleton_vocab_(vocab.skeleton),
      predicate_vocab_(vocab.predicates),
      referent_vocab_(vocab.referents),
      predicate_class_(vocab.predicate_class),
      memory_dim_(memory_dim) {
  if (config_.embed_dim <= 0 || config_.hidden <= 0) fail(ErrorKind::ConfigError, "decoder dimensions must be positive");
  if (predicate_class_.size() != static_cast<std::size_t>(predicate_vocab_.size()))
    fail(ErrorKind::ConfigError, "predicate vocabulary is not classified");
  for (int i = Vocabulary::kReserved; i < predicate_vocab_.size(); ++i)
    (predicate_class_[static_cast<std::size_t>(i)] == PredicateClass::Role ? role_ids_ : unary_ids_).push_back(i);
  for (int s = 0; s < 4; ++s) {
    const std::string tok = new_variable_token(kSorts[static_cast<std::size_t>(s)]);
    if (!referent_vocab_.contains(tok)) fail(ErrorKind::ConfigError, "referent vocabulary lacks " + tok);
    new_ids_[s] = referent_vocab_.id(tok);
  }
  for (int i = Vocabulary::kReserved; i < referent_vocab_.size(); ++i)
    if (referent_vocab_.symbol(i).front() == '"') constant_ids_.push_back(i);

  const int E = config_.embed_dim, H = config_.hidden, M = memory_dim;
  skel_emb_ = embedding(store, "dec.skel.emb", skeleton_vocab_.size(), E, rng);
  skel_init_ = Linear(store, "dec.skel.init", summary_dim, H, rng);
  skel_lstm_ = LstmCell(store, "dec.skel.lstm", E, H, rng);
  skel_att_ = Attention(store, "dec.skel.att", M, H, rng);
  skel_out_ = Linear(store, "dec.skel.out", H + M, H, rng);
  skel_logits_ = Linear(store, "dec.skel.logits", H, skeleton_vocab_.size(), rng);

  pred_emb_ = embedding(store, "dec.pred.emb", predicate_vocab_.size(), E, rng);
  pred_lstm_ = LstmCell(store, "dec.pred.lstm", E + 2 * H, H, rng);
  pred_att_ = Attention(store, "dec.pred.att", M, H, rng);
  pred_out_ = Linear(store, "dec.pred.out", H + M, H, rng);
  pred_logits_ = Linear(store, "dec.pred.logits", H, predicate_vocab_.size(), rng);
  pred_copy_ = CopyScorer(store, "dec.pred.copy", M, H, rng);

  ref_emb_ = embedding(store, "dec.ref.emb", referent_vocab_.size(), E, rng);
  ref_kind_ = embedding(store, "dec.ref.kind", 4, E, rng);
  ref_lstm_ = LstmCell(store, "dec.ref.lstm", 3 * E + 3 * H + M, H, rng);
  ref_att_ = Attention(store, "dec.ref.att", M, H, rng);
  ref_out_ = Linear(store, "dec.ref.out", H + M, H, rng);
  ref_logits_ = Linear(store, "dec.ref.logits", H, referent_vocab_.size(), rng);
}

void Decoder::skeleton_stage(Run& r) const {
  Graph& g = r.g;
  const auto* gold = r.gold ? &r.gold->skeleton : nullptr;
  const int slack = gold ? static_cast<int>(gold->size()) : 0;
  const int gold_preds = r.gold ? static_cast<int>(r.gold->predicates.size()) : 0;
  const int gold_slots = r.gold ? static_cast<int>(r.gold->referents.size()) : 0;
  SkeletonGrammar grammar(std::max(config_.max_skeleton, slack), std::max(config_.max_predicates, gold_preds),
                          std::max(config_.max_referents, gold_slots), !role_ids_.empty() || r.gold != nullptr);

  std::vector<std::string>& tokens = r.out.stages.skeleton;
  LstmState state{g.tanh(skel_init_(g, r.enc.summary)), g.zeros(config_.hidden)};
  int prev = Vocabulary::kBos;
  bool stuck = false;
  while (true) {
    state = skel_lstm_.step(g, g.lookup(*skel_emb_, prev), state);
    if (!tokens.empty()) r.skel_repr.push_back(state.h);
    if (grammar.done() || stuck) break;

    std::vector<int> legal;
    for (int id = Vocabulary::kReserved; id < skeleton_vocab_.size(); ++id)
      if (grammar.allows(skeleton_vocab_.symbol(id))) legal.push_back(id);

    int choice = -1;
    if (gold) {
      if (tokens.size() >= gold->size())
        fail(ErrorKind::InternalContractViolation, "gold skeleton ends before its root box closes");
      const std::string& want = (*gold)[tokens.size()];
      if (!grammar.allows(want)) fail(ErrorKind::InternalContractViolation, "gold skeleton token '" + want + "' is illegal here");
      choice = skeleton_vocab_.id(want);
      auto it = std::find(legal.begin(), legal.end(), choice);
      Expr ctx = skel_att_.attend(g, r.enc.memory, state.h).context;
      const Expr hc[] = {state.h, ctx};
      Expr logits = g.gather(skel_logits_(g, g.tanh(skel_out_(g, g.concat(hc)))), legal);
      if (it != legal.end()) r.score(r.skel_losses, logits, {static_cast<int>(it - legal.begin())});
      tokens.push_back(want);
      grammar.push(want);
    } else {
      if (legal.empty()) {
        r.out.truncated = true;
        stuck = true;
        break;
      }
      Expr ctx = skel_att_.attend(g, r.enc.memory, state.h).context;
      const Expr hc[] = {state.h, ctx};
      Expr logits = g.gather(skel_logits_(g, g.tanh(skel_out_(g, g.concat(hc)))), legal);
      choice = legal[static_cast<std::size_t>(argmax(g.value(logits)))];
      tokens.push_back(skeleton_vocab_.symbol(choice));
      grammar.push(tokens.back());
    }
    prev = choice;
  }
  if (r.out.truncated) {
    if (!tokens.empty() && r.skel_repr.size() < tokens.size()) {
      state = skel_lstm_.step(g, g.lookup(*skel_emb_, prev), state);
      r.skel_repr.push_back(state.h);
    }
    tokens = close_skeleton(tokens);
    while (r.skel_repr.size() < tokens.size()) {
      state = skel_lstm_.step(g, g.lookup(*skel_emb_, skeleton_vocab_.id(tokens[r.skel_repr.size()])), state);
      r.skel_repr.push_back(state.h);
    }
  }
  r.skel_final = r.skel_repr.empty() ? state.h : r.skel_repr.back();
  r.layout = SkeletonLayout::analyze(tokens);
}

void Decoder::predicate_stage(Run& r) const {
  Graph& g = r.g;
  const auto& phs = r.layout.placeholders;
  if (r.gold && r.gold->predicates.size() != phs.size())
    fail(ErrorKind::InternalContractViolation, "gold predicates do not match the skeleton placeholders");
  const std::size_t n = r.enc.states.size();

  LstmState state = pred_lstm_.zero_state(g);
  int prev = Vocabulary::kBos;
  for (std::size_t k = 0; k < phs.size(); ++k) {
    const auto& ph = phs[k];
    const Expr in[] = {g.lookup(*pred_emb_, prev), r.skel_repr[static_cast<std::size_t>(ph.token)], r.skel_final};
    state = pred_lstm_.step(g, g.concat(in), state);
    r.pred_state.push_back(state.h);
    Expr ctx = pred_att_.attend(g, r.enc.memory, state.h).context;
    const Expr hc[] = {state.h, ctx};
    Expr o = g.tanh(pred_out_(g, g.concat(hc)));

    std::vector<int> gen = ph.arity == 2 ? role_ids_ : unary_ids_;
    std::vector<int> copy;
    if (ph.arity == 1)
      for (std::size_t i = 0; i < n && i < r.lemmas.size(); ++i)
        if (!r.lemmas[i].empty()) copy.push_back(static_cast<int>(i));
    if (gen.empty() && copy.empty()) gen.push_back(Vocabulary::kUnk);

    std::vector<Expr> parts;
    if (!gen.empty()) parts.push_back(g.gather(pred_logits_(g, o), gen));
    if (!copy.empty()) parts.push_back(g.gather(pred_copy_.scores(g, r.enc.memory, o), copy));
    Expr joint = parts.size() == 1 ? parts[0] : g.concat(parts);

    std::string label;
    int copied = -1;
    if (r.gold) {
      label = r.gold->predicates[k];
      std::vector<int> targets;
      for (std::size_t c = 0; c < copy.size(); ++c)
        if (sanitize_label(r.lemmas[static_cast<std::size_t>(copy[c])]) == label)
          targets.push_back(static_cast<int>(gen.size() + c));
      if (!targets.empty()) {
        copied = copy[static_cast<std::size_t>(targets[0] - static_cast<int>(gen.size()))];
      } else if (predicate_vocab_.contains(label)) {
        auto it = std::find(gen.begin(), gen.end(), predicate_vocab_.id(label));
        if (it != gen.end()) targets.push_back(static_cast<int>(it - gen.begin()));
      }
      r.score(r.pred_losses, joint, targets);
    } else {
      const int pick = argmax(g.value(joint));
      if (pick < static_cast<int>(gen.size())) {
        label = predicate_vocab_.symbol(gen[static_cast<std::size_t>(pick)]);
      } else {
        copied = copy[static_cast<std::size_t>(pick) - gen.size()];
        label = sanitize_label(r.lemmas[static_cast<std::size_t>(copied)]);
      }
    }
    r.out.stages.predicates.push_back(label);
    r.out.copies.push_back(copied);
    prev = predicate_vocab_.contains(label) ? predicate_vocab_.id(label) : Vocabulary::kCopy;
    r.pred_ids.push_back(prev);
  }
  if (phs.empty()) {
    r.pred_final = g.zeros(config_.hidden);
  } else {
    const Expr in[] = {g.lookup(*pred_emb_, prev), r.skel_final, r.skel_final};
    r.pred_final = pred_lstm_.step(g, g.concat(in), state).h;
  }
}

void Decoder::referent_stage(Run& r) const {
  Graph& g = r.g;
  const auto& slots = r.layout.slots;
  if (r.gold && r.gold->referents.size() != slots.size())
    fail(ErrorKind::InternalContractViolation, "gold referents do not match the skeleton slots");

  std::vector<std::vector<std::string>> declared(r.layout.boxes.size());
  int counters[4] = {0, 0, 0, 0};
  auto fresh = [&](int sort) { return std::string(1, kSorts[static_cast<std::size_t>(sort)]) + std::to_string(++counters[sort]); };

  Expr no_pred_state = g.zeros(config_.hidden);
  Expr no_source = g.zeros(memory_dim_);
  LstmState state = ref_lstm_.zero_state(g);
  int prev = Vocabulary::kBos;
  for (std::size_t m = 0; m < slots.size(); ++m) {
    const auto& slot = slots[m];
    const bool is_ref = slot.kind == SkeletonLayout::Slot::Kind::Ref;
    int kind = 0;
    if (!is_ref) kind = r.layout.placeholders[static_cast<std::size_t>(slot.placeholder)].arity == 1 ? 1 : 2 + slot.arg;
    const std::size_t ph = static_cast<std::size_t>(slot.placeholder);
    Expr source = no_source;
    if (!is_ref && r.out.copies[ph] >= 0) source = r.enc.states[static_cast<std::size_t>(r.out.copies[ph])];
    const Expr in[] = {g.lookup(*ref_emb_, prev),
                       g.lookup(*ref_kind_, kind),
                       r.skel_repr[static_cast<std::size_t>(slot.token)],
                       g.lookup(*pred_emb_, is_ref ? Vocabulary::kPad : r.pred_ids[ph]),
                       is_ref ? no_pred_state : r.pred_state[ph],
                       source,
                       r.pred_final};
    state = ref_lstm_.step(g, g.concat(in), state);
    Expr ctx = ref_att_.attend(g, r.enc.memory, state.h).context;
    const Expr hc[] = {state.h, ctx};
    Expr o = g.tanh(ref_out_(g, g.concat(hc)));

    // Legal actions: fresh variables of any sort (with names left), then
    // accessible variables, then constants in binary argument positions.
    std::vector<int> legal;
    std::vector<std::string> surface;
    for (int s = 0; s < 4; ++s)
      if (counters[s] < kMaxNamesPerSort) {
        legal.push_back(new_ids_[s]);
        surface.emplace_back();
      }
    if (!is_ref) {
      for (int b : r.layout.accessible(slot.box))
        for (const auto& name : declared[static_cast<std::size_t>(b)])
          if (referent_vocab_.contains(name) && std::find(surface.begin(), surface.end(), name) == surface.end()) {
            legal.push_back(referent_vocab_.id(name));
            surface.push_back(name);
          }
      if (kind >= 2)
        for (int c : constant_ids_) {
          legal.push_back(c);
          surface.push_back(referent_vocab_.symbol(c));
        }
    }
    Expr logits = g.gather(ref_logits_(g, o), legal);

    int pick = -1;
    std::string emitted;
    if (r.gold) {
      const std::string& want = r.gold->referents[m];
      if (is_ref || (is_variable(want) && std::find(surface.begin(), surface.end(), want) == surface.end())) {
        const int s = sort_index(want.front());
        auto it = std::find(legal.begin(), legal.end(), new_ids_[s]);
        if (it != legal.end()) pick = static_cast<int>(it - legal.begin());
        emitted = want;
        if (counters[s] < kMaxNamesPerSort) ++counters[s];
      } else {
        auto it = std::find(surface.begin(), surface.end(), want);
        if (it != surface.end()) pick = static_cast<int>(it - surface.begin());
        emitted = want;
      }
      if (pick >= 0) r.score(r.ref_losses, logits, {pick});
      prev = pick >= 0 ? legal[static_cast<std::size_t>(pick)] : Vocabulary::kUnk;
    } else {
      pick = argmax(g.value(logits));
      prev = legal[static_cast<std::size_t>(pick)];
      emitted = surface[static_cast<std::size_t>(pick)];
      if (emitted.empty()) {
        for (int s = 0; s < 4; ++s)
          if (new_ids_[s] == prev) emitted = fresh(s);
      }
    }
    if (is_variable(emitted)) {
      auto& here = declared[static_cast<std::size_t>(slot.box)];
      if (std::find(here.begin(), here.end(), emitted) == here.end()) {
        bool visible = false;
        for (int b : r.layout.accessible(slot.box))
          for (const auto& name : declared[static_cast<std::size_t>(b)]) visible = visible || name == emitted;
        if (!visible) here.push_back(emitted);
      }
    }
    r.out.stages.referents.push_back(emitted);
  }
}

void Decoder::run(Run& r) const {
  if (r.enc.states.empty()) fail(ErrorKind::EmptyInput, "nothing to decode from");
  skeleton_stage(r);
  predicate_stage(r);
  referent_stage(r);
}

StageLosses Decoder::loss(Graph& g, const EncoderOutput& enc, const StageTargets& gold,
                          const std::vector<std::string>& lemmas) const {
  Run r{g, enc, lemmas, &gold};
  run(r);
  auto total = [&](std::vector<Expr>& terms) { return terms.empty() ? g.zeros(1) : g.sum(terms); };
  StageLosses l;
  l.skeleton = total(r.skel_losses);
  l.predicates = total(r.pred_losses);
  l.referents = total(r.ref_losses);
  const Expr all[] = {l.skeleton, l.predicates, l.referents};
  l.total = g.sum(all);
  return l;
}

DecodeResult Decoder::decode(Graph& g, const EncoderOutput& enc, const std::vector<std::string>& lemmas) const {
  Run r{g, enc, lemmas, nullptr};
  run(r);
  DecodeResult& out = r.out;
  try {
    out.tree = assemble_tree(out.stages.skeleton, out.stages.predicates, out.stages.referents);
  } catch (const Error& e) {
    fail(e.kind(), std::string("assembling decoder stages: ") + e.what());
  }
  out.seq = linearize(out.tree);
  try {
    out.drs = from_tree(delinearize(out.seq));
  } catch (const Error& e) {
    fail(e.kind(), std::string("building a DRS from decoder output: ") + e.what());
  }
  return std::move(out);
}

}  // namespace xdrs
