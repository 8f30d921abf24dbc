#include "xdrs/gradcheck_suite.hpp"

#include <algorithm>
#include <functional>

#include "xdrs/clause_format.hpp"
#include "xdrs/dataset.hpp"
#include "xdrs/decoder.hpp"
#include "xdrs/encoders.hpp"
#include "xdrs/error.hpp"
#include "xdrs/model.hpp"
#include "xdrs/nn.hpp"

namespace xdrs {

namespace {

struct Fixture {
  ParameterStore store;
  Rng rng{11};
  std::vector<std::vector<double>> inputs;

  std::vector<double> random_vec(int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = u(rng);
    return v;
  }
  void reinit(double scale) {
    for (Parameter* p : store.all()) init_uniform(*p, rng, scale);
  }
};

// Weighted sum of the outputs, so every element contributes a distinct gradient.
Expr readout(Graph& g, const std::vector<Expr>& outs, const std::vector<std::vector<double>>& weights) {
  std::vector<Expr> terms;
  for (std::size_t i = 0; i < outs.size(); ++i) terms.push_back(g.dot(outs[i], g.constant(weights[i])));
  return g.sum(terms);
}

const std::vector<int> kHeads{2, 0, 2, 5, 3, 3};  // a small tree with a 2-child node and depth 3

Example tiny_example() {
  Example ex;
  ex.id = "gc";
  ex.lang = "en";
  ex.sentence.id = "gc";
  ex.sentence.tokens = {"the", "cat", "did", "not", "sleep"};
  ex.sentence.lemmas = {"the", "cat", "do", "not", "sleep"};
  ex.sentence.upos = {"DET", "NOUN", "AUX", "PART", "VERB"};
  ex.sentence.heads = {2, 5, 5, 5, 0};
  ex.sentence.deprels = {"det", "nsubj", "aux", "advmod", "root"};
  ex.drs = parse_clauses(
      "b1 REF x1\nb1 cat x1\nb1 NOT b2\nb2 REF e1\nb2 sleep e1\nb2 Agent e1 x1\nb2 Time e1 \"now\"\n");
  return ex;
}

GradCheckResult check_bilstm(const GradSuiteOptions& o) {
  Fixture f;
  BiLstm net(f.store, "bilstm", o.dim, o.dim, f.rng);
  f.reinit(o.init_scale);
  std::vector<std::vector<double>> xs, ws;
  for (int i = 0; i < 4; ++i) xs.push_back(f.random_vec(o.dim));
  for (int i = 0; i < 5; ++i) ws.push_back(f.random_vec(2 * o.dim));
  return check_gradients("bilstm", f.store.all(), [&](Graph& g) {
    std::vector<Expr> in;
    for (auto& x : xs) in.push_back(g.constant(x));
    BiLstmOutput out = net.run(g, in);
    std::vector<Expr> outs = out.states;
    outs.push_back(out.summary);
    return readout(g, outs, ws);
  }, o.check);
}

GradCheckResult check_child_sum(const GradSuiteOptions& o) {
  Fixture f;
  ChildSumCell cell(f.store, "cell", o.dim, o.dim, f.rng);
  f.reinit(o.init_scale);
  std::vector<std::vector<double>> xs, ws;
  for (std::size_t i = 0; i < kHeads.size(); ++i) {
    xs.push_back(f.random_vec(o.dim));
    ws.push_back(f.random_vec(o.dim));
  }
  return check_gradients("child_sum_cell", f.store.all(), [&](Graph& g) {
    std::vector<Expr> in;
    for (auto& x : xs) in.push_back(g.constant(x));
    std::vector<Expr> outs;
    for (const auto& s : run_child_sum(g, cell, in, kHeads)) outs.push_back(g.add(s.h, g.tanh(s.c)));
    return readout(g, outs, ws);
  }, o.check);
}

EncoderConfig small_encoder(EncoderKind kind, int dim) {
  EncoderConfig c;
  c.kind = kind;
  c.word_vocab = 9;
  c.upos_vocab = 7;
  c.deprel_vocab = 8;
  c.word_dim = c.upos_dim = c.deprel_dim = dim;
  c.hidden = dim / 2;
  c.tree_hidden = dim;
  c.train_word_embeddings = true;
  return c;
}

EncoderInput small_input() {
  EncoderInput in;
  in.heads = kHeads;
  for (std::size_t i = 0; i < kHeads.size(); ++i) {
    in.word_ids.push_back(static_cast<int>(i + 2) % 9);
    in.upos_ids.push_back(static_cast<int>(i * 3 + 1) % 7);
    in.deprel_ids.push_back(static_cast<int>(i * 5 + 2) % 8);
  }
  return in;
}

GradCheckResult check_encoder(const std::string& name, EncoderKind kind, const GradSuiteOptions& o) {
  Fixture f;
  Encoder enc(f.store, small_encoder(kind, o.dim), f.rng);
  f.reinit(o.init_scale);
  const EncoderInput in = small_input();
  std::vector<std::vector<double>> ws;
  for (std::size_t i = 0; i < in.size(); ++i) ws.push_back(f.random_vec(enc.state_dim()));
  ws.push_back(f.random_vec(enc.summary_dim()));
  return check_gradients(name, f.store.all(), [&](Graph& g) {
    EncoderOutput out = enc.encode(g, in);
    std::vector<Expr> outs = out.states;
    outs.push_back(out.summary);
    return readout(g, outs, ws);
  }, o.check);
}

GradCheckResult check_attention(const GradSuiteOptions& o) {
  Fixture f;
  Attention att(f.store, "att", o.dim, o.dim, f.rng);
  Linear q(f.store, "query", o.dim, o.dim, f.rng);
  f.reinit(o.init_scale);
  std::vector<double> memory;
  for (int i = 0; i < 5; ++i) {
    auto r = f.random_vec(o.dim);
    memory.insert(memory.end(), r.begin(), r.end());
  }
  const auto x = f.random_vec(o.dim);
  const std::vector<std::vector<double>> ws{f.random_vec(o.dim), f.random_vec(5)};
  return check_gradients("attention", f.store.all(), [&](Graph& g) {
    Expr m = g.constant(memory, Shape{5, o.dim});
    auto r = att.attend(g, m, g.tanh(q(g, g.constant(x))));
    return readout(g, {r.context, r.weights}, ws);
  }, o.check);
}

GradCheckResult check_copy_softmax(const GradSuiteOptions& o) {
  Fixture f;
  Linear gen(f.store, "gen", o.dim, 7, f.rng);
  CopyScorer copy(f.store, "copy", o.dim, o.dim, f.rng);
  f.reinit(o.init_scale);
  std::vector<double> memory;
  for (int i = 0; i < 4; ++i) {
    auto r = f.random_vec(o.dim);
    memory.insert(memory.end(), r.begin(), r.end());
  }
  const auto x = f.random_vec(o.dim);
  const std::vector<int> legal{1, 3, 4, 6};
  const std::vector<int> positions{0, 2, 3};
  const std::vector<int> targets{1, 5};  // one generated id and one copy position share the mass
  return check_gradients("copy_softmax", f.store.all(), [&](Graph& g) {
    Expr m = g.constant(memory, Shape{4, o.dim});
    Expr h = g.constant(x);
    const Expr parts[] = {g.gather(gen(g, h), legal), g.gather(copy.scores(g, m, h), positions)};
    return g.softmax_nll(g.concat(parts), targets);
  }, o.check);
}

GradCheckResult check_full_loss(const GradSuiteOptions& o) {
  const Example ex = tiny_example();
  const std::vector<Example> train{ex};
  TrainConfig c;
  c.encoder = EncoderKind::BiTree;
  c.word_dim = c.upos_dim = c.deprel_dim = o.dim;
  c.hidden = o.dim / 2;
  c.tree_hidden = o.dim;
  c.embed_dim = o.dim / 2;
  c.decoder_hidden = o.dim;
  c.train_word_embeddings = true;
  ParserModel model(c, build_vocab(train, 1, Lexicon::standard()), nullptr);
  Rng rng(13);
  for (Parameter* p : model.params().all()) init_uniform(*p, rng, o.init_scale);
  const StageTargets gold = gold_stages(ex.drs);
  return check_gradients("teacher_forced_loss", model.params().all(), [&](Graph& g) {
    return model.loss(g, ex.sentence, gold).total;
  }, o.check);
}

using Check = std::function<GradCheckResult(const GradSuiteOptions&)>;

const std::vector<std::pair<std::string, Check>>& checks() {
  static const std::vector<std::pair<std::string, Check>> all{
      {"bilstm", check_bilstm},
      {"child_sum_cell", check_child_sum},
      {"po_tree_input", [](const GradSuiteOptions& o) { return check_encoder("po_tree_input", EncoderKind::PoTree, o); }},
      {"bi_tree_stack", [](const GradSuiteOptions& o) { return check_encoder("bi_tree_stack", EncoderKind::BiTree, o); }},
      {"attention", check_attention},
      {"copy_softmax", check_copy_softmax},
      {"teacher_forced_loss", check_full_loss},
  };
  return all;
}

}  // namespace

std::vector<std::string> gradcheck_names() {
  std::vector<std::string> out;
  for (const auto& [n, c] : checks()) out.push_back(n);
  return out;
}

std::vector<GradCheckResult> run_gradcheck_suite(const GradSuiteOptions& options) {
  if (options.dim < 2 || options.dim > 8 || options.dim % 2)
    fail(ErrorKind::ConfigError, "gradcheck dim must be even and in [2, 8]");
  for (const auto& n : options.only)
    if (std::none_of(checks().begin(), checks().end(), [&](const auto& c) { return c.first == n; }))
      fail(ErrorKind::ConfigError, "unknown gradient check '" + n + "'");
  std::vector<GradCheckResult> out;
  for (const auto& [name, check] : checks()) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), name) == options.only.end())
      continue;
    out.push_back(check(options));
  }
  return out;
}

}  // namespace xdrs
