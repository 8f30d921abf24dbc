#include "xdrs/encoders.hpp"

#include <cmath>

#include "xdrs/error.hpp"
#include "xdrs/text_util.hpp"

namespace xdrs {

std::string_view to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::Bi: return "bi";
    case EncoderKind::Tree: return "tree";
    case EncoderKind::PoTree: return "po_tree";
    case EncoderKind::BiTree: return "bi_tree";
  }
  return "bi";
}

EncoderKind parse_encoder_kind(std::string_view s) {
  if (s == "bi") return EncoderKind::Bi;
  if (s == "tree") return EncoderKind::Tree;
  if (s == "po_tree") return EncoderKind::PoTree;
  if (s == "bi_tree") return EncoderKind::BiTree;
  fail(ErrorKind::ConfigError, "unknown encoder '" + std::string(s) + "' (expected bi, tree, po_tree or bi_tree)");
}

std::string FeatureSet::str() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ",";
    out += name;
  };
  add(we, "we");
  add(pe, "pe");
  add(de, "de");
  return out;
}

FeatureSet FeatureSet::parse(std::string_view s) {
  FeatureSet f{false, false, false};
  for (auto part : split_char(s, ',')) {
    part = trim(part);
    if (part == "we" || part == "WE") f.we = true;
    else if (part == "pe" || part == "PE") f.pe = true;
    else if (part == "de" || part == "DE") f.de = true;
    else fail(ErrorKind::ConfigError, "unknown feature '" + std::string(part) + "' (expected we, pe, de)");
  }
  if (f.empty()) fail(ErrorKind::ConfigError, "empty feature set");
  return f;
}

std::vector<double> positional_encoding(int i, int d, double base) {
  if (d <= 0 || d % 2 != 0) fail(ErrorKind::ShapeError, "positional encoding needs an even positive d, got " + std::to_string(d));
  if (i < 0) fail(ErrorKind::ShapeError, "negative position");
  std::vector<double> p(static_cast<std::size_t>(d));
  for (int j = 0; 2 * j < d; ++j) {
    const double angle = static_cast<double>(i) / std::pow(base, static_cast<double>(2 * j) / d);
    p[static_cast<std::size_t>(2 * j)] = std::sin(angle);
    p[static_cast<std::size_t>(2 * j + 1)] = std::cos(angle);
  }
  return p;
}

namespace {

Parameter* table(ParameterStore& store, const std::string& name, int rows, int dim, bool trainable, Rng& rng) {
  if (rows <= 0) fail(ErrorKind::ConfigError, name + ": empty vocabulary");
  if (dim <= 0) fail(ErrorKind::ConfigError, name + ": dimension must be positive");
  Parameter& p = store.add(name, Shape{rows, dim}, trainable);
  init_uniform(p, rng, kInitScale);
  return &p;
}

}  // namespace

Encoder::Encoder(ParameterStore& store, const EncoderConfig& config, Rng& rng) : config_(config) {
  const FeatureSet& f = config_.features;
  if (f.empty()) fail(ErrorKind::ConfigError, "encoder needs at least one feature family");
  if (config_.kind == EncoderKind::BiTree && f.only_de())
    fail(ErrorKind::UnsupportedFeatureCombination,
         "bi_tree cannot run on dependency features alone: its BiLSTM stage reads word and POS embeddings");
  if (config_.hidden <= 0 || config_.effective_tree_hidden() <= 0)
    fail(ErrorKind::ConfigError, "hidden sizes must be positive");
  if (config_.kind == EncoderKind::PoTree) {
    const int d = config_.effective_positional_dim();
    if (d % 2 != 0) fail(ErrorKind::ShapeError, "positional dimension must be even, got " + std::to_string(d));
    if ((f.we && config_.word_dim != d) || (f.pe && config_.upos_dim != d) || (f.de && config_.deprel_dim != d))
      fail(ErrorKind::ShapeError, "po_tree adds P_i to every embedding, so each family needs dimension " +
                                      std::to_string(d));
  }

  if (f.we) word_ = table(store, "enc.emb.word", config_.word_vocab, config_.word_dim, config_.train_word_embeddings, rng);
  if (f.pe) upos_ = table(store, "enc.emb.upos", config_.upos_vocab, config_.upos_dim, true, rng);
  if (f.de) deprel_ = table(store, "enc.emb.deprel", config_.deprel_vocab, config_.deprel_dim, true, rng);

  const int dw = f.we ? config_.word_dim : 0;
  const int dp = f.pe ? config_.upos_dim : 0;
  const int dd = f.de ? config_.deprel_dim : 0;
  const int th = config_.effective_tree_hidden();
  switch (config_.kind) {
    case EncoderKind::Bi:
      bilstm_ = BiLstm(store, "enc.bilstm", dw + dp + dd, config_.hidden, rng);
      break;
    case EncoderKind::Tree:
    case EncoderKind::PoTree:
      proj_ = Linear(store, "enc.proj", dw + dp + dd, th, rng);
      tree_ = ChildSumCell(store, "enc.tree", th, th, rng);
      break;
    case EncoderKind::BiTree:
      proj_ = Linear(store, "enc.proj", dw + dp, th, rng);
      bilstm_ = BiLstm(store, "enc.bilstm", th, config_.hidden, rng);
      tree_ = ChildSumCell(store, "enc.tree", bilstm_.output_dim() + dd, th, rng);
      break;
  }
}

int Encoder::state_dim() const {
  return config_.kind == EncoderKind::Bi ? 2 * config_.hidden : config_.effective_tree_hidden();
}

int Encoder::summary_dim() const { return state_dim(); }

std::vector<Expr> Encoder::embed(Graph& g, const EncoderInput& in, bool with_we, bool with_pe, bool with_de,
                                 bool positional) const {
  std::vector<Expr> xs;
  for (std::size_t i = 0; i < in.size(); ++i) {
    std::vector<Expr> parts;
    if (with_we) parts.push_back(g.lookup(*word_, in.word_ids[i]));
    if (with_pe) parts.push_back(g.lookup(*upos_, in.upos_ids[i]));
    if (with_de) parts.push_back(g.lookup(*deprel_, in.deprel_ids[i]));
    if (positional) {
      std::vector<double> p =
          positional_encoding(static_cast<int>(i), config_.effective_positional_dim(), config_.positional_base);
      for (auto& v : p) v *= config_.positional_scale;
      Expr pe = g.constant(p);
      for (auto& e : parts) e = g.add(e, pe);
    }
    xs.push_back(parts.size() == 1 ? parts[0] : g.concat(parts));
  }
  return xs;
}

EncoderOutput Encoder::encode(Graph& g, const EncoderInput& in) const {
  const std::size_t n = in.size();
  if (n == 0) fail(ErrorKind::EmptyInput, "empty sentence");
  if (in.upos_ids.size() != n || in.deprel_ids.size() != n || in.heads.size() != n)
    fail(ErrorKind::ShapeError, "encoder input columns differ in length");
  const FeatureSet& f = config_.features;

  EncoderOutput out;
  switch (config_.kind) {
    case EncoderKind::Bi: {
      BiLstmOutput b = bilstm_.run(g, embed(g, in, f.we, f.pe, f.de, false));
      out.states = std::move(b.states);
      out.summary = b.summary;
      break;
    }
    case EncoderKind::Tree:
    case EncoderKind::PoTree: {
      std::vector<Expr> xs = embed(g, in, f.we, f.pe, f.de, config_.kind == EncoderKind::PoTree);
      for (auto& x : xs) x = g.tanh(proj_(g, x));
      auto states = run_child_sum(g, tree_, xs, in.heads);
      for (const auto& s : states) out.states.push_back(s.h);
      out.summary = states[static_cast<std::size_t>(postorder(in.heads).back())].h;
      break;
    }
    case EncoderKind::BiTree: {
      std::vector<Expr> xs = embed(g, in, f.we, f.pe, false, false);
      for (auto& x : xs) x = g.tanh(proj_(g, x));
      BiLstmOutput b = bilstm_.run(g, xs);
      std::vector<Expr> tree_in;
      for (std::size_t i = 0; i < n; ++i) {
        if (f.de) {
          const Expr parts[] = {b.states[i], g.lookup(*deprel_, in.deprel_ids[i])};
          tree_in.push_back(g.concat(parts));
        } else {
          tree_in.push_back(b.states[i]);
        }
      }
      auto states = run_child_sum(g, tree_, tree_in, in.heads);
      for (const auto& s : states) out.states.push_back(s.h);
      out.summary = states[static_cast<std::size_t>(postorder(in.heads).back())].h;
      break;
    }
  }
  out.memory = g.stack_rows(out.states);
  out.state_dim = state_dim();
  out.summary_dim = summary_dim();
  return out;
}

}  // namespace xdrs
