#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "support.hpp"
#include "xdrs/encoders.hpp"
#include "xdrs/error.hpp"
#include "xdrs/nn.hpp"

using namespace xdrs;

namespace {

EncoderConfig small_config(EncoderKind kind, FeatureSet f = {}) {
  EncoderConfig c;
  c.kind = kind;
  c.features = f;
  c.word_vocab = 20;
  c.upos_vocab = 6;
  c.deprel_vocab = 8;
  c.word_dim = c.upos_dim = c.deprel_dim = 4;
  c.hidden = 3;
  c.tree_hidden = 5;
  return c;
}

EncoderInput random_input(testing::Rng& rng, int n) {
  EncoderInput in;
  in.heads = testing::random_heads(rng, n);
  for (int i = 0; i < n; ++i) {
    in.word_ids.push_back(static_cast<int>(rng() % 20));
    in.upos_ids.push_back(static_cast<int>(rng() % 6));
    in.deprel_ids.push_back(static_cast<int>(rng() % 8));
  }
  return in;
}

// Token i of `in` moves to position perm[i]; the tree is unchanged.
EncoderInput permute(const EncoderInput& in, const std::vector<int>& perm) {
  EncoderInput out = in;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const auto j = static_cast<std::size_t>(perm[i]);
    out.word_ids[j] = in.word_ids[i];
    out.upos_ids[j] = in.upos_ids[i];
    out.deprel_ids[j] = in.deprel_ids[i];
    out.heads[j] = in.heads[i] == 0 ? 0 : perm[static_cast<std::size_t>(in.heads[i] - 1)] + 1;
  }
  return out;
}

std::vector<double> values(const Graph& g, Expr e) {
  auto s = g.value(e);
  return {s.begin(), s.end()};
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("positional encoding against direct evaluation") {
  for (int d : {4, 8})
    for (int i = 0; i < 8; ++i) {
      auto p = positional_encoding(i, d);
      REQUIRE(p.size() == static_cast<std::size_t>(d));
      for (int k = 0; k < d; ++k) {
        const double angle = i / std::pow(1000.0, (k - k % 2) / static_cast<double>(d));
        CHECK(std::abs(p[k] - (k % 2 == 0 ? std::sin(angle) : std::cos(angle))) <= 1e-12);
      }
    }
  CHECK(positional_encoding(0, 8) == std::vector<double>{0, 1, 0, 1, 0, 1, 0, 1});
  auto p = positional_encoding(2, 4);
  CHECK(p[0] == doctest::Approx(0.909297).epsilon(1e-5));
  CHECK(p[1] == doctest::Approx(-0.416147).epsilon(1e-5));
  CHECK(p[2] == doctest::Approx(0.0632034).epsilon(1e-5));
  CHECK(p[3] == doctest::Approx(0.998001).epsilon(1e-5));
  CHECK_THROWS_AS(positional_encoding(1, 5), Error);
}

TEST_CASE("names and feature sets") {
  for (auto k : {EncoderKind::Bi, EncoderKind::Tree, EncoderKind::PoTree, EncoderKind::BiTree})
    CHECK(parse_encoder_kind(to_string(k)) == k);
  CHECK(FeatureSet::parse("we,de") == FeatureSet{true, false, true});
  CHECK(FeatureSet::parse("de").only_de());
  CHECK(FeatureSet{true, true, false}.str() == "we,pe");
  CHECK_THROWS_AS(FeatureSet::parse("xe"), Error);
  CHECK_THROWS_AS(parse_encoder_kind("gru"), Error);
}

TEST_CASE("bi_tree rejects dependency features alone") {
  ParameterStore store;
  Rng rng(1);
  try {
    Encoder e(store, small_config(EncoderKind::BiTree, FeatureSet{false, false, true}), rng);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedFeatureCombination);
  }
  for (auto k : {EncoderKind::Bi, EncoderKind::Tree, EncoderKind::PoTree}) {
    ParameterStore s;
    CHECK_NOTHROW(Encoder(s, small_config(k, FeatureSet{false, false, true}), rng));
  }
}

TEST_CASE("output shapes for every encoder") {
  testing::Rng data(3);
  for (auto k : {EncoderKind::Bi, EncoderKind::Tree, EncoderKind::PoTree, EncoderKind::BiTree}) {
    CAPTURE(to_string(k));
    ParameterStore store;
    Rng rng(2);
    Encoder enc(store, small_config(k), rng);
    Graph g;
    auto in = random_input(data, 6);
    auto out = enc.encode(g, in);
    CHECK(out.states.size() == 6);
    CHECK(g.shape(out.memory) == Shape{6, enc.state_dim()});
    CHECK(g.shape(out.summary) == vec_shape(enc.summary_dim()));
    CHECK(enc.state_dim() == (k == EncoderKind::Bi ? 6 : 5));
    for (auto s : out.states) CHECK(g.shape(s) == vec_shape(enc.state_dim()));
  }
}

TEST_CASE("empty and ragged inputs") {
  ParameterStore store;
  Rng rng(2);
  Encoder enc(store, small_config(EncoderKind::Tree), rng);
  Graph g;
  CHECK_THROWS_AS(enc.encode(g, EncoderInput{}), Error);
  EncoderInput bad{{1, 2}, {1}, {1, 2}, {0, 1}};
  CHECK_THROWS_AS(enc.encode(g, bad), Error);
  EncoderInput two_roots{{1, 2}, {1, 1}, {1, 2}, {0, 0}};
  CHECK_THROWS_AS(enc.encode(g, two_roots), Error);
}

TEST_CASE("child-sum states ignore sibling order, positional states do not") {
  testing::Rng data(17);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(data() % 8);
    auto in = random_input(data, n);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), data);
    auto moved = permute(in, perm);

    ParameterStore ts;
    Rng r1(4);
    Encoder tree(ts, small_config(EncoderKind::Tree), r1);
    Graph g1, g2;
    auto a = tree.encode(g1, in), b = tree.encode(g2, moved);
    for (int i = 0; i < n; ++i) CHECK(values(g1, a.states[i]) == values(g2, b.states[perm[i]]));

    ParameterStore ps;
    Rng r2(4);
    Encoder po(ps, small_config(EncoderKind::PoTree), r2);
    Graph g3, g4;
    auto c = po.encode(g3, in), d = po.encode(g4, moved);
    for (int i = 0; i < n; ++i) {
      if (perm[i] == i) continue;
      auto x = values(g3, c.states[i]), y = values(g4, d.states[perm[i]]);
      double diff = 0;
      for (std::size_t k = 0; k < x.size(); ++k) diff = std::max(diff, std::abs(x[k] - y[k]));
      CHECK(diff > 1e-9);
    }
  }
}

TEST_CASE("po_tree without positions equals tree") {
  testing::Rng data(5);
  auto in = random_input(data, 7);
  auto cfg = small_config(EncoderKind::PoTree);
  cfg.positional_scale = 0.0;
  ParameterStore s1, s2;
  Rng r1(9), r2(9);
  Encoder po(s1, cfg, r1), tree(s2, small_config(EncoderKind::Tree), r2);
  Graph g1, g2;
  auto a = po.encode(g1, in), b = tree.encode(g2, in);
  for (int i = 0; i < 7; ++i) CHECK(values(g1, a.states[i]) == values(g2, b.states[i]));
}

TEST_CASE("sequential encoders depend on word order") {
  testing::Rng data(6);
  auto in = random_input(data, 5);
  std::vector<int> rev{4, 3, 2, 1, 0};
  auto moved = permute(in, rev);
  for (auto k : {EncoderKind::Bi, EncoderKind::BiTree}) {
    ParameterStore s;
    Rng r(3);
    Encoder enc(s, small_config(k), r);
    Graph g1, g2;
    auto a = enc.encode(g1, in), b = enc.encode(g2, moved);
    bool differs = false;
    for (int i = 0; i < 5; ++i) differs |= values(g1, a.states[i]) != values(g2, b.states[rev[i]]);
    CHECK(differs);
  }
}

TEST_CASE("child-sum cell against a hand computation") {
  const int I = 2, H = 3;
  ParameterStore store;
  Rng rng(8);
  ChildSumCell cell(store, "cs", I, H, rng);
  for (Parameter* p : store.all()) init_uniform(*p, rng, 0.7);
  const std::vector<std::vector<double>> x{{0.5, -0.3}, {0.1, 0.9}, {-0.7, 0.2}};
  const std::vector<int> heads{0, 1, 1};  // token 1 is the root of two leaves

  Graph g;
  std::vector<Expr> xs;
  for (const auto& v : x) xs.push_back(g.constant(v));
  auto states = run_child_sum(g, cell, xs, heads);

  const auto& Wiou = store.find("cs.iou.W")->value;
  const auto& biou = store.find("cs.iou.b")->value;
  const auto& Wf = store.find("cs.f.W")->value;
  const auto& bf = store.find("cs.f.b")->value;
  auto affine = [](const std::vector<double>& W, const std::vector<double>& b, const std::vector<double>& v) {
    std::vector<double> y(b);
    for (std::size_t r = 0; r < b.size(); ++r)
      for (std::size_t c = 0; c < v.size(); ++c) y[r] += W[r * v.size() + c] * v[c];
    return y;
  };
  struct HC { std::vector<double> h, c; };
  auto node = [&](const std::vector<double>& xv, const std::vector<HC>& kids) {
    std::vector<double> hsum(H, 0.0);
    for (const auto& k : kids)
      for (int j = 0; j < H; ++j) hsum[j] += k.h[j];
    std::vector<double> xh(xv);
    xh.insert(xh.end(), hsum.begin(), hsum.end());
    auto z = affine(Wiou, biou, xh);
    HC out{std::vector<double>(H), std::vector<double>(H)};
    for (int j = 0; j < H; ++j) out.c[j] = sigmoid(z[j]) * std::tanh(z[2 * H + j]);
    for (const auto& k : kids) {
      std::vector<double> xk(xv);
      xk.insert(xk.end(), k.h.begin(), k.h.end());
      auto f = affine(Wf, bf, xk);
      for (int j = 0; j < H; ++j) out.c[j] += sigmoid(f[j]) * k.c[j];
    }
    for (int j = 0; j < H; ++j) out.h[j] = sigmoid(z[H + j]) * std::tanh(out.c[j]);
    return out;
  };
  HC l1 = node(x[1], {}), l2 = node(x[2], {});
  HC root = node(x[0], {l1, l2});
  auto got = values(g, states[0].h);
  auto got_c = values(g, states[0].c);
  for (int j = 0; j < H; ++j) {
    CHECK(got[j] == doctest::Approx(root.h[j]).epsilon(1e-12));
    CHECK(got_c[j] == doctest::Approx(root.c[j]).epsilon(1e-12));
  }
  CHECK(values(g, states[1].h)[0] == doctest::Approx(l1.h[0]).epsilon(1e-12));
}

TEST_CASE("word table is frozen unless requested") {
  ParameterStore s1, s2;
  Rng r(1);
  Encoder frozen(s1, small_config(EncoderKind::Bi), r);
  auto cfg = small_config(EncoderKind::Bi);
  cfg.train_word_embeddings = true;
  Encoder trained(s2, cfg, r);
  CHECK_FALSE(frozen.word_table()->trainable());
  CHECK(trained.word_table()->trainable());
  CHECK(frozen.upos_table()->trainable());
}
