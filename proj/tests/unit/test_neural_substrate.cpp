#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <functional>

#include "xdrs/autodiff.hpp"
#include "xdrs/checkpoint.hpp"
#include "xdrs/error.hpp"
#include "xdrs/gradcheck.hpp"
#include "xdrs/gradcheck_suite.hpp"
#include "xdrs/nn.hpp"
#include "xdrs/optimizer.hpp"

using namespace xdrs;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InternalContractViolation;
}

std::vector<double> vec(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("tanh at zero") {
  ParameterStore store;
  Parameter& x = store.add("x", vec_shape(4));
  Graph g;
  Expr t = g.tanh(g.param(x));
  CHECK(vec(g.value(t)) == std::vector<double>(4, 0.0));
  g.backward(g.sum_elements(t));
  CHECK(x.grad == std::vector<double>(4, 1.0));
}

TEST_CASE("shape algebra") {
  Graph g;
  const Expr parts[] = {g.constant(std::vector<double>{1, 2}, Shape{2, 1}), g.constant(std::vector<double>{3, 4, 5}, Shape{3, 1})};
  Expr c = g.concat(parts);
  CHECK(g.shape(c) == vec_shape(5));
  CHECK(vec(g.value(c)) == std::vector<double>{1, 2, 3, 4, 5});
  CHECK(kind_of([&] { g.add(parts[0], parts[1]); }) == ErrorKind::ShapeError);
  Expr M = g.constant(std::vector<double>(6, 1.0), Shape{2, 3});
  CHECK(kind_of([&] { g.matvec(M, parts[0]); }) == ErrorKind::ShapeError);
  CHECK(g.shape(g.matvec(M, parts[1])) == vec_shape(2));
}

TEST_CASE("cross entropy of uniform logits is ln k") {
  for (int k : {2, 5, 17}) {
    Graph g;
    Expr l = g.softmax_cross_entropy(g.zeros(k), k - 1);
    CHECK(g.scalar(l) == doctest::Approx(std::log(k)).epsilon(1e-12));
  }
  Graph g;
  Expr logits = g.constant(std::vector<double>{0.3, -1.0, 2.0, 0.5}, vec_shape(4));
  const int both[] = {0, 2};
  auto p = vec(g.value(g.softmax(logits)));
  CHECK(g.scalar(g.softmax_nll(logits, both)) == doctest::Approx(-std::log(p[0] + p[2])).epsilon(1e-12));
  double total = 0;
  for (double v : p) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gradient of a squared norm") {
  ParameterStore store;
  Parameter& w = store.add("w", vec_shape(3));
  w.value = {1, 2, 3};
  Graph g;
  Expr e = g.param(w);
  g.backward(g.sum_elements(g.mul(e, e)));
  CHECK(w.grad == std::vector<double>{2, 4, 6});
}

TEST_CASE("parameters used twice receive summed gradients") {
  ParameterStore store;
  Parameter& w = store.add("w", vec_shape(2));
  w.value = {0.5, -1.5};
  Graph g;
  Expr a = g.param(w);
  Expr b = g.param(w);
  g.backward(g.sum_elements(g.add(g.scale(a, 3.0), b)));
  CHECK(w.grad == std::vector<double>{4, 4});
  // Gradients accumulate across backward calls until zeroed.
  Graph g2;
  g2.backward(g2.sum_elements(g2.param(w)));
  CHECK(w.grad == std::vector<double>{5, 5});
  store.zero_grad();
  CHECK(w.grad == std::vector<double>{0, 0});
}

TEST_CASE("backward rejects non-scalar losses") {
  ParameterStore store;
  Parameter& w = store.add("w", vec_shape(2));
  Graph g;
  CHECK(kind_of([&] { g.backward(g.param(w)); }) == ErrorKind::ShapeError);
}

TEST_CASE("backward visits every node once") {
  ParameterStore store;
  Parameter& w = store.add("w", vec_shape(3));
  w.value = {0.1, 0.2, 0.3};
  Graph g;
  Expr a = g.param(w);
  for (int i = 0; i < 40; ++i) a = g.add(a, a);  // 2^40 paths, 41 nodes
  Expr loss = g.sum_elements(a);
  g.backward(loss);
  CHECK(g.last_backward_visits() == 42);
  CHECK(w.grad[0] == doctest::Approx(std::ldexp(1.0, 40)));
}

TEST_CASE("sparse lookup gradient") {
  ParameterStore store;
  Parameter& table = store.add("t", Shape{4, 2});
  Graph g;
  Expr r = g.add(g.lookup(table, 2), g.lookup(table, 2));
  g.backward(g.sum_elements(g.add(r, g.lookup(table, 0))));
  CHECK(table.grad == std::vector<double>{1, 1, 0, 0, 2, 2, 0, 0});
  CHECK(kind_of([&] { g.lookup(table, 4); }) == ErrorKind::ShapeError);
}

TEST_CASE("tanh mlp matches finite differences") {
  ParameterStore store;
  Rng rng(1);
  Linear l1(store, "l1", 5, 7, rng), l2(store, "l2", 7, 6, rng), l3(store, "l3", 6, 3, rng);
  for (Parameter* p : store.all()) init_uniform(*p, rng, 0.6);
  const std::vector<double> x{0.3, -0.8, 0.5, 0.1, -0.2};
  auto r = check_gradients("mlp", store.all(), [&](Graph& g) {
    Expr h = g.tanh(l1(g, g.constant(x)));
    h = g.tanh(l2(g, h));
    return g.softmax_cross_entropy(l3(g, h), 1);
  });
  CHECK(r.passed);
  CHECK(r.max_rel_error <= 1e-4);
  CHECK(r.checked == store.all().size() * 0 + 5 * 7 + 7 + 7 * 6 + 6 + 6 * 3 + 3);
}

TEST_CASE("every graph op is differentiated correctly") {
  ParameterStore store;
  Rng rng(2);
  Parameter& M = store.add("M", Shape{4, 3});
  Parameter& v = store.add("v", vec_shape(3));
  Parameter& u = store.add("u", vec_shape(4));
  for (Parameter* p : store.all()) init_uniform(*p, rng, 0.9);
  const int picks[] = {3, 0, 2};
  const int targets[] = {0, 2};
  auto r = check_gradients("ops", store.all(), [&](Graph& g) {
    Expr m = g.param(M), a = g.param(v), b = g.param(u);
    Expr mv = g.matvec(m, a);
    Expr tm = g.tmatvec(m, g.softmax(b));
    Expr s = g.sigmoid(g.sub(mv, b));
    const Expr rows[] = {a, tm};
    Expr st = g.stack_rows(rows);
    Expr y = g.matvec(st, g.slice(s, 1, 3));
    const Expr parts[] = {y, g.gather(s, picks)};
    Expr logits = g.concat(parts);
    const Expr terms[] = {g.softmax_nll(logits, targets), g.dot(a, tm), g.scale(g.sum_elements(g.mul(s, s)), 0.5)};
    return g.sum_elements(g.concat(terms));
  });
  CHECK(r.passed);
}

TEST_CASE("frozen tables never change") {
  ParameterStore store;
  Parameter& frozen = store.add("emb", Shape{5, 3}, false);
  Parameter& w = store.add("w", vec_shape(3));
  Rng rng(3);
  init_uniform(frozen, rng, 1.0);
  init_uniform(w, rng, 1.0);
  const auto before = frozen.value;
  Adam adam(store, AdamOptions{0.05});
  for (int step = 0; step < 100; ++step) {
    store.zero_grad();
    Graph g;
    g.backward(g.dot(g.lookup(frozen, step % 5), g.param(w)));
    adam.step();
  }
  CHECK(frozen.value == before);
  CHECK(frozen.grad.empty());
}

TEST_CASE("adam step behaviour") {
  ParameterStore store;
  Parameter& w = store.add("w", vec_shape(1));
  w.value = {1.0};
  Adam adam(store, AdamOptions{0.1});
  adam.step();  // zero gradient
  CHECK(w.value[0] == 1.0);
  CHECK(adam.steps() == 1);

  Parameter& v = store.add("v", vec_shape(1));
  v.value = {1.0};
  Adam fresh(store, AdamOptions{0.1});
  store.zero_grad();
  Graph g;
  Expr e = g.param(v);
  g.backward(g.mul(e, e));
  fresh.step();
  CHECK(v.value[0] < 1.0);
  CHECK(v.value[0] == doctest::Approx(0.9).epsilon(1e-6));
}

TEST_CASE("gradient clipping") {
  ParameterStore store;
  Parameter& w = store.add("w", vec_shape(2));
  w.grad = {3.0, 4.0};
  CHECK(grad_norm(store.trainable()) == doctest::Approx(5.0));
  clip_grad_norm(store.trainable(), 1.0);
  CHECK(grad_norm(store.trainable()) == doctest::Approx(1.0));
  w.grad = {NAN, 0.0};
  CHECK(kind_of([&] { clip_grad_norm(store.trainable(), 1.0); }) == ErrorKind::NumericError);
}

TEST_CASE("forward and backward are deterministic") {
  auto run = [] {
    ParameterStore store;
    Rng rng(42);
    LstmCell cell(store, "c", 3, 4, rng);
    Graph g;
    LstmState s = cell.zero_state(g);
    for (int i = 0; i < 3; ++i) s = cell.step(g, g.constant(std::vector<double>{0.1 * i, -0.2, 0.3}), s);
    g.backward(g.sum_elements(s.h));
    std::vector<double> out = vec(g.value(s.h));
    for (Parameter* p : store.all()) out.insert(out.end(), p->grad.begin(), p->grad.end());
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("checkpoint round trip") {
  ParameterStore a;
  Rng rng(5);
  init_uniform(a.add("x", Shape{3, 2}), rng, 1.0);
  init_uniform(a.add("frozen", Shape{2, 2}, false), rng, 1.0);
  Checkpoint c = Checkpoint::capture(a);
  c.manifest["seed"] = "5";
  c.blobs["vocab"] = "a\nb\n";
  const auto path = std::filesystem::temp_directory_path() / "xdrs_ckpt_test.ckpt";
  save_checkpoint(path, c);
  Checkpoint back = load_checkpoint(path);
  CHECK(back.manifest.at("seed") == "5");
  CHECK(back.blobs.at("vocab") == "a\nb\n");

  ParameterStore b;
  b.add("x", Shape{3, 2});
  b.add("frozen", Shape{2, 2}, false);
  back.restore(b);
  CHECK(b.find("x")->value == a.find("x")->value);
  CHECK(b.find("frozen")->value == a.find("frozen")->value);
  CHECK(back.serialize() == c.serialize());

  ParameterStore wrong;
  wrong.add("x", Shape{2, 3});
  wrong.add("frozen", Shape{2, 2}, false);
  CHECK(kind_of([&] { back.restore(wrong); }) == ErrorKind::ShapeError);
  CHECK(kind_of([] { Checkpoint::deserialize("not a checkpoint"); }) == ErrorKind::ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("key value text") {
  auto kv = parse_kv("# comment\nlr = 0.001\n\nencoder = bi_tree\n");
  CHECK(kv.size() == 2);
  CHECK(kv.at("encoder") == "bi_tree");
  CHECK(parse_kv(format_kv(kv)) == kv);
  CHECK(kind_of([] { parse_kv("no equals sign\n"); }) == ErrorKind::ConfigError);
}

TEST_CASE("composite module gradient suite") {
  for (const auto& r : run_gradcheck_suite()) {
    INFO(r.name << " worst " << r.worst << " error " << r.max_rel_error);
    CHECK(r.passed);
    CHECK(r.max_rel_error <= 1e-4);
  }
}
