#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "sequnet/gradcheck.hpp"
#include "sequnet/ops.hpp"
#include "test_util.hpp"

using namespace sequnet;
using sequnet::testing::pick;
using sequnet::testing::random_tensor;

namespace {

Parameter<double> kernel_of(int out, int in, std::vector<double> w) {
  Parameter<double> p("kernel", {out, in, static_cast<int>(w.size()) / (out * in)});
  p.value = std::move(w);
  return p;
}

Parameter<double> zero_bias(int out) { return Parameter<double>("bias", {out}); }

std::vector<double> row(const Tape<double>& tape, Var v, int c = 0) {
  auto r = tape.value(v).row(c);
  return {r.begin(), r.end()};
}

Tensor<double> series(std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  return Tensor<double>(1, n, std::move(v));
}

}  // namespace

TEST_CASE("conv1d_valid examples") {
  Tape<double> tape;
  auto bias = zero_bias(1);
  auto ident = kernel_of(1, 1, {1});
  auto x4 = tape.leaf(series({1, 2, 3, 4}));
  CHECK(row(tape, conv1d_valid(tape, x4, ident, bias)) == std::vector<double>{1, 2, 3, 4});

  auto x6 = tape.leaf(series({1, 2, 3, 4, 5, 6}));
  CHECK(row(tape, conv1d_valid(tape, x6, ident, bias, 2)) == std::vector<double>{1, 3, 5});

  auto diff = kernel_of(1, 1, {1, 0, -1});
  CHECK(row(tape, conv1d_valid(tape, x4, diff, bias)) == std::vector<double>{-2, -2});
}

TEST_CASE("conv1d_valid matches a direct dot product on random shapes") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int ci = pick(rng, 1, 3), co = pick(rng, 1, 3), w = pick(rng, 1, 4), s = pick(rng, 1, 3), d = pick(rng, 1, 3);
    const int t = (w - 1) * d + 1 + pick(rng, 0, 9);
    Tape<double> tape;
    Parameter<double> k("k", {co, ci, w}), b("b", {co});
    k.value = random_tensor<double>(1, co * ci * w, rng).data();
    b.value = random_tensor<double>(1, co, rng).data();
    const auto x = random_tensor<double>(ci, t, rng);
    const auto y = tape.value(conv1d_valid(tape, tape.leaf(x), k, b, s, d));
    REQUIRE(y.time() == conv_output_length(t, w, s, d));
    for (int o = 0; o < co; ++o)
      for (int j = 0; j < y.time(); ++j) {
        double ref = b.value[o];
        for (int i = 0; i < ci; ++i)
          for (int q = 0; q < w; ++q) ref += k.value[(o * ci + i) * w + q] * x.at(i, j * s + q * d);
        CHECK(y.at(o, j) == doctest::Approx(ref).epsilon(1e-12));
      }
  }
}

TEST_CASE("conv1d_valid rejects short input with the required length") {
  Tape<double> tape;
  auto k = kernel_of(1, 1, {1, 1, 1});
  auto b = zero_bias(1);
  auto x = tape.leaf(series({1, 2}));
  try {
    conv1d_valid(tape, x, k, b);
    FAIL("expected InsufficientLength");
  } catch (const InsufficientLength& e) {
    CHECK(e.required() == 3);
    CHECK(e.actual() == 2);
  }
}

TEST_CASE("conv1d_transposed examples") {
  Tape<double> tape;
  auto bias = zero_bias(1);
  auto ones = kernel_of(1, 1, {1, 1});
  CHECK(row(tape, conv1d_transposed(tape, tape.leaf(series({7, -3})), ones, bias, 2)) ==
        std::vector<double>{7, 7, -3, -3});

  auto k23 = kernel_of(1, 1, {2, 3});
  CHECK(row(tape, conv1d_transposed(tape, tape.leaf(series({1})), k23, bias, 2)) == std::vector<double>{2, 3});

  // Dense oracle: transpose the matrix of the strided valid conv from length 5.
  auto k101 = kernel_of(1, 1, {1, 0, 1});
  std::vector<std::vector<double>> m(2, std::vector<double>(5, 0.0));
  for (int j = 0; j < 2; ++j)
    for (int q = 0; q < 3; ++q) m[j][2 * j + q] = k101.value[q];
  std::vector<double> expect(5, 0.0);
  const double in[2] = {1, 2};
  for (int j = 0; j < 2; ++j)
    for (int t = 0; t < 5; ++t) expect[t] += m[j][t] * in[j];
  CHECK(row(tape, conv1d_transposed(tape, tape.leaf(series({1, 2})), k101, bias, 2)) == expect);

  CHECK_THROWS_AS(conv1d_transposed(tape, tape.leaf(Tensor<double>(1, 0)), ones, bias, 2), InsufficientLength);
}

TEST_CASE("transposed conv is the adjoint of the valid conv") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int ci = pick(rng, 1, 3), co = pick(rng, 1, 3), w = pick(rng, 1, 5), s = pick(rng, 1, 3);
    const int t = w + pick(rng, 0, 12);
    Parameter<double> k("k", {co, ci, w}), kt("kt", {ci, co, w});
    k.value = random_tensor<double>(1, co * ci * w, rng).data();
    for (int o = 0; o < co; ++o)
      for (int i = 0; i < ci; ++i)
        for (int q = 0; q < w; ++q) kt.value[(i * co + o) * w + q] = k.value[(o * ci + i) * w + q];
    Parameter<double> b("b", {co}), bt("bt", {ci});
    const auto x = random_tensor<double>(ci, t, rng);
    const int tout = static_cast<int>(conv_output_length(t, w, s));
    const auto y = random_tensor<double>(co, tout, rng);
    Tape<double> tape(false);
    const auto ax = tape.value(conv1d_valid(tape, tape.leaf(x), k, b, s));
    const auto aty = tape.value(conv1d_transposed(tape, tape.leaf(y), kt, bt, s, t));
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) lhs += ax.data()[i] * y.data()[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x.data()[i] * aty.data()[i];
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("down then up shape formulas match runtime lengths") {
  std::mt19937_64 rng(5);
  Parameter<double> b("b", {1});
  for (int trial = 0; trial < 1000; ++trial) {
    const int w = pick(rng, 1, 7), k = pick(rng, 2, 4);
    const int t = pick(rng, w, w + 40);
    Parameter<double> kern("k", {1, 1, w});
    Tape<double> tape(false);
    auto down = conv1d_valid(tape, tape.leaf(Tensor<double>(1, t)), kern, b, k);
    const long expect_down = conv_output_length(t, w, k);
    REQUIRE(tape.value(down).time() == expect_down);
    auto up = conv1d_transposed(tape, down, kern, b, k);
    REQUIRE(tape.value(up).time() == transposed_output_length(expect_down, w, k));
  }
}

TEST_CASE("crop_front") {
  Tape<double> tape;
  std::vector<double> v(19);
  std::iota(v.begin(), v.end(), 0.0);
  auto x = tape.leaf(series(v));
  auto c = crop_front(tape, x, 8);
  CHECK(tape.value(c).time() == 11);
  CHECK(tape.value(c).at(0, 0) == 8.0);
  const auto same = tape.value(crop_front(tape, x, 0));
  CHECK(same == tape.value(x));
  auto x5 = tape.leaf(Tensor<double>(2, 5));
  CHECK(tape.value(crop_front(tape, x5, 5)).time() == 0);
  CHECK_THROWS_AS(crop_front(tape, x5, 6), CropError);
}

TEST_CASE("crop_front gradient is zero on cropped frames") {
  Tape<double> tape;
  auto x = tape.leaf(series({1, 2, 3, 4, 5}));
  auto c = crop_front(tape, x, 2);
  auto loss = weighted_sum(tape, c, Tensor<double>(1, 3, std::vector<double>{1, 2, 3}));
  tape.backward(loss);
  const auto& g = tape.grad(x);
  CHECK(g.at(0, 0) == 0.0);
  CHECK(g.at(0, 1) == 0.0);
  CHECK(g.at(0, 2) == 1.0);
  CHECK(g.at(0, 4) == 3.0);
}

TEST_CASE("concat_channels") {
  Tape<double> tape;
  auto a = tape.leaf(Tensor<double>(2, 7, 1.0));
  auto b = tape.leaf(Tensor<double>(3, 7, 2.0));
  const auto ab = tape.value(concat_channels(tape, a, b));
  CHECK(ab.channels() == 5);
  CHECK(ab.at(1, 0) == 1.0);
  CHECK(ab.at(2, 0) == 2.0);
  auto none = tape.leaf(Tensor<double>(0, 7));
  const auto joined = tape.value(concat_channels(tape, a, none));
  CHECK(joined == tape.value(a));
  auto c = tape.leaf(Tensor<double>(1, 10));
  auto d = tape.leaf(Tensor<double>(1, 11));
  CHECK_THROWS_AS(concat_channels(tape, c, d), AlignmentError);
}

TEST_CASE("activations") {
  Tape<double> tape;
  auto neg = tape.leaf(series({-1.0}));
  CHECK(tape.value(leaky_relu(tape, neg, 0.01)).at(0, 0) == doctest::Approx(-0.01));
  auto zero = tape.leaf(series({0.0, 0.0}));
  auto any = tape.leaf(series({-4.0, 9.0}));
  CHECK(row(tape, gated_activation(tape, zero, any)) == std::vector<double>{0.0, 0.0});
  auto one = tape.leaf(series({1.0}));
  auto z = tape.leaf(series({0.0}));
  CHECK(tape.value(gated_activation(tape, one, z)).at(0, 0) == doctest::Approx(std::tanh(1.0) * 0.5).epsilon(1e-15));
  CHECK_THROWS_AS(gated_activation(tape, one, any), ShapeError);
}

TEST_CASE("dropout") {
  std::mt19937_64 rng(1);
  Tape<double> tape;
  auto x = tape.leaf(random_tensor<double>(3, 50, rng));
  CHECK(dropout(tape, x, 0.0, true, rng).id == x.id);
  auto e = dropout(tape, x, 0.7, false, rng);
  CHECK(tape.value(e) == tape.value(x));

  const int n = 100000;
  auto ones = tape.leaf(Tensor<double>(1, n, 1.0));
  const auto y = tape.value(dropout(tape, ones, 0.5, true, rng));
  double mean = 0.0;
  int zeros = 0;
  for (double v : y.data()) {
    mean += v;
    zeros += v == 0.0;
    CHECK((v == 0.0 || v == 2.0));
  }
  mean /= n;
  CHECK(std::abs(mean - 1.0) < 0.05);
  CHECK(std::abs(zeros / double(n) - 0.5) < 0.01);
  CHECK_THROWS_AS(dropout(tape, ones, 1.0, true, rng), ConfigError);
}

TEST_CASE("embedding and tied projection") {
  const int v = 4;
  Parameter<double> table("table", {v, v});
  for (int i = 0; i < v; ++i) table.value[i * v + i] = 1.0;
  Tape<double> tape;
  std::vector<int> idx{2, 0, 3};
  auto e = embedding_lookup(tape, table, std::span<const int>(idx));
  const auto logits = tape.value(tied_projection(tape, e, table));
  for (int t = 0; t < 3; ++t)
    for (int r = 0; r < v; ++r) CHECK(logits.at(r, t) == (r == idx[t] ? 1.0 : 0.0));

  std::mt19937_64 rng(2);
  Parameter<double> t2("t2", {3, 2});
  t2.value = random_tensor<double>(1, 6, rng).data();
  std::vector<int> one{1};
  const auto col = tape.value(embedding_lookup(tape, t2, std::span<const int>(one)));
  CHECK(col.at(0, 0) == t2.value[2]);
  CHECK(col.at(1, 0) == t2.value[3]);
  std::vector<int> bad{3};
  CHECK_THROWS_AS(embedding_lookup(tape, t2, std::span<const int>(bad)), IndexError);
}

TEST_CASE("tied table gradient sums both uses") {
  std::mt19937_64 rng(9);
  Parameter<double> table("table", {5, 3});
  table.value = random_tensor<double>(1, 15, rng).data();
  const std::vector<int> idx{0, 4, 2, 2};
  const std::vector<int> tgt{1, 3, 0, 4};
  auto r = grad_check({&table}, [&](Tape<double>& tape) {
    auto e = embedding_lookup(tape, table, std::span<const int>(idx));
    return softmax_cross_entropy(tape, tied_projection(tape, e, table), std::span<const int>(tgt));
  });
  CHECK(r.max_rel_error < 1e-8);
}

TEST_CASE("softmax cross-entropy") {
  for (int v : {2, 7, 256}) {
    Tape<double> tape;
    std::vector<int> tgt{0, v - 1};
    auto l = softmax_cross_entropy(tape, tape.leaf(Tensor<double>(v, 2, 3.5)), std::span<const int>(tgt));
    CHECK(tape.scalar(l) == doctest::Approx(std::log(v)).epsilon(1e-14));
  }
  {
    Tape<double> tape;
    Tensor<double> z(3, 1);
    z.at(1, 0) = 1e4;
    std::vector<int> tgt{1};
    CHECK(tape.scalar(softmax_cross_entropy(tape, tape.leaf(z), std::span<const int>(tgt))) < 1e-12);
  }
  std::mt19937_64 rng(4);
  const auto z = random_tensor<double>(4, 3, rng, 3.0);
  const std::vector<int> tgt{3, 0, 2};
  double ref = 0.0;
  for (int t = 0; t < 3; ++t) {
    double total = 0.0;
    for (int c = 0; c < 4; ++c) total += std::exp(z.at(c, t));
    ref += -std::log(std::exp(z.at(tgt[t], t)) / total);
  }
  ref /= 3;
  Tape<double> tape;
  const double got = tape.scalar(softmax_cross_entropy(tape, tape.leaf(z), std::span<const int>(tgt)));
  CHECK(std::abs(got - ref) / ref < 1e-10);
  std::vector<int> none;
  CHECK_THROWS_AS(softmax_cross_entropy(tape, tape.leaf(z), std::span<const int>(none)), ShapeError);
}

TEST_CASE("binary cross-entropy sum") {
  Tape<double> tape;
  Tensor<double> targets(88, 4);
  for (int p = 0; p < 88; p += 3) targets.at(p, 1) = 1.0;
  CHECK(tape.scalar(binary_cross_entropy_sum(tape, tape.leaf(Tensor<double>(88, 4)), targets)) ==
        doctest::Approx(88 * std::log(2.0)).epsilon(1e-14));

  Tensor<double> sat(2, 1, std::vector<double>{60.0, -60.0});
  Tensor<double> sat_t(2, 1, std::vector<double>{1.0, 0.0});
  CHECK(tape.scalar(binary_cross_entropy_sum(tape, tape.leaf(sat), sat_t)) < 1e-20);

  std::mt19937_64 rng(6);
  const auto z = random_tensor<double>(3, 2, rng, 2.0);
  Tensor<double> y(3, 2, std::vector<double>{1, 0, 0, 1, 1, 1});
  double ref = 0.0;
  for (int p = 0; p < 3; ++p)
    for (int t = 0; t < 2; ++t) {
      const double s = 1.0 / (1.0 + std::exp(-z.at(p, t)));
      ref -= y.at(p, t) * std::log(s) + (1 - y.at(p, t)) * std::log(1 - s);
    }
  ref /= 2;
  CHECK(tape.scalar(binary_cross_entropy_sum(tape, tape.leaf(z), y)) == doctest::Approx(ref).epsilon(1e-12));
  CHECK_THROWS_AS(binary_cross_entropy_sum(tape, tape.leaf(z), Tensor<double>(3, 3)), ShapeError);
}

TEST_CASE("backward") {
  Parameter<double> w("w", {1, 1, 1}), b("b", {1});
  w.value = {2.5};
  Tape<double> tape;
  auto x = tape.leaf(series({-1.75}));
  auto loss = weighted_sum(tape, conv1d_valid(tape, x, w, b), Tensor<double>(1, 1, 1.0));
  tape.backward(loss);
  CHECK(w.grad[0] == -1.75);
  CHECK(b.grad[0] == 1.0);
  CHECK_THROWS_AS(tape.backward(loss), StaleTape);

  const auto& order = tape.backward_order();
  REQUIRE(!order.empty());
  for (std::size_t i = 1; i < order.size(); ++i) CHECK(order[i] < order[i - 1]);

  w.zero_grad();
  CHECK(w.grad[0] == 0.0);
}

TEST_CASE("every op passes a finite-difference check") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int ci = pick(rng, 1, 3), co = pick(rng, 1, 3), w = pick(rng, 1, 3), s = pick(rng, 2, 3);
    Parameter<double> x("x", {ci, w + pick(rng, 0, 6)});
    Parameter<double> k("k", {co, ci, w}), b("b", {co}), k2("k2", {ci, co, w}), b2("b2", {ci});
    for (auto* p : {&x, &k, &b, &k2, &b2}) p->value = random_tensor<double>(1, static_cast<int>(p->size()), rng).data();
    const auto probe = random_tensor<double>(ci, 64, rng);
    auto r = grad_check({&x, &k, &b, &k2, &b2}, [&](Tape<double>& tape) {
      auto xv = parameter_leaf(tape, x, x.shape[0], x.shape[1]);
      auto d = leaky_relu(tape, conv1d_valid(tape, xv, k, b, s), 0.1);
      auto u = conv1d_transposed(tape, gated_activation(tape, d, tanh_act(tape, d)), k2, b2, s);
      auto cat = crop_front(tape, concat_channels(tape, u, sigmoid_act(tape, u)), 1);
      const auto cv = tape.value(cat);
      Tensor<double> wts(cv.channels(), cv.time());
      for (int c = 0; c < cv.channels(); ++c)
        for (int t = 0; t < cv.time(); ++t) wts.at(c, t) = probe.at(c % ci, t % 64);
      return weighted_sum(tape, cat, wts);
    });
    CHECK(r.max_rel_error < 1e-5);
  }
}
