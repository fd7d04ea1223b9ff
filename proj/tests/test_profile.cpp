#include <cmath>
#include <sstream>

#include "doctest.h"
#include "sequnet/profile.hpp"
#include "test_util.hpp"

using namespace sequnet;

namespace {

ModelConfig unet(Variant v, int levels, int stride, int width) {
  ModelConfig c;
  c.variant = v;
  c.levels = levels;
  c.stride = stride;
  c.filter_width = width;
  c.hidden = 4;
  c.residual_features = 4;
  // One plain residual layer per block gives the same frame budget as the plain net.
  if (v == Variant::residual) c.depth = 1;
  return c;
}

long ipow(long b, int e) {
  long r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

TEST_CASE("two-level anchor count") {
  auto m = build_model(unet(Variant::plain, 2, 2, 1), 1);
  const auto a = count_activations(m, 16);
  REQUIRE(a.frames.size() == 4);
  CHECK(a.frames[1] == 56);
  CHECK(a.frames[2] == 28);
  CHECK(a.frames[3] == 4);
  CHECK(a.total() == 88);
  const auto b = analytic_activation_bound(2, 2, 16);
  CHECK(b.series == 88.0);
  CHECK(b.cap == 128.0);
  CHECK(a.channel_total() == 88 * 4);
}

TEST_CASE("analytic series values") {
  const auto one = analytic_activation_bound(1, 2, 16);
  CHECK(one.per_level[1] == 56.0);
  CHECK(one.per_level[2] == 8.0);
  CHECK(one.series == 64.0);
  for (int L = 1; L <= 20; ++L) CHECK(analytic_activation_bound(L, 2, 1024).series < 8 * 1024);
  CHECK(analytic_activation_bound(3, 3, 81).cap == doctest::Approx(4.0 * 81 * 3 / 2));
  CHECK(baseline_activation_series(4, 16).series == 64.0);
}

TEST_CASE("baseline counts I frames per level") {
  ModelConfig c = unet(Variant::dilated_baseline, 4, 2, 1);
  auto m = build_model(c, 1);
  CHECK(count_activations(m, 16).total() == 64);
  auto m3 = build_model(unet(Variant::dilated_baseline, 3, 2, 1), 1);
  CHECK(count_activations(m3, 40).total() == 120);
}

TEST_CASE("counts equal the series when I is a multiple of the period") {
  for (Variant v : {Variant::plain, Variant::residual})
    for (int L = 1; L <= 4; ++L)
      for (int k : {2, 3}) {
        auto m = build_model(unet(v, L, k, 1), 1);
        const long p = ipow(k, L);
        for (long I : {p, 2 * p, 5 * p}) {
          if (I < m.min_input_length()) continue;
          const auto a = count_activations(m, I);
          const auto b = analytic_activation_bound(L, k, I);
          CAPTURE(L);
          CAPTURE(k);
          CAPTURE(I);
          for (int i = 1; i <= L + 1; ++i) CHECK(static_cast<double>(a.frames[i]) == b.per_level[i]);
        }
      }
}

TEST_CASE("wide filters stay under the cap") {
  for (int L = 1; L <= 10; ++L) {
    auto m = build_model(unet(Variant::plain, L, 2, 3), 1);
    const long I = std::max<long>(ipow(2, L), m.min_input_length());
    const auto a = count_activations(m, I);
    CHECK(static_cast<double>(a.total()) <= analytic_activation_bound(L, 2, I).series);
    CHECK(a.total() <= 8 * I);
  }
}

TEST_CASE("measured update rates") {
  for (int k : {2, 3})
    for (int L = 1; L <= 4; ++L) {
      auto m = build_model(unet(Variant::plain, L, k, 2), 1);
      const auto u = measure_updates(m, 10 * ipow(k, L));
      double want = 0.0;
      for (int i = 1; i <= L; ++i) want += 1.0 / ipow(k, i - 1);
      CHECK(u.expected == doctest::Approx(want));
      CHECK(std::abs(u.amortized - want) / want <= 0.05);
      if (k == 2) CHECK(u.amortized <= 2.0);
    }
}

TEST_CASE("csv report round trip") {
  auto m = build_model(unet(Variant::plain, 2, 2, 1), 3);
  auto r = build_cost_report(m, 16, 40, 1);
  r.bench = {{"a", 123.5, {}}, {"b", 61.75, {}}};
  r.speedup = 2.0;
  std::ostringstream csv;
  emit_report(r, csv, "csv");
  const auto text = csv.str();
  CHECK(text.starts_with(std::string("# ") + kCostCsvVersion));
  CHECK(text.find("\nlevel,activations,bound,updates,expected_updates,channel_activations\n") != std::string::npos);

  std::istringstream in(text);
  const auto back = parse_csv_report(in);
  CHECK(back.fingerprint == r.fingerprint);
  CHECK(back.input_length == 16);
  CHECK(back.activations.frames == r.activations.frames);
  CHECK(back.activations.channel_frames == r.activations.channel_frames);
  CHECK(back.bound.per_level == r.bound.per_level);
  CHECK(back.bound.cap == r.bound.cap);
  CHECK(back.updates.per_level == r.updates.per_level);
  CHECK(back.updates.expected == doctest::Approx(r.updates.expected));
  REQUIRE(back.bench.size() == 2);
  CHECK(back.bench[1].samples_per_sec == 61.75);
  CHECK(back.speedup == 2.0);

  std::ostringstream md;
  emit_report(r, md, "markdown");
  CHECK(md.str().find(r.fingerprint) != std::string::npos);
  CHECK(md.str().find("| 88 |") != std::string::npos);
  CHECK_THROWS_AS(emit_report(r, md, "xml"), ConfigError);

  auto m2 = build_model(unet(Variant::plain, 2, 2, 1), 3);
  auto r2 = build_cost_report(m2, 16, 40, 1);
  r2.bench = r.bench;
  r2.speedup = r.speedup;
  std::ostringstream again;
  emit_report(r2, again, "csv");
  CHECK(again.str() == text);
}

TEST_CASE("fingerprint follows the config") {
  auto c = unet(Variant::plain, 2, 2, 3);
  const auto f = config_fingerprint(c);
  CHECK(f.size() == 16);
  CHECK(config_fingerprint(c) == f);
  c.hidden = 5;
  CHECK(config_fingerprint(c) != f);
}

TEST_CASE("generation benchmark") {
  auto m = build_model(unet(Variant::plain, 2, 2, 3), 1);
  std::vector<std::pair<std::string, Model<float>*>> models{{"a", &m}, {"b", &m}};
  try {
    bench_generation(models, 1, 0);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("nothing to benchmark") != std::string::npos);
  }
  const auto r = bench_generation(models, 1, 2000, 5, 100);
  REQUIRE(r.size() == 2);
  CHECK(r[0].runs.size() == 5);
  const double ratio = r[0].samples_per_sec / r[1].samples_per_sec;
  CHECK(ratio > 0.5);
  CHECK(ratio < 2.0);
}
