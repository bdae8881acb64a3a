#include <doctest.h>

#include <cmath>

#include "quasidyn/error.hpp"
#include "quasidyn/spectra.hpp"
#include "quasidyn/transfer.hpp"

using namespace qd;

// Total length of the depth-6 approximant at lambda = 24, golden mean (pilot run).
constexpr double kApproxLengthFixture = 0.0014794950131141738;

namespace {

int slot(BandType t) { return t == BandType::I ? 0 : t == BandType::II ? 1 : 2; }

}  // namespace

TEST_CASE("elementary band sets") {
  auto g = RotationNumber::golden();
  auto s10 = band_set(1, 0, 24.0, g);
  REQUIRE(s10.bands.size() == 1);
  CHECK(s10.bands[0].lo == doctest::Approx(-2.0));
  CHECK(s10.bands[0].hi == doctest::Approx(2.0));
  auto s01 = band_set(0, 1, 24.0, g);
  REQUIRE(s01.bands.size() == 1);
  CHECK(s01.bands[0].lo == doctest::Approx(22.0));
  CHECK(s01.bands[0].hi == doctest::Approx(26.0));
  CHECK(band_set(0, 0, 24.0, g).whole_line);
  auto s0m = band_set(0, -1, 24.0, g);
  REQUIRE(s0m.bands.size() == 1);
  CHECK(s0m.bands[0].lo == doctest::Approx(-26.0));
  CHECK_THROWS_AS(band_set(2, -2, 24.0, g), PreconditionError);
  CHECK_THROWS_AS(band_set(2, 0, 0.0, g), PreconditionError);
}

TEST_CASE("band counts, edges and monotonicity") {
  for (const auto& r : {RotationNumber::golden(), RotationNumber::silver()}) {
    auto t = convergents(r, 6);
    for (int k = 0; k <= 6; ++k) {
      for (int p = -1; p <= 3; ++p) {
        auto s = band_set(k, p, 24.0, r);
        if (s.whole_line) continue;
        long expect = p >= 0 ? p * t.q[k] + (k >= 1 ? t.q[k - 1] : 0) : (k == 0 ? 1 : t.q[k] - t.q[k - 1]);
        CHECK(static_cast<long>(s.bands.size()) == expect);
        CHECK(expected_band_count(k, p, r) == expect);
        int prev_sign = 0;
        for (std::size_t i = 0; i < s.bands.size(); ++i) {
          const auto& b = s.bands[i];
          CHECK(b.lo <= b.hi);
          if (i > 0) CHECK(s.bands[i - 1].hi < b.lo);
          auto d = check_band(b, 24.0, r);
          CHECK(d.endpoint_residual < 1e-9);
          CHECK(d.monotone);
          if (prev_sign != 0) CHECK(d.slope_sign == -prev_sign);
          prev_sign = d.slope_sign;
          CHECK(b.lo >= -2.0 - 24.0 - 1e-9);
          CHECK(b.hi <= 2.0 + 24.0 + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("eigenvalue and bisection edges agree") {
  for (const auto& r : {RotationNumber::golden(), RotationNumber::silver()}) {
    for (int k = 1; k <= 5; ++k) {
      for (int p = 0; p <= 2; ++p) {
        auto a = band_set(k, p, 24.0, r, BandMethod::kEigen);
        auto b = band_set(k, p, 24.0, r, BandMethod::kBisection);
        REQUIRE(a.bands.size() == b.bands.size());
        for (std::size_t i = 0; i < a.bands.size(); ++i) {
          CHECK(std::fabs(a.bands[i].lo - b.bands[i].lo) < 1e-10);
          CHECK(std::fabs(a.bands[i].hi - b.bands[i].hi) < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("count and bound matrices") {
  auto g = RotationNumber::golden();
  Eigen::Matrix3i t1;
  t1 << 0, 1, 0, 2, 0, 1, 1, 0, 0;
  CHECK(count_matrix(1, g) == t1);
  Eigen::Matrix3i t2;
  t2 << 0, 1, 0, 3, 0, 2, 2, 0, 1;
  CHECK(count_matrix(1, RotationNumber::silver()) == t2);
  CHECK(t_lambda(24.0) == doctest::Approx(3.0 / 16.0));
  CHECK(xi(24.0) == doctest::Approx(std::sqrt(16.0 / 3.0)));
  auto pm = bound_matrix(1, 24.0, g);
  CHECK(pm(0, 0) == 0.0);
  CHECK(pm(0, 1) == doctest::Approx(1.0));
  CHECK(pm(1, 0) == doctest::Approx(16.0 / 3.0));
  CHECK(pm(2, 2) == doctest::Approx(16.0 / 3.0));
  CHECK(pm(1, 1) == 0.0);
  for (double lambda : {20.5, 22.0, 24.0, 50.0})
    for (int a = 1; a <= 6; ++a) CHECK(std::pow(t_lambda(lambda), -(a - 1.0)) >= a);
}

TEST_CASE("generating bands: order 0") {
  auto lv = generating_hierarchy(0, 24.0, RotationNumber::golden());
  REQUIRE(lv.size() == 1);
  REQUIRE(lv[0].bands.size() == 2);
  CHECK(lv[0].bands[0].type == BandType::III);
  CHECK(lv[0].bands[0].lo == doctest::Approx(-2.0));
  CHECK(lv[0].bands[1].type == BandType::I);
  CHECK(lv[0].bands[1].lo == doctest::Approx(22.0));
  CHECK_THROWS_AS(generating_hierarchy(2, 3.0, RotationNumber::golden()), PreconditionError);
}

TEST_CASE("generating bands: children follow the count matrices and nest") {
  for (const auto& r : {RotationNumber::golden(), RotationNumber::silver(), RotationNumber({1, 2, 1, 3}, {2})}) {
    const int K = 5;
    auto lv = generating_hierarchy(K, 24.0, r);
    Eigen::RowVector3i counts(1, 0, 1);
    for (int m = 1; m <= K; ++m) {
      auto tm = count_matrix(m, r);
      counts = counts * tm;
      const auto& prev = lv[m - 1].bands;
      const auto& cur = lv[m].bands;
      CHECK(static_cast<int>(cur.size()) == counts.sum());
      std::vector<Eigen::Vector3i> kids(prev.size(), Eigen::Vector3i::Zero());
      for (std::size_t i = 0; i < cur.size(); ++i) {
        int parent = lv[m].parent[i];
        REQUIRE(parent >= 0);
        CHECK(prev[parent].lo - 1e-12 <= cur[i].lo);
        CHECK(cur[i].hi <= prev[parent].hi + 1e-12);
        kids[parent](slot(cur[i].type)) += 1;
        CHECK(cur[i].type_index.size() == static_cast<std::size_t>(m + 1));
      }
      for (std::size_t i = 0; i < prev.size(); ++i)
        CHECK(kids[i] == tm.row(slot(prev[i].type)).transpose());
      for (std::size_t i = 1; i < cur.size(); ++i) CHECK(cur[i - 1].hi < cur[i].lo);
    }
  }
}

TEST_CASE("per-band product bounds hold") {
  for (double lambda : {22.0, 24.0, 50.0}) {
    for (const auto& r : {RotationNumber::golden(), RotationNumber::silver()}) {
      auto bands = generating_bands(5, lambda, r);
      for (const auto& b : bands) {
        double bound = per_band_product_bound(b, lambda, r);
        for (int s = 1; s <= 5; ++s) {
          double E = b.lo + (b.hi - b.lo) * s / 6.0;
          CHECK(std::fabs(band_trace_derivative(b, E, lambda, r)) >= bound);
        }
      }
    }
  }
}

TEST_CASE("an impossible type transition is reported") {
  Band b;
  b.level = 1;
  b.type = BandType::I;
  b.type_index = {BandType::I, BandType::I};
  CHECK_THROWS_AS(per_band_product_bound(b, 24.0, RotationNumber::golden()), PreconditionError);
}

TEST_CASE("spectrum approximants shrink") {
  auto g = RotationNumber::golden();
  std::vector<Interval> prev;
  double prev_len = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 6; ++k) {
    auto cur = sigma_approx(k, 24.0, g);
    double len = total_length(cur);
    CHECK(len <= prev_len);
    prev_len = len;
    for (const auto& iv : cur) {
      CHECK(iv.lo >= -26.0);
      CHECK(iv.hi <= 26.0);
    }
    if (!prev.empty()) CHECK(total_length(interval_intersection(prev, cur)) == doctest::Approx(len).epsilon(1e-14));
    prev = cur;
  }
  CHECK(prev_len == doctest::Approx(kApproxLengthFixture).epsilon(1e-9));
}

TEST_CASE("interval helpers") {
  auto u = interval_union({{0, 1}, {0.5, 2}, {3, 4}});
  REQUIRE(u.size() == 2);
  CHECK(u[0].hi == 2.0);
  auto x = interval_intersection(u, {{1.5, 3.5}});
  REQUIRE(x.size() == 2);
  CHECK(total_length(x) == doctest::Approx(1.0));
}

TEST_CASE("derivative lower bounds") {
  auto g = derivative_bound_check(8, 24.0, RotationNumber::golden(), 9);
  CHECK(g.min_ratio >= 1.0);
  CHECK(g.violations == 0);
  CHECK(g.min_ratio_per_level.size() == 8);
  CHECK(coefficient_product(RotationNumber::golden(), 8) == 1.0);
  auto s = derivative_bound_check(6, 24.0, RotationNumber::silver(), 9);
  CHECK(s.min_ratio >= 1.0);
  CHECK_THROWS_AS(derivative_bound_check(4, 15.0, RotationNumber::silver(), 9), PreconditionError);
  auto golden_only = derivative_bound_check(4, 15.0, RotationNumber::golden(), 9);
  CHECK(golden_only.golden_only);
}

TEST_CASE("band json") {
  nlohmann::json j = band_set(2, 1, 24.0, RotationNumber::golden());
  CHECK(j["k"] == 2);
  CHECK(j["bands"].size() == 3);
  CHECK(j["bands"][0].contains("lo"));
}
