#include "quasidyn/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "quasidyn/error.hpp"
#include "quasidyn/transfer.hpp"
#include "quasidyn/words.hpp"

namespace qd {

std::string to_string(BandType t) {
  switch (t) {
    case BandType::I: return "I";
    case BandType::II: return "II";
    case BandType::III: return "III";
    default: return "untyped";
  }
}

namespace {

std::int64_t q_at(const RotationNumber& r, int k) {
  if (k < 0) return 0;
  if (k == 0) return 1;
  return convergents(r, k).q[k];
}

int type_slot(BandType t) {
  switch (t) {
    case BandType::I: return 0;
    case BandType::II: return 1;
    case BandType::III: return 2;
    default: throw PreconditionError("band has no type");
  }
}

}  // namespace

std::optional<std::vector<double>> period_potential(int k, int p, double lambda, const RotationNumber& r) {
  if (k < 0) throw PreconditionError("band sets need k >= 0");
  if (p < -1) throw PreconditionError("band sets need p >= -1");
  if (k == 0) {
    if (p == 0) return std::nullopt;
    if (p == -1) return std::vector<double>{-lambda};  // t_(0,-1) = E + lambda
    std::vector<double> v(static_cast<std::size_t>(p), 0.0);
    v.back() = lambda;  // 0^{p-1} 1
    return v;
  }
  if (p == -1) {
    // M_{k-1} M_k^{-1} = M_{k-1}^{1-a_k} M_{k-2}^{-1}, whose trace is t_(k-1, a_k - 1).
    return period_potential(k - 1, static_cast<int>(r.coefficient(k) - 1), lambda, r);
  }
  // Monodromy M_{k-1} M_k^p runs over s_k^p then s_{k-1}.
  std::string cur = standard_word(r, k).str();
  std::string prev = standard_word(r, k - 1).str();
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(p) * cur.size() + prev.size());
  for (int i = 0; i < p; ++i)
    for (char c : cur) v.push_back(c == '1' ? lambda : 0.0);
  for (char c : prev) v.push_back(c == '1' ? lambda : 0.0);
  return v;
}

long expected_band_count(int k, int p, const RotationNumber& r) {
  if (p >= 0) return static_cast<long>(p * q_at(r, k) + q_at(r, k - 1));
  if (k == 0) return 1;
  return static_cast<long>(q_at(r, k) - q_at(r, k - 1));
}

PeriodicTrace periodic_trace(double E, std::span<const double> potential) {
  TransferState s;
  for (double v : potential) {
    TransferState step;
    step.m << E - v, -1.0, 1.0, 0.0;
    step.dm << 1.0, 0.0, 0.0, 0.0;
    s = step * s;
  }
  return {s.trace(), s.trace_derivative()};
}

namespace {

std::vector<double> eigen_edges(std::span<const double> pot) {
  const long L = static_cast<long>(pot.size());
  std::vector<double> roots;
  roots.reserve(static_cast<std::size_t>(2 * L));
  for (double bc : {1.0, -1.0}) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(L, L);
    for (long i = 0; i < L; ++i) {
      h(i, i) += pot[static_cast<std::size_t>(i)];
      long right = i + 1, left = i - 1;
      h(i, right % L) += right >= L ? bc : 1.0;
      h(i, (left + L) % L) += left < 0 ? bc : 1.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw EigenSolveError("periodic eigenproblem failed");
    for (long i = 0; i < L; ++i) roots.push_back(es.eigenvalues()(i));
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

// Eigenvalues below x of the periodic (bc = 1) or antiperiodic (bc = -1) matrix, by
// Sylvester inertia: LDL^T of the open chain on sites 0..L-2, then the sign of the
// Schur complement of the last site, which couples to sites L-2 (by 1) and 0 (by bc).
long count_below(double x, std::span<const double> pot, double bc) {
  const long L = static_cast<long>(pot.size());
  const double tiny = 1e-300;
  if (L == 1) return pot[0] + 2.0 * bc < x ? 1 : 0;
  if (L == 2) {
    double a = pot[0] - x, d = pot[1] - x, b = 1.0 + bc;
    double det = a * d - b * b;
    if (det < 0) return 1;
    return a + d < 0 ? 2 : 0;
  }
  long count = 0;
  long double d_prev = 0.0L, z_prev = 0.0L, quad = 0.0L;
  for (long i = 0; i + 1 < L; ++i) {
    long double d = static_cast<long double>(pot[static_cast<std::size_t>(i)]) - x;
    long double z = (i == 0 ? bc : 0.0) + (i == L - 2 ? 1.0 : 0.0);
    if (i > 0) {
      d -= 1.0L / d_prev;
      z -= z_prev / d_prev;
    }
    if (d == 0.0L) d = tiny;
    if (d < 0) ++count;
    quad += z * z / d;
    d_prev = d;
    z_prev = z;
  }
  long double schur = static_cast<long double>(pot[static_cast<std::size_t>(L - 1)]) - x - quad;
  if (schur < 0) ++count;
  return count;
}

std::vector<double> bisection_edges(std::span<const double> pot) {
  const long L = static_cast<long>(pot.size());
  double vmin = *std::min_element(pot.begin(), pot.end());
  double vmax = *std::max_element(pot.begin(), pot.end());
  std::vector<double> roots;
  roots.reserve(static_cast<std::size_t>(2 * L));
  for (double bc : {1.0, -1.0}) {
    for (long j = 0; j < L; ++j) {
      double a = vmin - 2.0 - 1e-9, b = vmax + 2.0 + 1e-9;
      for (int it = 0; it < 200 && b - a > 4e-16 * std::max(1.0, std::fabs(a)); ++it) {
        double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        if (count_below(mid, pot, bc) > j)
          b = mid;
        else
          a = mid;
      }
      roots.push_back(0.5 * (a + b));
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

BandSet band_set(int k, int p, double lambda, const RotationNumber& r, BandMethod method) {
  if (!(lambda > 0.0)) throw PreconditionError("band sets need lambda > 0");
  BandSet set;
  set.k = k;
  set.p = p;
  auto pot = period_potential(k, p, lambda, r);
  if (!pot) {
    set.whole_line = true;
    return set;
  }
  std::vector<double> roots = method == BandMethod::kEigen ? eigen_edges(*pot) : bisection_edges(*pot);
  const long L = static_cast<long>(pot->size());
  for (long j = 0; j < L; ++j) {
    Band b;
    b.lo = roots[static_cast<std::size_t>(2 * j)];
    b.hi = roots[static_cast<std::size_t>(2 * j + 1)];
    b.level = k;
    b.order_index = static_cast<int>(j);
    b.trace_k = k;
    b.trace_p = p;
    set.bands.push_back(b);
  }
  if (static_cast<long>(set.bands.size()) != expected_band_count(k, p, r)) {
    if (method == BandMethod::kEigen) return band_set(k, p, lambda, r, BandMethod::kBisection);
    throw CountMismatch("sigma_(" + std::to_string(k) + "," + std::to_string(p) + ") has " +
                        std::to_string(set.bands.size()) + " bands, expected " +
                        std::to_string(expected_band_count(k, p, r)));
  }
  return set;
}

std::vector<BandSet> band_set_grid(std::span<const std::pair<int, int>> cells, double lambda, const RotationNumber& r) {
  std::vector<BandSet> out(cells.size());
  const long n = static_cast<long>(cells.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    auto [k, p] = cells[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = band_set(k, p, lambda, r);
  }
  return out;
}

std::vector<BandSet> band_set_grid_serial(std::span<const std::pair<int, int>> cells, double lambda,
                                          const RotationNumber& r) {
  std::vector<BandSet> out;
  for (auto [k, p] : cells) out.push_back(band_set(k, p, lambda, r));
  return out;
}

BandDiagnostics check_band(const Band& band, double lambda, const RotationNumber& r, int interior_samples) {
  BandDiagnostics d;
  auto pot = period_potential(band.trace_k, band.trace_p, lambda, r);
  if (!pot) return d;
  for (double e : {band.lo, band.hi}) {
    auto t = periodic_trace(e, *pot);
    d.endpoint_residual = std::max(d.endpoint_residual, std::fabs(std::fabs(t.value) - 2.0) / std::max(1.0, std::fabs(t.derivative)));
  }
  for (int i = 0; i < interior_samples; ++i) {
    double e = band.lo + (band.hi - band.lo) * (i + 1.0) / (interior_samples + 1.0);
    double dv = periodic_trace(e, *pot).derivative;
    int s = dv > 0 ? 1 : (dv < 0 ? -1 : 0);
    if (d.slope_sign == 0) d.slope_sign = s;
    if (s == 0 || s != d.slope_sign) d.monotone = false;
  }
  return d;
}

// ---- generating bands ----

double t_lambda(double lambda) { return 3.0 / (lambda - 8.0); }

double xi(double lambda) { return std::sqrt((lambda - 8.0) / 3.0); }

Eigen::Matrix3i count_matrix(int m, const RotationNumber& r) {
  int a = static_cast<int>(r.coefficient(m));
  Eigen::Matrix3i t;
  t << 0, 1, 0, a + 1, 0, a, a, 0, a - 1;
  return t;
}

Eigen::Matrix3d bound_matrix(int m, double lambda, const RotationNumber& r) {
  double a = static_cast<double>(r.coefficient(m));
  double tl = t_lambda(lambda);
  Eigen::Matrix3d pm;
  pm << 0.0, std::pow(tl, -(a - 1.0)), 0.0, a / tl, 0.0, a / tl, a / tl, 0.0, a / tl;
  return pm;
}

namespace {

// Index of the band of `parents` containing `child`, -1 if disjoint from all of them.
int containing_band(const Band& child, const BandSet& parents, double slack) {
  if (parents.whole_line) return 0;
  for (std::size_t i = 0; i < parents.bands.size(); ++i) {
    const auto& pb = parents.bands[i];
    bool inside = pb.lo - slack <= child.lo && child.hi <= pb.hi + slack;
    bool overlap = child.hi >= pb.lo - slack && child.lo <= pb.hi + slack;
    if (inside) return static_cast<int>(i);
    if (overlap)
      throw AmbiguousContainment("band [" + std::to_string(child.lo) + ", " + std::to_string(child.hi) +
                                 "] straddles [" + std::to_string(pb.lo) + ", " + std::to_string(pb.hi) + "]");
  }
  return -1;
}

std::vector<Band> classify_level(int m, double lambda, const RotationNumber& r, double slack) {
  BandSet s_m1 = band_set(m, 1, lambda, r);
  BandSet s_m0 = band_set(m, 0, lambda, r);
  BandSet s_next = band_set(m + 1, 0, lambda, r);
  BandSet s_mneg = band_set(m, -1, lambda, r);
  std::vector<Band> out;
  for (auto b : s_m1.bands) {
    if (containing_band(b, s_m0, slack) >= 0) {
      b.type = BandType::I;
      b.level = m;
      out.push_back(b);
    }
  }
  for (auto b : s_next.bands) {
    bool in_ii = containing_band(b, s_mneg, slack) >= 0;
    bool in_iii = containing_band(b, s_m0, slack) >= 0;
    if (in_ii && in_iii)
      throw AmbiguousContainment("band of sigma_(" + std::to_string(m + 1) + ",0) qualifies as both type II and III");
    if (in_ii || in_iii) {
      b.type = in_ii ? BandType::II : BandType::III;
      b.level = m;
      out.push_back(b);
    }
  }
  std::sort(out.begin(), out.end(), [](const Band& a, const Band& b) { return a.lo < b.lo; });
  for (std::size_t i = 0; i + 1 < out.size(); ++i)
    if (out[i].hi >= out[i + 1].lo)
      throw AmbiguousContainment("generating bands of order " + std::to_string(m) + " overlap");
  for (std::size_t i = 0; i < out.size(); ++i) out[i].order_index = static_cast<int>(i);
  return out;
}

}  // namespace

std::vector<GeneratingLevel> generating_hierarchy(int k, double lambda, const RotationNumber& r, double slack) {
  if (k < 0) throw PreconditionError("generating bands need k >= 0");
  if (!(lambda > 4.0)) throw PreconditionError("generating bands need lambda > 4 so that the three types separate");
  std::vector<GeneratingLevel> levels;
  for (int m = 0; m <= k; ++m) {
    GeneratingLevel lvl;
    lvl.order = m;
    lvl.bands = classify_level(m, lambda, r, slack);
    lvl.parent.assign(lvl.bands.size(), -1);
    if (m == 0) {
      for (auto& b : lvl.bands) b.type_index = {b.type};
    } else {
      BandSet prev_set;
      for (const auto& b : levels.back().bands) prev_set.bands.push_back(b);
      for (std::size_t i = 0; i < lvl.bands.size(); ++i) {
        int parent = containing_band(lvl.bands[i], prev_set, slack);
        if (parent < 0)
          throw AmbiguousContainment("generating band of order " + std::to_string(m) +
                                     " lies in no band of order " + std::to_string(m - 1));
        lvl.parent[i] = parent;
        lvl.bands[i].type_index = levels.back().bands[static_cast<std::size_t>(parent)].type_index;
        lvl.bands[i].type_index.push_back(lvl.bands[i].type);
      }
    }
    levels.push_back(std::move(lvl));
  }
  return levels;
}

std::vector<Band> generating_bands(int k, double lambda, const RotationNumber& r, double slack) {
  return generating_hierarchy(k, lambda, r, slack).back().bands;
}

double per_band_product_bound(const Band& band, double lambda, const RotationNumber& r) {
  if (band.type_index.size() != static_cast<std::size_t>(band.level) + 1)
    throw PreconditionError("band carries no complete type index");
  double prod = 1.0;
  for (int m = 1; m <= band.level; ++m) {
    auto pm = bound_matrix(m, lambda, r);
    double f = pm(type_slot(band.type_index[static_cast<std::size_t>(m - 1)]),
                  type_slot(band.type_index[static_cast<std::size_t>(m)]));
    if (f == 0.0)
      throw PreconditionError("type index contains an impossible transition at step " + std::to_string(m) +
                              " (band misclassified)");
    prod *= f;
  }
  return prod;
}

double band_trace_derivative(const Band& band, double E, double lambda, const RotationNumber& r) {
  if (band.type == BandType::I) return trace_fn(E, band.level, 1, lambda, r).derivative;
  return trace_fn(E, band.level + 1, 0, lambda, r).derivative;
}

// ---- approximants ----

std::vector<Interval> interval_union(std::vector<Interval> a) {
  std::sort(a.begin(), a.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
  std::vector<Interval> out;
  for (const auto& iv : a) {
    if (!out.empty() && iv.lo <= out.back().hi)
      out.back().hi = std::max(out.back().hi, iv.hi);
    else
      out.push_back(iv);
  }
  return out;
}

std::vector<Interval> interval_intersection(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  std::vector<Interval> out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    double lo = std::max(a[i].lo, b[j].lo), hi = std::min(a[i].hi, b[j].hi);
    if (lo <= hi) out.push_back({lo, hi});
    if (a[i].hi < b[j].hi)
      ++i;
    else
      ++j;
  }
  return out;
}

double total_length(const std::vector<Interval>& a) {
  double s = 0.0;
  for (const auto& iv : a) s += iv.length();
  return s;
}

std::vector<Interval> sigma_approx(int k, double lambda, const RotationNumber& r) {
  if (k < 1) throw PreconditionError("spectrum approximants need k >= 1");
  auto as_intervals = [&](int j) {
    std::vector<Interval> v;
    for (const auto& b : band_set(j + 1, 0, lambda, r).bands) v.push_back({b.lo, b.hi});
    return v;
  };
  std::vector<Interval> next = as_intervals(1);
  std::vector<Interval> acc;
  for (int j = 1; j <= k; ++j) {
    std::vector<Interval> cur = next;
    next = as_intervals(j + 1);
    std::vector<Interval> both = cur;
    both.insert(both.end(), next.begin(), next.end());
    auto u = interval_union(std::move(both));
    acc = j == 1 ? u : interval_intersection(acc, u);
  }
  return acc;
}

DerivativeBoundReport derivative_bound_check(int k, double lambda, const RotationNumber& r, int samples_per_band) {
  DerivativeBoundReport rep;
  if (!(lambda > 20.0)) {
    bool golden = r == RotationNumber::golden();
    if (!(lambda > 8.0 && golden))
      throw PreconditionError("derivative bounds need lambda > 20 (or lambda > 8 for the golden mean)");
    rep.golden_only = true;
  }
  if (k < 1) throw PreconditionError("derivative bounds need k >= 1");
  rep.min_ratio = std::numeric_limits<double>::infinity();
  const double x = xi(lambda);
  for (int j = 1; j <= k; ++j) {
    double bound = coefficient_product(r, j) * std::pow(x, j - 1);
    double level_min = std::numeric_limits<double>::infinity();
    for (const auto& b : band_set(j + 1, 0, lambda, r).bands) {
      for (int s = 0; s < samples_per_band; ++s) {
        double E = b.lo + (b.hi - b.lo) * (s + 1.0) / (samples_per_band + 1.0);
        double ratio = std::fabs(trace_fn(E, j + 1, 0, lambda, r).derivative) / bound;
        ++rep.samples;
        if (ratio < 1.0) ++rep.violations;
        if (ratio < level_min) level_min = ratio;
        if (ratio < rep.min_ratio) {
          rep.min_ratio = ratio;
          rep.worst_level = j;
          rep.worst_energy = E;
        }
      }
    }
    rep.min_ratio_per_level.push_back(level_min);
  }
  return rep;
}

void to_json(nlohmann::json& j, const Band& b) {
  std::string idx;
  for (auto t : b.type_index) idx += (idx.empty() ? "" : "-") + to_string(t);
  j = nlohmann::json{{"lo", b.lo},       {"hi", b.hi},       {"level", b.level}, {"index", b.order_index},
                     {"type", to_string(b.type)}, {"type_index", idx}};
}

void to_json(nlohmann::json& j, const BandSet& s) {
  j = nlohmann::json{{"k", s.k}, {"p", s.p}, {"whole_line", s.whole_line}, {"bands", s.bands}};
}

}  // namespace qd
