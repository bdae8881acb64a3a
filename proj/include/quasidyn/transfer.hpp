#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "quasidyn/rotations.hpp"
#include "quasidyn/words.hpp"

namespace qd {

using Mat2 = Eigen::Matrix2d;

// Largest singular value, closed form.
double operator_norm(const Mat2& a);

// Adjugate; equals the inverse for det = 1.
Mat2 adjugate(const Mat2& a);

// A 2x2 product stored as exp(log_scale) * m together with its entrywise
// E-derivative exp(log_scale) * dm. The mantissa is renormalized whenever an
// entry exceeds 1e150 so long products off the spectrum do not overflow.
struct TransferState {
  Mat2 m = Mat2::Identity();
  Mat2 dm = Mat2::Zero();
  double log_scale = 0.0;
  long site_count = 0;

  double trace() const;             // may be +-inf when the true value overflows
  double trace_derivative() const;  // likewise
  double log_norm() const;          // log of the operator norm
  double determinant() const;       // det of the true matrix (1 for transfer products)

  TransferState operator*(const TransferState& rhs) const;
  TransferState inverse() const;  // assumes det = 1
  TransferState power(long p) const;
  void renormalize();
};

// T(E, m) = [[E - lambda v(m), -1], [1, 0]].
Mat2 step_matrix(double E, long m, double lambda, const PotentialWindow& window);

// M(E, n): T(n)...T(1) for n >= 1, identity for n = 0, T(n+1)^{-1}...T(0)^{-1} for n < 0.
TransferState transfer(double E, long n, double lambda, const PotentialWindow& window);

// M_k via M_{-1}, M_0 and M_{k+1} = M_{k-1} M_k^{a_{k+1}}.
TransferState canonical_Mk(double E, int k, double lambda, const RotationNumber& r);

struct TraceValue {
  int k = 0;
  int p = 0;
  double value = 0.0;
  double derivative = 0.0;
  // value = scaled_value * exp(log_scale), likewise for the derivative.
  double scaled_value = 0.0;
  double scaled_derivative = 0.0;
  double log_scale = 0.0;
};

// t_{(k,p)}(E) = tr(M_{k-1} M_k^p), k >= 0, p >= -1.
TraceValue trace_fn(double E, int k, int p, double lambda, const RotationNumber& r);

// Relative residual of t_{(k+1,0)}^2 + t_{(k,p)}^2 + t_{(k,p+1)}^2 - t_{(k+1,0)} t_{(k,p)} t_{(k,p+1)} = 4 + lambda^2,
// measured against the largest of the individual terms.
double fricke_residual(double E, int k, int p, double lambda, const RotationNumber& r);

enum class Side { kRight, kLeft };

// x_k(theta) = tr M(E, q_k) (right) or y_k(theta) = tr M(E, -q_k) (left).
TraceValue trace_phase(double E, int k, double lambda, const PotentialWindow& window, Side side);

enum class Direction { kPositive, kNegative };

// log ||M(E, +-n)|| for n = 1..n_max (index 0 holds n = 1).
std::vector<double> prefix_log_norms(double E, double lambda, const PotentialWindow& window, long n_max,
                                     Direction dir);

struct NormAccumulant {
  double L = 1.0;
  double value = 0.0;      // ||M||_L
  double log_value = 0.0;  // log ||M||_L (-inf when the sum is empty)
};

NormAccumulant norm_accumulant(double E, double lambda, const PotentialWindow& window, double L, Direction dir);

struct KeyEstimate {
  double lhs = 0.0;  // d/dE tr M(E, L)
  double rhs = 0.0;  // 4 ||M||_{L+1}^3
  double log_abs_lhs = 0.0;
  double log_rhs = 0.0;
  bool holds() const;
};

KeyEstimate key_estimate_check(double E, long L, double lambda, const PotentialWindow& window);

struct LengthScale {
  double length = 1.0;  // signed: positive for Direction::kPositive, negative otherwise
  bool saturated = false;
};

// Solves ||M(E)||_L = 2 ||M(E,1)^{-1}|| / eps for L.
LengthScale length_scale(double E, double lambda, const PotentialWindow& window, double eps, Direction dir);

// Trace sweeps over an energy grid: OpenMP kernel and its serial reference.
std::vector<TraceValue> trace_sweep(std::span<const double> energies, int k, int p, double lambda,
                                    const RotationNumber& r);
std::vector<TraceValue> trace_sweep_serial(std::span<const double> energies, int k, int p, double lambda,
                                           const RotationNumber& r);

}  // namespace qd
