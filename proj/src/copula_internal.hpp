#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "semicop/copula.hpp"

namespace semicop::detail {

// Per-value quantities reused by every family. Computed so that u close to 1
// keeps full relative precision in -log(u) and log(1-u).
struct UnitTransforms {
  double u;
  double neg_log_u;
  double log_neg_log_u;
  double log1m_u;

  static UnitTransforms of(double u) {
    UnitTransforms t;
    t.u = u;
    t.neg_log_u = u > 0.5 ? -std::log1p(-(1.0 - u)) : -std::log(u);
    t.log_neg_log_u = std::log(t.neg_log_u);
    t.log1m_u = u < 0.5 ? std::log1p(-u) : std::log(1.0 - u);
    return t;
  }
};

void require_interior(std::span<const double> u);

// A sum of psi values that can be logged without losing the result.
inline bool normal_sum(double s) { return s > 1e-280 && s < 1e280; }

inline double log_sum_exp(std::span<const double> v) {
  double mx = -INFINITY;
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

inline double log_add_exp(double a, double b) {
  const double mx = std::max(a, b);
  if (!std::isfinite(mx)) return mx;
  return mx + std::log1p(std::exp(std::min(a, b) - mx));
}

// log(1 - exp(-s)) given s and log(s).
inline double log_one_minus_exp_neg(double s, double log_s) {
  return s < 1e-10 ? log_s - 0.5 * s : std::log(-std::expm1(-s));
}

// Gaussian / t correlation core: precision matrix and log-determinant.
struct EllipticalCore {
  int dim = 0;
  Matrix precision;          // R^{-1}
  Matrix precision_minus_i;  // R^{-1} - I
  double logdet = 0.0;

  static EllipticalCore make(int dim, CorrStructure corr, std::span<const double> block);

  double quad(const double* z) const;           // z' R^{-1} z
  double quad_minus_id(const double* z) const;  // z' (R^{-1} - I) z
};

// Log-density normalising constant of the t copula.
double t_log_constant(double nu, int dim, double logdet);

// Archimedean copula through its generator phi and inverse psi:
//   c(u) = (-1)^d phi^{(d)}(sum_j psi(u_j)) * prod_j (-psi'(u_j)).
// The d-th derivative uses nonnegative coefficient recursions (Gumbel, Joe)
// or Eulerian-number polylogarithm expansions (Frank); Clayton is closed form.
class Archimedean {
 public:
  Archimedean(Family tag, double theta, int dim);

  Family tag() const { return tag_; }
  double theta() const { return theta_; }
  int dim() const { return dim_; }
  // Density identically 1 (Gumbel/Joe at theta = 1, Frank/Clayton inside the band).
  bool independent() const { return independent_; }

  double psi(const UnitTransforms& t) const;
  // log psi(u), finite where psi itself under- or overflows.
  double log_psi(const UnitTransforms& t) const;
  // log(-psi'(u)); psi_value must equal psi(t).
  double log_neg_dpsi(const UnitTransforms& t, double psi_value) const;
  // log((-1)^d phi^{(d)}(s)) given s and log_s = log(s); s may have
  // under- or overflowed, log_s is trusted.
  double log_dd(double s, double log_s) const;
  double log_dd(double s) const { return log_dd(s, std::log(s)); }

  double log_density(std::span<const double> u) const;

 private:
  double log_dd_fallback(double log_s, double log_y, double log_r) const;

  Family tag_;
  double theta_;
  double alpha_ = 1.0;
  int dim_;
  bool independent_ = false;
  std::vector<double> coef_;      // Gumbel c_{d,k} / Joe b_{d,k} (index k), Frank A(d-1,k)
  std::vector<double> log_coef_;  // log of positive coefficients, -inf otherwise
  double log_const_ = 0.0;        // Clayton sum log(1/theta + k); Frank log(delta/theta)
  double log_theta_ = 0.0;
  double delta_ = 0.0;            // Frank 1 - exp(-theta)
};

}  // namespace semicop::detail
