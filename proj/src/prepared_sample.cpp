#include <algorithm>
#include <cmath>
#include <numbers>

#include "copula_internal.hpp"
#include "semicop/error.hpp"

namespace semicop {

namespace {

constexpr int kTableNodes = 24;
constexpr double kSLo = 1.0 / kMaxDof;
constexpr double kSHi = 1.0 / kMinDof;

double to_cheb(double s) { return (2.0 * s - (kSHi + kSLo)) / (kSHi - kSLo); }

}  // namespace

PreparedSample::PreparedSample(const Matrix& u, bool with_t_table) : rows_(u.rows()), dim_(u.cols()) {
  const auto total = static_cast<size_t>(rows_ * dim_);
  levels_.assign(u.data(), u.data() + total);
  detail::require_interior(levels_);
  std::sort(levels_.begin(), levels_.end());
  levels_.erase(std::unique(levels_.begin(), levels_.end()), levels_.end());

  index_.resize(total);
  for (size_t e = 0; e < total; ++e)
    index_[e] = static_cast<std::int32_t>(
        std::lower_bound(levels_.begin(), levels_.end(), u.data()[e]) - levels_.begin());

  const size_t L = levels_.size();
  log_u_.resize(L);
  neg_log_u_.resize(L);
  log_neg_log_u_.resize(L);
  log1m_u_.resize(L);
  normal_q_.resize(L);
  for (size_t k = 0; k < L; ++k) {
    const auto t = detail::UnitTransforms::of(levels_[k]);
    neg_log_u_[k] = t.neg_log_u;
    log_u_[k] = -t.neg_log_u;
    log_neg_log_u_[k] = t.log_neg_log_u;
    log1m_u_[k] = t.log1m_u;
    normal_q_[k] = semicop::normal_quantile(levels_[k]);
  }

  if (!with_t_table) return;
  // Chebyshev coefficients of s -> q(u; 1/s), built once per folded value
  // min(u, 1-u). Levels are sorted, so level k and its mirror share a fold.
  t_coef_.assign(L * kTableNodes, 0.0);
  std::vector<double> nodes(kTableNodes), vals(kTableNodes);
  for (int m = 0; m < kTableNodes; ++m) {
    const double x = std::cos(std::numbers::pi * (m + 0.5) / kTableNodes);
    nodes[static_cast<size_t>(m)] = 0.5 * (kSHi + kSLo) + 0.5 * (kSHi - kSLo) * x;
  }
  std::vector<double> folded(L);
  for (size_t k = 0; k < L; ++k) folded[k] = levels_[k] > 0.5 ? 1.0 - levels_[k] : levels_[k];
  std::vector<size_t> order(L);
  for (size_t k = 0; k < L; ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return folded[a] < folded[b]; });

  std::vector<double> coef(kTableNodes);
  double last = -1.0;
  for (size_t oi = 0; oi < L; ++oi) {
    const size_t k = order[oi];
    const double a = folded[k];
    if (a != last) {
      last = a;
      if (a == 0.5) {
        std::fill(coef.begin(), coef.end(), 0.0);
      } else {
        for (int m = 0; m < kTableNodes; ++m)
          vals[static_cast<size_t>(m)] = t_quantile(a, 1.0 / nodes[static_cast<size_t>(m)]);
        for (int j = 0; j < kTableNodes; ++j) {
          double acc = 0.0;
          for (int m = 0; m < kTableNodes; ++m)
            acc += vals[static_cast<size_t>(m)] *
                   std::cos(std::numbers::pi * j * (m + 0.5) / kTableNodes);
          coef[static_cast<size_t>(j)] = 2.0 * acc / kTableNodes;
        }
        coef[0] *= 0.5;
      }
    }
    const double sign = levels_[k] > 0.5 ? -1.0 : 1.0;
    for (int j = 0; j < kTableNodes; ++j)
      t_coef_[k * kTableNodes + static_cast<size_t>(j)] = sign * coef[static_cast<size_t>(j)];
  }
}

void PreparedSample::t_quantiles(double nu, std::span<double> out) const {
  if (out.size() != levels_.size()) throw DomainError("t_quantiles: output size mismatch");
  if (!has_t_table() || !(nu >= kMinDof && nu <= kMaxDof)) {
    for (size_t k = 0; k < levels_.size(); ++k) out[k] = t_quantile(levels_[k], nu);
    return;
  }
  const double x = to_cheb(1.0 / nu);
  const double x2 = 2.0 * x;
  for (size_t k = 0; k < levels_.size(); ++k) {
    const double* c = &t_coef_[k * kTableNodes];
    double b1 = 0.0, b2 = 0.0;
    for (int j = kTableNodes - 1; j >= 1; --j) {
      const double b0 = x2 * b1 - b2 + c[j];
      b2 = b1;
      b1 = b0;
    }
    out[k] = x * b1 - b2 + c[0];
  }
}

}  // namespace semicop
