#pragma once

#include <memory>
#include <span>

#include "semicop/copula.hpp"
#include "semicop/margins.hpp"
#include "semicop/mle.hpp"

namespace semicop {

// Copula regression estimator: a weighted mean of the labeled responses with
// weights c(F0(Y_i), F1(x1), ..., Fp(xp)), normalised in log space.
class CandidateRegressor {
 public:
  CandidateRegressor(FittedCandidate fitted, MarginSet margins, Vector labeled_y);

  const FittedCandidate& fitted() const { return fitted_; }
  const MarginSet& margins() const { return margins_; }
  const Vector& labeled_y() const { return y_; }
  const std::vector<double>& u0() const { return u0_; }

  // Pooled covariate counts of x, clamped to [1, n+N] so the query lies
  // strictly inside the unit cube.
  void query_counts(std::span<const double> x, std::span<Index> counts) const;
  double predict_counts(std::span<const Index> counts) const;

 private:
  FittedCandidate fitted_;
  MarginSet margins_;
  Vector y_;
  std::vector<double> u0_;
  double y_min_ = 0.0, y_max_ = 0.0;
  std::shared_ptr<const ConditionalKernel> kernel_;
};

double predict_candidate(const CandidateRegressor& r, std::span<const double> x);
// Row-wise predict_candidate, parallel over rows.
Vector predict_candidate_batch(const CandidateRegressor& r, const Matrix& xs);

}  // namespace semicop
