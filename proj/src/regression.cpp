#include "semicop/regression.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "semicop/error.hpp"

namespace semicop {

CandidateRegressor::CandidateRegressor(FittedCandidate fitted, MarginSet margins, Vector labeled_y)
    : fitted_(std::move(fitted)), margins_(std::move(margins)), y_(std::move(labeled_y)) {
  if (y_.size() == 0) throw DataError("regressor needs labeled responses");
  if (fitted_.family.dim != margins_.p() + 1)
    throw DataError("copula dimension " + std::to_string(fitted_.family.dim) + " does not match " +
                    std::to_string(margins_.p()) + " covariates");
  u0_.resize(static_cast<size_t>(y_.size()));
  for (Index i = 0; i < y_.size(); ++i) {
    if (!std::isfinite(y_(i))) throw DataError("non-finite labeled response");
    u0_[static_cast<size_t>(i)] = margins_.response_cdf(y_(i));
    if (!(u0_[static_cast<size_t>(i)] > 0.0))
      throw DataError("labeled response " + std::to_string(i) + " lies below the response margin");
  }
  y_min_ = y_.minCoeff();
  y_max_ = y_.maxCoeff();
  kernel_ = make_conditional_kernel(fitted_.family, fitted_.theta_hat, u0_, margins_.pooled());
}

void CandidateRegressor::query_counts(std::span<const double> x, std::span<Index> counts) const {
  const Index p = margins_.p();
  if (static_cast<Index>(x.size()) != p)
    throw DataError("query has " + std::to_string(x.size()) + " covariates, model expects " + std::to_string(p));
  const Index G = margins_.pooled();
  for (Index j = 0; j < p; ++j) {
    const double v = x[static_cast<size_t>(j)];
    if (!std::isfinite(v)) throw DataError("non-finite query covariate " + std::to_string(j + 1));
    counts[static_cast<size_t>(j)] = std::clamp<Index>(margins_.covariate_count(j, v), 1, G);
  }
}

double CandidateRegressor::predict_counts(std::span<const Index> counts) const {
  thread_local std::vector<double> lw;
  const size_t n = u0_.size();
  lw.resize(n);
  kernel_->log_weights(counts, lw);
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : lw)
    if (v > mx) mx = v;
  if (!std::isfinite(mx))
    throw NumericalError("every copula weight of the " + std::string(family_name(fitted_.family.tag)) +
                         " candidate underflowed at this query");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double w = std::exp(lw[i] - mx);
    num += w * y_(static_cast<Index>(i));
    den += w;
  }
  return std::clamp(num / den, y_min_, y_max_);
}

double predict_candidate(const CandidateRegressor& r, std::span<const double> x) {
  std::vector<Index> counts(x.size());
  r.query_counts(x, counts);
  return r.predict_counts(counts);
}

Vector predict_candidate_batch(const CandidateRegressor& r, const Matrix& xs) {
  Vector out(xs.rows());
  const Index p = xs.cols();
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 64)
  for (Index i = 0; i < xs.rows(); ++i) {
    try {
      out(i) = predict_candidate(r, std::span(xs.row(i).data(), static_cast<size_t>(p)));
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

}  // namespace semicop
