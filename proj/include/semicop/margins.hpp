#pragma once

#include <span>
#include <vector>

#include "semicop/types.hpp"

namespace semicop {

// Semi-supervised sample: n labeled (y, x) rows plus N unlabeled x rows.
struct Dataset {
  Vector labeled_y;
  Matrix labeled_x;    // n x p
  Matrix unlabeled_x;  // N x p, N may be 0

  Index n() const { return labeled_y.size(); }
  Index N() const { return unlabeled_x.rows(); }
  Index p() const { return labeled_x.cols(); }

  // Throws DataError when n == 0, widths disagree, or a value is non-finite.
  void validate() const;

  // Rows are copied in the order given.
  Dataset subset(std::span<const Index> labeled_rows, std::span<const Index> unlabeled_rows) const;
  Dataset without_unlabeled() const;
};

// Pseudo-observations: row i = (F0(Y_i), F1(X_i1), ..., Fp(X_ip)).
struct PseudoObservations {
  Matrix u;  // n x (p+1)
};

// Rescaled empirical CDFs. The response CDF counts labeled Y over n+1; each
// covariate CDF counts the pooled labeled+unlabeled column over n+N+1.
class MarginSet {
 public:
  MarginSet() = default;
  MarginSet(std::vector<double> response_sorted, std::vector<std::vector<double>> covariate_sorted,
            Index n, Index N);

  static MarginSet fit(const Dataset& data);

  Index n() const { return n_; }
  Index N() const { return N_; }
  Index p() const { return static_cast<Index>(covariate_sorted_.size()); }
  Index pooled() const { return n_ + N_; }

  // #{Y_i <= y}
  Index response_count(double y) const;
  // #{pooled X_ij <= x}; j is 0-based.
  Index covariate_count(Index j, double x) const;

  double response_cdf(double y) const;
  double covariate_cdf(Index j, double x) const;

  PseudoObservations pseudo_observations(const Vector& y, const Matrix& x) const;
  PseudoObservations pseudo_observations(const Dataset& data) const {
    return pseudo_observations(data.labeled_y, data.labeled_x);
  }

  const std::vector<double>& response_sorted() const { return response_sorted_; }
  const std::vector<std::vector<double>>& covariate_sorted() const { return covariate_sorted_; }

 private:
  std::vector<double> response_sorted_;
  std::vector<std::vector<double>> covariate_sorted_;
  Index n_ = 0;
  Index N_ = 0;
};

inline MarginSet fit_margins(const Dataset& data) { return MarginSet::fit(data); }

}  // namespace semicop
