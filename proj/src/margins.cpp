#include "semicop/margins.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "semicop/error.hpp"

namespace semicop {

void Dataset::validate() const {
  if (n() < 1) throw DataError("labeled set is empty");
  if (labeled_x.rows() != n())
    throw DataError("labeled x has " + std::to_string(labeled_x.rows()) + " rows but y has " +
                    std::to_string(n()));
  if (N() > 0 && unlabeled_x.cols() != p())
    throw DataError("unlabeled x has " + std::to_string(unlabeled_x.cols()) +
                    " columns, labeled x has " + std::to_string(p()));
  if (p() < 1) throw DataError("no covariate columns");
  for (Index i = 0; i < n(); ++i) {
    if (!std::isfinite(labeled_y[i]))
      throw DataError("non-finite y at labeled row " + std::to_string(i + 1));
    for (Index j = 0; j < p(); ++j)
      if (!std::isfinite(labeled_x(i, j)))
        throw DataError("non-finite x at labeled row " + std::to_string(i + 1) + ", column " +
                        std::to_string(j + 1));
  }
  for (Index i = 0; i < N(); ++i)
    for (Index j = 0; j < p(); ++j)
      if (!std::isfinite(unlabeled_x(i, j)))
        throw DataError("non-finite x at unlabeled row " + std::to_string(i + 1) + ", column " +
                        std::to_string(j + 1));
}

Dataset Dataset::subset(std::span<const Index> labeled_rows,
                        std::span<const Index> unlabeled_rows) const {
  Dataset out;
  const Index cols = p();
  out.labeled_y.resize(static_cast<Index>(labeled_rows.size()));
  out.labeled_x.resize(static_cast<Index>(labeled_rows.size()), cols);
  for (Index r = 0; r < static_cast<Index>(labeled_rows.size()); ++r) {
    out.labeled_y[r] = labeled_y[labeled_rows[r]];
    out.labeled_x.row(r) = labeled_x.row(labeled_rows[r]);
  }
  out.unlabeled_x.resize(static_cast<Index>(unlabeled_rows.size()), cols);
  for (Index r = 0; r < static_cast<Index>(unlabeled_rows.size()); ++r)
    out.unlabeled_x.row(r) = unlabeled_x.row(unlabeled_rows[r]);
  return out;
}

Dataset Dataset::without_unlabeled() const {
  Dataset out{labeled_y, labeled_x, Matrix(0, p())};
  return out;
}

MarginSet::MarginSet(std::vector<double> response_sorted,
                     std::vector<std::vector<double>> covariate_sorted, Index n, Index N)
    : response_sorted_(std::move(response_sorted)),
      covariate_sorted_(std::move(covariate_sorted)),
      n_(n),
      N_(N) {
  if (n_ < 1 || static_cast<Index>(response_sorted_.size()) != n_)
    throw DataError("margin response sample does not match n");
  for (auto& col : covariate_sorted_) {
    if (static_cast<Index>(col.size()) != n_ + N_)
      throw DataError("margin covariate sample does not match n+N");
    if (!std::is_sorted(col.begin(), col.end())) throw DataError("margin column is not sorted");
  }
  if (!std::is_sorted(response_sorted_.begin(), response_sorted_.end()))
    throw DataError("margin response sample is not sorted");
}

MarginSet MarginSet::fit(const Dataset& data) {
  data.validate();
  std::vector<double> ys(data.labeled_y.data(), data.labeled_y.data() + data.n());
  std::sort(ys.begin(), ys.end());
  std::vector<std::vector<double>> cols(static_cast<size_t>(data.p()));
  for (Index j = 0; j < data.p(); ++j) {
    auto& col = cols[static_cast<size_t>(j)];
    col.reserve(static_cast<size_t>(data.n() + data.N()));
    for (Index i = 0; i < data.n(); ++i) col.push_back(data.labeled_x(i, j));
    for (Index i = 0; i < data.N(); ++i) col.push_back(data.unlabeled_x(i, j));
    std::sort(col.begin(), col.end());
  }
  return MarginSet(std::move(ys), std::move(cols), data.n(), data.N());
}

Index MarginSet::response_count(double y) const {
  return std::upper_bound(response_sorted_.begin(), response_sorted_.end(), y) -
         response_sorted_.begin();
}

Index MarginSet::covariate_count(Index j, double x) const {
  if (j < 0 || j >= p())
    throw DataError("covariate index " + std::to_string(j) + " out of range [0, " +
                    std::to_string(p()) + ")");
  const auto& col = covariate_sorted_[static_cast<size_t>(j)];
  return std::upper_bound(col.begin(), col.end(), x) - col.begin();
}

double MarginSet::response_cdf(double y) const {
  return static_cast<double>(response_count(y)) / static_cast<double>(n_ + 1);
}

double MarginSet::covariate_cdf(Index j, double x) const {
  return static_cast<double>(covariate_count(j, x)) / static_cast<double>(n_ + N_ + 1);
}

PseudoObservations MarginSet::pseudo_observations(const Vector& y, const Matrix& x) const {
  if (x.rows() != y.size() || x.cols() != p())
    throw DataError("pseudo-observation input shape does not match margins");
  PseudoObservations out;
  out.u.resize(y.size(), p() + 1);
  for (Index i = 0; i < y.size(); ++i) {
    out.u(i, 0) = response_cdf(y[i]);
    for (Index j = 0; j < p(); ++j) out.u(i, j + 1) = covariate_cdf(j, x(i, j));
  }
  return out;
}

}  // namespace semicop
