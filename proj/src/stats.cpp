#include "semicop/stats.hpp"

#include <cmath>

#include "semicop/error.hpp"

namespace semicop {

double kendall_tau(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("kendall_tau: length mismatch");
  const size_t n = a.size();
  long long conc = 0, tie_a = 0, tie_b = 0, pairs = 0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      ++pairs;
      if (da == 0.0 || db == 0.0) {
        tie_a += da == 0.0;
        tie_b += db == 0.0;
        continue;
      }
      conc += (da > 0) == (db > 0) ? 1 : -1;
    }
  }
  const double denom = std::sqrt(static_cast<double>(pairs - tie_a) * static_cast<double>(pairs - tie_b));
  return denom > 0 ? static_cast<double>(conc) / denom : 0.0;
}

Matrix kendall_matrix(const Matrix& x, Index max_rows) {
  const Index rows = max_rows < 0 ? x.rows() : std::min(max_rows, x.rows());
  const Index d = x.cols();
  Matrix cols = x.topRows(rows).transpose();
  Matrix tau = Matrix::Identity(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < i; ++j) {
      const double t = kendall_tau(std::span(cols.row(i).data(), static_cast<size_t>(rows)),
                                   std::span(cols.row(j).data(), static_cast<size_t>(rows)));
      tau(i, j) = tau(j, i) = t;
    }
  return tau;
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double standard_error(std::span<const double> v) {
  return v.empty() ? 0.0 : std::sqrt(variance(v) / static_cast<double>(v.size()));
}

}  // namespace semicop
