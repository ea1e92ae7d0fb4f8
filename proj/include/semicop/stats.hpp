#pragma once

#include <span>

#include "semicop/types.hpp"

namespace semicop {

// Kendall's tau-b of two equal-length samples.
double kendall_tau(std::span<const double> a, std::span<const double> b);
// Pairwise tau of columns (i, j) of x, using at most max_rows leading rows.
Matrix kendall_matrix(const Matrix& x, Index max_rows = -1);

double mean(std::span<const double> v);
// Unbiased sample variance; 0 for fewer than two values.
double variance(std::span<const double> v);
double standard_error(std::span<const double> v);

}  // namespace semicop
