#pragma once

#include <functional>
#include <span>
#include <vector>

namespace semicop {

struct NelderMeadOptions {
  int max_iterations = 2000;
  // Stop when f_worst - f_best <= tolerance * (|f_best| + tolerance).
  double tolerance = 1e-8;
  double initial_step = 0.5;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool tolerance_reached = false;
};

using Objective = std::function<double(std::span<const double>)>;

// Minimizes f over the coordinates flagged in `active` (all when empty); the
// others stay at x0. Uses the dimension-adaptive coefficients of Gao and Han.
// Non-finite objective values are treated as +inf.
NelderMeadResult nelder_mead(const Objective& f, std::span<const double> x0,
                             const NelderMeadOptions& opts, std::span<const char> active = {});

}  // namespace semicop
