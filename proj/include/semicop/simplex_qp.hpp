#pragma once

#include "semicop/types.hpp"

namespace semicop {

struct QPResult {
  Vector w;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
};

// Euclidean projection onto {w >= 0, sum w = 1}.
Vector project_simplex(const Vector& v);

// ||w - P(w - grad)||_inf for the objective a'w + w'Bw.
double simplex_kkt_residual(const Vector& a, const Matrix& B, const Vector& w);

// min a'w + w'Bw over the simplex by accelerated projected gradient from the
// uniform point, followed by an equality-constrained polish on the support.
// Throws NumericalError when B is not positive semidefinite.
QPResult solve_simplex_qp(const Vector& a, const Matrix& B, double tolerance = 1e-8,
                          int max_iterations = 100000);

}  // namespace semicop
