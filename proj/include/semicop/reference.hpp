#pragma once

#include <span>
#include <vector>

#include "semicop/averaging.hpp"

// Serial, cache-free versions of the parallel kernels. They exist for
// testing and benchmarking; the library never calls them.
namespace semicop::reference {

// log c(u_i) row by row through the pointwise density.
std::vector<double> row_log_densities(const CopulaFamily& f, const CopulaParams& p, const Matrix& u);
double pseudo_loglik(const CopulaFamily& f, const CopulaParams& p, const Matrix& u);

Vector predict_batch(const CandidateRegressor& r, const Matrix& xs);

// Folds one after another, each built from explicit row lists.
CVPredictions cross_fit(const Dataset& data, std::span<const CopulaFamily> families, const CVPlan& plan,
                        const FitOptions& opts);

}  // namespace semicop::reference
