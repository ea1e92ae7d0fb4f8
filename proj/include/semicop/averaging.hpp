#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "semicop/mle.hpp"
#include "semicop/regression.hpp"

namespace semicop {

struct CVPlan {
  int K = 5;
  std::vector<int> labeled_fold_of;
  std::vector<int> unlabeled_fold_of;
  std::uint64_t seed = 0;
};

// Random near-equal partition of labeled and unlabeled rows into K folds.
CVPlan make_cv_plan(Index n, Index N, int K, std::uint64_t seed);

// Cross-fitted predictions, rows 0..n-1 labeled and n..n+N-1 unlabeled.
struct CVPredictions {
  Matrix mu_tilde;
  Index n = 0;
};

// Per fold: margins from the retained rows, refit on the retained labeled
// rows, predict the fold's labeled and unlabeled rows.
CVPredictions cross_fit(const Dataset& data, std::span<const CopulaFamily> families, const CVPlan& plan,
                        const FitOptions& opts);

struct CriterionTerms {
  Vector a;
  Matrix B;
};

CriterionTerms criterion_terms(const CVPredictions& cv, const Vector& y);
double evaluate_criterion(const CriterionTerms& t, const Vector& w);
// Error-ambiguity form: n^-1 sum_m w_m |mu_m^L - Y|^2 - (n+N)^-1 sum_m w_m |mu_m - mu_w|^2.
double evaluate_criterion_decomposed(const CVPredictions& cv, const Vector& y, const Vector& w);

Vector solve_weights(const CriterionTerms& t);
Vector sbic_weights(std::span<const FittedCandidate> fits, Index n);
Vector bic_select(std::span<const FittedCandidate> fits, Index n);
Vector equal_weights(Index M);
// Throws NumericalError unless w is nonnegative and sums to one within 1e-10.
void check_simplex(const Vector& w);

enum class WeightScheme { CRMA, SBIC, BICMS, EWMA };
std::string_view scheme_name(WeightScheme s);
WeightScheme parse_scheme(std::string_view name);

struct AveragingOptions {
  int K = 5;
  FitOptions fit;
  WeightScheme scheme = WeightScheme::CRMA;
  // restarts for the fold refits of the cross-fit; the full-data fits use fit.restarts
  int fold_restarts = 1;
};

// Candidates fitted on the full dataset with their regressors.
struct CandidateSet {
  std::vector<FittedCandidate> fits;
  std::vector<CandidateRegressor> regressors;
};

CandidateSet fit_candidate_set(const Dataset& data, std::span<const CopulaFamily> families,
                               const FitOptions& opts);

struct AveragedModel {
  std::vector<CandidateRegressor> regressors;
  Vector weights;
  WeightScheme scheme = WeightScheme::CRMA;
};

// Weights of `scheme` for an already fitted candidate set. CRMA runs the
// cross-fit; `cv_out` receives its predictions when non-null.
Vector scheme_weights(WeightScheme scheme, const Dataset& data, const CandidateSet& set,
                      const AveragingOptions& opts, CVPredictions* cv_out = nullptr);

AveragedModel fit_model_average(const Dataset& data, std::span<const CopulaFamily> families,
                                const AveragingOptions& opts);

double predict_average(const AveragedModel& model, std::span<const double> x);
Vector predict_average_batch(const AveragedModel& model, const Matrix& xs);
// n_rows x M matrix of candidate predictions.
Matrix candidate_predictions(std::span<const CandidateRegressor> regressors, const Matrix& xs);

}  // namespace semicop
