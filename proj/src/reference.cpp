#include "semicop/reference.hpp"

#include "semicop/rng.hpp"

namespace semicop::reference {

std::vector<double> row_log_densities(const CopulaFamily& f, const CopulaParams& p, const Matrix& u) {
  const auto c = bind(f, p);
  std::vector<double> out(static_cast<size_t>(u.rows()));
  for (Index i = 0; i < u.rows(); ++i)
    out[static_cast<size_t>(i)] = c->log_density(std::span(u.row(i).data(), static_cast<size_t>(u.cols())));
  return out;
}

double pseudo_loglik(const CopulaFamily& f, const CopulaParams& p, const Matrix& u) {
  double s = 0.0;
  for (double v : row_log_densities(f, p, u)) s += v;
  return s;
}

Vector predict_batch(const CandidateRegressor& r, const Matrix& xs) {
  Vector out(xs.rows());
  for (Index i = 0; i < xs.rows(); ++i)
    out(i) = predict_candidate(r, std::span(xs.row(i).data(), static_cast<size_t>(xs.cols())));
  return out;
}

CVPredictions cross_fit(const Dataset& data, std::span<const CopulaFamily> families, const CVPlan& plan,
                        const FitOptions& opts) {
  const Index n = data.n(), N = data.N(), p = data.p();
  CVPredictions cv;
  cv.n = n;
  cv.mu_tilde = Matrix::Zero(n + N, static_cast<Index>(families.size()));
  for (int k = 0; k < plan.K; ++k) {
    std::vector<Index> keep_l, keep_u, out_l, out_u;
    for (Index i = 0; i < n; ++i) (plan.labeled_fold_of[static_cast<size_t>(i)] == k ? out_l : keep_l).push_back(i);
    for (Index i = 0; i < N; ++i) (plan.unlabeled_fold_of[static_cast<size_t>(i)] == k ? out_u : keep_u).push_back(i);
    const Dataset train = data.subset(keep_l, keep_u);
    const MarginSet m = fit_margins(train);
    FitOptions o = opts;
    o.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(1000 + k));
    const auto fits = fit_candidates(families, m.pseudo_observations(train), o);
    for (size_t c = 0; c < fits.size(); ++c) {
      const CandidateRegressor r(fits[c], m, train.labeled_y);
      for (Index i : out_l)
        cv.mu_tilde(i, static_cast<Index>(c)) =
            predict_candidate(r, std::span(data.labeled_x.row(i).data(), static_cast<size_t>(p)));
      for (Index i : out_u)
        cv.mu_tilde(n + i, static_cast<Index>(c)) =
            predict_candidate(r, std::span(data.unlabeled_x.row(i).data(), static_cast<size_t>(p)));
    }
  }
  return cv;
}

}  // namespace semicop::reference
