#include "semicop/averaging.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <string>

#include "semicop/error.hpp"
#include "semicop/rng.hpp"
#include "semicop/simplex_qp.hpp"

namespace semicop {

namespace {

std::vector<int> shuffled_folds(Index count, int K, std::uint64_t seed) {
  std::vector<Index> idx(static_cast<size_t>(count));
  for (Index i = 0; i < count; ++i) idx[static_cast<size_t>(i)] = i;
  Engine g(seed);
  for (Index i = count - 1; i > 0; --i) {
    const auto j = static_cast<Index>(open_uniform(g) * static_cast<double>(i + 1));
    std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(std::min(j, i))]);
  }
  std::vector<int> fold(static_cast<size_t>(count));
  for (Index pos = 0; pos < count; ++pos)
    fold[static_cast<size_t>(idx[static_cast<size_t>(pos)])] = static_cast<int>(pos % K);
  return fold;
}

struct FoldData {
  Dataset train;
  MarginSet margins;
  PseudoObservations u;
  std::vector<Index> test_labeled, test_unlabeled;
};

}  // namespace

CVPlan make_cv_plan(Index n, Index N, int K, std::uint64_t seed) {
  if (K < 2) throw ConfigError("fold count K must be at least 2");
  if (K > n) throw ConfigError("fold count K=" + std::to_string(K) + " exceeds n=" + std::to_string(n));
  CVPlan plan;
  plan.K = K;
  plan.seed = seed;
  plan.labeled_fold_of = shuffled_folds(n, K, derive_seed(seed, 1));
  plan.unlabeled_fold_of = shuffled_folds(N, K, derive_seed(seed, 2));
  return plan;
}

CVPredictions cross_fit(const Dataset& data, std::span<const CopulaFamily> families, const CVPlan& plan,
                        const FitOptions& opts) {
  const Index n = data.n(), N = data.N();
  const int K = plan.K;
  const auto M = static_cast<Index>(families.size());
  if (static_cast<Index>(plan.labeled_fold_of.size()) != n ||
      static_cast<Index>(plan.unlabeled_fold_of.size()) != N)
    throw DataError("CV plan does not match the dataset size");

  std::vector<FoldData> folds(static_cast<size_t>(K));
  for (int k = 0; k < K; ++k) {
    auto& fd = folds[static_cast<size_t>(k)];
    std::vector<Index> tl, tu;
    for (Index i = 0; i < n; ++i)
      (plan.labeled_fold_of[static_cast<size_t>(i)] == k ? fd.test_labeled : tl).push_back(i);
    for (Index i = 0; i < N; ++i)
      (plan.unlabeled_fold_of[static_cast<size_t>(i)] == k ? fd.test_unlabeled : tu).push_back(i);
    if (fd.test_labeled.empty()) throw DataError("fold " + std::to_string(k + 1) + " has no labeled rows");
    fd.train = data.subset(tl, tu);
    fd.margins = fit_margins(fd.train);
    fd.u = fd.margins.pseudo_observations(fd.train);
  }

  CVPredictions cv;
  cv.n = n;
  cv.mu_tilde = Matrix::Zero(n + N, M);

  auto predict_fold = [&](const FoldData& fd, Index m, const FittedCandidate& fit) {
    CandidateRegressor r(fit, fd.margins, fd.train.labeled_y);
    const Index p = data.p();
    for (Index i : fd.test_labeled)
      cv.mu_tilde(i, m) = predict_candidate(r, std::span(data.labeled_x.row(i).data(), static_cast<size_t>(p)));
    for (Index i : fd.test_unlabeled)
      cv.mu_tilde(n + i, m) =
          predict_candidate(r, std::span(data.unlabeled_x.row(i).data(), static_cast<size_t>(p)));
  };
  auto describe = [&](int k, Index m, const std::exception& e) {
    return "fold " + std::to_string(k + 1) + ", candidate " +
           std::string(family_name(families[static_cast<size_t>(m)].tag)) + ": " + e.what();
  };

  // failures are reported for the lowest failing fold, independent of scheduling
  std::vector<std::pair<int, std::string>> failures(static_cast<size_t>(K));

#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < K; ++k) {
    Index m = 0;
    try {
      FitOptions o = opts;
      o.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(1000 + k));
      const auto& fd = folds[static_cast<size_t>(k)];
      const auto fits = fit_candidates(families, fd.u, o);
      for (m = 0; m < M; ++m) predict_fold(fd, m, fits[static_cast<size_t>(m)]);
    } catch (const NumericalError& e) {
      failures[static_cast<size_t>(k)] = {3, describe(k, std::min(m, M - 1), e)};
    } catch (const DataError& e) {
      failures[static_cast<size_t>(k)] = {2, describe(k, std::min(m, M - 1), e)};
    } catch (const std::exception& e) {
      failures[static_cast<size_t>(k)] = {1, describe(k, std::min(m, M - 1), e)};
    }
  }
  for (const auto& [kind, msg] : failures) {
    if (kind == 3) throw NumericalError(msg);
    if (kind == 2) throw DataError(msg);
    if (kind == 1) throw Error(msg);
  }
  return cv;
}

CriterionTerms criterion_terms(const CVPredictions& cv, const Vector& y) {
  const Index n = cv.n;
  const Index total = cv.mu_tilde.rows();
  const Index M = cv.mu_tilde.cols();
  if (y.size() != n) throw DataError("response length does not match the cross-fit");
  CriterionTerms t;
  t.a = Vector(M);
  const Eigen::MatrixXd G = cv.mu_tilde;
  for (Index m = 0; m < M; ++m) {
    const double fit_err = (G.col(m).head(n) - y).squaredNorm() / static_cast<double>(n);
    t.a(m) = fit_err - G.col(m).squaredNorm() / static_cast<double>(total);
  }
  t.B = (G.transpose() * G) / static_cast<double>(total);
  return t;
}

double evaluate_criterion(const CriterionTerms& t, const Vector& w) { return t.a.dot(w) + w.dot(t.B * w); }

double evaluate_criterion_decomposed(const CVPredictions& cv, const Vector& y, const Vector& w) {
  const Index n = cv.n, total = cv.mu_tilde.rows(), M = cv.mu_tilde.cols();
  double err = 0.0, amb = 0.0;
  for (Index i = 0; i < total; ++i) {
    double mw = 0.0;
    for (Index m = 0; m < M; ++m) mw += w(m) * cv.mu_tilde(i, m);
    for (Index m = 0; m < M; ++m) {
      const double dv = cv.mu_tilde(i, m) - mw;
      amb += w(m) * dv * dv;
      if (i < n) {
        const double e = cv.mu_tilde(i, m) - y(i);
        err += w(m) * e * e;
      }
    }
  }
  return err / static_cast<double>(n) - amb / static_cast<double>(total);
}

Vector solve_weights(const CriterionTerms& t) {
  auto r = solve_simplex_qp(t.a, t.B);
  check_simplex(r.w);
  return r.w;
}

Vector sbic_weights(std::span<const FittedCandidate> fits, Index n) {
  if (fits.empty()) throw DataError("no candidates");
  const auto M = static_cast<Index>(fits.size());
  Vector b(M);
  for (Index m = 0; m < M; ++m) b(m) = bic(fits[static_cast<size_t>(m)], n);
  const double lo = b.minCoeff();
  Vector w = (-(b.array() - lo) / 2.0).exp().matrix();
  return w / w.sum();
}

Vector bic_select(std::span<const FittedCandidate> fits, Index n) {
  if (fits.empty()) throw DataError("no candidates");
  const auto M = static_cast<Index>(fits.size());
  Index best = 0;
  double bb = bic(fits[0], n);
  for (Index m = 1; m < M; ++m) {
    const double b = bic(fits[static_cast<size_t>(m)], n);
    if (b < bb) {
      bb = b;
      best = m;
    }
  }
  Vector w = Vector::Zero(M);
  w(best) = 1.0;
  return w;
}

Vector equal_weights(Index M) {
  if (M < 1) throw DataError("no candidates");
  return Vector::Constant(M, 1.0 / static_cast<double>(M));
}

void check_simplex(const Vector& w) {
  if (w.size() == 0 || !w.allFinite() || w.minCoeff() < 0.0 || std::abs(w.sum() - 1.0) > 1e-10)
    throw NumericalError("weights are not on the probability simplex");
}

std::string_view scheme_name(WeightScheme s) {
  switch (s) {
    case WeightScheme::CRMA: return "crma";
    case WeightScheme::SBIC: return "sbic";
    case WeightScheme::BICMS: return "bicms";
    case WeightScheme::EWMA: return "ewma";
  }
  return "unknown";
}

WeightScheme parse_scheme(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  for (auto w : {WeightScheme::CRMA, WeightScheme::SBIC, WeightScheme::BICMS, WeightScheme::EWMA})
    if (s == scheme_name(w)) return w;
  throw ConfigError("unknown weight scheme '" + std::string(name) + "'");
}

CandidateSet fit_candidate_set(const Dataset& data, std::span<const CopulaFamily> families,
                               const FitOptions& opts) {
  data.validate();
  if (families.empty()) throw ConfigError("no candidate copulas selected");
  for (const auto& f : families)
    if (f.dim != data.p() + 1)
      throw ConfigError("candidate dimension " + std::to_string(f.dim) + " does not match p+1=" +
                        std::to_string(data.p() + 1));
  const MarginSet margins = fit_margins(data);
  const auto u = margins.pseudo_observations(data);
  CandidateSet set;
  set.fits = fit_candidates(families, u, opts);
  for (const auto& f : set.fits) set.regressors.emplace_back(f, margins, data.labeled_y);
  return set;
}

Vector scheme_weights(WeightScheme scheme, const Dataset& data, const CandidateSet& set,
                      const AveragingOptions& opts, CVPredictions* cv_out) {
  const auto M = static_cast<Index>(set.fits.size());
  Vector w;
  switch (scheme) {
    case WeightScheme::CRMA: {
      std::vector<CopulaFamily> fams;
      for (const auto& f : set.fits) fams.push_back(f.family);
      const auto plan = make_cv_plan(data.n(), data.N(), opts.K, derive_seed(opts.fit.seed, 7));
      FitOptions fold_opts = opts.fit;
      fold_opts.restarts = opts.fold_restarts;
      auto cv = cross_fit(data, fams, plan, fold_opts);
      w = M == 1 ? Vector::Ones(1) : solve_weights(criterion_terms(cv, data.labeled_y));
      if (cv_out) *cv_out = std::move(cv);
      break;
    }
    case WeightScheme::SBIC: w = sbic_weights(set.fits, data.n()); break;
    case WeightScheme::BICMS: w = bic_select(set.fits, data.n()); break;
    case WeightScheme::EWMA: w = equal_weights(M); break;
  }
  check_simplex(w);
  return w;
}

AveragedModel fit_model_average(const Dataset& data, std::span<const CopulaFamily> families,
                                const AveragingOptions& opts) {
  auto set = fit_candidate_set(data, families, opts.fit);
  AveragedModel model;
  model.weights = scheme_weights(opts.scheme, data, set, opts);
  model.scheme = opts.scheme;
  model.regressors = std::move(set.regressors);
  return model;
}

double predict_average(const AveragedModel& model, std::span<const double> x) {
  double s = 0.0;
  for (size_t m = 0; m < model.regressors.size(); ++m)
    s += model.weights(static_cast<Index>(m)) * predict_candidate(model.regressors[m], x);
  return s;
}

Matrix candidate_predictions(std::span<const CandidateRegressor> regressors, const Matrix& xs) {
  const auto M = static_cast<Index>(regressors.size());
  Matrix out(xs.rows(), M);
  for (Index m = 0; m < M; ++m) out.col(m) = predict_candidate_batch(regressors[static_cast<size_t>(m)], xs);
  return out;
}

Vector predict_average_batch(const AveragedModel& model, const Matrix& xs) {
  const Matrix P = candidate_predictions(model.regressors, xs);
  Vector out(xs.rows());
  for (Index i = 0; i < xs.rows(); ++i) {
    double s = 0.0;
    for (Index m = 0; m < P.cols(); ++m) s += model.weights(m) * P(i, m);
    out(i) = s;
  }
  return out;
}

}  // namespace semicop
