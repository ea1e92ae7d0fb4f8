#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "semicop/averaging.hpp"
#include "semicop/error.hpp"
#include "semicop/simplex_qp.hpp"

using namespace semicop;
using oracle::grid_min;
using oracle::linear_data;

namespace {

FittedCandidate with_ll(double ll, std::size_t q) {
  FittedCandidate f;
  f.loglik = ll;
  f.q = q;
  return f;
}

}  // namespace

TEST_CASE("simplex projection and QP examples") {
  Vector v(3);
  v << 0.2, 0.3, 0.5;
  CHECK(project_simplex(v).isApprox(v));
  v << 2.0, 0.0, -1.0;
  CHECK(project_simplex(v) == Vector::Unit(3, 0));

  Vector a = Vector::Zero(2);
  Matrix B = Matrix::Identity(2, 2) / 2.0;
  auto r = solve_simplex_qp(a, B);
  CHECK(r.w(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.w(1) == doctest::Approx(0.5).epsilon(1e-12));

  a << 0.0, 10.0;
  B = Matrix::Identity(2, 2);
  r = solve_simplex_qp(a, B);
  CHECK(r.w(0) == 1.0);
  CHECK(r.w(1) == 0.0);
  CHECK(r.objective <= grid_min(a, B) + 1e-12);

  Matrix bad = Matrix::Identity(2, 2);
  bad(1, 1) = -1.0;
  CHECK_THROWS_AS(solve_simplex_qp(a, bad), NumericalError);
}

TEST_CASE("QP beats the simplex grid on random PSD instances") {
  std::mt19937_64 g(11);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 40; ++rep) {
    const Index M = 2 + rep % 2;
    Matrix F(M + 1, M);
    for (Index i = 0; i < F.rows(); ++i)
      for (Index j = 0; j < M; ++j) F(i, j) = nd(g);
    Matrix B = F.transpose() * F / double(M);
    if (rep % 5 == 0) B.col(M - 1) = B.col(0), B.row(M - 1) = B.row(0);  // singular
    Vector a(M);
    for (Index j = 0; j < M; ++j) a(j) = nd(g);
    auto r = solve_simplex_qp(a, B);
    CHECK(r.objective <= grid_min(a, B) + 1e-8);
    CHECK(r.kkt_residual < 1e-8);
    check_simplex(r.w);
  }
}

TEST_CASE("criterion terms") {
  std::mt19937_64 g(12);
  std::normal_distribution<double> nd;
  const Index n = 9, N = 13, M = 4;
  CVPredictions cv;
  cv.n = n;
  cv.mu_tilde = Matrix(n + N, M);
  for (Index i = 0; i < n + N; ++i)
    for (Index m = 0; m < M; ++m) cv.mu_tilde(i, m) = nd(g);
  Vector y(n);
  for (Index i = 0; i < n; ++i) y(i) = nd(g);
  auto t = criterion_terms(cv, y);
  for (int rep = 0; rep < 20; ++rep) {
    Vector w(M);
    for (Index m = 0; m < M; ++m) w(m) = std::abs(nd(g));
    w /= w.sum();
    // direct first-line form: n^-1 |mu_w^L - Y|^2 + cross terms of the expansion
    Vector mw = cv.mu_tilde * w;
    double direct = 0.0;
    for (Index m = 0; m < M; ++m)
      direct += w(m) * ((cv.mu_tilde.col(m).head(n) - y).squaredNorm() / n -
                        (cv.mu_tilde.col(m) - mw).squaredNorm() / (n + N));
    CHECK(evaluate_criterion(t, w) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(evaluate_criterion_decomposed(cv, y, w) == doctest::Approx(evaluate_criterion(t, w)).epsilon(1e-12));
  }
  for (Index m = 0; m < M; ++m)
    CHECK(evaluate_criterion(t, Vector::Unit(M, m)) == doctest::Approx(t.a(m) + t.B(m, m)));

  // identical columns: no ambiguity, constant criterion
  CVPredictions same = cv;
  for (Index m = 1; m < M; ++m) same.mu_tilde.col(m) = same.mu_tilde.col(0);
  auto ts = criterion_terms(same, y);
  const double c0 = (same.mu_tilde.col(0).head(n) - y).squaredNorm() / n;
  CHECK(evaluate_criterion(ts, equal_weights(M)) == doctest::Approx(c0));
  CHECK(evaluate_criterion(ts, Vector::Unit(M, 2)) == doctest::Approx(c0));
}

TEST_CASE("baseline weights") {
  std::vector<FittedCandidate> eq{with_ll(1.0, 1), with_ll(1.0, 1), with_ll(1.0, 1)};
  CHECK(sbic_weights(eq, 50).isApprox(equal_weights(3)));
  std::vector<FittedCandidate> two{with_ll(0.0, 1), with_ll(-1.0, 1)};
  auto w = sbic_weights(two, 10);
  const double e = std::exp(-1.0);
  CHECK(w(0) == doctest::Approx(1.0 / (1.0 + e)).epsilon(1e-14));
  CHECK(w(1) == doctest::Approx(e / (1.0 + e)).epsilon(1e-14));
  std::vector<FittedCandidate> dom{with_ll(std::log(1e6), 1), with_ll(0.0, 1)};
  CHECK(sbic_weights(dom, 10)(1) == doctest::Approx(1e-6 / (1.0 + 1e-6)).epsilon(1e-12));

  std::vector<FittedCandidate> ties{with_ll(0, 2), with_ll(5, 1), with_ll(1, 3), with_ll(5, 1)};
  CHECK(bic_select(ties, 30) == Vector::Unit(4, 1));
  CHECK(bic_select(std::span(ties).first(1), 30) == Vector::Ones(1));
  CHECK(equal_weights(4) == Vector::Constant(4, 0.25));
  CHECK(equal_weights(1) == Vector::Ones(1));
  CHECK(parse_scheme("CRMA") == WeightScheme::CRMA);
  CHECK_THROWS_AS(parse_scheme("foo"), ConfigError);
}

TEST_CASE("cv plan") {
  auto p = make_cv_plan(10, 20, 5, 3);
  std::vector<int> cl(5), cu(5);
  for (int f : p.labeled_fold_of) ++cl[f];
  for (int f : p.unlabeled_fold_of) ++cu[f];
  for (int k = 0; k < 5; ++k) CHECK(cl[k] == 2);
  for (int k = 0; k < 5; ++k) CHECK(cu[k] == 4);
  auto q = make_cv_plan(7, 0, 5, 3);
  std::vector<int> c7(5);
  for (int f : q.labeled_fold_of) ++c7[f];
  std::sort(c7.begin(), c7.end());
  CHECK(c7 == std::vector<int>{1, 1, 1, 2, 2});
  CHECK(make_cv_plan(10, 20, 5, 3).labeled_fold_of == p.labeled_fold_of);
  CHECK_THROWS_AS(make_cv_plan(3, 0, 5, 1), ConfigError);
}

TEST_CASE("cross fit matches a naive fold loop and excludes Y_i") {
  auto d = linear_data(20, 20, 1, 5);
  const std::vector<CopulaFamily> fams{{Family::Gaussian, 2}, {Family::Clayton, 2}};
  auto plan = make_cv_plan(20, 20, 2, 9);
  FitOptions opts;
  auto cv = cross_fit(d, fams, plan, opts);
  REQUIRE(cv.mu_tilde.rows() == 40);

  for (int k = 0; k < 2; ++k) {
    Dataset tr;
    std::vector<double> ty, tx, ux;
    for (Index i = 0; i < 20; ++i)
      if (plan.labeled_fold_of[i] != k) ty.push_back(d.labeled_y(i)), tx.push_back(d.labeled_x(i, 0));
    for (Index i = 0; i < 20; ++i)
      if (plan.unlabeled_fold_of[i] != k) ux.push_back(d.unlabeled_x(i, 0));
    tr.labeled_y = Eigen::Map<Vector>(ty.data(), Index(ty.size()));
    tr.labeled_x = Eigen::Map<Matrix>(tx.data(), Index(tx.size()), 1);
    tr.unlabeled_x = Eigen::Map<Matrix>(ux.data(), Index(ux.size()), 1);
    auto m = fit_margins(tr);
    auto u = m.pseudo_observations(tr);
    for (Index c = 0; c < 2; ++c) {
      FitOptions o = opts;
      auto fit = fit_candidate(fams[c], u, o);
      CandidateRegressor r(fit, m, tr.labeled_y);
      for (Index i = 0; i < 20; ++i) {
        if (plan.labeled_fold_of[i] == k)
          CHECK(cv.mu_tilde(i, c) == doctest::Approx(predict_candidate(r, std::span(&d.labeled_x(i, 0), 1))).epsilon(1e-12));
        if (plan.unlabeled_fold_of[i] == k)
          CHECK(cv.mu_tilde(20 + i, c) ==
                doctest::Approx(predict_candidate(r, std::span(&d.unlabeled_x(i, 0), 1))).epsilon(1e-12));
      }
    }
  }

  for (Index i : {Index(0), Index(7), Index(19)}) {
    Dataset e = d;
    e.labeled_y(i) += 5.0;
    auto cv2 = cross_fit(e, fams, plan, opts);
    CHECK(cv2.mu_tilde.row(i) == cv.mu_tilde.row(i));
  }
}

TEST_CASE("model average schemes") {
  auto d = linear_data(60, 60, 2, 6);
  auto fams = default_candidates(3);
  AveragingOptions o;
  auto set = fit_candidate_set(d, fams, o.fit);
  auto ew = scheme_weights(WeightScheme::EWMA, d, set, o);
  CHECK(ew == equal_weights(7));
  auto bm = scheme_weights(WeightScheme::BICMS, d, set, o);
  CHECK(bm.maxCoeff() == 1.0);
  CHECK(bm.sum() == 1.0);
  CVPredictions cv;
  auto cw = scheme_weights(WeightScheme::CRMA, d, set, o, &cv);
  check_simplex(cw);
  auto terms = criterion_terms(cv, d.labeled_y);
  const double c = evaluate_criterion(terms, cw);
  for (Index m = 0; m < 7; ++m) CHECK(c <= evaluate_criterion(terms, Vector::Unit(7, m)) + 1e-12);
  CHECK(c <= evaluate_criterion(terms, equal_weights(7)) + 1e-12);

  AveragedModel model{set.regressors, bm, WeightScheme::BICMS};
  Index chosen = 0;
  bm.maxCoeff(&chosen);
  const std::vector<double> x{0.3, -0.4};
  CHECK(predict_average(model, x) == predict_candidate(set.regressors[chosen], x));
  auto batch = predict_average_batch(model, d.unlabeled_x);
  for (Index i = 0; i < 5; ++i)
    CHECK(batch(i) == predict_average(model, std::span(d.unlabeled_x.row(i).data(), 2)));

  const std::vector<CopulaFamily> one{{Family::Frank, 3}};
  for (auto s : {WeightScheme::CRMA, WeightScheme::SBIC, WeightScheme::BICMS, WeightScheme::EWMA}) {
    o.scheme = s;
    CHECK(fit_model_average(d, one, o).weights == Vector::Ones(1));
  }
}
