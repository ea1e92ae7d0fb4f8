#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "semicop/error.hpp"
#include "semicop/mle.hpp"
#include "semicop/rng.hpp"
#include "semicop/stats.hpp"

using namespace semicop;
using oracle::median;

namespace {

PseudoObservations ranks(const Matrix& x) {
  Dataset d;
  d.labeled_y = x.col(0);
  d.labeled_x = x.rightCols(x.cols() - 1);
  d.unlabeled_x = Matrix(0, x.cols() - 1);
  return fit_margins(d).pseudo_observations(d);
}

}  // namespace

TEST_CASE("pseudo log-likelihood") {
  PseudoObservations u{Matrix(1, 2)};
  u.u << 0.5, 0.5;
  CHECK(pseudo_loglik({Family::Clayton, 2}, {{2.0}}, u) ==
        doctest::Approx(std::log(192.0 / std::pow(7.0, 2.5))).epsilon(1e-13));
  auto x = sample({Family::Frank, 3}, {{3.0}}, 50, 5);
  PseudoObservations a{x}, b{Matrix(100, 3)};
  b.u << x, x;
  const double la = pseudo_loglik({Family::Frank, 3}, {{3.0}}, a);
  CHECK(pseudo_loglik({Family::Frank, 3}, {{3.0}}, b) == doctest::Approx(2.0 * la).epsilon(1e-12));
  CHECK(pseudo_loglik({Family::Gumbel, 3}, {{1.0}}, a) == 0.0);
}

TEST_CASE("bic arithmetic") {
  FittedCandidate c;
  c.loglik = 0.0;
  c.q = 1;
  CHECK(-2.0 * c.loglik + std::log(std::exp(1.0)) * 1 == doctest::Approx(1.0));
  c.loglik = 10.0;
  c.q = 2;
  CHECK(bic(c, 100) == doctest::Approx(-20.0 + 2.0 * std::log(100.0)));
  CHECK(bic(c, 100) == doctest::Approx(-10.789).epsilon(1e-4));
  c.q = 3;
  CHECK(bic(c, 100) > -10.789);
}

TEST_CASE("tau inversions") {
  for (Family tag : {Family::Gumbel, Family::Clayton, Family::Frank, Family::Joe})
    for (double tau : {0.1, 0.3, 0.6})
      CHECK(kendall_tau_of(tag, theta_from_tau(tag, tau)) == doctest::Approx(tau).epsilon(1e-6));
  CHECK(kendall_tau_of(Family::Frank, -5.0) < 0.0);
}

TEST_CASE("Gaussian and Clayton recovery") {
  std::vector<double> rho_err, theta_err;
  FitOptions opts;
  for (int s = 0; s < 20; ++s) {
    auto g = sample({Family::Gaussian, 2}, {{0.6}}, 2000, 1000 + s);
    auto fg = fit_candidate({Family::Gaussian, 2}, ranks(g), opts);
    rho_err.push_back(std::abs(fg.theta_hat.natural[0] - 0.6));
    auto c = sample({Family::Clayton, 2}, {{2.0}}, 2000, 2000 + s);
    auto fc = fit_candidate({Family::Clayton, 2}, ranks(c), opts);
    theta_err.push_back(std::abs(fc.theta_hat.natural[0] - 2.0));
    CHECK(fg.converged);
    CHECK(fc.converged);
  }
  CHECK(median(rho_err) < 0.05);
  CHECK(median(theta_err) < 0.25);
}

TEST_CASE("independent data pushes Clayton to the boundary") {
  Engine g(3);
  Matrix x(2000, 2);
  for (Index i = 0; i < x.rows(); ++i) x(i, 0) = open_uniform(g), x(i, 1) = open_uniform(g);
  auto f = fit_candidate({Family::Clayton, 2}, ranks(x), FitOptions{});
  CHECK(f.theta_hat.natural[0] < 0.1);
}

TEST_CASE("fit invariants") {
  auto x = sample({Family::Gumbel, 3}, {{1.7}}, 400, 8);
  auto u = ranks(x);
  FitOptions opts;
  for (const auto& f : default_candidates(3)) {
    auto r = fit_candidate(f, u, opts);
    INFO(family_name(f.tag));
    CHECK(r.q == free_param_count(f));
    CHECK(r.loglik == doctest::Approx(pseudo_loglik(f, r.theta_hat, u)).epsilon(1e-12));
    check_domain(f, r.theta_hat);
    // refit from the optimum moves the likelihood by less than the tolerance scale
    FitOptions o = opts;
    o.restarts = 0;
    const std::vector<CopulaParams> start{r.theta_hat};
    auto again = fit_candidate(f, u, o, start);
    CHECK(again.loglik >= r.loglik - 1e-6 * u.u.rows());
    // determinism
    auto r2 = fit_candidate(f, u, opts);
    CHECK(r2.theta_hat.natural == r.theta_hat.natural);
  }
  // rank invariance: monotone transforms of raw columns leave the fit unchanged
  Matrix y = x;
  y.col(1) = y.col(1).array().log();
  y.col(2) = y.col(2).array().pow(3.0);
  auto a = fit_candidate({Family::Gumbel, 3}, u, opts);
  auto b = fit_candidate({Family::Gumbel, 3}, ranks(y), opts);
  CHECK(a.theta_hat.natural == b.theta_hat.natural);

  PseudoObservations tiny{u.u.topRows(3)};
  CHECK_THROWS_AS(fit_candidate({Family::StudentT, 3}, tiny, opts), DataError);
}

TEST_CASE("sampling distribution of the Gaussian estimate is near normal") {
  std::vector<double> est;
  const Index n = 500, N = 2000;
  for (int r = 0; r < 200; ++r) {
    Engine g(derive_seed(77, static_cast<std::uint64_t>(r)));
    auto lab = sample({Family::Gaussian, 2}, {{0.5}}, n, derive_seed(78, r));
    Dataset d;
    d.labeled_y = Vector(n);
    d.labeled_x = Matrix(n, 1);
    d.unlabeled_x = Matrix(N, 1);
    for (Index i = 0; i < n; ++i) {
      d.labeled_y(i) = normal_quantile(lab(i, 0));
      d.labeled_x(i, 0) = normal_quantile(lab(i, 1));
    }
    for (Index i = 0; i < N; ++i) d.unlabeled_x(i, 0) = normal_quantile(open_uniform(g));
    auto u = fit_margins(d).pseudo_observations(d);
    est.push_back(fit_candidate({Family::Gaussian, 2}, u, FitOptions{}).theta_hat.natural[0]);
  }
  const double m = mean(est), sd = std::sqrt(variance(est));
  double m3 = 0.0, m4 = 0.0;
  for (double e : est) {
    const double z = (e - m) / sd;
    m3 += z * z * z;
    m4 += z * z * z * z;
  }
  m3 /= est.size();
  m4 /= est.size();
  INFO("skew=", m3, " kurt=", m4 - 3.0);
  CHECK(std::abs(m3) < 0.3);
  CHECK(std::abs(m4 - 3.0) < 0.6);
}

TEST_CASE("mixture fit") {
  auto x = sample({Family::Clayton, 3}, {{2.0}}, 300, 21);
  auto u = ranks(x);
  const auto fams = default_candidates(3);
  FitOptions opts;
  auto fits = fit_candidates(fams, u, opts);
  REQUIRE(fits.size() == 7);
  // the mixture nests every base family and starts from their optima
  for (size_t m = 0; m < 6; ++m) CHECK(fits[6].loglik >= fits[m].loglik - 1e-6);
  CHECK(fits[6].q == 16);
  CHECK(free_param_count({Family::Mixture, 5}) == 30);
}
