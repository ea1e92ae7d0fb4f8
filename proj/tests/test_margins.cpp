#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "semicop/error.hpp"
#include "semicop/margins.hpp"

using namespace semicop;

namespace {

Dataset make(std::vector<double> y, std::vector<double> xl, std::vector<double> xu) {
  Dataset d;
  d.labeled_y = Eigen::Map<Vector>(y.data(), static_cast<Index>(y.size()));
  d.labeled_x = Matrix(static_cast<Index>(xl.size()), 1);
  for (size_t i = 0; i < xl.size(); ++i) d.labeled_x(static_cast<Index>(i), 0) = xl[i];
  d.unlabeled_x = Matrix(static_cast<Index>(xu.size()), 1);
  for (size_t i = 0; i < xu.size(); ++i) d.unlabeled_x(static_cast<Index>(i), 0) = xu[i];
  return d;
}

}  // namespace

TEST_CASE("single labeled point") {
  auto m = fit_margins(make({0.0}, {1.0}, {}));
  CHECK(m.response_cdf(0.0) == 0.5);
  CHECK(m.response_cdf(-1.0) == 0.0);
}

TEST_CASE("pooled covariate counts") {
  auto m = fit_margins(make({1.0, 2.0}, {0.1, 0.5}, {0.2, 0.9}));
  CHECK(m.covariate_cdf(0, 0.5) == doctest::Approx(3.0 / 5.0).epsilon(1e-15));
  CHECK(m.covariate_cdf(0, 0.05) == 0.0);
  CHECK(m.covariate_cdf(0, 0.9) == doctest::Approx(4.0 / 5.0).epsilon(1e-15));
  CHECK(m.covariate_cdf(0, 0.3) == doctest::Approx(2.0 / 5.0).epsilon(1e-15));
  CHECK_THROWS_AS(m.covariate_cdf(1, 0.3), DataError);
}

TEST_CASE("response counts with n+1 denominator") {
  auto m = fit_margins(make({3.0, 1.0, 2.0}, {0.0, 0.0, 0.0}, {}));
  CHECK(m.response_cdf(2.0) == 0.5);
  auto u = m.pseudo_observations(make({3.0, 1.0, 2.0}, {0.0, 0.0, 0.0}, {}));
  std::vector<double> col{u.u(0, 0), u.u(1, 0), u.u(2, 0)};
  std::sort(col.begin(), col.end());
  CHECK(col[0] == 0.25);
  CHECK(col[1] == 0.5);
  CHECK(col[2] == 0.75);
}

TEST_CASE("pseudo observations by rank") {
  auto d = make({1.0, 2.0}, {5.0, 4.0}, {});
  auto u = fit_margins(d).pseudo_observations(d).u;
  CHECK(u(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(u(0, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(u(1, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(u(1, 1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("ties count fully") {
  auto m = fit_margins(make({1.0, 1.0, 2.0}, {0.0, 0.0, 0.0}, {}));
  CHECK(m.response_cdf(1.0) == 0.5);
  CHECK(m.covariate_cdf(0, 0.0) == 0.75);
}

TEST_CASE("invariances on random data") {
  std::mt19937_64 g(7);
  std::normal_distribution<double> nd;
  Dataset d;
  const Index n = 40, N = 60;
  d.labeled_y = Vector(n);
  d.labeled_x = Matrix(n, 2);
  d.unlabeled_x = Matrix(N, 2);
  for (Index i = 0; i < n; ++i) {
    d.labeled_y(i) = nd(g);
    d.labeled_x(i, 0) = nd(g);
    d.labeled_x(i, 1) = nd(g);
  }
  for (Index i = 0; i < N; ++i) d.unlabeled_x(i, 0) = nd(g), d.unlabeled_x(i, 1) = nd(g);
  auto m = fit_margins(d);

  // bounds of pseudo observations
  auto u = m.pseudo_observations(d).u;
  CHECK(u.maxCoeff() <= std::max(double(n) / (n + 1), double(n + N) / (n + N + 1)));
  CHECK(u.minCoeff() > 0.0);

  // permutation of rows
  std::vector<Index> pl(n), pu(N);
  for (Index i = 0; i < n; ++i) pl[i] = n - 1 - i;
  for (Index i = 0; i < N; ++i) pu[i] = (i * 7) % N;
  auto mp = fit_margins(d.subset(pl, pu));
  // rank invariance under exp on covariate 0
  Dataset e = d;
  e.labeled_x.col(0) = e.labeled_x.col(0).array().exp();
  e.unlabeled_x.col(0) = e.unlabeled_x.col(0).array().exp();
  auto me = fit_margins(e);
  double prev = 0.0;
  for (double q = -3.0; q <= 3.0; q += 0.01) {
    CHECK(mp.covariate_cdf(0, q) == m.covariate_cdf(0, q));
    CHECK(mp.response_cdf(q) == m.response_cdf(q));
    CHECK(me.covariate_cdf(0, std::exp(q)) == m.covariate_cdf(0, q));
    CHECK(m.response_cdf(q) >= prev);
    prev = m.response_cdf(q);
  }

  auto ms = fit_margins(d.without_unlabeled());
  CHECK(ms.covariate_cdf(1, 100.0) == doctest::Approx(double(n) / (n + 1)));
}

TEST_CASE("validation") {
  Dataset d;
  CHECK_THROWS_AS(fit_margins(d), DataError);
  auto bad = make({1.0, NAN}, {0.0, 1.0}, {});
  CHECK_THROWS_AS(fit_margins(bad), DataError);
}
