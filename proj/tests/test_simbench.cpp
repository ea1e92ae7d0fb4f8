#include <cmath>
#include <random>

#include "doctest.h"
#include "semicop/error.hpp"
#include "semicop/simbench.hpp"
#include "semicop/simplex_qp.hpp"

using namespace semicop;

TEST_CASE("true mean formulas") {
  DGPSpec s;
  const std::vector<double> z4(4, 0.0), one2{1.0, 1.0};
  s.id = 1;
  CHECK(true_mean(s, z4) == 0.0);
  s.id = 4;
  CHECK(true_mean(s, z4) == 4.0);
  s.id = 3;
  CHECK(true_mean(s, one2) == doctest::Approx(2.6));
  const std::vector<double> x{0.5, -1.5};
  double lin = -1.0, sq = 0.25 + 2.25, cub = 0.125 - 0.25 + std::exp(0.5) - 3.375 - 2.25 + std::exp(-1.5);
  s.id = 2;
  CHECK(true_mean(s, x) == doctest::Approx(lin + sq));
  s.id = 5;
  CHECK(true_mean(s, x) == doctest::Approx(lin + 0.3 * cub));
  s.id = 6;
  CHECK_THROWS_AS(true_mean(s, x), ConfigError);
  s.id = 1;
  s.noise_variance = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("generate") {
  DGPSpec s;
  s.id = 3;
  s.p = 3;
  s.n = 20000;
  s.N = 5000;
  s.noise_variance = 2.0;
  s.seed = 4;
  const auto d = generate(s);
  CHECK(d.train.labeled_x.rows() == 20000);
  CHECK(d.train.unlabeled_x.rows() == 5000);
  CHECK(d.test_x.rows() == 25000);
  for (Index j = 0; j < 3; ++j) {
    CHECK(std::abs(d.train.labeled_x.col(j).mean()) < 4.0 / std::sqrt(20000.0));
    CHECK(std::abs(d.train.unlabeled_x.col(j).mean()) < 4.0 / std::sqrt(5000.0));
  }
  Vector eps(s.n);
  for (Index i = 0; i < s.n; ++i)
    eps(i) = d.train.labeled_y(i) - true_mean(s, std::span(d.train.labeled_x.row(i).data(), 3));
  const double var = (eps.array() - eps.mean()).square().sum() / double(s.n - 1);
  CHECK(std::abs(var - 2.0) < 4.0 * 2.0 * std::sqrt(2.0 / double(s.n)));
  for (Index i = 0; i < 50; ++i)
    CHECK(d.test_mean(i) == true_mean(s, std::span(d.test_x.row(i).data(), 3)));

  s.n = 7;
  s.N = 3;
  const auto a = generate(s), b = generate(s);
  CHECK(a.train.labeled_x == b.train.labeled_x);
  CHECK(a.train.labeled_y == b.train.labeled_y);
  CHECK(a.train.unlabeled_x == b.train.unlabeled_x);
  CHECK(a.test_y == b.test_y);
  // the labeled rows do not depend on N
  s.N = 0;
  CHECK(generate(s).train.labeled_y == a.train.labeled_y);
}

TEST_CASE("mspe") {
  Vector y(3), c(3);
  y << 1.0, 2.0, 3.0;
  CHECK(mspe(y, y) == 0.0);
  c.setConstant(5.0);
  CHECK(mspe(c, c) == 0.0);
  c << 2.0, 2.0, 2.0;
  CHECK(mspe(c, y) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(mspe(Vector(), Vector()), DataError);

  DGPSpec s;
  s.n = 1;
  s.N = 0;
  s.test_size = 40000;
  s.seed = 2;
  const auto d = generate(s);
  CHECK(mspe(d.test_mean, d.test_y) == doctest::Approx(4.0).epsilon(0.03));
}

TEST_CASE("risk form") {
  std::mt19937_64 g(3);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 20; ++rep) {
    const Index rows = 50 + rep, M = 1 + rep % 7;
    Matrix P(rows, M);
    Vector mu(rows);
    for (Index i = 0; i < rows; ++i) {
      mu(i) = nd(g);
      for (Index m = 0; m < M; ++m) P(i, m) = nd(g);
    }
    const auto f = risk_form(P, mu);
    Vector w(M);
    for (Index m = 0; m < M; ++m) w(m) = std::abs(nd(g));
    w /= w.sum();
    double direct = 0.0;
    for (Index i = 0; i < rows; ++i) {
      double s = 0.0;
      for (Index m = 0; m < M; ++m) s += w(m) * P(i, m);
      direct += (s - mu(i)) * (s - mu(i));
    }
    direct /= double(rows);
    CHECK(std::abs(risk_on_sample(f, w) - direct) < 1e-10);
    CHECK(std::abs(risk_on_sample(w, P, mu) - direct) < 1e-10);
    const Index m0 = rep % M;
    CHECK(risk_on_sample(f, Vector::Unit(M, m0)) ==
          doctest::Approx((P.col(m0) - mu).squaredNorm() / double(rows)));
  }
  Matrix P(4, 1);
  P << 1, 2, 3, 4;
  Vector mu = P.col(0);
  CHECK(std::abs(risk_on_sample(risk_form(P, mu), Vector::Ones(1))) < 1e-12);
}

TEST_CASE("benchmark harness") {
  BenchConfig c;
  c.cells = {{1, 1, 30, 30}};
  c.families = {Family::Frank};
  c.replications = 2;
  c.seed = 9;
  c.averaging.K = 3;
  const auto r = run_benchmark(c);
  REQUIRE(r.size() == 5);
  CHECK(r[0].method == "3-CRMA");
  CHECK(r[1].method == "3-LABEL");
  for (const auto& b : r) {
    CHECK(b.mspe.size() == 2);
    CHECK(b.failures == 0);
    CHECK(b.mean == doctest::Approx((b.mspe[0] + b.mspe[1]) / 2));
  }
  // a single candidate gets weight one under every scheme
  CHECK(r[0].mspe == r[2].mspe);
  CHECK(r[0].mspe == r[3].mspe);
  CHECK(r[0].mspe == r[4].mspe);
  const auto again = run_benchmark(c);
  for (size_t k = 0; k < r.size(); ++k) CHECK(again[k].mspe == r[k].mspe);

  c.families = {Family::Gaussian, Family::Clayton};
  c.methods = {Method::SBIC, Method::EWMA};
  const auto two = run_benchmark(c);
  CHECK(two.size() == 2);
  CHECK(two[0].method == "SBIC");

  c.cells = {{1, 1, 30, 30}, {2, 1, 20, 10}};
  CHECK(run_benchmark(c).size() == 4);
  c.cells = {{7, 1, 30, 30}};
  CHECK_THROWS_AS(run_benchmark(c), ConfigError);
  CHECK(parse_method("5-crma") == Method::CRMA);
  CHECK(parse_method("EWMA") == Method::EWMA);
  CHECK_THROWS_AS(parse_method("PSSE"), ConfigError);
}

TEST_CASE("optimality and weight traces") {
  VerifyConfig v;
  v.dgp = 2;
  v.p = 1;
  v.ns = {30};
  v.N_factor = 1.0;
  v.replications = 3;
  v.families = {Family::Gaussian, Family::Clayton, Family::Frank};
  v.averaging.K = 3;
  v.seed = 5;
  const auto t = verify_optimality(v);
  REQUIRE(t.size() == 1);
  CHECK(t[0].n == 30);
  CHECK(t[0].N == 30);
  for (double r : t[0].values) CHECK(r >= 1.0 - 1e-6);

  v.families = {Family::Frank};
  const auto one = optimality_point(v, 30, 30);
  for (double r : one.values) CHECK(r == 1.0);
  v.correct_set = {Family::Frank};
  for (double x : weight_point(v, 30, 30).values) CHECK(x == 0.0);

  v.dgp = 1;
  v.families = {Family::Gaussian, Family::Clayton};
  v.correct_set = {Family::Gaussian, Family::Clayton};
  for (double x : weight_point(v, 30, 30).values) CHECK(x == doctest::Approx(0.0).epsilon(1e-20));
  v.correct_set = {Family::Gaussian};
  const auto wp = verify_weight_consistency(v);
  for (double x : wp[0].values) CHECK((x >= 0.0 && x <= 1.0));
  v.correct_set = {};
  CHECK_THROWS_AS(weight_point(v, 30, 30), ConfigError);
  v.dgp = 1;
  CHECK_THROWS_AS(verify_optimality(v), ConfigError);
}

TEST_CASE("r1 and r2") {
  TracePoint a, b;
  a.mean = 1.2;
  b.mean = 1.2;
  CHECK(compute_r1(a, b) == 1.0);
  a.mean = 1.0;
  CHECK(compute_r1(a, b) == 0.0);
  b.mean = 1.0;
  CHECK_THROWS_AS(compute_r1(a, b), NumericalError);
  a.mean = 0.02;
  b.mean = 0.04;
  CHECK(compute_r2(a, b) == doctest::Approx(0.5));
  b.mean = 0.0;
  CHECK_THROWS_AS(compute_r2(a, b), NumericalError);
}
