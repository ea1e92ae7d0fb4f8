#include <omp.h>

#include <cmath>
#include <random>

#include "doctest.h"
#include "semicop/reference.hpp"
#include "semicop/simbench.hpp"

using namespace semicop;

namespace {

struct ThreadCount {
  int saved;
  explicit ThreadCount(int t) : saved(omp_get_max_threads()) { omp_set_num_threads(t); }
  ~ThreadCount() { omp_set_num_threads(saved); }
};

}  // namespace

TEST_CASE("prepared row densities match the serial pointwise loop") {
  const int d = 4;
  CopulaFamily fams[] = {{Family::Gaussian, d}, {Family::StudentT, d}, {Family::Gumbel, d},
                         {Family::Clayton, d},  {Family::Frank, d},    {Family::Joe, d}};
  CopulaParams params[] = {{{0.3, 0.2, 0.1, 0.4, -0.1, 0.25}},
                           {{0.3, 0.2, 0.1, 0.4, -0.1, 0.25, 6.0}},
                           {{1.7}},
                           {{1.2}},
                           {{3.5}},
                           {{2.2}}};
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> uni(0.001, 0.999);
  Matrix u(6000, d);  // above the parallel threshold
  for (Index i = 0; i < u.rows(); ++i)
    for (Index j = 0; j < d; ++j) u(i, j) = uni(g);
  ThreadCount tc(3);
  for (int k = 0; k < 6; ++k) {
    const auto ref = reference::row_log_densities(fams[k], params[k], u);
    const PreparedSample s(u);
    std::vector<double> fast(static_cast<size_t>(u.rows()));
    bind(fams[k], params[k])->row_log_densities(s, fast);
    double worst = 0.0;
    for (size_t i = 0; i < fast.size(); ++i)
      worst = std::max(worst, std::abs(fast[i] - ref[i]) / std::max(1.0, std::abs(ref[i])));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("parallel batch prediction and cross-fit equal their serial references") {
  DGPSpec s;
  s.id = 2;
  s.p = 2;
  s.n = 40;
  s.N = 40;
  s.seed = 3;
  const auto d = generate(s);
  const std::vector<CopulaFamily> fams{{Family::Gaussian, 3}, {Family::Gumbel, 3}, {Family::Frank, 3}};
  FitOptions opts;
  opts.restarts = 1;
  const auto plan = make_cv_plan(40, 40, 4, 2);
  ThreadCount tc(4);
  const auto par = cross_fit(d.train, fams, plan, opts);
  const auto ser = reference::cross_fit(d.train, fams, plan, opts);
  CHECK(par.mu_tilde == ser.mu_tilde);

  const auto set = fit_candidate_set(d.train, fams, opts);
  for (const auto& r : set.regressors) CHECK(predict_candidate_batch(r, d.test_x) == reference::predict_batch(r, d.test_x));
}

TEST_CASE("thread count does not change benchmark results") {
  BenchConfig c;
  c.cells = {{3, 1, 30, 30}};
  c.families = {Family::Gaussian, Family::Clayton};
  c.replications = 4;
  c.averaging.K = 3;
  std::vector<BenchResult> one, four;
  {
    ThreadCount tc(1);
    one = run_benchmark(c);
  }
  {
    ThreadCount tc(4);
    four = run_benchmark(c);
  }
  REQUIRE(one.size() == four.size());
  for (size_t k = 0; k < one.size(); ++k) CHECK(one[k].mspe == four[k].mspe);
}
