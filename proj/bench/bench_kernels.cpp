// Serial reference kernels against their OpenMP counterparts.
#include <omp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <functional>

#include "semicop/reference.hpp"
#include "semicop/simbench.hpp"

using namespace semicop;

namespace {

double seconds(const std::function<void()>& fn, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-28s serial %9.4f s   parallel %9.4f s   speedup %5.2fx\n", name, serial, parallel,
              serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP kernel timings"};
  int threads = omp_get_max_threads();
  int reps = 3;
  Index rows = 200000;
  app.add_option("--threads", threads, "OpenMP threads for the parallel runs");
  app.add_option("--reps", reps, "timing repetitions (best is kept)");
  app.add_option("--rows", rows, "rows for the density kernel");
  CLI11_PARSE(app, argc, argv);
  omp_set_num_threads(threads);
  std::printf("threads %d\n", threads);

  // row log-densities, d = 5
  {
    DGPSpec s;
    s.n = rows;
    s.N = 0;
    s.test_size = 0;
    const auto d = generate(s);
    const auto u = fit_margins(d.train).pseudo_observations(d.train).u;
    const CopulaFamily f{Family::Gumbel, 5};
    const CopulaParams p{{1.6}};
    const PreparedSample ps(u);
    std::vector<double> out(static_cast<size_t>(rows));
    const auto c = bind(f, p);
    report("gumbel row densities", seconds([&] { reference::row_log_densities(f, p, u); }, reps),
           seconds([&] { c->row_log_densities(ps, out); }, reps));
  }

  DGPSpec s;
  s.id = 2;
  s.n = 200;
  s.N = 200;
  s.test_size = 20000;
  s.seed = 1;
  const auto d = generate(s);
  FitOptions opts;
  opts.restarts = 1;
  const auto fams = default_candidates(5);
  const auto set = fit_candidate_set(d.train, fams, opts);

  report("batch prediction (mixture)", seconds([&] { reference::predict_batch(set.regressors.back(), d.test_x); }, reps),
         seconds([&] { predict_candidate_batch(set.regressors.back(), d.test_x); }, reps));

  const auto plan = make_cv_plan(200, 200, 5, 1);
  const std::vector<CopulaFamily> base(fams.begin(), fams.end() - 1);
  report("cross-fit, 6 base families", seconds([&] { reference::cross_fit(d.train, base, plan, opts); }, 1),
         seconds([&] { cross_fit(d.train, base, plan, opts); }, 1));
  return 0;
}
