#include "semicop/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace semicop {

NelderMeadResult nelder_mead(const Objective& f, std::span<const double> x0,
                             const NelderMeadOptions& opts, std::span<const char> active) {
  std::vector<size_t> free_idx;
  for (size_t i = 0; i < x0.size(); ++i)
    if (active.empty() || active[i]) free_idx.push_back(i);
  const size_t n = free_idx.size();

  NelderMeadResult res;
  std::vector<double> full(x0.begin(), x0.end());
  auto eval = [&](const std::vector<double>& y) {
    for (size_t k = 0; k < n; ++k) full[free_idx[k]] = y[k];
    ++res.evaluations;
    const double v = f(full);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<double> start(n);
  for (size_t k = 0; k < n; ++k) start[k] = x0[free_idx[k]];
  if (n == 0) {
    res.x.assign(x0.begin(), x0.end());
    res.value = eval(start);
    res.tolerance_reached = true;
    return res;
  }

  const double dn = static_cast<double>(n);
  const double alpha = 1.0;
  const double beta = 1.0 + 2.0 / dn;
  const double gamma = 0.75 - 1.0 / (2.0 * dn);
  const double delta = n > 1 ? 1.0 - 1.0 / dn : 0.5;

  std::vector<std::vector<double>> pts(n + 1, start);
  std::vector<double> vals(n + 1);
  for (size_t k = 0; k < n; ++k) pts[k + 1][k] += opts.initial_step;
  for (size_t k = 0; k <= n; ++k) vals[k] = eval(pts[k]);

  std::vector<size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  auto along = [&](double t, std::vector<double>& out) {
    const auto& worst = pts[order[n]];
    for (size_t k = 0; k < n; ++k) out[k] = centroid[k] + t * (centroid[k] - worst[k]);
  };

  for (;;) {
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return vals[a] < vals[b]; });
    const double fb = vals[order[0]], fw = vals[order[n]];
    if (std::isfinite(fw) && fw - fb <= opts.tolerance * (std::abs(fb) + opts.tolerance)) {
      res.tolerance_reached = true;
      break;
    }
    if (res.iterations >= opts.max_iterations) break;
    ++res.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (size_t r = 0; r < n; ++r)
      for (size_t k = 0; k < n; ++k) centroid[k] += pts[order[r]][k];
    for (double& c : centroid) c /= dn;

    const size_t w = order[n];
    const double fs = vals[order[n - 1]];
    along(alpha, xr);
    const double fr = eval(xr);
    if (fr < fb) {
      along(alpha * beta, xe);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[w] = xe;
        vals[w] = fe;
      } else {
        pts[w] = xr;
        vals[w] = fr;
      }
      continue;
    }
    if (fr < fs) {
      pts[w] = xr;
      vals[w] = fr;
      continue;
    }
    if (fr < fw) {
      along(alpha * gamma, xc);
      const double fc = eval(xc);
      if (fc <= fr) {
        pts[w] = xc;
        vals[w] = fc;
        continue;
      }
    } else {
      along(-gamma, xc);
      const double fc = eval(xc);
      if (fc < fw) {
        pts[w] = xc;
        vals[w] = fc;
        continue;
      }
    }
    // shrink toward the best vertex
    const auto& best = pts[order[0]];
    for (size_t r = 1; r <= n; ++r) {
      auto& p = pts[order[r]];
      for (size_t k = 0; k < n; ++k) p[k] = best[k] + delta * (p[k] - best[k]);
      vals[order[r]] = eval(p);
    }
  }

  const size_t b = order[0];
  res.x.assign(x0.begin(), x0.end());
  for (size_t k = 0; k < n; ++k) res.x[free_idx[k]] = pts[b][k];
  res.value = vals[b];
  return res;
}

}  // namespace semicop
