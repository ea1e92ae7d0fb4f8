#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "copula_internal.hpp"
#include "semicop/error.hpp"
#include "semicop/rng.hpp"

namespace semicop {

namespace {

double clamp_open(double u) {
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(u, lo, hi);
}

double std_normal(Engine& g) { return standard_normal(g); }

double exp1(Engine& g) { return -std::log(open_uniform(g)); }

// Marsaglia-Tsang Gamma(shape, 1).
double gamma_draw(double shape, Engine& g) {
  if (shape < 1.0) {
    const double u = open_uniform(g);
    return gamma_draw(shape + 1.0, g) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = std_normal(g);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = open_uniform(g);
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

// Positive stable with Laplace transform exp(-t^alpha) (Kanter / Chambers-Mallows-Stuck).
double positive_stable(double alpha, Engine& g) {
  if (alpha >= 1.0) return 1.0;
  const double U = std::numbers::pi * open_uniform(g);
  const double W = exp1(g);
  const double a = std::sin(alpha * U) / std::pow(std::sin(U), 1.0 / alpha);
  const double b = std::pow(std::sin((1.0 - alpha) * U) / W, (1.0 - alpha) / alpha);
  return a * b;
}

// Logarithmic series distribution with p = 1 - exp(-theta) (Kemp's LK algorithm).
double logarithmic(double theta, Engine& g) {
  const double p = -std::expm1(-theta);
  const double u2 = open_uniform(g);
  if (u2 > p) return 1.0;
  const double q = -std::expm1(-theta * open_uniform(g));
  if (u2 < q * q) return std::floor(1.0 + std::log(u2) / std::log(q));
  return u2 > q ? 1.0 : 2.0;
}

// Sibuya(alpha): P(V > k) = prod_{j<=k} (1 - alpha/j).
double sibuya(double alpha, Engine& g) {
  if (alpha >= 1.0) return 1.0;
  const double u = open_uniform(g);
  double s = 1.0;
  for (int k = 1; k <= 1000; ++k) {
    s *= (k - alpha) / k;
    if (s < u) return k;
  }
  const double lg = std::lgamma(1.0 - alpha);
  auto log_surv = [&](double k) { return std::lgamma(k + 1.0 - alpha) - std::lgamma(k + 1.0) - lg; };
  const double lu = std::log(u);
  double lo = 1000.0, hi = 2000.0;
  while (log_surv(hi) >= lu && hi < 1e18) hi *= 2.0;
  if (log_surv(hi) >= lu) return hi;
  while (hi - lo > 1.0) {
    const double mid = std::floor(0.5 * (lo + hi));
    (log_surv(mid) < lu ? hi : lo) = mid;
  }
  return hi;
}

void sample_elliptical(const CopulaFamily& f, const CopulaParams& p, Engine& g, Matrix& out) {
  const bool is_t = f.tag == Family::StudentT;
  const auto block = is_t ? std::span(p.natural).first(p.natural.size() - 1) : std::span(p.natural);
  const Matrix R = correlation_matrix(f.dim, f.corr, block);
  const Matrix L = Eigen::LLT<Matrix>(R).matrixL();
  const double nu = is_t ? p.natural.back() : 0.0;
  Vector z(f.dim), x(f.dim);
  for (Index i = 0; i < out.rows(); ++i) {
    for (int j = 0; j < f.dim; ++j) z(j) = std_normal(g);
    x = L * z;
    if (is_t) {
      const double w = std::sqrt(2.0 * gamma_draw(0.5 * nu, g) / nu);
      for (int j = 0; j < f.dim; ++j) out(i, j) = clamp_open(t_cdf(x(j) / w, nu));
    } else {
      for (int j = 0; j < f.dim; ++j) out(i, j) = clamp_open(normal_cdf(x(j)));
    }
  }
}

// Conditional inversion for the bivariate Frank copula (any theta != 0).
void sample_frank_bivariate(double theta, Engine& g, Matrix& out) {
  for (Index i = 0; i < out.rows(); ++i) {
    const double u = open_uniform(g);
    const double w = open_uniform(g);
    const double e = std::exp(-theta * u);
    const double v = -std::log1p(w * -std::expm1(-theta) / (w * (e - 1.0) - e)) / theta;
    out(i, 0) = clamp_open(u);
    out(i, 1) = clamp_open(v);
  }
}

void sample_archimedean(const CopulaFamily& f, double theta, Engine& g, Matrix& out) {
  const Family tag = f.tag;
  if ((tag == Family::Clayton || tag == Family::Frank) && std::abs(theta) < kIndependenceBand) {
    for (Index i = 0; i < out.rows(); ++i)
      for (int j = 0; j < f.dim; ++j) out(i, j) = open_uniform(g);
    return;
  }
  if (tag == Family::Frank && theta < 0.0) {
    sample_frank_bivariate(theta, g, out);
    return;
  }
  const double alpha = 1.0 / theta;
  const double delta = -std::expm1(-theta);
  for (Index i = 0; i < out.rows(); ++i) {
    double V = 1.0;
    switch (tag) {
      case Family::Clayton: V = gamma_draw(alpha, g); break;
      case Family::Gumbel: V = positive_stable(alpha, g); break;
      case Family::Frank: V = logarithmic(theta, g); break;
      case Family::Joe: V = sibuya(alpha, g); break;
      default: break;
    }
    for (int j = 0; j < f.dim; ++j) {
      const double t = exp1(g) / V;
      double u = 0.0;
      switch (tag) {
        case Family::Clayton: u = std::exp(-alpha * std::log1p(t)); break;
        case Family::Gumbel: u = std::exp(-std::pow(t, alpha)); break;
        case Family::Frank: u = -std::log1p(-delta * std::exp(-t)) / theta; break;
        case Family::Joe: u = -std::expm1(alpha * std::log(-std::expm1(-t))); break;
        default: break;
      }
      out(i, j) = clamp_open(u);
    }
  }
}

}  // namespace

Matrix sample(const CopulaFamily& f, const CopulaParams& p, Index count, std::uint64_t seed) {
  check_domain(f, p);
  if (count < 0) throw DomainError("sample count must be nonnegative");
  Matrix out(count, f.dim);
  Engine g(seed);
  switch (f.tag) {
    case Family::Gaussian:
    case Family::StudentT:
      sample_elliptical(f, p, g, out);
      break;
    case Family::Gumbel:
    case Family::Clayton:
    case Family::Frank:
    case Family::Joe:
      sample_archimedean(f, p.natural[0], g, out);
      break;
    case Family::Mixture: {
      const auto& nat = p.natural;
      std::vector<int> comp(static_cast<size_t>(count));
      std::array<Index, 6> counts{};
      for (Index i = 0; i < count; ++i) {
        double u = open_uniform(g), acc = 0.0;
        int k = 0;
        for (; k < 5; ++k) {
          acc += nat[nat.size() - 6 + static_cast<size_t>(k)];
          if (u < acc && nat[nat.size() - 6 + static_cast<size_t>(k)] > 0.0) break;
        }
        while (nat[nat.size() - 6 + static_cast<size_t>(k)] <= 0.0) --k;
        comp[static_cast<size_t>(i)] = k;
        ++counts[static_cast<size_t>(k)];
      }
      std::array<Matrix, 6> draws;
      for (size_t k = 0; k < 6; ++k)
        if (counts[k] > 0)
          draws[k] = sample(mixture_component(f, k), mixture_component_params(f, p, k), counts[k],
                            derive_seed(seed, k + 1));
      std::array<Index, 6> next{};
      for (Index i = 0; i < count; ++i) {
        const auto k = static_cast<size_t>(comp[static_cast<size_t>(i)]);
        out.row(i) = draws[k].row(next[k]++);
      }
      break;
    }
  }
  return out;
}

}  // namespace semicop
