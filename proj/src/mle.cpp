#include "semicop/mle.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "semicop/error.hpp"
#include "semicop/nelder_mead.hpp"
#include "semicop/rng.hpp"
#include "semicop/stats.hpp"

namespace semicop {

namespace {

constexpr Index kTauRows = 1000;
constexpr double kFrozenWeight = 1e-6;

bool needs_t_table(const CopulaFamily& f) {
  return f.tag == Family::StudentT || f.tag == Family::Mixture;
}

double sum_rows(const BoundCopula& c, const PreparedSample& s) {
  std::vector<double> rows(static_cast<size_t>(s.rows()));
  c.row_log_densities(s, rows);
  double total = 0.0;
  for (double r : rows) total += r;
  return total;
}

// Mean tau over pairs and the tau-implied correlation matrix.
struct TauSummary {
  double mean_tau = 0.0;
  Matrix corr;
};

TauSummary summarize_tau(const Matrix& u) {
  TauSummary t;
  const Matrix tau = kendall_matrix(u, kTauRows);
  const Index d = tau.rows();
  double s = 0.0;
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < i; ++j) s += tau(i, j);
  t.mean_tau = s / static_cast<double>(d * (d - 1) / 2);
  Matrix R = (tau.array() * (std::numbers::pi / 2.0)).sin().matrix();
  R.diagonal().setOnes();
  // shrink toward the identity until comfortably positive definite
  for (double lam = 0.0; lam <= 1.0; lam += 0.05) {
    Matrix S = (1.0 - lam) * R + lam * Matrix::Identity(d, d);
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() == Eigen::Success && Matrix(llt.matrixL()).diagonal().minCoeff() > 0.05) {
      t.corr = S;
      return t;
    }
  }
  t.corr = Matrix::Identity(d, d);
  return t;
}

std::vector<double> corr_block(const CopulaFamily& f, const Matrix& R) {
  if (f.corr == CorrStructure::Exchangeable) {
    const Index d = R.rows();
    double s = 0.0;
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < i; ++j) s += R(i, j);
    const double lo = -1.0 / static_cast<double>(d - 1);
    const double rho = std::clamp(s / static_cast<double>(d * (d - 1) / 2), lo + 0.05, 0.95);
    return {rho};
  }
  return correlation_entries(R);
}

std::vector<double> constant_block(const CopulaFamily& f, double rho) {
  if (f.corr == CorrStructure::Exchangeable) return {rho};
  return std::vector<double>(static_cast<size_t>(f.dim * (f.dim - 1) / 2), rho);
}

enum class StartKind { Moments, NearIndependence, Moderate };

CopulaParams base_start(const CopulaFamily& f, StartKind kind, const TauSummary& tau) {
  const double mt = tau.mean_tau;
  switch (f.tag) {
    case Family::Gaussian:
      if (kind == StartKind::Moments) return {corr_block(f, tau.corr)};
      return {constant_block(f, kind == StartKind::Moderate ? 0.3 : 0.0)};
    case Family::StudentT: {
      CopulaParams p;
      if (kind == StartKind::Moments) {
        p.natural = corr_block(f, tau.corr);
        p.natural.push_back(10.0);
      } else {
        p.natural = constant_block(f, kind == StartKind::Moderate ? 0.3 : 0.0);
        p.natural.push_back(kind == StartKind::Moderate ? 5.0 : 30.0);
      }
      return p;
    }
    case Family::Gumbel:
      if (kind == StartKind::Moments) return {{theta_from_tau(f.tag, mt)}};
      return {{kind == StartKind::Moderate ? 2.0 : 1.01}};
    case Family::Clayton:
      if (kind == StartKind::Moments) return {{theta_from_tau(f.tag, mt)}};
      return {{kind == StartKind::Moderate ? 1.0 : 0.01}};
    case Family::Frank:
      if (kind == StartKind::Moments) {
        double th = theta_from_tau(f.tag, mt);
        if (f.dim > 2) th = std::max(th, 0.1);
        return {{th}};
      }
      return {{kind == StartKind::Moderate ? 2.0 : 0.1}};
    case Family::Joe:
      if (kind == StartKind::Moments) return {{theta_from_tau(f.tag, mt)}};
      return {{kind == StartKind::Moderate ? 1.5 : 1.01}};
    case Family::Mixture:
      break;
  }
  throw DomainError("no start for a mixture here");
}

// Pulls a point that saturated onto the domain boundary back inside, so it
// has a finite unconstrained image.
CopulaParams nudge_interior(const CopulaFamily& f, CopulaParams p) {
  for (const auto& b : domain_spec(f).blocks) {
    auto nat = std::span(p.natural).subspan(b.natural_offset, b.natural_size);
    switch (b.kind) {
      case ParamBlock::Kind::Correlation:
        for (double& r : nat) r *= 1.0 - 1e-9;
        break;
      case ParamBlock::Kind::DegreesOfFreedom:
        nat[0] = std::clamp(nat[0], kMinDof + 1e-9, kMaxDof - 1e-9);
        break;
      case ParamBlock::Kind::ThetaAboveOne:
        nat[0] = std::max(nat[0], 1.0 + 1e-12);
        break;
      case ParamBlock::Kind::ThetaPositive:
        nat[0] = std::max(nat[0], 1e-300);
        break;
      case ParamBlock::Kind::ThetaNonzero:
        break;
      case ParamBlock::Kind::Simplex: {
        double s = 0.0;
        for (double& w : nat) s += (w = std::max(w, 1e-300));
        for (double& w : nat) w /= s;
        break;
      }
    }
  }
  return p;
}

CopulaParams mixture_start(const CopulaFamily& f, std::span<const CopulaParams> comps) {
  const std::array<double, 6> w = {1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6};
  return make_mixture_params(f, comps, w);
}

CopulaParams default_start(const CopulaFamily& f, StartKind kind, const TauSummary& tau) {
  if (f.tag != Family::Mixture) return base_start(f, kind, tau);
  std::vector<CopulaParams> comps;
  for (size_t k = 0; k < 6; ++k) comps.push_back(base_start(mixture_component(f, k), kind, tau));
  return mixture_start(f, comps);
}

struct Problem {
  const CopulaFamily& f;
  const PreparedSample& s;
  double objective(std::span<const double> v) const {
    try {
      const auto p = from_unconstrained(f, v);
      const double ll = sum_rows(*bind(f, p), s);
      return std::isfinite(ll) ? -ll / static_cast<double>(s.rows())
                               : std::numeric_limits<double>::infinity();
    } catch (const DomainError&) {
      return std::numeric_limits<double>::infinity();
    }
  }
};

double gradient_norm(const Problem& prob, std::span<const double> v) {
  std::vector<double> x(v.begin(), v.end());
  double g = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(v[i]));
    x[i] = v[i] + h;
    const double fp = prob.objective(x);
    x[i] = v[i] - h;
    const double fm = prob.objective(x);
    x[i] = v[i];
    const double gi = (fp - fm) / (2.0 * h);
    if (!std::isfinite(gi)) return std::numeric_limits<double>::infinity();
    g = std::max(g, std::abs(gi));
  }
  return g;
}

// Free-coordinate mask that freezes parameter blocks of negligible mixture components.
std::vector<char> frozen_mask(const CopulaFamily& f, const CopulaParams& p) {
  const auto ranges = mixture_component_ranges(f);
  std::vector<char> mask(free_param_count(f), 1);
  bool any = false;
  for (size_t k = 0; k < 6; ++k) {
    if (p.natural[p.natural.size() - 6 + k] >= kFrozenWeight) continue;
    any = true;
    for (size_t i = ranges[k].free_begin; i < ranges[k].free_end; ++i) mask[i] = 0;
  }
  if (!any) mask.clear();
  return mask;
}

FittedCandidate fit_prepared(const CopulaFamily& f, const PseudoObservations& u, const PreparedSample& ps,
                             const FitOptions& opts, std::span<const CopulaParams> extra_starts,
                             const TauSummary* tau_cache, bool skip_moments = false) {
  if (opts.max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (!(opts.tolerance > 0.0) || !(opts.gradient_tolerance > 0.0))
    throw ConfigError("tolerances must be positive");
  const std::size_t q = free_param_count(f);
  const Index n = u.u.rows();
  if (u.u.cols() != f.dim)
    throw DataError("pseudo-observations have " + std::to_string(u.u.cols()) + " columns, copula has " +
                    std::to_string(f.dim));
  if (n < static_cast<Index>(q) + 1)
    throw DataError(std::string(family_name(f.tag)) + " needs at least " + std::to_string(q + 1) +
                    " labeled rows, got " + std::to_string(n));

  std::vector<std::vector<double>> starts;
  for (const auto& p : extra_starts) {
    try {
      starts.push_back(to_unconstrained(f, p));
    } catch (const DomainError&) {
      try {
        starts.push_back(to_unconstrained(f, nudge_interior(f, p)));
      } catch (const DomainError&) {
      }
    }
  }
  if (opts.restarts > 0) {
    TauSummary local;
    if (!tau_cache) {
      local = summarize_tau(u.u);
      tau_cache = &local;
    }
    const StartKind kinds[] = {StartKind::Moments, StartKind::NearIndependence, StartKind::Moderate};
    std::vector<std::vector<double>> defaults;
    // a mixture seeded by base-family optima uses that seed in place of the moment start
    const bool seeded = skip_moments && !starts.empty();
    const int first = seeded ? 1 : 0;
    for (int r = first; r < std::min(opts.restarts, 3); ++r)
      defaults.push_back(to_unconstrained(f, default_start(f, kinds[r], *tau_cache)));
    for (int r = 3; r < opts.restarts; ++r) {
      const auto& anchor = seeded ? starts.front() : defaults.front();
      Engine g(derive_seed(opts.seed, static_cast<std::uint64_t>(r)));
      auto v = anchor;
      for (double& x : v) {
        const double z = std::sqrt(-2.0 * std::log(open_uniform(g))) *
                         std::cos(2.0 * std::numbers::pi * open_uniform(g));
        x += 0.5 * z;
      }
      defaults.push_back(v);
    }
    starts.insert(starts.end(), defaults.begin(), defaults.end());
  }
  if (starts.empty()) throw NumericalError("no valid starting point for " + std::string(family_name(f.tag)));

  const Problem prob{f, ps};
  NelderMeadOptions nm;
  nm.max_iterations = opts.max_iterations;
  nm.tolerance = opts.tolerance;

  const double inf = std::numeric_limits<double>::infinity();
  double best_value = inf;
  std::vector<double> best_x;
  bool best_tol = false;
  int total_iterations = 0;
  for (const auto& v0 : starts) {
    const double f0 = prob.objective(v0);
    if (!std::isfinite(f0)) continue;
    auto r = nelder_mead([&](std::span<const double> v) { return prob.objective(v); }, v0, nm);
    total_iterations += r.iterations;
    if (f.tag == Family::Mixture) {
      const auto mask = frozen_mask(f, from_unconstrained(f, r.x));
      if (!mask.empty()) {
        auto r2 = nelder_mead([&](std::span<const double> v) { return prob.objective(v); }, r.x, nm, mask);
        total_iterations += r2.iterations;
        if (r2.value <= r.value) r = std::move(r2);
      }
    }
    if (r.value < best_value) {
      best_value = r.value;
      best_x = r.x;
      best_tol = r.tolerance_reached;
    }
  }
  if (best_x.empty())
    throw NumericalError("every start of the " + std::string(family_name(f.tag)) +
                         " fit gave a non-finite likelihood");

  FittedCandidate out;
  out.family = f;
  out.theta_hat = from_unconstrained(f, best_x);
  out.q = q;
  out.iterations = total_iterations;
  out.loglik = pseudo_loglik(f, out.theta_hat, u);
  if (!std::isfinite(out.loglik))
    throw NumericalError("non-finite log-likelihood at the " + std::string(family_name(f.tag)) + " optimum");
  out.converged = best_tol && gradient_norm(prob, best_x) < 10.0 * opts.gradient_tolerance;
  return out;
}

}  // namespace

double pseudo_loglik(const BoundCopula& c, const PreparedSample& s) { return sum_rows(c, s); }

double pseudo_loglik(const CopulaFamily& f, const CopulaParams& p, const PseudoObservations& u) {
  if (u.u.cols() != f.dim) throw DataError("pseudo-observation width does not match the copula");
  if (u.u.rows() == 0) return 0.0;
  const PreparedSample s(u.u);
  return sum_rows(*bind(f, p), s);
}

FittedCandidate fit_candidate(const CopulaFamily& f, const PseudoObservations& u, const FitOptions& opts,
                              std::span<const CopulaParams> extra_starts) {
  const PreparedSample ps(u.u, needs_t_table(f));
  if (f.tag == Family::Mixture && opts.restarts > 0) {
    // the base-family optima seed the mixture
    const TauSummary tau = summarize_tau(u.u);
    std::vector<CopulaParams> comps;
    for (size_t k = 0; k < 6; ++k) {
      FitOptions o = opts;
      o.seed = derive_seed(opts.seed, 100 + k);
      comps.push_back(fit_prepared(mixture_component(f, k), u, ps, o, {}, &tau).theta_hat);
    }
    std::vector<CopulaParams> starts(extra_starts.begin(), extra_starts.end());
    starts.insert(starts.begin(), mixture_start(f, comps));
    return fit_prepared(f, u, ps, opts, starts, &tau, true);
  }
  return fit_prepared(f, u, ps, opts, extra_starts, nullptr);
}

std::vector<FittedCandidate> fit_candidates(std::span<const CopulaFamily> families,
                                            const PseudoObservations& u, const FitOptions& opts) {
  bool t_table = false;
  for (const auto& f : families) t_table = t_table || needs_t_table(f);
  const PreparedSample ps(u.u, t_table);
  const TauSummary tau = summarize_tau(u.u);

  std::vector<FittedCandidate> out(families.size());
  std::vector<char> done(families.size(), 0);
  for (size_t m = 0; m < families.size(); ++m) {
    if (families[m].tag == Family::Mixture) continue;
    FitOptions o = opts;
    o.seed = derive_seed(opts.seed, m);
    out[m] = fit_prepared(families[m], u, ps, o, {}, &tau);
    done[m] = 1;
  }
  for (size_t m = 0; m < families.size(); ++m) {
    if (done[m]) continue;
    const auto& f = families[m];
    std::vector<CopulaParams> comps;
    for (size_t k = 0; k < 6; ++k) {
      const auto cf = mixture_component(f, k);
      const CopulaParams* found = nullptr;
      for (size_t j = 0; j < families.size(); ++j)
        if (done[j] && families[j] == cf) found = &out[j].theta_hat;
      if (found) {
        comps.push_back(*found);
      } else {
        FitOptions o = opts;
        o.seed = derive_seed(opts.seed, 100 + k);
        comps.push_back(fit_prepared(cf, u, ps, o, {}, &tau).theta_hat);
      }
    }
    FitOptions o = opts;
    o.seed = derive_seed(opts.seed, m);
    const std::vector<CopulaParams> starts{mixture_start(f, comps)};
    out[m] = fit_prepared(f, u, ps, o, starts, &tau, true);
  }
  return out;
}

double bic(const FittedCandidate& c, Index n) {
  return -2.0 * c.loglik + std::log(static_cast<double>(n)) * static_cast<double>(c.q);
}

double kendall_tau_of(Family tag, double theta) {
  switch (tag) {
    case Family::Gumbel: return 1.0 - 1.0 / theta;
    case Family::Clayton: return theta / (theta + 2.0);
    case Family::Frank: {
      if (std::abs(theta) < 1e-6) return theta / 9.0;
      const double a = std::abs(theta);
      auto integrand = [](double t) { return t < 1e-12 ? 1.0 : t / std::expm1(t); };
      const double d1 = boost::math::quadrature::gauss<double, 30>::integrate(integrand, 0.0, a) / a;
      const double tau = 1.0 - 4.0 / a * (1.0 - d1);
      return theta > 0 ? tau : -tau;
    }
    case Family::Joe: {
      double s = 0.0;
      for (int k = 1; k <= 5000; ++k)
        s += 1.0 / (k * (theta * k + 2.0) * (theta * (k - 1) + 2.0));
      return 1.0 - 4.0 * s;
    }
    default:
      throw DomainError("no closed Kendall's tau for this family");
  }
}

double theta_from_tau(Family tag, double tau) {
  switch (tag) {
    case Family::Gumbel: return tau <= 0.0 ? 1.01 : std::min(1.0 / (1.0 - std::min(tau, 0.95)), 20.0);
    case Family::Clayton: return tau <= 0.005 ? 0.01 : 2.0 * std::min(tau, 0.95) / (1.0 - std::min(tau, 0.95));
    case Family::Frank:
    case Family::Joe: {
      double lo = tag == Family::Joe ? 1.0 : -30.0, hi = 30.0;
      if (tau <= kendall_tau_of(tag, lo + 1e-3)) return tag == Family::Joe ? 1.01 : lo;
      if (tau >= kendall_tau_of(tag, hi)) return hi;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (kendall_tau_of(tag, mid) < tau ? lo : hi) = mid;
      }
      const double th = 0.5 * (lo + hi);
      if (tag == Family::Frank && std::abs(th) < 1e-3) return 1e-3;
      return tag == Family::Joe ? std::max(th, 1.01) : th;
    }
    default:
      throw DomainError("no tau inversion for this family");
  }
}

}  // namespace semicop
