#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "copula_internal.hpp"
#include "semicop/error.hpp"

namespace semicop {

namespace {

using detail::Archimedean;
using detail::EllipticalCore;

double grid_value(Index k, Index G) { return static_cast<double>(k) / static_cast<double>(G + 1); }

// Table of f(k/(G+1)) for k = 1..G (stored at k-1), using f(1-u) = -f(u) for odd quantiles.
template <class F>
std::vector<double> odd_grid_table(Index G, F f) {
  std::vector<double> t(static_cast<size_t>(G));
  for (Index k = 1; k <= G; ++k) {
    const Index mirror = G + 1 - k;
    if (mirror < k) {
      t[static_cast<size_t>(k - 1)] = -t[static_cast<size_t>(mirror - 1)];
    } else if (mirror == k) {
      t[static_cast<size_t>(k - 1)] = 0.0;
    } else {
      t[static_cast<size_t>(k - 1)] = f(grid_value(k, G));
    }
  }
  return t;
}

class KernelBase : public ConditionalKernel {
 public:
  KernelBase(int dim, Index n, Index G) : p_(dim - 1), n_(n), G_(G) {}
  Index size() const override { return n_; }

 protected:
  void check(std::span<const Index> counts, std::span<double> out) const {
    if (static_cast<int>(counts.size()) != p_)
      throw DomainError("conditional kernel: expected " + std::to_string(p_) + " covariates");
    if (static_cast<Index>(out.size()) != n_) throw DomainError("conditional kernel: output size");
    for (Index c : counts)
      if (c < 1 || c > G_) throw DomainError("conditional kernel: grid index out of range");
  }
  int p_;
  Index n_;
  Index G_;
};

class GaussianKernel final : public KernelBase {
 public:
  GaussianKernel(const CopulaFamily& f, const CopulaParams& p, std::span<const double> u0, Index G)
      : KernelBase(f.dim, static_cast<Index>(u0.size()), G),
        core_(EllipticalCore::make(f.dim, f.corr, p.natural)) {
    zgrid_ = odd_grid_table(G, [](double u) { return normal_quantile(u); });
    const double p00 = core_.precision_minus_i(0, 0);
    z0_.resize(u0.size());
    a_.resize(u0.size());
    for (size_t i = 0; i < u0.size(); ++i) {
      z0_[i] = normal_quantile(u0[i]);
      a_[i] = -0.5 * core_.logdet - 0.5 * p00 * z0_[i] * z0_[i];
    }
  }

  void log_weights(std::span<const Index> counts, std::span<double> out) const override {
    check(counts, out);
    double z[16];
    z[0] = 0.0;
    for (int j = 0; j < p_; ++j) z[j + 1] = zgrid_[static_cast<size_t>(counts[static_cast<size_t>(j)] - 1)];
    double b = 0.0;
    for (int j = 1; j <= p_; ++j) b += core_.precision_minus_i(0, j) * z[j];
    const double cx = core_.quad_minus_id(z);
    for (size_t i = 0; i < out.size(); ++i) out[i] = a_[i] - z0_[i] * b - 0.5 * cx;
  }

 private:
  EllipticalCore core_;
  std::vector<double> zgrid_, z0_, a_;
};

class StudentTKernel final : public KernelBase {
 public:
  StudentTKernel(const CopulaFamily& f, const CopulaParams& p, std::span<const double> u0, Index G)
      : KernelBase(f.dim, static_cast<Index>(u0.size()), G),
        core_(EllipticalCore::make(f.dim, f.corr, std::span(p.natural).first(p.natural.size() - 1))),
        nu_(p.natural.back()) {
    xgrid_ = odd_grid_table(G, [this](double u) { return t_quantile(u, nu_); });
    lgrid_.resize(xgrid_.size());
    for (size_t k = 0; k < xgrid_.size(); ++k) lgrid_[k] = std::log1p(xgrid_[k] * xgrid_[k] / nu_);
    const double c = detail::t_log_constant(nu_, f.dim, core_.logdet);
    x0_.resize(u0.size());
    a_.resize(u0.size());
    q0_.resize(u0.size());
    for (size_t i = 0; i < u0.size(); ++i) {
      x0_[i] = t_quantile(u0[i], nu_);
      a_[i] = c + 0.5 * (nu_ + 1.0) * std::log1p(x0_[i] * x0_[i] / nu_);
      q0_[i] = core_.precision(0, 0) * x0_[i] * x0_[i];
    }
  }

  void log_weights(std::span<const Index> counts, std::span<double> out) const override {
    check(counts, out);
    double x[16];
    x[0] = 0.0;
    double lm = 0.0;
    for (int j = 0; j < p_; ++j) {
      const auto k = static_cast<size_t>(counts[static_cast<size_t>(j)] - 1);
      x[j + 1] = xgrid_[k];
      lm += lgrid_[k];
    }
    double b = 0.0;
    for (int j = 1; j <= p_; ++j) b += core_.precision(0, j) * x[j];
    const double cx = core_.quad(x);
    const double shared = 0.5 * (nu_ + 1.0) * lm;
    const double e = 0.5 * (nu_ + static_cast<double>(p_ + 1));
    for (size_t i = 0; i < out.size(); ++i)
      out[i] = a_[i] + shared - e * std::log1p((q0_[i] + 2.0 * x0_[i] * b + cx) / nu_);
  }

 private:
  EllipticalCore core_;
  double nu_;
  std::vector<double> xgrid_, lgrid_, x0_, a_, q0_;
};

class ArchimedeanKernel final : public KernelBase {
 public:
  ArchimedeanKernel(const CopulaFamily& f, const CopulaParams& p, std::span<const double> u0, Index G)
      : KernelBase(f.dim, static_cast<Index>(u0.size()), G), gen_(f.tag, p.natural[0], f.dim) {
    if (gen_.independent()) return;
    psi_grid_.resize(static_cast<size_t>(G));
    lpsi_grid_.resize(static_cast<size_t>(G));
    lp_grid_.resize(static_cast<size_t>(G));
    for (Index k = 1; k <= G; ++k) {
      const auto t = detail::UnitTransforms::of(grid_value(k, G));
      const auto kk = static_cast<size_t>(k - 1);
      psi_grid_[kk] = gen_.psi(t);
      lpsi_grid_[kk] = gen_.log_psi(t);
      lp_grid_[kk] = gen_.log_neg_dpsi(t, psi_grid_[kk]);
    }
    psi0_.resize(u0.size());
    lpsi0_.resize(u0.size());
    lp0_.resize(u0.size());
    for (size_t i = 0; i < u0.size(); ++i) {
      const auto t = detail::UnitTransforms::of(u0[i]);
      psi0_[i] = gen_.psi(t);
      lpsi0_[i] = gen_.log_psi(t);
      lp0_[i] = gen_.log_neg_dpsi(t, psi0_[i]);
    }
  }

  void log_weights(std::span<const Index> counts, std::span<double> out) const override {
    check(counts, out);
    if (gen_.independent()) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    double sx = 0.0, lx = 0.0;
    double terms[16];
    int j = 0;
    for (Index c : counts) {
      sx += psi_grid_[static_cast<size_t>(c - 1)];
      lx += lp_grid_[static_cast<size_t>(c - 1)];
      terms[j++] = lpsi_grid_[static_cast<size_t>(c - 1)];
    }
    const double lsx = detail::log_sum_exp(std::span(terms, static_cast<size_t>(j)));
    for (size_t i = 0; i < out.size(); ++i) {
      const double s = psi0_[i] + sx;
      if (detail::normal_sum(s)) {
        out[i] = gen_.log_dd(s) + lp0_[i] + lx;
      } else {
        const double ls = detail::log_add_exp(lpsi0_[i], lsx);
        out[i] = gen_.log_dd(std::exp(ls), ls) + lp0_[i] + lx;
      }
    }
  }

 private:
  Archimedean gen_;
  std::vector<double> psi_grid_, lpsi_grid_, lp_grid_, psi0_, lpsi0_, lp0_;
};

class MixtureKernel final : public KernelBase {
 public:
  MixtureKernel(const CopulaFamily& f, const CopulaParams& p, std::span<const double> u0, Index G)
      : KernelBase(f.dim, static_cast<Index>(u0.size()), G) {
    const auto& nat = p.natural;
    for (size_t k = 0; k < 6; ++k) {
      const double w = nat[nat.size() - 6 + k];
      if (w <= 0.0) continue;
      log_w_.push_back(std::log(w));
      parts_.push_back(make_conditional_kernel(mixture_component(f, k),
                                               mixture_component_params(f, p, k), u0, G));
    }
  }

  void log_weights(std::span<const Index> counts, std::span<double> out) const override {
    check(counts, out);
    thread_local std::vector<double> scratch;
    const size_t n = out.size();
    const size_t K = parts_.size();
    scratch.resize(n * K);
    for (size_t k = 0; k < K; ++k) parts_[k]->log_weights(counts, std::span(scratch).subspan(k * n, n));
    for (size_t i = 0; i < n; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (size_t k = 0; k < K; ++k) mx = std::max(mx, log_w_[k] + scratch[k * n + i]);
      double acc = 0.0;
      for (size_t k = 0; k < K; ++k) acc += std::exp(log_w_[k] + scratch[k * n + i] - mx);
      out[i] = mx + std::log(acc);
    }
  }

 private:
  std::vector<double> log_w_;
  std::vector<std::unique_ptr<const ConditionalKernel>> parts_;
};

}  // namespace

std::unique_ptr<const ConditionalKernel> make_conditional_kernel(const CopulaFamily& f,
                                                                 const CopulaParams& p,
                                                                 std::span<const double> u0,
                                                                 Index grid_size) {
  check_domain(f, p);
  if (f.dim < 2 || f.dim > 16) throw DomainError("conditional kernel needs 2 <= dim <= 16");
  if (grid_size < 1) throw DomainError("conditional kernel: empty covariate grid");
  detail::require_interior(u0);
  switch (f.tag) {
    case Family::Gaussian: return std::make_unique<GaussianKernel>(f, p, u0, grid_size);
    case Family::StudentT: return std::make_unique<StudentTKernel>(f, p, u0, grid_size);
    case Family::Gumbel:
    case Family::Clayton:
    case Family::Frank:
    case Family::Joe: return std::make_unique<ArchimedeanKernel>(f, p, u0, grid_size);
    case Family::Mixture: return std::make_unique<MixtureKernel>(f, p, u0, grid_size);
  }
  throw DomainError("unknown family");
}

}  // namespace semicop
