#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "copula_internal.hpp"
#include "semicop/error.hpp"

namespace semicop {

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("normal quantile outside (0,1)");
  if (u > 0.5) return -normal_quantile(1.0 - u);
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double t_quantile(double u, double nu) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("t quantile outside (0,1)");
  if (u == 0.5) return 0.0;
  if (u > 0.5) return -t_quantile(1.0 - u, nu);
  return boost::math::quantile(boost::math::students_t_distribution<double>(nu), u);
}

double t_cdf(double x, double nu) {
  return boost::math::cdf(boost::math::students_t_distribution<double>(nu), x);
}

namespace detail {

void require_interior(std::span<const double> u) {
  for (double x : u)
    if (!(x > 0.0 && x < 1.0)) throw DomainError("point on the boundary of the unit cube");
}

EllipticalCore EllipticalCore::make(int dim, CorrStructure corr, std::span<const double> block) {
  EllipticalCore c;
  c.dim = dim;
  Matrix R = correlation_matrix(dim, corr, block);
  Eigen::LLT<Matrix> llt(R);
  if (llt.info() != Eigen::Success) throw DomainError("correlation matrix is not positive definite");
  const Matrix L = llt.matrixL();
  c.logdet = 0.0;
  for (int i = 0; i < dim; ++i) {
    if (!(L(i, i) > 1e-12)) throw DomainError("correlation matrix is numerically singular");
    c.logdet += 2.0 * std::log(L(i, i));
  }
  c.precision = llt.solve(Matrix::Identity(dim, dim));
  c.precision = 0.5 * (c.precision + c.precision.transpose()).eval();
  c.precision_minus_i = c.precision - Matrix::Identity(dim, dim);
  return c;
}

double EllipticalCore::quad(const double* z) const {
  double q = 0.0;
  for (int j = 0; j < dim; ++j) {
    double acc = 0.0;
    for (int k = 0; k < dim; ++k) acc += precision(j, k) * z[k];
    q += z[j] * acc;
  }
  return q;
}

double EllipticalCore::quad_minus_id(const double* z) const {
  double q = 0.0;
  for (int j = 0; j < dim; ++j) {
    double acc = 0.0;
    for (int k = 0; k < dim; ++k) acc += precision_minus_i(j, k) * z[k];
    q += z[j] * acc;
  }
  return q;
}

double t_log_constant(double nu, int dim, double logdet) {
  const double d = dim;
  return std::lgamma(0.5 * (nu + d)) + (d - 1.0) * std::lgamma(0.5 * nu) -
         d * std::lgamma(0.5 * (nu + 1.0)) - 0.5 * logdet;
}

Archimedean::Archimedean(Family tag, double theta, int dim) : tag_(tag), theta_(theta), dim_(dim) {
  const int d = dim;
  switch (tag) {
    case Family::Gumbel: {
      if (!(theta >= 1.0)) throw DomainError("Gumbel theta must be >= 1");
      alpha_ = 1.0 / theta;
      independent_ = theta == 1.0;
      // c_{m+1,k} = alpha c_{m,k-1} + (m - alpha k) c_{m,k}, c_{0,0} = 1
      std::vector<double> c(d + 1, 0.0), next(d + 1, 0.0);
      c[0] = 1.0;
      for (int m = 0; m < d; ++m) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int k = 0; k <= m + 1; ++k) {
          double v = (m - alpha_ * k) * c[k];
          if (k > 0) v += alpha_ * c[k - 1];
          next[k] = std::max(v, 0.0);
        }
        c.swap(next);
      }
      coef_ = c;
      break;
    }
    case Family::Joe: {
      if (!(theta >= 1.0)) throw DomainError("Joe theta must be >= 1");
      alpha_ = 1.0 / theta;
      independent_ = theta == 1.0;
      // b_{m+1,k} = (k-1-alpha) b_{m,k-1} + k b_{m,k}, b_{1,1} = alpha
      std::vector<double> b(d + 1, 0.0), next(d + 1, 0.0);
      b[1] = alpha_;
      for (int m = 1; m < d; ++m) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int k = 1; k <= m + 1; ++k) {
          double v = k * b[k];
          if (k > 1) v += (k - 1 - alpha_) * b[k - 1];
          next[k] = std::max(v, 0.0);
        }
        b.swap(next);
      }
      coef_ = b;
      break;
    }
    case Family::Clayton: {
      if (!(theta >= 0.0)) throw DomainError("Clayton theta must be positive");
      independent_ = theta < kIndependenceBand;
      if (!independent_) {
        log_const_ = 0.0;
        for (int k = 0; k < d; ++k) log_const_ += std::log(1.0 / theta + k);
        log_theta_ = std::log(theta);
      }
      break;
    }
    case Family::Frank: {
      if (!std::isfinite(theta)) throw DomainError("Frank theta must be finite");
      independent_ = std::abs(theta) < kIndependenceBand;
      if (!independent_ && theta < 0.0 && d > 2)
        throw DomainError("Frank theta must be positive in dimension >= 3");
      if (!independent_) {
        delta_ = -std::expm1(-theta);
        log_const_ = std::log(delta_ / theta);
        log_theta_ = std::log(std::abs(theta));
        // Eulerian numbers A(n, k), n = d-1
        const int n = d - 1;
        std::vector<double> A{1.0};
        for (int m = 2; m <= n; ++m) {
          std::vector<double> next(static_cast<size_t>(m), 0.0);
          for (int k = 0; k < m; ++k) {
            double v = 0.0;
            if (k < m - 1) v += (k + 1) * A[static_cast<size_t>(k)];
            if (k > 0) v += (m - k) * A[static_cast<size_t>(k - 1)];
            next[static_cast<size_t>(k)] = v;
          }
          A.swap(next);
        }
        coef_ = A;
      }
      break;
    }
    default:
      throw DomainError("not an Archimedean family");
  }
  if (tag == Family::Gumbel || tag == Family::Joe) log_theta_ = std::log(theta);
  log_coef_.resize(coef_.size());
  for (size_t k = 0; k < coef_.size(); ++k)
    log_coef_[k] = coef_[k] > 0 ? std::log(coef_[k]) : -std::numeric_limits<double>::infinity();
}

double Archimedean::psi(const UnitTransforms& t) const {
  switch (tag_) {
    case Family::Gumbel:
      return std::exp(theta_ * t.log_neg_log_u);
    case Family::Clayton:
      return std::expm1(theta_ * t.neg_log_u);
    case Family::Frank:
      return -std::log(std::expm1(-theta_ * t.u) / std::expm1(-theta_));
    case Family::Joe:
      return -std::log1p(-std::exp(theta_ * t.log1m_u));
    default:
      return 0.0;
  }
}

double Archimedean::log_neg_dpsi(const UnitTransforms& t, double psi_value) const {
  switch (tag_) {
    case Family::Gumbel:
      return log_theta_ + (theta_ - 1.0) * t.log_neg_log_u + t.neg_log_u;
    case Family::Clayton:
      return log_theta_ + (theta_ + 1.0) * t.neg_log_u;
    case Family::Frank:
      if (theta_ > 0.0) {
        const double a = theta_ * t.u;
        return log_theta_ - a - std::log1p(-std::exp(-a));
      }
      return std::log(theta_ / std::expm1(theta_ * t.u));
    case Family::Joe:
      return log_theta_ + (theta_ - 1.0) * t.log1m_u + psi_value;
    default:
      return 0.0;
  }
}

double Archimedean::log_psi(const UnitTransforms& t) const {
  switch (tag_) {
    case Family::Gumbel:
      return theta_ * t.log_neg_log_u;
    case Family::Clayton: {
      const double a = theta_ * t.neg_log_u;
      return a > 1.0 ? a + std::log1p(-std::exp(-a)) : std::log(std::expm1(a));
    }
    case Family::Frank: {
      if (theta_ < 0.0) return std::log(psi(t));
      // psi = log1p(q), q = e^{-theta u} (1 - e^{-theta (1-u)}) / (1 - e^{-theta u})
      const double a = theta_ * t.u;
      const double log_q = -a + std::log(-std::expm1(-theta_ * (1.0 - t.u))) - std::log(-std::expm1(-a));
      const double q = std::exp(log_q);
      return q < 1e-8 ? log_q - 0.5 * q : std::log(std::log1p(q));
    }
    case Family::Joe: {
      const double log_a = theta_ * t.log1m_u;
      const double a = std::exp(log_a);
      return a < 1e-8 ? log_a + 0.5 * a : std::log(-std::log1p(-a));
    }
    default:
      return 0.0;
  }
}

double Archimedean::log_dd(double s, double log_s) const {
  const int d = dim_;
  switch (tag_) {
    case Family::Gumbel: {
      const double ls = log_s;
      const double x = std::exp(alpha_ * ls);
      double h = coef_[static_cast<size_t>(d)];
      for (int k = d - 1; k >= 1; --k) h = h * x + coef_[static_cast<size_t>(k)];
      if (!(h > 0.0) || !std::isfinite(h)) return log_dd_fallback(ls, 0.0, 0.0);
      return -x + (alpha_ - d) * ls + std::log(h);
    }
    case Family::Joe: {
      // phi(s) = 1 - y^alpha with y = 1 - e^{-s}; r = e^{-s} / y
      const double log_y = log_one_minus_exp_neg(s, log_s);
      const double log_r = -s - log_y;
      const double r = std::exp(log_r);
      double h = coef_[static_cast<size_t>(d)];
      for (int k = d - 1; k >= 1; --k) h = h * r + coef_[static_cast<size_t>(k)];
      if (!(h > 0.0) || !std::isfinite(h)) return log_dd_fallback(log_s, log_y, log_r);
      return alpha_ * log_y + log_r + std::log(h);
    }
    case Family::Clayton: {
      const double l1p = log_s > 30.0 ? log_s + std::log1p(std::exp(-log_s)) : std::log1p(s);
      return log_const_ - (1.0 / theta_ + d) * l1p;
    }
    case Family::Frank: {
      const double x = delta_ * std::exp(-s);
      // log(1 - x) = log((1 - e^{-s}) + e^{-s-theta}) for theta > 0
      const double log1mx = theta_ > 0.0 ? log_add_exp(log_one_minus_exp_neg(s, log_s), -s - theta_)
                                         : std::log(1.0 - x);
      double h = coef_.back();
      for (int k = static_cast<int>(coef_.size()) - 2; k >= 0; --k)
        h = h * x + coef_[static_cast<size_t>(k)];
      return log_const_ - s + std::log(h) - d * log1mx;
    }
    default:
      return 0.0;
  }
}

// Log-sum-exp evaluation used when the Horner form leaves double range.
double Archimedean::log_dd_fallback(double log_s, double log_y, double log_r) const {
  const int d = dim_;
  double terms[17];
  if (tag_ == Family::Gumbel) {
    for (int k = 1; k <= d; ++k) terms[k - 1] = log_coef_[static_cast<size_t>(k)] + k * alpha_ * log_s;
    return -std::exp(alpha_ * log_s) - d * log_s + log_sum_exp(std::span(terms, static_cast<size_t>(d)));
  }
  // Joe
  for (int k = 1; k <= d; ++k) terms[k - 1] = log_coef_[static_cast<size_t>(k)] + k * log_r;
  return alpha_ * log_y + log_sum_exp(std::span(terms, static_cast<size_t>(d)));
}

double Archimedean::log_density(std::span<const double> u) const {
  if (independent_) return 0.0;
  double s = 0.0, lp = 0.0;
  for (double x : u) {
    const auto t = UnitTransforms::of(x);
    const double ps = psi(t);
    s += ps;
    lp += log_neg_dpsi(t, ps);
  }
  if (normal_sum(s)) return log_dd(s) + lp;
  double lps[16];
  for (size_t j = 0; j < u.size(); ++j) lps[j] = log_psi(UnitTransforms::of(u[j]));
  const double ls = log_sum_exp(std::span(lps, u.size()));
  return log_dd(std::exp(ls), ls) + lp;
}

}  // namespace detail

namespace {

using detail::Archimedean;
using detail::EllipticalCore;

constexpr Index kParallelRows = 4096;

class GaussianBound final : public BoundCopula {
 public:
  GaussianBound(const CopulaFamily& f, const CopulaParams& p)
      : core_(EllipticalCore::make(f.dim, f.corr, p.natural)) {}

  double log_density(std::span<const double> u) const override {
    detail::require_interior(u);
    std::vector<double> z(u.size());
    for (size_t j = 0; j < u.size(); ++j) z[j] = normal_quantile(u[j]);
    return -0.5 * core_.logdet - 0.5 * core_.quad_minus_id(z.data());
  }

  void row_log_densities(const PreparedSample& s, std::span<double> out) const override {
    const auto& zq = s.normal_quantile();
    const Index d = s.dim();
    const auto& idx = s.level_index();
#pragma omp parallel for schedule(static) if (s.rows() > kParallelRows)
    for (Index i = 0; i < s.rows(); ++i) {
      double z[16];
      for (Index j = 0; j < d; ++j) z[j] = zq[static_cast<size_t>(idx[static_cast<size_t>(i * d + j)])];
      out[static_cast<size_t>(i)] = -0.5 * core_.logdet - 0.5 * core_.quad_minus_id(z);
    }
  }

 private:
  EllipticalCore core_;
};

class StudentTBound final : public BoundCopula {
 public:
  StudentTBound(const CopulaFamily& f, const CopulaParams& p)
      : core_(EllipticalCore::make(f.dim, f.corr,
                                   std::span(p.natural).first(p.natural.size() - 1))),
        nu_(p.natural.back()),
        const_(detail::t_log_constant(nu_, f.dim, core_.logdet)) {}

  double log_density(std::span<const double> u) const override {
    detail::require_interior(u);
    std::vector<double> x(u.size());
    double marg = 0.0;
    for (size_t j = 0; j < u.size(); ++j) {
      x[j] = t_quantile(u[j], nu_);
      marg += std::log1p(x[j] * x[j] / nu_);
    }
    const double d = static_cast<double>(u.size());
    return const_ - 0.5 * (nu_ + d) * std::log1p(core_.quad(x.data()) / nu_) +
           0.5 * (nu_ + 1.0) * marg;
  }

  void row_log_densities(const PreparedSample& s, std::span<double> out) const override {
    const Index L = s.level_count();
    std::vector<double> q(static_cast<size_t>(L)), lm(static_cast<size_t>(L));
    s.t_quantiles(nu_, q);
    for (Index k = 0; k < L; ++k) lm[static_cast<size_t>(k)] = std::log1p(q[static_cast<size_t>(k)] * q[static_cast<size_t>(k)] / nu_);
    const Index d = s.dim();
    const auto& idx = s.level_index();
    const double a = 0.5 * (nu_ + static_cast<double>(d));
    const double b = 0.5 * (nu_ + 1.0);
#pragma omp parallel for schedule(static) if (s.rows() > kParallelRows)
    for (Index i = 0; i < s.rows(); ++i) {
      double x[16];
      double marg = 0.0;
      for (Index j = 0; j < d; ++j) {
        const auto lv = static_cast<size_t>(idx[static_cast<size_t>(i * d + j)]);
        x[j] = q[lv];
        marg += lm[lv];
      }
      out[static_cast<size_t>(i)] = const_ - a * std::log1p(core_.quad(x) / nu_) + b * marg;
    }
  }

 private:
  EllipticalCore core_;
  double nu_;
  double const_;
};

class ArchimedeanBound final : public BoundCopula {
 public:
  ArchimedeanBound(const CopulaFamily& f, const CopulaParams& p) : gen_(f.tag, p.natural[0], f.dim) {}

  double log_density(std::span<const double> u) const override {
    detail::require_interior(u);
    return gen_.log_density(u);
  }

  void row_log_densities(const PreparedSample& s, std::span<double> out) const override {
    if (gen_.independent()) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    const Index L = s.level_count();
    std::vector<double> ps(static_cast<size_t>(L)), lg(static_cast<size_t>(L)), lp(static_cast<size_t>(L));
    const auto& lv = s.levels();
    for (Index k = 0; k < L; ++k) {
      const auto kk = static_cast<size_t>(k);
      const detail::UnitTransforms t{lv[kk], s.neg_log_u()[kk], s.log_neg_log_u()[kk],
                                     s.log1m_u()[kk]};
      ps[kk] = gen_.psi(t);
      lg[kk] = gen_.log_psi(t);
      lp[kk] = gen_.log_neg_dpsi(t, ps[kk]);
    }
    const Index d = s.dim();
    const auto& idx = s.level_index();
#pragma omp parallel for schedule(static) if (s.rows() > kParallelRows)
    for (Index i = 0; i < s.rows(); ++i) {
      double sum = 0.0, lsum = 0.0;
      for (Index j = 0; j < d; ++j) {
        const auto l = static_cast<size_t>(idx[static_cast<size_t>(i * d + j)]);
        sum += ps[l];
        lsum += lp[l];
      }
      if (detail::normal_sum(sum)) {
        out[static_cast<size_t>(i)] = gen_.log_dd(sum) + lsum;
        continue;
      }
      double terms[16];
      for (Index j = 0; j < d; ++j) terms[j] = lg[static_cast<size_t>(idx[static_cast<size_t>(i * d + j)])];
      const double ls = detail::log_sum_exp(std::span(terms, static_cast<size_t>(d)));
      out[static_cast<size_t>(i)] = gen_.log_dd(std::exp(ls), ls) + lsum;
    }
  }

 private:
  Archimedean gen_;
};

class MixtureBound final : public BoundCopula {
 public:
  MixtureBound(const CopulaFamily& f, const CopulaParams& p) {
    const auto& nat = p.natural;
    for (size_t k = 0; k < 6; ++k) {
      const double w = nat[nat.size() - 6 + k];
      if (w <= 0.0) continue;
      log_w_.push_back(std::log(w));
      parts_.push_back(bind(mixture_component(f, k), mixture_component_params(f, p, k)));
    }
  }

  double log_density(std::span<const double> u) const override {
    detail::require_interior(u);
    double mx = -std::numeric_limits<double>::infinity();
    std::array<double, 6> terms{};
    for (size_t k = 0; k < parts_.size(); ++k) {
      terms[k] = log_w_[k] + parts_[k]->log_density(u);
      mx = std::max(mx, terms[k]);
    }
    double acc = 0.0;
    for (size_t k = 0; k < parts_.size(); ++k) acc += std::exp(terms[k] - mx);
    return mx + std::log(acc);
  }

  void row_log_densities(const PreparedSample& s, std::span<double> out) const override {
    const auto rows = static_cast<size_t>(s.rows());
    std::vector<std::vector<double>> comp(parts_.size(), std::vector<double>(rows));
    for (size_t k = 0; k < parts_.size(); ++k) parts_[k]->row_log_densities(s, comp[k]);
    const size_t K = parts_.size();
#pragma omp parallel for schedule(static) if (s.rows() > kParallelRows)
    for (Index ii = 0; ii < s.rows(); ++ii) {
      const auto i = static_cast<size_t>(ii);
      double mx = -std::numeric_limits<double>::infinity();
      for (size_t k = 0; k < K; ++k) mx = std::max(mx, log_w_[k] + comp[k][i]);
      double acc = 0.0;
      for (size_t k = 0; k < K; ++k) acc += std::exp(log_w_[k] + comp[k][i] - mx);
      out[i] = mx + std::log(acc);
    }
  }

 private:
  std::vector<double> log_w_;
  std::vector<std::unique_ptr<const BoundCopula>> parts_;
};

}  // namespace

std::unique_ptr<const BoundCopula> bind(const CopulaFamily& f, const CopulaParams& p) {
  check_domain(f, p);
  if (f.dim > 16) throw DomainError("dimension above 16 is not supported");
  switch (f.tag) {
    case Family::Gaussian: return std::make_unique<GaussianBound>(f, p);
    case Family::StudentT: return std::make_unique<StudentTBound>(f, p);
    case Family::Gumbel:
    case Family::Clayton:
    case Family::Frank:
    case Family::Joe: return std::make_unique<ArchimedeanBound>(f, p);
    case Family::Mixture: return std::make_unique<MixtureBound>(f, p);
  }
  throw DomainError("unknown family");
}

double log_density(const CopulaFamily& f, const CopulaParams& p, std::span<const double> u) {
  if (static_cast<int>(u.size()) != f.dim)
    throw DomainError("point has dimension " + std::to_string(u.size()) + ", copula has " +
                      std::to_string(f.dim));
  return bind(f, p)->log_density(u);
}

double density(const CopulaFamily& f, const CopulaParams& p, std::span<const double> u) {
  return std::exp(log_density(f, p, u));
}

}  // namespace semicop
