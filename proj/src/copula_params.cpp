#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

#include "semicop/copula.hpp"
#include "semicop/error.hpp"

namespace semicop {

namespace {

double logistic(double v) {
  return v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

std::size_t corr_size(int dim, CorrStructure corr) {
  return corr == CorrStructure::Exchangeable ? 1 : static_cast<std::size_t>(dim * (dim - 1) / 2);
}

double exchangeable_lower(int dim) { return -1.0 / static_cast<double>(dim - 1); }

void require_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) throw DomainError("non-finite parameter value");
}

void append_base_blocks(ParamDomainSpec& spec, const CopulaFamily& f) {
  auto push = [&](ParamBlock::Kind kind, std::size_t nsize, std::size_t fsize) {
    spec.blocks.push_back(
        ParamBlock{kind, spec.natural_size, nsize, spec.free_size, fsize, f.dim, f.corr});
    spec.natural_size += nsize;
    spec.free_size += fsize;
  };
  switch (f.tag) {
    case Family::Gaussian:
      push(ParamBlock::Kind::Correlation, corr_size(f.dim, f.corr), corr_size(f.dim, f.corr));
      break;
    case Family::StudentT:
      push(ParamBlock::Kind::Correlation, corr_size(f.dim, f.corr), corr_size(f.dim, f.corr));
      push(ParamBlock::Kind::DegreesOfFreedom, 1, 1);
      break;
    case Family::Gumbel:
    case Family::Joe:
      push(ParamBlock::Kind::ThetaAboveOne, 1, 1);
      break;
    case Family::Clayton:
      push(ParamBlock::Kind::ThetaPositive, 1, 1);
      break;
    case Family::Frank:
      push(f.dim == 2 ? ParamBlock::Kind::ThetaNonzero : ParamBlock::Kind::ThetaPositive, 1, 1);
      break;
    case Family::Mixture:
      throw DomainError("mixture is not a base family");
  }
}

void validate_family(const CopulaFamily& f) {
  if (f.dim < 2) throw DomainError("copula dimension must be at least 2");
}

}  // namespace

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Gaussian: return "gaussian";
    case Family::StudentT: return "t";
    case Family::Gumbel: return "gumbel";
    case Family::Clayton: return "clayton";
    case Family::Frank: return "frank";
    case Family::Joe: return "joe";
    case Family::Mixture: return "mixture";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "gaussian" || s == "normal") return Family::Gaussian;
  if (s == "t" || s == "student" || s == "studentt") return Family::StudentT;
  if (s == "gumbel") return Family::Gumbel;
  if (s == "clayton") return Family::Clayton;
  if (s == "frank") return Family::Frank;
  if (s == "joe") return Family::Joe;
  if (s == "mixture") return Family::Mixture;
  throw ConfigError("unknown copula family '" + std::string(name) + "'");
}

std::vector<CopulaFamily> default_candidates(int dim, CorrStructure corr) {
  std::vector<CopulaFamily> out;
  for (Family f : kBaseFamilies) out.push_back({f, dim, corr});
  out.push_back({Family::Mixture, dim, corr});
  return out;
}

ParamDomainSpec domain_spec(const CopulaFamily& f) {
  validate_family(f);
  ParamDomainSpec spec;
  if (f.tag != Family::Mixture) {
    append_base_blocks(spec, f);
    return spec;
  }
  for (Family b : kBaseFamilies) append_base_blocks(spec, {b, f.dim, f.corr});
  spec.blocks.push_back(ParamBlock{ParamBlock::Kind::Simplex, spec.natural_size, 6,
                                   spec.free_size, 5, f.dim, f.corr});
  spec.natural_size += 6;
  spec.free_size += 5;
  return spec;
}

std::size_t natural_param_count(const CopulaFamily& f) { return domain_spec(f).natural_size; }
std::size_t free_param_count(const CopulaFamily& f) { return domain_spec(f).free_size; }

Matrix correlation_matrix(int dim, CorrStructure corr, std::span<const double> block) {
  Matrix R = Matrix::Identity(dim, dim);
  if (corr == CorrStructure::Exchangeable) {
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        if (i != j) R(i, j) = block[0];
    return R;
  }
  std::size_t k = 0;
  for (int i = 1; i < dim; ++i)
    for (int j = 0; j < i; ++j) {
      R(i, j) = block[k];
      R(j, i) = block[k];
      ++k;
    }
  return R;
}

std::vector<double> correlation_entries(const Matrix& R) {
  std::vector<double> out;
  for (Index i = 1; i < R.rows(); ++i)
    for (Index j = 0; j < i; ++j) out.push_back(R(i, j));
  return out;
}

namespace {

void check_correlation(int dim, CorrStructure corr, std::span<const double> block) {
  for (double r : block)
    if (!(r > -1.0 && r < 1.0)) throw DomainError("correlation outside (-1, 1)");
  if (corr == CorrStructure::Exchangeable && !(block[0] > exchangeable_lower(dim)))
    throw DomainError("exchangeable correlation below -1/(d-1)");
  Matrix R = correlation_matrix(dim, corr, block);
  Eigen::LLT<Matrix> llt(R);
  if (llt.info() != Eigen::Success) throw DomainError("correlation matrix is not positive definite");
  const auto& L = llt.matrixL();
  for (int i = 0; i < dim; ++i)
    if (!(L(i, i) > 1e-12)) throw DomainError("correlation matrix is numerically singular");
}

// Unstructured correlation block <-> Fisher-z of canonical partial correlations.
void correlation_to_free(int dim, std::span<const double> block, std::span<double> out) {
  Matrix R = correlation_matrix(dim, CorrStructure::Unstructured, block);
  Eigen::LLT<Matrix> llt(R);
  if (llt.info() != Eigen::Success) throw DomainError("correlation matrix is not positive definite");
  Matrix L = llt.matrixL();
  std::size_t k = 0;
  for (int i = 1; i < dim; ++i) {
    double ss = 0.0;
    for (int j = 0; j < i; ++j) {
      const double z = L(i, j) / std::sqrt(std::max(1.0 - ss, 1e-300));
      if (!(std::abs(z) < 1.0)) throw DomainError("partial correlation on the boundary");
      out[k++] = std::atanh(z);
      ss += L(i, j) * L(i, j);
    }
  }
}

void free_to_correlation(int dim, std::span<const double> v, std::span<double> block) {
  Matrix L = Matrix::Zero(dim, dim);
  L(0, 0) = 1.0;
  std::size_t k = 0;
  for (int i = 1; i < dim; ++i) {
    double ss = 0.0;
    for (int j = 0; j < i; ++j) {
      const double z = std::tanh(v[k++]);
      L(i, j) = z * std::sqrt(std::max(1.0 - ss, 0.0));
      ss += L(i, j) * L(i, j);
    }
    L(i, i) = std::sqrt(std::max(1.0 - ss, 0.0));
  }
  Matrix R = L * L.transpose();
  k = 0;
  for (int i = 1; i < dim; ++i)
    for (int j = 0; j < i; ++j) block[k++] = R(i, j);
}

void check_block(const ParamBlock& b, std::span<const double> nat) {
  switch (b.kind) {
    case ParamBlock::Kind::Correlation:
      check_correlation(b.dim, b.corr, nat);
      break;
    case ParamBlock::Kind::DegreesOfFreedom:
      if (!(nat[0] >= kMinDof && nat[0] <= kMaxDof))
        throw DomainError("degrees of freedom outside [2.1, 50]");
      break;
    case ParamBlock::Kind::ThetaAboveOne:
      if (!(nat[0] >= 1.0)) throw DomainError("theta must be >= 1");
      break;
    case ParamBlock::Kind::ThetaPositive:
      // theta = 0 is admitted as the independence limit.
      if (!(nat[0] >= 0.0)) throw DomainError("theta must be positive");
      break;
    case ParamBlock::Kind::ThetaNonzero:
      if (!std::isfinite(nat[0])) throw DomainError("theta must be finite");
      break;
    case ParamBlock::Kind::Simplex: {
      double s = 0.0;
      for (double x : nat) {
        if (!(x >= 0.0)) throw DomainError("mixing proportion is negative");
        s += x;
      }
      if (std::abs(s - 1.0) > 1e-10) throw DomainError("mixing proportions do not sum to one");
      break;
    }
  }
}

}  // namespace

void check_domain(const CopulaFamily& f, const CopulaParams& p) {
  const auto spec = domain_spec(f);
  if (p.natural.size() != spec.natural_size)
    throw DomainError("expected " + std::to_string(spec.natural_size) + " parameters for " +
                      std::string(family_name(f.tag)) + ", got " +
                      std::to_string(p.natural.size()));
  require_finite(p.natural);
  for (const auto& b : spec.blocks)
    check_block(b, std::span(p.natural).subspan(b.natural_offset, b.natural_size));
}

std::vector<double> to_unconstrained(const CopulaFamily& f, const CopulaParams& p) {
  check_domain(f, p);
  const auto spec = domain_spec(f);
  std::vector<double> v(spec.free_size);
  for (const auto& b : spec.blocks) {
    auto nat = std::span(p.natural).subspan(b.natural_offset, b.natural_size);
    auto out = std::span(v).subspan(b.free_offset, b.free_size);
    switch (b.kind) {
      case ParamBlock::Kind::Correlation:
        if (b.corr == CorrStructure::Exchangeable) {
          const double lo = exchangeable_lower(b.dim);
          out[0] = logit((nat[0] - lo) / (1.0 - lo));
        } else {
          correlation_to_free(b.dim, nat, out);
        }
        break;
      case ParamBlock::Kind::DegreesOfFreedom:
        out[0] = logit((nat[0] - kMinDof) / (kMaxDof - kMinDof));
        break;
      case ParamBlock::Kind::ThetaAboveOne:
        out[0] = std::log(nat[0] - 1.0);
        break;
      case ParamBlock::Kind::ThetaPositive:
        out[0] = std::log(nat[0]);
        break;
      case ParamBlock::Kind::ThetaNonzero:
        out[0] = nat[0];
        break;
      case ParamBlock::Kind::Simplex:
        for (std::size_t k = 1; k < 6; ++k) out[k - 1] = std::log(nat[k]) - std::log(nat[0]);
        break;
    }
  }
  for (double x : v)
    if (!std::isfinite(x)) throw DomainError("parameter on the domain boundary has no finite image");
  return v;
}

CopulaParams from_unconstrained(const CopulaFamily& f, std::span<const double> v) {
  const auto spec = domain_spec(f);
  if (v.size() != spec.free_size) throw DomainError("unconstrained vector has the wrong length");
  require_finite(v);
  CopulaParams p;
  p.natural.resize(spec.natural_size);
  for (const auto& b : spec.blocks) {
    auto in = v.subspan(b.free_offset, b.free_size);
    auto nat = std::span(p.natural).subspan(b.natural_offset, b.natural_size);
    switch (b.kind) {
      case ParamBlock::Kind::Correlation:
        if (b.corr == CorrStructure::Exchangeable) {
          const double lo = exchangeable_lower(b.dim);
          nat[0] = lo + (1.0 - lo) * logistic(in[0]);
        } else {
          free_to_correlation(b.dim, in, nat);
        }
        break;
      case ParamBlock::Kind::DegreesOfFreedom:
        nat[0] = kMinDof + (kMaxDof - kMinDof) * logistic(in[0]);
        break;
      case ParamBlock::Kind::ThetaAboveOne:
        nat[0] = 1.0 + std::exp(in[0]);
        break;
      case ParamBlock::Kind::ThetaPositive:
        nat[0] = std::exp(in[0]);
        break;
      case ParamBlock::Kind::ThetaNonzero:
        nat[0] = in[0];
        break;
      case ParamBlock::Kind::Simplex: {
        double mx = 0.0;
        for (double x : in) mx = std::max(mx, x);
        double s = std::exp(-mx);
        nat[0] = std::exp(-mx);
        for (std::size_t k = 1; k < 6; ++k) {
          nat[k] = std::exp(in[k - 1] - mx);
          s += nat[k];
        }
        for (double& x : nat) x /= s;
        break;
      }
    }
  }
  return p;
}

CopulaParams independence_params(const CopulaFamily& f) {
  validate_family(f);
  const std::size_t nc = corr_size(f.dim, f.corr);
  switch (f.tag) {
    case Family::Gaussian:
      return {std::vector<double>(nc, 0.0)};
    case Family::StudentT:
      throw DomainError("the t copula has no independence parameter");
    case Family::Gumbel:
    case Family::Joe:
      return {{1.0}};
    case Family::Clayton:
    case Family::Frank:
      return {{0.0}};
    case Family::Mixture: {
      std::vector<CopulaParams> comps;
      for (Family b : kBaseFamilies) {
        if (b == Family::StudentT) {
          std::vector<double> t(nc, 0.0);
          t.push_back(kMaxDof);
          comps.push_back({t});
        } else {
          comps.push_back(independence_params({b, f.dim, f.corr}));
        }
      }
      const std::array<double, 6> w = {1, 0, 0, 0, 0, 0};
      return make_mixture_params(f, comps, w);
    }
  }
  throw DomainError("unknown family");
}

std::array<BlockRange, 6> mixture_component_ranges(const CopulaFamily& f) {
  std::array<BlockRange, 6> out{};
  std::size_t nat = 0, fr = 0;
  for (std::size_t k = 0; k < 6; ++k) {
    const auto spec = domain_spec({kBaseFamilies[k], f.dim, f.corr});
    out[k] = {nat, nat + spec.natural_size, fr, fr + spec.free_size};
    nat += spec.natural_size;
    fr += spec.free_size;
  }
  return out;
}

CopulaFamily mixture_component(const CopulaFamily& f, std::size_t k) {
  return {kBaseFamilies.at(k), f.dim, f.corr};
}

CopulaParams mixture_component_params(const CopulaFamily& f, const CopulaParams& p, std::size_t k) {
  const auto r = mixture_component_ranges(f)[k];
  return {std::vector<double>(p.natural.begin() + static_cast<std::ptrdiff_t>(r.natural_begin),
                              p.natural.begin() + static_cast<std::ptrdiff_t>(r.natural_end))};
}

CopulaParams make_mixture_params(const CopulaFamily& f, std::span<const CopulaParams> components,
                                 std::span<const double> weights) {
  if (components.size() != 6 || weights.size() != 6)
    throw DomainError("a mixture needs six components and six weights");
  CopulaParams p;
  for (std::size_t k = 0; k < 6; ++k) {
    if (components[k].natural.size() != natural_param_count(mixture_component(f, k)))
      throw DomainError("mixture component " + std::string(family_name(kBaseFamilies[k])) +
                        " has the wrong parameter count");
    p.natural.insert(p.natural.end(), components[k].natural.begin(), components[k].natural.end());
  }
  p.natural.insert(p.natural.end(), weights.begin(), weights.end());
  return p;
}

}  // namespace semicop
