#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semicop/types.hpp"

namespace semicop {

enum class Family { Gaussian, StudentT, Gumbel, Clayton, Frank, Joe, Mixture };
enum class CorrStructure { Unstructured, Exchangeable };

// Mixture components, in parameter-block order.
inline constexpr std::array<Family, 6> kBaseFamilies = {Family::Gaussian, Family::StudentT,
                                                        Family::Gumbel,   Family::Clayton,
                                                        Family::Frank,    Family::Joe};

std::string_view family_name(Family f);
// Accepts the names returned by family_name, case-insensitively; throws ConfigError.
Family parse_family(std::string_view name);

struct CopulaFamily {
  Family tag = Family::Gaussian;
  int dim = 2;
  CorrStructure corr = CorrStructure::Unstructured;

  bool operator==(const CopulaFamily&) const = default;
};

// The seven candidates used throughout the simulations, for dimension d = p+1.
std::vector<CopulaFamily> default_candidates(int dim,
                                             CorrStructure corr = CorrStructure::Unstructured);

// Natural-domain parameter vector. Layout per family:
//   Gaussian   correlations (lower triangle, row-major: r10, r20, r21, r30, ...) or a single rho
//   StudentT   the Gaussian block followed by nu in [2.1, 50]
//   Gumbel/Joe theta >= 1; Clayton theta > 0; Frank theta != 0 (theta > 0 when dim >= 3)
//   Mixture    the six base blocks in kBaseFamilies order, then six mixing proportions
struct CopulaParams {
  std::vector<double> natural;
};

inline constexpr double kMinDof = 2.1;
inline constexpr double kMaxDof = 50.0;
// |theta| below this is treated as the independence limit (Frank, Clayton).
inline constexpr double kIndependenceBand = 1e-8;

struct ParamBlock {
  enum class Kind {
    Correlation,      // Fisher-z of canonical partial correlations (exchangeable: scaled logit)
    DegreesOfFreedom, // scaled logit onto [2.1, 50]
    ThetaAboveOne,    // log(theta - 1)
    ThetaPositive,    // log(theta)
    ThetaNonzero,     // identity (bivariate Frank)
    Simplex,          // multinomial logit against the first component
  };
  Kind kind;
  std::size_t natural_offset;
  std::size_t natural_size;
  std::size_t free_offset;
  std::size_t free_size;
  int dim;  // for Correlation blocks
  CorrStructure corr;
};

struct ParamDomainSpec {
  std::vector<ParamBlock> blocks;
  std::size_t natural_size = 0;
  std::size_t free_size = 0;
};

ParamDomainSpec domain_spec(const CopulaFamily& f);
std::size_t natural_param_count(const CopulaFamily& f);
// q_m: number of free parameters.
std::size_t free_param_count(const CopulaFamily& f);

// Throws DomainError when p is outside the family's domain.
void check_domain(const CopulaFamily& f, const CopulaParams& p);
std::vector<double> to_unconstrained(const CopulaFamily& f, const CopulaParams& p);
CopulaParams from_unconstrained(const CopulaFamily& f, std::span<const double> v);

// Independence copula inside the family. StudentT has none and throws DomainError.
CopulaParams independence_params(const CopulaFamily& f);

// Range of mixture parameter blocks: [begin, end) of natural and free coordinates.
struct BlockRange {
  std::size_t natural_begin, natural_end, free_begin, free_end;
};
std::array<BlockRange, 6> mixture_component_ranges(const CopulaFamily& f);
CopulaFamily mixture_component(const CopulaFamily& f, std::size_t k);
CopulaParams mixture_component_params(const CopulaFamily& f, const CopulaParams& p, std::size_t k);
// Assembles a mixture parameter vector from six component vectors and weights.
CopulaParams make_mixture_params(const CopulaFamily& f, std::span<const CopulaParams> components,
                                 std::span<const double> weights);

// Correlation matrix encoded by a Gaussian/StudentT correlation block.
Matrix correlation_matrix(int dim, CorrStructure corr, std::span<const double> block);
// Inverse of correlation_matrix for unstructured blocks.
std::vector<double> correlation_entries(const Matrix& R);

double log_density(const CopulaFamily& f, const CopulaParams& p, std::span<const double> u);
double density(const CopulaFamily& f, const CopulaParams& p, std::span<const double> u);

// count x dim i.i.d. draws; bit-reproducible for a fixed seed.
Matrix sample(const CopulaFamily& f, const CopulaParams& p, Index count, std::uint64_t seed);

class PreparedSample;

// Parameters bound to a family with derived quantities (Cholesky factors,
// derivative coefficients) computed once.
class BoundCopula {
 public:
  virtual ~BoundCopula() = default;
  virtual double log_density(std::span<const double> u) const = 0;
  // out[i] = log c(u_i) for every row of the prepared sample.
  virtual void row_log_densities(const PreparedSample& s, std::span<double> out) const = 0;
};

std::unique_ptr<const BoundCopula> bind(const CopulaFamily& f, const CopulaParams& p);

// Pseudo-observations with per-level caches. Entries are deduplicated into
// sorted "levels" so family transforms run once per distinct value.
class PreparedSample {
 public:
  // with_t_table: build Chebyshev interpolants of t quantiles in 1/nu so that
  // StudentT evaluations avoid per-call quantile inversions.
  explicit PreparedSample(const Matrix& u, bool with_t_table = false);

  Index rows() const { return rows_; }
  Index dim() const { return dim_; }
  Index level_count() const { return static_cast<Index>(levels_.size()); }
  // Level of entry (i, j).
  std::int32_t level(Index i, Index j) const { return index_[static_cast<size_t>(i * dim_ + j)]; }
  const std::vector<std::int32_t>& level_index() const { return index_; }

  const std::vector<double>& levels() const { return levels_; }
  const std::vector<double>& log_u() const { return log_u_; }
  const std::vector<double>& neg_log_u() const { return neg_log_u_; }
  const std::vector<double>& log_neg_log_u() const { return log_neg_log_u_; }
  const std::vector<double>& log1m_u() const { return log1m_u_; }
  const std::vector<double>& normal_quantile() const { return normal_q_; }

  bool has_t_table() const { return !t_coef_.empty(); }
  // t quantiles of every level at nu (table or exact inversion).
  void t_quantiles(double nu, std::span<double> out) const;

 private:
  Index rows_ = 0;
  Index dim_ = 0;
  std::vector<double> levels_;
  std::vector<std::int32_t> index_;
  std::vector<double> log_u_, neg_log_u_, log_neg_log_u_, log1m_u_, normal_q_;
  std::vector<double> t_coef_;  // level_count x kTableNodes
};

// Conditional log-density kernel for regression: fixed response levels u0_i
// and a covariate grid k/(G+1), k = 1..G. log_weights(counts) fills
// out[i] = log c(u0_i, counts_1/(G+1), ..., counts_p/(G+1)).
class ConditionalKernel {
 public:
  virtual ~ConditionalKernel() = default;
  virtual void log_weights(std::span<const Index> counts, std::span<double> out) const = 0;
  virtual Index size() const = 0;
};

std::unique_ptr<const ConditionalKernel> make_conditional_kernel(const CopulaFamily& f,
                                                                 const CopulaParams& p,
                                                                 std::span<const double> u0,
                                                                 Index grid_size);

// Quantile helpers shared with tests.
double normal_quantile(double u);
double normal_cdf(double z);
double t_quantile(double u, double nu);
double t_cdf(double x, double nu);

}  // namespace semicop
