#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "semicop/copula.hpp"
#include "semicop/margins.hpp"

namespace semicop {

struct FitOptions {
  int max_iterations = 2000;
  double tolerance = 1e-8;           // on the change of the mean negative log-likelihood
  double gradient_tolerance = 1e-4;  // max-norm of the mean-scale gradient, times 10
  int restarts = 3;
  std::uint64_t seed = 0;
};

struct FittedCandidate {
  CopulaFamily family;
  CopulaParams theta_hat;
  double loglik = 0.0;
  std::size_t q = 0;
  bool converged = false;
  int iterations = 0;
};

double pseudo_loglik(const CopulaFamily& f, const CopulaParams& p, const PseudoObservations& u);
double pseudo_loglik(const BoundCopula& c, const PreparedSample& s);

// Pseudo maximum likelihood over the unconstrained parameterization. The
// default starts (method of moments through Kendall's tau, independence
// adjacent, moderate dependence, then seeded jitters) are preceded by
// `extra_starts`. With restarts = 0 only the extra starts are used.
FittedCandidate fit_candidate(const CopulaFamily& f, const PseudoObservations& u,
                              const FitOptions& opts, std::span<const CopulaParams> extra_starts = {});

// Fits every family; a mixture additionally starts from the base-family fits
// found in the same call.
std::vector<FittedCandidate> fit_candidates(std::span<const CopulaFamily> families,
                                            const PseudoObservations& u, const FitOptions& opts);

double bic(const FittedCandidate& c, Index n);

// Kendall's tau implied by one-parameter Archimedean families.
double kendall_tau_of(Family tag, double theta);
// Inverse of kendall_tau_of, clamped to the family's domain.
double theta_from_tau(Family tag, double tau);

}  // namespace semicop
