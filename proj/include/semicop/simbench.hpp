#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semicop/averaging.hpp"

namespace semicop {

struct DGPSpec {
  int id = 1;
  int p = 4;
  Index n = 200;
  Index N = 200;
  Index test_size = -1;  // negative: n + N
  double noise_variance = 4.0;
  std::uint64_t seed = 0;

  Index effective_test_size() const { return test_size < 0 ? n + N : test_size; }
  // Throws ConfigError.
  void validate() const;
};

double true_mean(const DGPSpec& spec, std::span<const double> x);

struct SimSample {
  Dataset train;
  Matrix test_x;
  Vector test_y;
  Vector test_mean;
};

// Labeled rows, then unlabeled rows, then the test rows, all from one stream.
SimSample generate(const DGPSpec& spec);

// Fresh covariates and their true means, independent of generate(spec).
void draw_evaluation(const DGPSpec& spec, Index count, std::uint64_t seed, Matrix& x, Vector& mean);

double mspe(const Vector& predictions, const Vector& y);
double mspe(const AveragedModel& model, const Matrix& test_x, const Vector& test_y);

// Replication r of a run under `master`.
std::uint64_t replication_seed(std::uint64_t master, int r);

enum class Method { CRMA, LABEL, SBIC, BICMS, EWMA };
std::string method_name(Method m, int K);
Method parse_method(std::string_view name);

struct BenchCell {
  int dgp = 1;
  int p = 4;
  Index n = 200;
  Index N = 200;
};

struct BenchConfig {
  std::vector<BenchCell> cells;
  std::vector<Method> methods{Method::CRMA, Method::LABEL, Method::SBIC, Method::BICMS, Method::EWMA};
  std::vector<Family> families{Family::Gaussian, Family::StudentT, Family::Gumbel, Family::Clayton,
                               Family::Frank,    Family::Joe,      Family::Mixture};
  int replications = 100;
  double noise_variance = 4.0;
  std::uint64_t seed = 0;
  AveragingOptions averaging;
};

struct BenchResult {
  std::string method;
  BenchCell cell;
  std::vector<double> mspe;  // NaN where the replication failed
  std::vector<std::string> errors;
  double mean = 0.0;
  double se = 0.0;
  int failures = 0;
  bool partial() const { return failures > 0; }
};

// One result per (cell, method), cells outermost.
std::vector<BenchResult> run_benchmark(const BenchConfig& cfg);

// R(w) = mean_i (sum_m w_m P_im - mu_i)^2 = w'Bw + a'w + c.
struct RiskForm {
  Vector a;
  Matrix B;
  double c = 0.0;
};

RiskForm risk_form(const Matrix& predictions, const Vector& mean);
double risk_on_sample(const RiskForm& form, const Vector& w);
double risk_on_sample(const Vector& w, const Matrix& predictions, const Vector& mean);

struct TracePoint {
  Index n = 0;
  Index N = 0;
  std::vector<double> values;  // NaN where the replication failed
  std::vector<std::string> errors;
  double mean = 0.0;
  double se = 0.0;
  int failures = 0;
};

struct VerifyConfig {
  int dgp = 2;
  int p = 4;
  std::vector<Index> ns{100, 200, 400};
  // N = N_factor * n
  double N_factor = 20.0;
  int replications = 50;
  double noise_variance = 4.0;
  std::uint64_t seed = 0;
  std::vector<Family> families{Family::Gaussian, Family::StudentT, Family::Gumbel, Family::Clayton,
                               Family::Frank,    Family::Joe,      Family::Mixture};
  AveragingOptions averaging;
  // evaluation sample size = eval_factor * (n + N)
  Index eval_factor = 10;
  std::vector<Family> correct_set{Family::Gaussian, Family::Mixture};
};

// Ratio R(w_hat) / inf_w R(w) per replication, on a shared fresh sample.
TracePoint optimality_point(const VerifyConfig& cfg, Index n, Index N);
std::vector<TracePoint> verify_optimality(const VerifyConfig& cfg);

// (1 - w_delta)^2 per replication, w_delta the CRMA weight on cfg.correct_set.
TracePoint weight_point(const VerifyConfig& cfg, Index n, Index N);
std::vector<TracePoint> verify_weight_consistency(const VerifyConfig& cfg);

// (ratio_N - 1) / (ratio_0 - 1) on mean ratios.
double compute_r1(const TracePoint& at_N, const TracePoint& at_zero);
// mean (1-w_delta)^2 at N over the same at N = 0.
double compute_r2(const TracePoint& at_N, const TracePoint& at_zero);

}  // namespace semicop
