#include "semicop/simbench.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <limits>

#include "semicop/error.hpp"
#include "semicop/rng.hpp"
#include "semicop/simplex_qp.hpp"
#include "semicop/stats.hpp"

namespace semicop {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void fill_covariates(Engine& g, Matrix& x) {
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) x(i, j) = standard_normal(g);
}

double row_mean(const DGPSpec& spec, const Matrix& x, Index i) {
  return true_mean(spec, std::span(x.row(i).data(), static_cast<size_t>(x.cols())));
}

// Same summation order as predict_average_batch.
Vector combine(const Matrix& P, const Vector& w) {
  Vector out(P.rows());
  for (Index i = 0; i < P.rows(); ++i) {
    double s = 0.0;
    for (Index m = 0; m < P.cols(); ++m) s += w(m) * P(i, m);
    out(i) = s;
  }
  return out;
}

std::vector<CopulaFamily> candidates(std::span<const Family> tags, int p) {
  if (tags.empty()) throw ConfigError("no candidate copulas selected");
  std::vector<CopulaFamily> out;
  for (Family f : tags) out.push_back({f, p + 1, CorrStructure::Unstructured});
  return out;
}

void summarize(std::span<const double> values, double& mean_out, double& se_out, int& failures) {
  std::vector<double> ok;
  for (double v : values)
    if (std::isfinite(v)) ok.push_back(v);
  failures = static_cast<int>(values.size() - ok.size());
  mean_out = ok.empty() ? kNaN : mean(ok);
  se_out = ok.size() < 2 ? kNaN : standard_error(ok);
}

AveragingOptions replication_options(const AveragingOptions& base, std::uint64_t rs) {
  AveragingOptions o = base;
  o.fit.seed = derive_seed(rs, 2);
  return o;
}

DGPSpec replication_spec(int dgp, int p, Index n, Index N, double noise, std::uint64_t rs, Index test_size) {
  DGPSpec s;
  s.id = dgp;
  s.p = p;
  s.n = n;
  s.N = N;
  s.noise_variance = noise;
  s.seed = derive_seed(rs, 1);
  s.test_size = test_size;
  s.validate();
  return s;
}

}  // namespace

void DGPSpec::validate() const {
  if (id < 1 || id > 5) throw ConfigError("unknown DGP id " + std::to_string(id));
  if (p < 1) throw ConfigError("DGP needs p >= 1");
  if (n < 1) throw ConfigError("DGP needs n >= 1");
  if (N < 0) throw ConfigError("DGP needs N >= 0");
  if (!(noise_variance > 0.0) || !std::isfinite(noise_variance))
    throw ConfigError("noise variance must be positive");
}

double true_mean(const DGPSpec& spec, std::span<const double> x) {
  if (spec.id < 1 || spec.id > 5) throw ConfigError("unknown DGP id " + std::to_string(spec.id));
  double lin = 0.0, sq = 0.0, cub = 0.0;
  for (double v : x) {
    lin += v;
    sq += v * v;
    cub += v * v * v - v * v + std::exp(v);
  }
  switch (spec.id) {
    case 1: return lin;
    case 2: return lin + sq;
    case 3: return lin + 0.3 * sq;
    case 4: return lin + cub;
    default: return lin + 0.3 * cub;
  }
}

SimSample generate(const DGPSpec& spec) {
  spec.validate();
  const Index p = spec.p;
  const double sd = std::sqrt(spec.noise_variance);
  Engine g(spec.seed);
  SimSample s;
  s.train.labeled_x = Matrix(spec.n, p);
  s.train.labeled_y = Vector(spec.n);
  for (Index i = 0; i < spec.n; ++i) {
    for (Index j = 0; j < p; ++j) s.train.labeled_x(i, j) = standard_normal(g);
    s.train.labeled_y(i) = row_mean(spec, s.train.labeled_x, i) + sd * standard_normal(g);
  }
  s.train.unlabeled_x = Matrix(spec.N, p);
  fill_covariates(g, s.train.unlabeled_x);
  const Index t = spec.effective_test_size();
  s.test_x = Matrix(t, p);
  s.test_y = Vector(t);
  s.test_mean = Vector(t);
  for (Index i = 0; i < t; ++i) {
    for (Index j = 0; j < p; ++j) s.test_x(i, j) = standard_normal(g);
    s.test_mean(i) = row_mean(spec, s.test_x, i);
    s.test_y(i) = s.test_mean(i) + sd * standard_normal(g);
  }
  return s;
}

void draw_evaluation(const DGPSpec& spec, Index count, std::uint64_t seed, Matrix& x, Vector& mean_out) {
  spec.validate();
  Engine g(seed);
  x = Matrix(count, spec.p);
  fill_covariates(g, x);
  mean_out = Vector(count);
  for (Index i = 0; i < count; ++i) mean_out(i) = row_mean(spec, x, i);
}

double mspe(const Vector& predictions, const Vector& y) {
  if (y.size() == 0) throw DataError("empty test set");
  if (predictions.size() != y.size()) throw DataError("prediction count does not match the test set");
  return (predictions - y).squaredNorm() / static_cast<double>(y.size());
}

double mspe(const AveragedModel& model, const Matrix& test_x, const Vector& test_y) {
  return mspe(predict_average_batch(model, test_x), test_y);
}

std::uint64_t replication_seed(std::uint64_t master, int r) {
  return splitmix64(master + static_cast<std::uint64_t>(r));
}

std::string method_name(Method m, int K) {
  switch (m) {
    case Method::CRMA: return std::to_string(K) + "-CRMA";
    case Method::LABEL: return std::to_string(K) + "-LABEL";
    case Method::SBIC: return "SBIC";
    case Method::BICMS: return "BICMS";
    case Method::EWMA: return "EWMA";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  // an optional "K-" prefix is accepted for the cross-validated methods
  if (auto dash = s.find('-'); dash != std::string::npos) s = s.substr(dash + 1);
  if (s == "CRMA") return Method::CRMA;
  if (s == "LABEL") return Method::LABEL;
  if (s == "SBIC") return Method::SBIC;
  if (s == "BICMS") return Method::BICMS;
  if (s == "EWMA") return Method::EWMA;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

std::vector<BenchResult> run_benchmark(const BenchConfig& cfg) {
  if (cfg.replications < 1) throw ConfigError("replications must be at least 1");
  if (cfg.methods.empty()) throw ConfigError("no methods selected");
  std::vector<BenchResult> out;
  const int R = cfg.replications;
  const auto nm = cfg.methods.size();
  for (const auto& cell : cfg.cells) {
    const auto fams = candidates(cfg.families, cell.p);
    // validate the cell before spending time on it
    replication_spec(cell.dgp, cell.p, cell.n, cell.N, cfg.noise_variance, 0, -1);
    std::vector<std::vector<double>> vals(nm, std::vector<double>(static_cast<size_t>(R), kNaN));
    std::vector<std::vector<std::string>> errs(nm, std::vector<std::string>(static_cast<size_t>(R)));

#pragma omp parallel for schedule(dynamic, 1)
    for (int r = 0; r < R; ++r) {
      const auto rs = replication_seed(cfg.seed, r);
      const auto ri = static_cast<size_t>(r);
      std::string shared_error;
      try {
        const auto spec = replication_spec(cell.dgp, cell.p, cell.n, cell.N, cfg.noise_variance, rs, -1);
        const auto sample = generate(spec);
        const auto opts = replication_options(cfg.averaging, rs);
        bool need_full = false;
        for (Method m : cfg.methods) need_full |= m != Method::LABEL;
        CandidateSet set;
        Matrix P;
        if (need_full) {
          set = fit_candidate_set(sample.train, fams, opts.fit);
          P = candidate_predictions(set.regressors, sample.test_x);
        }
        for (size_t k = 0; k < nm; ++k) {
          const Method m = cfg.methods[k];
          try {
            if (m == Method::LABEL) {
              const Dataset lab = sample.train.without_unlabeled();
              const auto lset = fit_candidate_set(lab, fams, opts.fit);
              const Vector w = scheme_weights(WeightScheme::CRMA, lab, lset, opts);
              const Matrix PL = candidate_predictions(lset.regressors, sample.test_x);
              vals[k][ri] = mspe(combine(PL, w), sample.test_y);
              continue;
            }
            WeightScheme s = WeightScheme::CRMA;
            if (m == Method::SBIC) s = WeightScheme::SBIC;
            if (m == Method::BICMS) s = WeightScheme::BICMS;
            if (m == Method::EWMA) s = WeightScheme::EWMA;
            const Vector w = scheme_weights(s, sample.train, set, opts);
            vals[k][ri] = mspe(combine(P, w), sample.test_y);
          } catch (const std::exception& e) {
            errs[k][ri] = e.what();
          }
        }
      } catch (const std::exception& e) {
        for (size_t k = 0; k < nm; ++k) errs[k][ri] = e.what();
      }
    }

    for (size_t k = 0; k < nm; ++k) {
      BenchResult res;
      res.method = method_name(cfg.methods[k], cfg.averaging.K);
      res.cell = cell;
      res.mspe = std::move(vals[k]);
      res.errors = std::move(errs[k]);
      summarize(res.mspe, res.mean, res.se, res.failures);
      out.push_back(std::move(res));
    }
  }
  return out;
}

RiskForm risk_form(const Matrix& predictions, const Vector& mean_in) {
  if (predictions.rows() != mean_in.size() || predictions.rows() == 0)
    throw DataError("risk form needs one true mean per evaluation row");
  const double m = static_cast<double>(predictions.rows());
  const Eigen::MatrixXd P = predictions;
  RiskForm f;
  f.B = (P.transpose() * P) / m;
  f.a = -2.0 * (P.transpose() * mean_in) / m;
  f.c = mean_in.squaredNorm() / m;
  return f;
}

double risk_on_sample(const RiskForm& form, const Vector& w) {
  return w.dot(form.B * w) + form.a.dot(w) + form.c;
}

double risk_on_sample(const Vector& w, const Matrix& predictions, const Vector& mean_in) {
  return mspe(combine(predictions, w), mean_in);
}

TracePoint optimality_point(const VerifyConfig& cfg, Index n, Index N) {
  if (cfg.replications < 1) throw ConfigError("replications must be at least 1");
  if (cfg.eval_factor < 10) throw ConfigError("evaluation sample must be at least 10 (n+N)");
  const auto fams = candidates(cfg.families, cfg.p);
  replication_spec(cfg.dgp, cfg.p, n, N, cfg.noise_variance, 0, 0);
  TracePoint tp;
  tp.n = n;
  tp.N = N;
  tp.values.assign(static_cast<size_t>(cfg.replications), kNaN);
  tp.errors.assign(static_cast<size_t>(cfg.replications), {});

#pragma omp parallel for schedule(dynamic, 1)
  for (int r = 0; r < cfg.replications; ++r) {
    const auto rs = replication_seed(cfg.seed, r);
    try {
      const auto spec = replication_spec(cfg.dgp, cfg.p, n, N, cfg.noise_variance, rs, 0);
      const auto sample = generate(spec);
      const auto opts = replication_options(cfg.averaging, rs);
      const auto set = fit_candidate_set(sample.train, fams, opts.fit);
      const Vector w = scheme_weights(WeightScheme::CRMA, sample.train, set, opts);
      double ratio = 1.0;
      if (fams.size() > 1) {
        Matrix ex;
        Vector mu;
        draw_evaluation(spec, cfg.eval_factor * (n + N), derive_seed(rs, 3), ex, mu);
        const auto form = risk_form(candidate_predictions(set.regressors, ex), mu);
        const double r_hat = risk_on_sample(form, w);
        const Vector w_inf = solve_simplex_qp(form.a, form.B).w;
        const double r_inf = std::min(risk_on_sample(form, w_inf), r_hat);
        ratio = r_hat / r_inf;
      }
      tp.values[static_cast<size_t>(r)] = ratio;
    } catch (const std::exception& e) {
      tp.errors[static_cast<size_t>(r)] = e.what();
    }
  }
  summarize(tp.values, tp.mean, tp.se, tp.failures);
  return tp;
}

std::vector<TracePoint> verify_optimality(const VerifyConfig& cfg) {
  if (cfg.dgp < 2 || cfg.dgp > 5) throw ConfigError("optimality verification uses DGP 2..5");
  std::vector<TracePoint> out;
  for (Index n : cfg.ns)
    out.push_back(optimality_point(cfg, n, static_cast<Index>(std::llround(cfg.N_factor * n))));
  return out;
}

TracePoint weight_point(const VerifyConfig& cfg, Index n, Index N) {
  if (cfg.replications < 1) throw ConfigError("replications must be at least 1");
  if (cfg.correct_set.empty()) throw ConfigError("correct_set is empty");
  const auto fams = candidates(cfg.families, cfg.p);
  std::vector<bool> correct(fams.size(), false);
  bool any = false;
  for (size_t m = 0; m < fams.size(); ++m)
    for (Family f : cfg.correct_set)
      if (fams[m].tag == f) correct[m] = any = true;
  if (!any) throw ConfigError("correct_set names no selected candidate");
  replication_spec(cfg.dgp, cfg.p, n, N, cfg.noise_variance, 0, 0);
  TracePoint tp;
  tp.n = n;
  tp.N = N;
  tp.values.assign(static_cast<size_t>(cfg.replications), kNaN);
  tp.errors.assign(static_cast<size_t>(cfg.replications), {});

#pragma omp parallel for schedule(dynamic, 1)
  for (int r = 0; r < cfg.replications; ++r) {
    const auto rs = replication_seed(cfg.seed, r);
    try {
      const auto spec = replication_spec(cfg.dgp, cfg.p, n, N, cfg.noise_variance, rs, 0);
      const auto sample = generate(spec);
      const auto opts = replication_options(cfg.averaging, rs);
      const auto set = fit_candidate_set(sample.train, fams, opts.fit);
      const Vector w = scheme_weights(WeightScheme::CRMA, sample.train, set, opts);
      double wd = 0.0;
      for (size_t m = 0; m < fams.size(); ++m)
        if (correct[m]) wd += w(static_cast<Index>(m));
      wd = std::clamp(wd, 0.0, 1.0);
      tp.values[static_cast<size_t>(r)] = (1.0 - wd) * (1.0 - wd);
    } catch (const std::exception& e) {
      tp.errors[static_cast<size_t>(r)] = e.what();
    }
  }
  summarize(tp.values, tp.mean, tp.se, tp.failures);
  return tp;
}

std::vector<TracePoint> verify_weight_consistency(const VerifyConfig& cfg) {
  std::vector<TracePoint> out;
  for (Index n : cfg.ns)
    out.push_back(weight_point(cfg, n, static_cast<Index>(std::llround(cfg.N_factor * n))));
  return out;
}

double compute_r1(const TracePoint& at_N, const TracePoint& at_zero) {
  const double den = at_zero.mean - 1.0;
  if (!(std::abs(den) >= 1e-12)) throw NumericalError("R1: ratio at N=0 is too close to 1");
  return (at_N.mean - 1.0) / den;
}

double compute_r2(const TracePoint& at_N, const TracePoint& at_zero) {
  if (!(std::abs(at_zero.mean) >= 1e-12)) throw NumericalError("R2: (1-w)^2 at N=0 is too close to 0");
  return at_N.mean / at_zero.mean;
}

}  // namespace semicop
