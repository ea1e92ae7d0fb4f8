#include "semicop/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "semicop/artifact.hpp"
#include "semicop/config.hpp"
#include "semicop/csv.hpp"
#include "semicop/error.hpp"
#include "semicop/simbench.hpp"

namespace semicop {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;
};

KeyValueConfig load_config(const Globals& g, std::span<const std::string_view> allowed) {
  KeyValueConfig c = g.config.empty() ? KeyValueConfig::parse("", "defaults") : KeyValueConfig::load(g.config);
  c.require_known(allowed);
  if (g.seed) c.set("seed", std::to_string(*g.seed));
  if (g.threads) c.set("threads", std::to_string(*g.threads));
  if (!g.out.empty()) c.set("out", g.out);
  return c;
}

void apply_threads(const KeyValueConfig& c) {
  const int t = c.get_int("threads", 0);
  if (t < 0) throw ConfigError("threads must be nonnegative");
  if (t > 0) omp_set_num_threads(t);
}

std::string out_dir(const KeyValueConfig& c) {
  const std::string d = c.get_string("out", ".");
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw DataError("cannot create output directory '" + d + "': " + ec.message());
  return d;
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::string num(double v) { return std::isfinite(v) ? format_double(v) : "nan"; }

json errors_json(const std::vector<std::string>& errors) {
  json a = json::array();
  for (size_t r = 0; r < errors.size(); ++r)
    if (!errors[r].empty()) a.push_back({{"replication", r}, {"message", errors[r]}});
  return a;
}

int cmd_simulate(const Globals& g, std::optional<int> dgp, std::optional<int> p, std::optional<Index> n,
                 std::optional<Index> N, std::optional<double> noise, std::optional<Index> test_size,
                 std::ostream& out) {
  auto c = load_config(g, simulate_config_keys());
  if (dgp) c.set("dgp", std::to_string(*dgp));
  if (p) c.set("p", std::to_string(*p));
  if (n) c.set("n", std::to_string(*n));
  if (N) c.set("N", std::to_string(*N));
  if (noise) c.set("noise_variance", format_double(*noise));
  if (test_size) c.set("test_size", std::to_string(*test_size));
  const DGPSpec s = dgp_spec_from(c);
  const std::string dir = out_dir(c);
  const auto d = generate(s);
  auto lh = covariate_header(s.p);
  lh.push_back("y");
  Matrix lab(s.n, s.p + 1);
  lab.leftCols(s.p) = d.train.labeled_x;
  lab.col(s.p) = d.train.labeled_y;
  write_text(join(dir, "labeled.csv"), csv_text(lh, lab));
  write_text(join(dir, "unlabeled.csv"), csv_text(covariate_header(s.p), d.train.unlabeled_x));
  if (s.test_size > 0) {
    auto th = lh;
    th.push_back("mu");
    Matrix t(s.test_size, s.p + 2);
    t.leftCols(s.p) = d.test_x;
    t.col(s.p) = d.test_y;
    t.col(s.p + 1) = d.test_mean;
    write_text(join(dir, "test.csv"), csv_text(th, t));
  }
  out << "wrote " << s.n << " labeled and " << s.N << " unlabeled rows to " << dir << "\n";
  return 0;
}

int cmd_fit(const Globals& g, const std::string& labeled, const std::string& unlabeled, std::ostream& out) {
  const auto c = load_config(g, run_config_keys());
  const RunConfig rc = run_config_from(c);
  apply_threads(c);
  Dataset d = read_labeled(labeled);
  if (!unlabeled.empty()) {
    d.unlabeled_x = read_covariates(unlabeled);
    if (d.unlabeled_x.cols() != d.p())
      throw DataError(unlabeled + ": has " + std::to_string(d.unlabeled_x.cols()) + " covariates, " + labeled +
                      " has " + std::to_string(d.p()));
  }
  const std::string dir = out_dir(c);
  const auto fams = candidate_families(rc, static_cast<int>(d.p() + 1));
  const auto model = fit_model_average(d, fams, rc.averaging);
  save_model(join(dir, "model.json"), model);
  const std::string report = fit_report_json(model);
  write_text(join(dir, "fit_report.json"), report);
  out << "fitted " << fams.size() << " candidates on n=" << d.n() << ", N=" << d.N() << " ("
      << scheme_name(rc.averaging.scheme) << ")\nweights:";
  for (Index m = 0; m < model.weights.size(); ++m)
    out << " " << family_name(fams[static_cast<size_t>(m)].tag) << "=" << format_double(model.weights(m));
  out << "\n";
  return 0;
}

int cmd_predict(const Globals& g, const std::string& model_path, const std::string& query,
                std::ostream& out) {
  if (!g.config.empty()) load_config(g, run_config_keys());
  if (g.threads) omp_set_num_threads(*g.threads);
  if (g.out.empty()) throw ConfigError("predict needs --out for the prediction file");
  const auto model = load_model(model_path);
  const auto t = read_csv(query);
  const Index p = model.regressors.front().margins().p();
  std::vector<Index> xcols;
  for (Index j = 1; j <= p; ++j) {
    const auto it = std::find(t.header.begin(), t.header.end(), "x" + std::to_string(j));
    if (it == t.header.end())
      throw DataError(query + ": missing column 'x" + std::to_string(j) + "' (model has p=" + std::to_string(p) + ")");
    xcols.push_back(static_cast<Index>(it - t.header.begin()));
  }
  for (const auto& h : t.header)
    if (h.size() > 1 && h[0] == 'x' && std::all_of(h.begin() + 1, h.end(), ::isdigit) && std::stoll(h.substr(1)) > p)
      throw DataError(query + ": column '" + h + "' exceeds the model dimension p=" + std::to_string(p));
  Matrix xs(t.values.rows(), p);
  for (Index j = 0; j < p; ++j) xs.col(j) = t.values.col(xcols[static_cast<size_t>(j)]);
  const Vector yhat = predict_average_batch(model, xs);
  auto header = t.header;
  header.push_back("y_hat");
  Matrix all(t.values.rows(), t.values.cols() + 1);
  all.leftCols(t.values.cols()) = t.values;
  all.col(t.values.cols()) = yhat;
  write_text(g.out, csv_text(header, all));
  out << "wrote " << xs.rows() << " predictions to " << g.out << "\n";
  return 0;
}

int cmd_bench(const Globals& g, std::ostream& out, std::ostream& err) {
  if (g.config.empty()) throw ConfigError("bench needs --config");
  const auto c = load_config(g, bench_config_keys());
  const BenchConfig b = bench_config_from(c);
  apply_threads(c);
  const std::string dir = out_dir(c);
  const auto results = run_benchmark(b);
  json summary;
  summary["replications"] = b.replications;
  summary["seed"] = b.seed;
  summary["cells"] = json::array();
  int failures = 0;
  const size_t nm = b.methods.size();
  for (size_t ci = 0; ci < b.cells.size(); ++ci) {
    const auto& cell = b.cells[ci];
    const std::string name = "bench_dgp" + std::to_string(cell.dgp) + "_p" + std::to_string(cell.p) + "_n" +
                             std::to_string(cell.n) + "_N" + std::to_string(cell.N) + ".csv";
    std::string text = "replication";
    for (size_t k = 0; k < nm; ++k) text += "," + results[ci * nm + k].method;
    text += "\n";
    for (int r = 0; r < b.replications; ++r) {
      text += std::to_string(r);
      for (size_t k = 0; k < nm; ++k) text += "," + num(results[ci * nm + k].mspe[static_cast<size_t>(r)]);
      text += "\n";
    }
    write_text(join(dir, name), text);
    json cj{{"dgp", cell.dgp}, {"p", cell.p}, {"n", cell.n}, {"N", cell.N}, {"file", name}};
    cj["methods"] = json::array();
    for (size_t k = 0; k < nm; ++k) {
      const auto& r = results[ci * nm + k];
      failures += r.failures;
      cj["methods"].push_back({{"method", r.method},
                               {"mean", r.mean},
                               {"se", r.se},
                               {"failures", r.failures},
                               {"partial", r.partial()},
                               {"errors", errors_json(r.errors)}});
      out << "dgp" << cell.dgp << " p=" << cell.p << " n=" << cell.n << " N=" << cell.N << "  " << r.method
          << "  mean MSPE " << num(r.mean) << " (se " << num(r.se) << ")" << (r.partial() ? "  partial" : "")
          << "\n";
    }
    summary["cells"].push_back(std::move(cj));
  }
  write_text(join(dir, "summary.json"), summary.dump(2) + "\n");
  if (failures > 0) {
    err << failures << " replication(s) failed; see summary.json\n";
    return 3;
  }
  return 0;
}

std::string trace_rows(const std::vector<TracePoint>& pts, const char* value_name) {
  std::string t = std::string("n,N,replication,") + value_name + "\n";
  for (const auto& p : pts)
    for (size_t r = 0; r < p.values.size(); ++r)
      t += std::to_string(p.n) + "," + std::to_string(p.N) + "," + std::to_string(r) + "," + num(p.values[r]) + "\n";
  return t;
}

json trace_json(const TracePoint& p) {
  return {{"n", p.n}, {"N", p.N}, {"mean", p.mean}, {"se", p.se}, {"failures", p.failures},
          {"errors", errors_json(p.errors)}};
}

int cmd_verify(const Globals& g, const std::string& mode, std::ostream& out, std::ostream& err) {
  if (mode != "optimality" && mode != "weights") throw ConfigError("verify mode must be 'optimality' or 'weights'");
  const auto c = load_config(g, verify_config_keys());
  VerifySweep sweep;
  VerifyConfig v = verify_config_from(c, &sweep);
  if (mode == "weights" && !c.has("dgp")) v.dgp = 1;
  apply_threads(c);
  const std::string dir = out_dir(c);
  const bool opt = mode == "optimality";
  const auto pts = opt ? verify_optimality(v) : verify_weight_consistency(v);
  std::vector<TracePoint> sweep_pts;
  if (!sweep.r_N_factors.empty()) {
    sweep_pts.push_back(opt ? optimality_point(v, sweep.r_n, 0) : weight_point(v, sweep.r_n, 0));
    for (double f : sweep.r_N_factors) {
      const auto N = static_cast<Index>(std::llround(f * static_cast<double>(sweep.r_n)));
      sweep_pts.push_back(opt ? optimality_point(v, sweep.r_n, N) : weight_point(v, sweep.r_n, N));
    }
  }

  int failures = 0;
  json summary{{"mode", mode}, {"dgp", v.dgp}, {"p", v.p}, {"replications", v.replications}, {"seed", v.seed}};
  summary["points"] = json::array();
  std::string text = opt ? "n,ratio_mean,ratio_se\n" : "n,one_minus_wsum_sq_mean\n";
  for (const auto& p : pts) {
    text += std::to_string(p.n) + "," + num(p.mean) + (opt ? "," + num(p.se) : "") + "\n";
    failures += p.failures;
    summary["points"].push_back(trace_json(p));
    out << "n=" << p.n << " N=" << p.N << "  " << (opt ? "ratio " : "(1-w)^2 ") << num(p.mean) << "\n";
  }
  write_text(join(dir, opt ? "optimality.csv" : "weights.csv"), text);
  write_text(join(dir, opt ? "optimality_replications.csv" : "weights_replications.csv"),
             trace_rows(pts, opt ? "ratio" : "one_minus_wsum_sq"));
  if (!sweep_pts.empty()) {
    std::string rt = opt ? "N,ratio_mean,r1\n" : "N,one_minus_wsum_sq_mean,r2\n";
    summary["sweep"] = json::array();
    for (size_t k = 1; k < sweep_pts.size(); ++k) {
      double r = std::numeric_limits<double>::quiet_NaN();
      try {
        r = opt ? compute_r1(sweep_pts[k], sweep_pts[0]) : compute_r2(sweep_pts[k], sweep_pts[0]);
      } catch (const NumericalError& e) {
        err << "warning: " << e.what() << "\n";
      }
      rt += std::to_string(sweep_pts[k].N) + "," + num(sweep_pts[k].mean) + "," + num(r) + "\n";
      out << "n=" << sweep.r_n << " N=" << sweep_pts[k].N << (opt ? "  R1 " : "  R2 ") << num(r) << "\n";
    }
    for (const auto& p : sweep_pts) {
      failures += p.failures;
      summary["sweep"].push_back(trace_json(p));
    }
    write_text(join(dir, opt ? "r1.csv" : "r2.csv"), rt);
  }
  write_text(join(dir, opt ? "optimality_summary.json" : "weights_summary.json"), summary.dump(2) + "\n");
  if (failures > 0) {
    err << failures << " replication(s) failed; see the summary JSON\n";
    return 3;
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semi-supervised copula regression with cross-validated model averaging"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  int threads = 0;
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config)");
  auto* threads_opt = app.add_option("--threads", threads, "OpenMP threads (default: all)");
  app.add_option("--config", g.config, "key = value configuration file");
  app.add_option("--out", g.out, "output directory (predict: output file)");

  auto* sim = app.add_subcommand("simulate", "draw a labeled/unlabeled sample from a simulation design");
  std::optional<int> dgp, p;
  std::optional<Index> n, N, test_size;
  std::optional<double> noise;
  sim->add_option("--dgp", dgp, "design 1..5");
  sim->add_option("-p,--dim", p, "covariate dimension");
  sim->add_option("-n,--labeled-size", n, "labeled rows");
  sim->add_option("-N,--unlabeled-size", N, "unlabeled rows");
  sim->add_option("--noise-variance", noise, "error variance");
  sim->add_option("--test-size", test_size, "also write test.csv with this many rows");

  auto* fit = app.add_subcommand("fit", "fit the candidate copulas and their averaging weights");
  std::string labeled, unlabeled;
  fit->add_option("--labeled", labeled, "CSV with x1..xp,y")->required();
  fit->add_option("--unlabeled", unlabeled, "CSV with x1..xp (omit for labeled-only fitting)");

  auto* pred = app.add_subcommand("predict", "predict with a saved model");
  std::string model_path, query;
  pred->add_option("--model", model_path, "model.json written by fit")->required();
  pred->add_option("--query", query, "CSV with x1..xp")->required();

  app.add_subcommand("bench", "run an MSPE benchmark grid");
  auto* ver = app.add_subcommand("verify", "Monte-Carlo optimality or weight-consistency traces");
  std::string mode;
  ver->add_option("mode", mode, "optimality | weights")->required();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return 1;
  }
  if (seed_opt->count()) g.seed = seed;
  if (threads_opt->count()) {
    if (threads < 1) {
      err << "error: --threads must be positive\n";
      return 1;
    }
    g.threads = threads;
  }

  try {
    if (sim->parsed()) return cmd_simulate(g, dgp, p, n, N, noise, test_size, out);
    if (fit->parsed()) return cmd_fit(g, labeled, unlabeled, out);
    if (pred->parsed()) return cmd_predict(g, model_path, query, out);
    if (ver->parsed()) return cmd_verify(g, mode, out, err);
    return cmd_bench(g, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const DomainError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace semicop
