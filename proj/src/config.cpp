#include "semicop/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "semicop/error.hpp"

namespace semicop {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
bool parse_number(const std::string& s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

constexpr std::string_view kRunKeys[] = {"seed",      "threads",       "out",
                                         "families",  "correlation",   "K",
                                         "scheme",    "restarts",      "fold_restarts",
                                         "max_iterations", "tolerance", "gradient_tolerance"};

std::vector<std::string_view> with_run_keys(std::initializer_list<std::string_view> extra) {
  std::vector<std::string_view> k(std::begin(kRunKeys), std::end(kRunKeys));
  k.insert(k.end(), extra.begin(), extra.end());
  return k;
}

std::vector<Family> family_list(const KeyValueConfig& c, std::string_view key, std::vector<Family> fallback) {
  if (!c.has(key)) return fallback;
  std::vector<Family> out;
  for (const auto& s : c.get_list(key, {})) {
    const Family f = parse_family(s);
    if (std::find(out.begin(), out.end(), f) != out.end())
      throw ConfigError(std::string(key) + ": '" + s + "' is listed twice");
    out.push_back(f);
  }
  if (out.empty()) throw ConfigError(std::string(key) + " is empty");
  return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, std::string source) {
  KeyValueConfig c;
  c.source_ = std::move(source);
  std::istringstream in{std::string(text)};
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(c.source_ + ":" + std::to_string(no) + ": expected 'key = value'");
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError(c.source_ + ":" + std::to_string(no) + ": empty key");
    if (c.entries_.count(key))
      throw ConfigError(c.source_ + ":" + std::to_string(no) + ": key '" + key + "' set twice");
    c.entries_[key] = {std::move(value), no};
  }
  return c;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

bool KeyValueConfig::has(std::string_view key) const { return find(key) != nullptr; }

const KeyValueConfig::Entry* KeyValueConfig::find(std::string_view key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void KeyValueConfig::fail(std::string_view key, const Entry& e, const std::string& what) const {
  const std::string where = e.line > 0 ? source_ + ":" + std::to_string(e.line) : source_;
  throw ConfigError(where + ": " + std::string(key) + " = '" + e.value + "': " + what);
}

void KeyValueConfig::require_known(std::span<const std::string_view> allowed) const {
  for (const auto& [key, e] : entries_)
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      fail(key, e, "unknown key");
}

void KeyValueConfig::set(std::string key, std::string value) {
  if (source_.empty()) source_ = "command line";
  entries_[std::move(key)] = {std::move(value), 0};
}

std::string KeyValueConfig::get_string(std::string_view key, std::string fallback) const {
  const auto* e = find(key);
  return e ? e->value : fallback;
}

int KeyValueConfig::get_int(std::string_view key, int fallback) const {
  const auto* e = find(key);
  if (!e) return fallback;
  int v = 0;
  if (!parse_number(e->value, v)) fail(key, *e, "expected an integer");
  return v;
}

std::uint64_t KeyValueConfig::get_u64(std::string_view key, std::uint64_t fallback) const {
  const auto* e = find(key);
  if (!e) return fallback;
  std::uint64_t v = 0;
  if (!parse_number(e->value, v)) fail(key, *e, "expected a nonnegative integer");
  return v;
}

double KeyValueConfig::get_double(std::string_view key, double fallback) const {
  const auto* e = find(key);
  if (!e) return fallback;
  double v = 0.0;
  if (!parse_number(e->value, v) || !std::isfinite(v)) fail(key, *e, "expected a finite number");
  return v;
}

std::vector<std::string> KeyValueConfig::get_list(std::string_view key, std::vector<std::string> fallback) const {
  const auto* e = find(key);
  return e ? split_list(e->value) : fallback;
}

std::vector<Index> KeyValueConfig::get_index_list(std::string_view key, std::vector<Index> fallback) const {
  const auto* e = find(key);
  if (!e) return fallback;
  std::vector<Index> out;
  for (const auto& s : split_list(e->value)) {
    long long v = 0;
    if (!parse_number(s, v)) fail(key, *e, "'" + s + "' is not an integer");
    out.push_back(static_cast<Index>(v));
  }
  return out;
}

std::vector<double> KeyValueConfig::get_double_list(std::string_view key, std::vector<double> fallback) const {
  const auto* e = find(key);
  if (!e) return fallback;
  std::vector<double> out;
  for (const auto& s : split_list(e->value)) {
    double v = 0.0;
    if (!parse_number(s, v) || !std::isfinite(v)) fail(key, *e, "'" + s + "' is not a finite number");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string_view> run_config_keys() { return with_run_keys({}); }

RunConfig run_config_from(const KeyValueConfig& c) {
  RunConfig rc;
  rc.families = family_list(c, "families", rc.families);
  const std::string corr = c.get_string("correlation", "unstructured");
  if (corr == "unstructured") rc.corr = CorrStructure::Unstructured;
  else if (corr == "exchangeable") rc.corr = CorrStructure::Exchangeable;
  else throw ConfigError("correlation must be 'unstructured' or 'exchangeable', got '" + corr + "'");
  auto& a = rc.averaging;
  a.K = c.get_int("K", a.K);
  if (a.K < 2) throw ConfigError("K must be at least 2");
  a.scheme = parse_scheme(c.get_string("scheme", std::string(scheme_name(a.scheme))));
  a.fit.restarts = c.get_int("restarts", a.fit.restarts);
  a.fold_restarts = c.get_int("fold_restarts", a.fold_restarts);
  a.fit.max_iterations = c.get_int("max_iterations", a.fit.max_iterations);
  a.fit.tolerance = c.get_double("tolerance", a.fit.tolerance);
  a.fit.gradient_tolerance = c.get_double("gradient_tolerance", a.fit.gradient_tolerance);
  a.fit.seed = c.get_u64("seed", a.fit.seed);
  if (a.fit.restarts < 1 || a.fold_restarts < 1) throw ConfigError("restarts must be at least 1");
  if (a.fit.max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (!(a.fit.tolerance > 0.0) || !(a.fit.gradient_tolerance > 0.0))
    throw ConfigError("tolerances must be positive");
  rc.threads = c.get_int("threads", 0);
  if (rc.threads < 0) throw ConfigError("threads must be nonnegative");
  rc.out = c.get_string("out", "");
  return rc;
}

std::vector<CopulaFamily> candidate_families(const RunConfig& rc, int dim) {
  std::vector<CopulaFamily> out;
  for (Family f : rc.families) out.push_back({f, dim, rc.corr});
  return out;
}

std::vector<std::string_view> simulate_config_keys() {
  return {"dgp", "p", "n", "N", "noise_variance", "test_size", "seed", "threads", "out"};
}

DGPSpec dgp_spec_from(const KeyValueConfig& c) {
  DGPSpec s;
  s.id = c.get_int("dgp", s.id);
  s.p = c.get_int("p", s.p);
  s.n = c.get_int("n", static_cast<int>(s.n));
  s.N = c.get_int("N", static_cast<int>(s.N));
  s.noise_variance = c.get_double("noise_variance", s.noise_variance);
  s.test_size = c.get_int("test_size", 0);
  s.seed = c.get_u64("seed", s.seed);
  s.validate();
  if (s.test_size < 0) throw ConfigError("test_size must be nonnegative");
  return s;
}

std::vector<std::string_view> bench_config_keys() {
  return with_run_keys({"dgp", "p", "sizes", "replications", "noise_variance", "methods"});
}

BenchConfig bench_config_from(const KeyValueConfig& c) {
  const RunConfig rc = run_config_from(c);
  BenchConfig b;
  b.families = rc.families;
  b.averaging = rc.averaging;
  b.seed = rc.averaging.fit.seed;
  b.replications = c.get_int("replications", b.replications);
  b.noise_variance = c.get_double("noise_variance", b.noise_variance);
  if (c.has("methods")) {
    b.methods.clear();
    for (const auto& m : c.get_list("methods", {})) b.methods.push_back(parse_method(m));
    if (b.methods.empty()) throw ConfigError("methods is empty");
  }
  const auto dgps = c.get_index_list("dgp", {1});
  const auto ps = c.get_index_list("p", {4});
  std::vector<std::pair<Index, Index>> sizes;
  for (const auto& s : c.get_list("sizes", {"200:200"})) {
    const auto colon = s.find(':');
    long long n = 0, N = 0;
    if (colon == std::string::npos || !parse_number(s.substr(0, colon), n) || !parse_number(s.substr(colon + 1), N))
      throw ConfigError("sizes: '" + s + "' is not of the form n:N");
    sizes.emplace_back(n, N);
  }
  for (Index d : dgps)
    for (Index p : ps)
      for (const auto& [n, N] : sizes) {
        DGPSpec s;
        s.id = static_cast<int>(d);
        s.p = static_cast<int>(p);
        s.n = n;
        s.N = N;
        s.noise_variance = b.noise_variance;
        s.validate();
        b.cells.push_back({s.id, s.p, n, N});
      }
  if (b.cells.empty()) throw ConfigError("the benchmark grid is empty");
  if (b.replications < 1) throw ConfigError("replications must be at least 1");
  return b;
}

std::vector<std::string_view> verify_config_keys() {
  return with_run_keys({"dgp", "p", "ns", "N_factor", "replications", "noise_variance", "eval_factor",
                        "correct_set", "r_n", "r_N_factors"});
}

VerifyConfig verify_config_from(const KeyValueConfig& c, VerifySweep* sweep) {
  const RunConfig rc = run_config_from(c);
  VerifyConfig v;
  v.families = rc.families;
  v.averaging = rc.averaging;
  v.seed = rc.averaging.fit.seed;
  v.dgp = c.get_int("dgp", v.dgp);
  v.p = c.get_int("p", v.p);
  v.ns = c.get_index_list("ns", v.ns);
  v.N_factor = c.get_double("N_factor", v.N_factor);
  v.replications = c.get_int("replications", v.replications);
  v.noise_variance = c.get_double("noise_variance", v.noise_variance);
  v.eval_factor = c.get_int("eval_factor", static_cast<int>(v.eval_factor));
  v.correct_set = family_list(c, "correct_set", v.correct_set);
  if (v.ns.empty()) throw ConfigError("ns is empty");
  for (Index n : v.ns)
    if (n < 1) throw ConfigError("ns entries must be positive");
  if (!(v.N_factor >= 0.0)) throw ConfigError("N_factor must be nonnegative");
  if (v.replications < 1) throw ConfigError("replications must be at least 1");
  if (v.eval_factor < 10) throw ConfigError("eval_factor must be at least 10");
  if (sweep) {
    sweep->r_n = c.get_int("r_n", static_cast<int>(sweep->r_n));
    sweep->r_N_factors = c.get_double_list("r_N_factors", sweep->r_N_factors);
    if (sweep->r_n < 1) throw ConfigError("r_n must be positive");
    for (double f : sweep->r_N_factors)
      if (!(f > 0.0)) throw ConfigError("r_N_factors entries must be positive");
  }
  return v;
}

}  // namespace semicop
