#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semicop/simbench.hpp"

namespace semicop {

// Flat "key = value" file. '#' starts a comment; keys are unique. Lists are
// comma-separated. Every accessor throws ConfigError naming the key and line.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text, std::string source);
  static KeyValueConfig load(const std::string& path);

  bool has(std::string_view key) const;
  // Rejects keys outside `allowed`.
  void require_known(std::span<const std::string_view> allowed) const;

  std::string get_string(std::string_view key, std::string fallback) const;
  int get_int(std::string_view key, int fallback) const;
  std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
  double get_double(std::string_view key, double fallback) const;
  std::vector<std::string> get_list(std::string_view key, std::vector<std::string> fallback) const;
  std::vector<Index> get_index_list(std::string_view key, std::vector<Index> fallback) const;
  std::vector<double> get_double_list(std::string_view key, std::vector<double> fallback) const;

  void set(std::string key, std::string value);

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  const Entry* find(std::string_view key) const;
  [[noreturn]] void fail(std::string_view key, const Entry& e, const std::string& what) const;

  std::string source_;
  std::map<std::string, Entry, std::less<>> entries_;
};

// Settings shared by fit, bench and verify.
struct RunConfig {
  std::vector<Family> families{Family::Gaussian, Family::StudentT, Family::Gumbel, Family::Clayton,
                               Family::Frank,    Family::Joe,      Family::Mixture};
  CorrStructure corr = CorrStructure::Unstructured;
  AveragingOptions averaging;
  int threads = 0;  // 0: OpenMP default
  std::string out;
};

std::vector<std::string_view> run_config_keys();
RunConfig run_config_from(const KeyValueConfig& c);
std::vector<CopulaFamily> candidate_families(const RunConfig& rc, int dim);

std::vector<std::string_view> simulate_config_keys();
DGPSpec dgp_spec_from(const KeyValueConfig& c);

std::vector<std::string_view> bench_config_keys();
BenchConfig bench_config_from(const KeyValueConfig& c);

// Keys for the R1 / R2 sweeps: r_n and r_N_factors (N = factor * r_n, plus N = 0).
struct VerifySweep {
  Index r_n = 100;
  std::vector<double> r_N_factors;
};

std::vector<std::string_view> verify_config_keys();
VerifyConfig verify_config_from(const KeyValueConfig& c, VerifySweep* sweep = nullptr);

}  // namespace semicop
