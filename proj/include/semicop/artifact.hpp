#pragma once

#include <string>

#include "semicop/averaging.hpp"

namespace semicop {

inline constexpr int kModelSchemaVersion = 1;

// JSON text of a fitted model: candidate families and natural parameters,
// weights, labeled responses and the sorted margin samples. Doubles are
// written in shortest round-trip form, so a reload predicts bit-identically.
std::string model_to_json(const AveragedModel& model);
// Throws DataError for malformed or mismatched artifacts.
AveragedModel model_from_json(const std::string& text, const std::string& source = "model");

void save_model(const std::string& path, const AveragedModel& model);
AveragedModel load_model(const std::string& path);

// Per-candidate estimates, log-likelihood, BIC and weight.
std::string fit_report_json(const AveragedModel& model);

}  // namespace semicop
