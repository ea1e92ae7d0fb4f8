#include "semicop/artifact.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "semicop/csv.hpp"
#include "semicop/error.hpp"

namespace semicop {

using nlohmann::json;

namespace {

std::string_view corr_name(CorrStructure c) {
  return c == CorrStructure::Exchangeable ? "exchangeable" : "unstructured";
}

CorrStructure parse_corr(const std::string& s) {
  if (s == "exchangeable") return CorrStructure::Exchangeable;
  if (s == "unstructured") return CorrStructure::Unstructured;
  throw DataError("unknown correlation structure '" + s + "'");
}

json vec(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector to_vector(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

std::string model_to_json(const AveragedModel& model) {
  if (model.regressors.empty()) throw DataError("cannot serialise an empty model");
  const auto& first = model.regressors.front();
  const MarginSet& m = first.margins();
  json j;
  j["format"] = "semicop-model";
  j["schema_version"] = kModelSchemaVersion;
  j["scheme"] = std::string(scheme_name(model.scheme));
  j["weights"] = vec(model.weights);
  j["labeled_y"] = vec(first.labeled_y());
  j["margins"] = {{"n", m.n()},
                  {"N", m.N()},
                  {"response_sorted", m.response_sorted()},
                  {"covariate_sorted", m.covariate_sorted()}};
  json cands = json::array();
  for (const auto& r : model.regressors) {
    const auto& f = r.fitted();
    cands.push_back({{"family", std::string(family_name(f.family.tag))},
                     {"dim", f.family.dim},
                     {"correlation", std::string(corr_name(f.family.corr))},
                     {"theta", f.theta_hat.natural},
                     {"loglik", f.loglik},
                     {"q", f.q},
                     {"converged", f.converged},
                     {"iterations", f.iterations}});
  }
  j["candidates"] = std::move(cands);
  return j.dump(1) + "\n";
}

AveragedModel model_from_json(const std::string& text, const std::string& source) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "semicop-model") throw DataError(source + ": not a model artifact");
    const int version = j.at("schema_version").get<int>();
    if (version != kModelSchemaVersion)
      throw DataError(source + ": schema version " + std::to_string(version) + " is not supported");
    const auto& mj = j.at("margins");
    MarginSet margins(mj.at("response_sorted").get<std::vector<double>>(),
                      mj.at("covariate_sorted").get<std::vector<std::vector<double>>>(),
                      mj.at("n").get<Index>(), mj.at("N").get<Index>());
    const Vector y = to_vector(j.at("labeled_y"));
    AveragedModel model;
    model.scheme = parse_scheme(j.at("scheme").get<std::string>());
    model.weights = to_vector(j.at("weights"));
    for (const auto& c : j.at("candidates")) {
      FittedCandidate f;
      f.family.tag = parse_family(c.at("family").get<std::string>());
      f.family.dim = c.at("dim").get<int>();
      f.family.corr = parse_corr(c.at("correlation").get<std::string>());
      f.theta_hat.natural = c.at("theta").get<std::vector<double>>();
      f.loglik = c.at("loglik").get<double>();
      f.q = c.at("q").get<std::size_t>();
      f.converged = c.at("converged").get<bool>();
      f.iterations = c.at("iterations").get<int>();
      model.regressors.emplace_back(std::move(f), margins, y);
    }
    if (model.regressors.empty() || static_cast<Index>(model.regressors.size()) != model.weights.size())
      throw DataError(source + ": weight count does not match the candidates");
    check_simplex(model.weights);
    return model;
  } catch (const json::exception& e) {
    throw DataError(source + ": malformed model artifact: " + e.what());
  } catch (const ConfigError& e) {
    throw DataError(source + ": " + e.what());
  } catch (const DomainError& e) {
    throw DataError(source + ": " + e.what());
  } catch (const NumericalError& e) {
    throw DataError(source + ": " + e.what());
  }
}

void save_model(const std::string& path, const AveragedModel& model) { write_text(path, model_to_json(model)); }

AveragedModel load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open model '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return model_from_json(ss.str(), path);
}

std::string fit_report_json(const AveragedModel& model) {
  json j;
  j["scheme"] = std::string(scheme_name(model.scheme));
  const Index n = model.regressors.empty() ? 0 : model.regressors.front().margins().n();
  j["n"] = n;
  j["N"] = model.regressors.empty() ? 0 : model.regressors.front().margins().N();
  json cands = json::array();
  for (size_t m = 0; m < model.regressors.size(); ++m) {
    const auto& f = model.regressors[m].fitted();
    cands.push_back({{"family", std::string(family_name(f.family.tag))},
                     {"theta", f.theta_hat.natural},
                     {"loglik", f.loglik},
                     {"q", f.q},
                     {"bic", bic(f, n)},
                     {"converged", f.converged},
                     {"weight", model.weights(static_cast<Index>(m))}});
  }
  j["candidates"] = std::move(cands);
  j["weights"] = vec(model.weights);
  return j.dump(2) + "\n";
}

}  // namespace semicop
