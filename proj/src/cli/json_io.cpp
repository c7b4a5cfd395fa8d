#include "json_io.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "medshift/error.hpp"

namespace medshift::cli {
namespace {

double get_number(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw Error(ErrorCode::parse_error, std::string("JSON: missing numeric field '") + key + "'");
  }
  return j.at(key).get<double>();
}

}  // namespace

Json fit_to_json(const FitResult& fit, const Dataset& d) {
  const CommonCauseDist pc = empirical_common_cause_dist(d);
  Json params;
  const Vec6 v = fit.params.to_vector();
  for (int k = 0; k < 6; ++k) params[std::string(kParamNames[k])] = v[k];
  Json info = Json::array();
  for (int r = 0; r < 6; ++r) {
    Json row = Json::array();
    for (int c = 0; c < 6; ++c) row.push_back(fit.info_matrix(r, c));
    info.push_back(row);
  }
  Json out;
  out["link"] = std::string(link_name(fit.link));
  out["sigma_u"] = d.sigma_u();
  out["n"] = d.size();
  out["n_censored"] = d.n_censored();
  out["n_reclassified"] = d.n_reclassified();
  out["common_cause"] = {{"p_c0", pc.p[0]}, {"p_c1", pc.p[1]}};
  out["params"] = params;
  out["loglik"] = fit.loglik;
  out["param_order"] = Json::array();
  for (auto name : kParamNames) out["param_order"].push_back(std::string(name));
  out["info_matrix"] = info;
  out["info_psd"] = fit.info_psd;
  out["converged"] = fit.converged;
  out["iterations"] = fit.iterations;
  out["evaluations"] = fit.evaluations;
  out["grad_max"] = fit.grad_max;
  out["n_floored"] = fit.n_floored;
  out["message"] = fit.message;
  return out;
}

FitDocument fit_from_json(const Json& j) {
  if (!j.contains("schema") || j.at("schema") != kSchemaVersion) {
    throw Error(ErrorCode::parse_error, "fit JSON: unsupported or missing schema version");
  }
  FitDocument doc;
  const Json& p = j.at("params");
  Vec6 v;
  for (int k = 0; k < 6; ++k) v[k] = get_number(p, std::string(kParamNames[k]).c_str());
  doc.fit.params = StarParams::from_vector(v);
  if (!(doc.fit.params.sigma_mstar2 > 0.0)) {
    throw Error(ErrorCode::parse_error, "fit JSON: sigma_mstar2 must be > 0");
  }
  doc.fit.link = parse_link(j.at("link").get<std::string>());
  doc.fit.loglik = get_number(j, "loglik");
  doc.fit.n_used = j.at("n").get<std::size_t>();
  doc.fit.converged = j.at("converged").get<bool>();
  doc.fit.info_psd = j.at("info_psd").get<bool>();
  doc.fit.iterations = j.value("iterations", 0);
  doc.fit.evaluations = j.value("evaluations", 0);
  doc.fit.grad_max = j.value("grad_max", 0.0);
  doc.fit.n_floored = j.value("n_floored", std::size_t{0});
  doc.fit.message = j.value("message", std::string{});
  const Json& info = j.at("info_matrix");
  if (!info.is_array() || info.size() != 6) {
    throw Error(ErrorCode::parse_error, "fit JSON: info_matrix must be 6x6");
  }
  for (int r = 0; r < 6; ++r) {
    if (!info[r].is_array() || info[r].size() != 6) {
      throw Error(ErrorCode::parse_error, "fit JSON: info_matrix must be 6x6");
    }
    for (int c = 0; c < 6; ++c) doc.fit.info_matrix(r, c) = info[r][c].get<double>();
  }
  doc.pc = CommonCauseDist::from_p_c1(get_number(j.at("common_cause"), "p_c1"));
  doc.sigma_u = get_number(j, "sigma_u");
  return doc;
}

Json adjusted_to_json(const AdjustedParams& a, const StarParams& star, double sigma_u) {
  Json out;
  out["sigma_u"] = sigma_u;
  out["lambda"] = a.lambda;
  out["beta0"] = a.beta0;
  out["beta1"] = a.beta1;
  out["beta2"] = a.beta2;
  out["sigma_m2"] = a.sigma_m2;
  out["alpha0"] = star.alpha0;
  out["alpha1"] = star.alpha1;
  return out;
}

Json estimate_to_json(const EffectEstimate& e) {
  Json out;
  out["xi"] = e.xi;
  out["indirect"] = e.point;
  out["se"] = e.se;
  out["ci_low"] = e.ci_low;
  out["ci_high"] = e.ci_high;
  out["ci_low_clipped"] = e.ci_low_clipped();
  out["ci_high_clipped"] = e.ci_high_clipped();
  out["method"] = std::string(ci_method_name(e.method));
  out["level"] = e.level;
  if (e.method == CiMethod::bootstrap) {
    out["n_boot"] = e.n_boot;
    out["n_boot_failed"] = e.n_boot_failed;
  }
  return out;
}

SimScenario scenario_from_json(const Json& j) {
  SimScenario s;
  try {
    const auto alpha = j.at("alpha").get<std::vector<double>>();
    const auto beta = j.at("beta").get<std::vector<double>>();
    if (alpha.size() != 2 || beta.size() != 3) {
      throw Error(ErrorCode::parse_error, "scenario JSON: alpha needs 2 and beta 3 values");
    }
    s.alpha = {alpha[0], alpha[1]};
    s.beta = {beta[0], beta[1], beta[2]};
    s.sigma_m = j.at("sigma_m").get<double>();
    s.sigma_u = j.at("sigma_u").get<double>();
    s.p_c1 = j.at("p_c1").get<double>();
    s.n = j.value("n", s.n);
    if (j.contains("assay_limit")) {
      s.assay_limit = j.at("assay_limit").is_null()
                          ? -std::numeric_limits<double>::infinity()
                          : j.at("assay_limit").get<double>();
    }
    if (j.contains("shifts")) s.shifts = j.at("shifts").get<std::vector<double>>();
    s.label = j.value("label", std::string("custom"));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("scenario JSON: ") + e.what());
  }
  s.validate();
  return s;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::parse_error, "'" + path + "': " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::validation, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::validation, "write failed for '" + path + "'");
}

std::string file_sha256(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr);
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

}  // namespace medshift::cli
