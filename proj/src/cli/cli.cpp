#include "medshift/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "json_io.hpp"
#include "medshift/effects.hpp"
#include "medshift/error.hpp"
#include "medshift/inference.hpp"
#include "medshift/parallel.hpp"
#include "medshift/plugin.hpp"
#include "medshift/simulation.hpp"

#ifndef MEDSHIFT_VERSION
#define MEDSHIFT_VERSION "0.0.0"
#endif

namespace medshift::cli {
namespace {

// Thrown for flag combinations CLI11 cannot express; maps to exit 64.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string pct(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * x);
  return buf;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

std::optional<std::string> config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

// A JSON config supplies flags missing from the command line; explicit
// flags win. Keys are flag names without the leading dashes.
std::vector<std::string> inject_config(std::vector<std::string> args, const Json& cfg) {
  if (!cfg.is_object()) throw Error(ErrorCode::parse_error, "config: top level must be an object");
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    if (key == "config" || has_flag(args, flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!joined.empty()) joined += ',';
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      args.push_back(flag);
      args.push_back(joined);
    } else if (value.is_string()) {
      args.push_back(flag);
      args.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      args.push_back(flag);
      args.push_back(value.dump());
    } else {
      throw Error(ErrorCode::parse_error, "config: unsupported value for '" + key + "'");
    }
  }
  return args;
}

struct Common {
  int threads = 0;
  std::string config;
  std::string out;
};

void add_common(CLI::App* sub, Common& c, const char* out_help) {
  sub->add_option("--threads", c.threads, "Worker threads (0 = all available cores)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--config", c.config, "JSON file of flag values; explicit flags win");
  sub->add_option("--out", c.out, out_help);
}

class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& args)
      : command_(std::move(command)), args_(args) {}

  void input(const std::string& role, const std::string& path) {
    inputs_.push_back({{"role", role}, {"path", path}, {"sha256", file_sha256(path)}});
  }
  void seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }
  Json& config() { return config_; }

  Json to_json() const {
    Json m;
    m["tool"] = "medshift";
    m["version"] = MEDSHIFT_VERSION;
    m["command"] = command_;
    m["argv"] = args_;
    m["inputs"] = inputs_.empty() ? Json::array() : inputs_;
    m["seeds"] = seeds_.empty() ? Json::object() : seeds_;
    m["config"] = config_;
    m["threads"] = max_threads();
    m["timestamp_utc"] = utc_now();
    return m;
  }

 private:
  std::string command_;
  std::vector<std::string> args_;
  Json inputs_ = Json::array();
  Json seeds_ = Json::object();
  Json config_ = Json::object();
};

Json document(const std::string& command) {
  Json doc;
  doc["schema"] = kSchemaVersion;
  doc["command"] = command;
  return doc;
}

// JSON goes to --out when given (and a short table to `out`), else to `out`.
void emit(const Json& doc, const std::string& path, const std::string& table, std::ostream& out) {
  const std::string text = doc.dump(2) + "\n";
  if (path.empty()) {
    out << text;
  } else {
    write_text_file(path, text);
    out << table;
  }
}

void apply_threads(const Common& c) { set_threads(c.threads); }

void require_probit_for_correction(Link link, double sigma_u, bool unadjusted) {
  if (link == Link::logit && sigma_u > 0.0 && !unadjusted) {
    throw Error(ErrorCode::validation,
                "the logit link has no measurement-error correction; use --sigma-u 0");
  }
}

Dataset load_dataset(const std::string& path, double sigma_u, std::optional<double> override_al) {
  Dataset d = load_csv(path, sigma_u);
  if (override_al) d = apply_assay_limit_override(d, *override_al);
  return d;
}

// ---- fit -----------------------------------------------------------------

struct FitArgs {
  Common common;
  std::string data;
  double sigma_u = 0.0;
  std::string link = "probit";
  std::optional<double> assay_limit_override;
  std::size_t quad_nodes = 64;
  int max_iter = 500;
};

CLI::App* add_fit(CLI::App& app, FitArgs& a) {
  auto* sub = app.add_subcommand("fit", "Censored-likelihood fit of the observed-data model");
  sub->add_option("--data", a.data, "CSV with columns y,m_star,assay_limit,c")->required();
  sub->add_option("--sigma-u", a.sigma_u, "Measurement-error SD")->required();
  sub->add_option("--link", a.link, "Outcome link")->check(CLI::IsMember({"probit", "logit"}));
  sub->add_option("--assay-limit-override", a.assay_limit_override,
                  "Use this limit for every record");
  sub->add_option("--quad-nodes", a.quad_nodes, "Gauss-Legendre nodes")
      ->check(CLI::Range(std::size_t{8}, std::size_t{1024}));
  sub->add_option("--max-iter", a.max_iter, "BFGS iteration limit")->check(CLI::PositiveNumber);
  add_common(sub, a.common, "Write the fit JSON here");
  return sub;
}

std::string fit_table(const FitResult& fit) {
  std::ostringstream t;
  const Vec6 v = fit.params.to_vector();
  t << "parameter        estimate\n";
  for (int k = 0; k < 6; ++k) {
    std::string name(kParamNames[k]);
    name.resize(16, ' ');
    t << name << ' ' << num(v[k]) << '\n';
  }
  t << "loglik " << num(fit.loglik) << "  converged " << (fit.converged ? "yes" : "no")
    << "  iterations " << fit.iterations << '\n';
  return t.str();
}

int cmd_fit(const FitArgs& a, const std::vector<std::string>& argv, std::ostream& out,
            std::ostream& err) {
  apply_threads(a.common);
  const Link link = parse_link(a.link);
  require_probit_for_correction(link, a.sigma_u, false);
  Manifest manifest("fit", argv);
  manifest.input("data", a.data);
  if (!a.common.config.empty()) manifest.input("config", a.common.config);
  Json& cfg = manifest.config();
  cfg["data"] = a.data;
  cfg["sigma_u"] = a.sigma_u;
  cfg["link"] = a.link;
  cfg["assay_limit_override"] =
      a.assay_limit_override ? Json(*a.assay_limit_override) : Json(nullptr);
  cfg["quad_nodes"] = a.quad_nodes;
  cfg["max_iter"] = a.max_iter;

  const Dataset d = load_dataset(a.data, a.sigma_u, a.assay_limit_override);
  FitOptions fo;
  fo.link = link;
  fo.quad_nodes = a.quad_nodes;
  fo.max_iterations = a.max_iter;
  const FitResult fit = fit_mle(d, std::nullopt, fo);

  Json doc = document("fit");
  const Json body = fit_to_json(fit, d);
  for (const auto& [k, v] : body.items()) doc[k] = v;
  doc["manifest"] = manifest.to_json();
  emit(doc, a.common.out, fit_table(fit), out);
  if (!fit.converged) {
    err << "error reason=" << reason_string(ErrorCode::non_convergence) << " exit="
        << kExitNumerical << " msg=\"" << fit.message << "\"\n";
    return kExitNumerical;
  }
  return kExitOk;
}

// ---- adjust --------------------------------------------------------------

struct AdjustArgs {
  Common common;
  std::string fit;
  double sigma_u = 0.0;
};

CLI::App* add_adjust(CLI::App& app, AdjustArgs& a) {
  auto* sub = app.add_subcommand("adjust", "Measurement-error corrected outcome coefficients");
  sub->add_option("--fit", a.fit, "Fit JSON written by `fit`")->required();
  sub->add_option("--sigma-u", a.sigma_u, "Measurement-error SD")->required();
  add_common(sub, a.common, "Write the JSON here");
  return sub;
}

int cmd_adjust(const AdjustArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  apply_threads(a.common);
  if (!(a.sigma_u >= 0.0)) throw Error(ErrorCode::validation, "--sigma-u must be >= 0");
  Manifest manifest("adjust", argv);
  manifest.input("fit", a.fit);
  if (!a.common.config.empty()) manifest.input("config", a.common.config);
  manifest.config()["fit"] = a.fit;
  manifest.config()["sigma_u"] = a.sigma_u;

  const FitDocument fd = fit_from_json(read_json_file(a.fit));
  require_probit_for_correction(fd.fit.link, a.sigma_u, false);
  const AdjustedParams adj = adjust(fd.fit.params, a.sigma_u * a.sigma_u);

  Json doc = document("adjust");
  doc["adjusted"] = adjusted_to_json(adj, fd.fit.params, a.sigma_u);
  doc["manifest"] = manifest.to_json();
  std::ostringstream t;
  t << "lambda " << num(adj.lambda) << "  beta0 " << num(adj.beta0) << "  beta1 "
    << num(adj.beta1) << "  beta2 " << num(adj.beta2) << "  sigma_m2 " << num(adj.sigma_m2)
    << '\n';
  emit(doc, a.common.out, t.str(), out);
  return kExitOk;
}

// ---- effect --------------------------------------------------------------

struct EffectArgs {
  Common common;
  std::string fit;
  std::string data;
  double sigma_u = 0.0;
  std::vector<double> shifts;
  bool unadjusted = false;
  std::string ci;
  std::size_t reps = 2000;
  std::uint64_t seed = 1;
  double level = 0.95;
  std::string estimator = "closed-form";
  std::string link;
  std::size_t j_draws = 100;
  std::string pc_policy = "fixed";
  std::optional<double> assay_limit_override;
};

CLI::App* add_effect(CLI::App& app, EffectArgs& a) {
  auto* sub = app.add_subcommand("effect", "Indirect effect of a mediator shift with intervals");
  auto* fit = sub->add_option("--fit", a.fit, "Fit JSON written by `fit`");
  auto* data = sub->add_option("--data", a.data, "CSV data (fits the model first)");
  fit->excludes(data);
  sub->add_option("--sigma-u", a.sigma_u, "Measurement-error SD")->required();
  sub->add_option("--shifts", a.shifts, "Comma-separated mediator shifts (log10 scale)")
      ->required()
      ->delimiter(',');
  sub->add_flag("--unadjusted", a.unadjusted, "Ignore measurement error");
  sub->add_option("--ci", a.ci, "Interval method (default delta; none for plugin)")->check(CLI::IsMember({"none", "delta", "boot"}));
  sub->add_option("--reps", a.reps, "Bootstrap replicates")->check(CLI::Range(100, 1000000));
  sub->add_option("--seed", a.seed, "RNG seed");
  sub->add_option("--level", a.level, "Confidence level")->check(CLI::Range(0.5, 0.9999));
  sub->add_option("--estimator", a.estimator, "Point estimator")
      ->check(CLI::IsMember({"closed-form", "plugin"}));
  sub->add_option("--link", a.link, "Outcome link (default probit; logit for plugin)")
      ->check(CLI::IsMember({"probit", "logit"}));
  sub->add_option("--j-draws", a.j_draws, "Imputation draws per censored record (plugin)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--pc-policy", a.pc_policy, "P(C) per bootstrap resample")
      ->check(CLI::IsMember({"fixed", "resample"}));
  sub->add_option("--assay-limit-override", a.assay_limit_override,
                  "Use this limit for every record");
  add_common(sub, a.common, "Write the effect JSON here");
  return sub;
}

std::string effect_table(const std::vector<EffectEstimate>& rows, bool has_ci) {
  std::ostringstream t;
  t << "shift   indirect(%)";
  if (has_ci) t << "   se(%)   ci_low(%)   ci_high(%)";
  t << '\n';
  for (const auto& e : rows) {
    char line[128];
    if (has_ci) {
      std::snprintf(line, sizeof line, "%-7s %11s %7s %11s %12s\n", num(e.xi).c_str(),
                    pct(e.point).c_str(), pct(e.se).c_str(), pct(e.ci_low_clipped()).c_str(),
                    pct(e.ci_high_clipped()).c_str());
    } else {
      std::snprintf(line, sizeof line, "%-7s %11s\n", num(e.xi).c_str(), pct(e.point).c_str());
    }
    t << line;
  }
  return t.str();
}

int cmd_effect(EffectArgs a, const std::vector<std::string>& argv, std::ostream& out) {
  apply_threads(a.common);
  if (a.ci.empty()) a.ci = a.estimator == "plugin" ? "none" : "delta";
  if (!(a.sigma_u >= 0.0)) throw Error(ErrorCode::validation, "--sigma-u must be >= 0");
  if (a.fit.empty() && a.data.empty()) throw UsageError("effect needs --fit or --data");
  const bool plugin = a.estimator == "plugin";
  const bool boot = a.ci == "boot";
  if (plugin && a.data.empty()) throw UsageError("--estimator plugin needs --data");
  if (boot && a.data.empty()) throw UsageError("--ci boot needs --data");
  if (plugin && a.ci == "delta") {
    throw Error(ErrorCode::validation,
                "the plugin estimator has no delta-method interval; use --ci boot or none");
  }
  if (!a.fit.empty() && a.assay_limit_override) {
    throw UsageError("--assay-limit-override applies to --data only");
  }
  const Link link = a.link.empty() ? (plugin ? Link::logit : Link::probit) : parse_link(a.link);
  if (!plugin && link != Link::probit) {
    throw Error(ErrorCode::validation, "the closed-form estimator requires the probit link");
  }
  if (plugin && a.sigma_u > 0.0 && !a.unadjusted) {
    throw Error(ErrorCode::validation,
                "the plugin estimator has no measurement-error correction; pass --unadjusted "
                "or --sigma-u 0");
  }
  const EffectMode mode =
      a.unadjusted || plugin ? EffectMode::ignored : EffectMode::adjusted;
  const double su2 = a.sigma_u * a.sigma_u;

  Manifest manifest("effect", argv);
  if (!a.fit.empty()) manifest.input("fit", a.fit);
  if (!a.data.empty()) manifest.input("data", a.data);
  if (!a.common.config.empty()) manifest.input("config", a.common.config);
  if (boot) manifest.seed("bootstrap", a.seed);
  if (plugin) manifest.seed("plugin", a.seed);
  Json& cfg = manifest.config();
  cfg["fit"] = a.fit.empty() ? Json(nullptr) : Json(a.fit);
  cfg["data"] = a.data.empty() ? Json(nullptr) : Json(a.data);
  cfg["sigma_u"] = a.sigma_u;
  cfg["shifts"] = a.shifts;
  cfg["mode"] = std::string(effect_mode_name(mode));
  cfg["ci"] = a.ci;
  cfg["reps"] = a.reps;
  cfg["seed"] = a.seed;
  cfg["level"] = a.level;
  cfg["estimator"] = a.estimator;
  cfg["link"] = std::string(link_name(link));
  cfg["j_draws"] = a.j_draws;
  cfg["pc_policy"] = a.pc_policy;
  cfg["assay_limit_override"] =
      a.assay_limit_override ? Json(*a.assay_limit_override) : Json(nullptr);

  FitOptions fo;
  fo.link = link;
  std::optional<Dataset> d;
  FitResult fit;
  CommonCauseDist pc;
  if (!a.data.empty()) {
    d.emplace(load_dataset(a.data, a.sigma_u, a.assay_limit_override));
    pc = empirical_common_cause_dist(*d);
    fit = fit_mle(*d, std::nullopt, fo);
  } else {
    const FitDocument fd = fit_from_json(read_json_file(a.fit));
    if (fd.fit.link != Link::probit) {
      throw Error(ErrorCode::validation, "the closed-form estimator requires a probit fit");
    }
    fit = fd.fit;
    pc = fd.pc;
  }
  if (!fit.converged) {
    throw Error(ErrorCode::non_convergence, "model fit did not converge: " + fit.message);
  }

  // Point estimates.
  std::vector<double> points;
  std::vector<EffectPoint> closed;
  for (double xi : a.shifts) {
    if (plugin) {
      points.push_back(plugin_indirect_effect(*d, fit, PluginConfig{a.j_draws, xi, a.seed}));
    } else {
      closed.push_back(mode == EffectMode::adjusted ? indirect_effect_from_star(fit.params, su2, pc, xi)
                                                    : indirect_effect_unadjusted(fit.params, pc, xi));
      points.push_back(closed.back().indirect);
    }
  }

  std::vector<EffectEstimate> rows;
  if (a.ci == "delta") {
    for (double xi : a.shifts) rows.push_back(delta_ci(fit, su2, pc, xi, a.level, mode));
  } else if (boot) {
    BootstrapOptions bo;
    bo.reps = a.reps;
    bo.seed = a.seed;
    bo.pc_policy = a.pc_policy == "resample" ? PcPolicy::resample : PcPolicy::fixed;
    bo.level = a.level;
    bo.mode = mode;
    bo.fit = fo;
    ResampleEstimator est;
    if (plugin) {
      est = [&](const Dataset& r, const CommonCauseDist&, std::uint64_t rep_seed) {
        const FitResult rf = fit_mle(r, std::nullopt, fo);
        if (!rf.converged) throw Error(ErrorCode::non_convergence, "resample fit");
        std::vector<double> v;
        for (double xi : a.shifts) {
          v.push_back(plugin_indirect_effect(r, rf, PluginConfig{a.j_draws, xi, rep_seed}));
        }
        return v;
      };
    } else {
      est = closed_form_estimator(su2, a.shifts, bo);
    }
    rows = bootstrap_ci(*d, a.shifts, points, est, bo);
  } else {
    for (std::size_t k = 0; k < a.shifts.size(); ++k) {
      EffectEstimate e;
      e.xi = a.shifts[k];
      e.point = points[k];
      rows.push_back(e);
    }
  }

  Json doc = document("effect");
  doc["estimator"] = a.estimator;
  doc["mode"] = std::string(effect_mode_name(mode));
  doc["link"] = std::string(link_name(link));
  doc["sigma_u"] = a.sigma_u;
  doc["n"] = fit.n_used;
  doc["common_cause"] = {{"p_c0", pc.p[0]}, {"p_c1", pc.p[1]}};
  doc["fit"] = {{"converged", fit.converged}, {"loglik", fit.loglik},
                {"iterations", fit.iterations}, {"grad_max", fit.grad_max}};
  Json effects = Json::array();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    Json e;
    if (a.ci == "none") {
      e["xi"] = rows[k].xi;
      e["indirect"] = rows[k].point;
      e["method"] = "none";
    } else {
      e = estimate_to_json(rows[k]);
    }
    if (!closed.empty()) {
      e["ey0_shifted"] = closed[k].ey0_shifted;
      e["ey0"] = closed[k].ey0;
    }
    effects.push_back(e);
  }
  doc["effects"] = effects;
  doc["manifest"] = manifest.to_json();
  emit(doc, a.common.out, effect_table(rows, a.ci != "none"), out);
  return kExitOk;
}

// ---- simulate ------------------------------------------------------------

struct SimulateArgs {
  Common common;
  std::string scenario;
  std::vector<std::size_t> n;
  std::size_t reps = 2000;
  std::uint64_t seed = 1;
  std::string emit_estimates;
  std::optional<double> assay_limit;
  std::vector<std::string> modes{"ignored", "adjusted"};
  double level = 0.95;
};

CLI::App* add_simulate(CLI::App& app, SimulateArgs& a) {
  auto* sub = app.add_subcommand("simulate", "Monte-Carlo bias / rMSE / coverage study");
  sub->add_option("--scenario", a.scenario, "carna, sca, or a scenario JSON file")->required();
  sub->add_option("--n", a.n, "Sample size(s), comma-separated")->delimiter(',');
  sub->add_option("--reps", a.reps, "Replicates per sample size")->check(CLI::PositiveNumber);
  sub->add_option("--seed", a.seed, "RNG seed");
  sub->add_option("--emit-estimates", a.emit_estimates, "Write per-replicate estimates CSV");
  sub->add_option("--assay-limit", a.assay_limit, "Override the scenario's assay limit");
  sub->add_option("--modes", a.modes, "Effect modes")
      ->delimiter(',')
      ->check(CLI::IsMember({"ignored", "adjusted"}));
  sub->add_option("--level", a.level, "Confidence level")->check(CLI::Range(0.5, 0.9999));
  add_common(sub, a.common, "Write the summary CSV here (manifest alongside)");
  return sub;
}

SimScenario base_scenario(const std::string& name) {
  if (name == "carna") return carna_scenario();
  if (name == "sca") return sca_scenario();
  if (!std::filesystem::exists(name)) {
    throw Error(ErrorCode::validation, "unknown scenario '" + name + "'");
  }
  return scenario_from_json(read_json_file(name));
}

std::string study_csv(const SimStudyResult& r, const std::vector<SimScenario>& scenarios,
                      const std::vector<EffectMode>& modes) {
  std::ostringstream csv;
  csv << "measure,sample_size,shift,true_effect";
  for (EffectMode m : modes) {
    const std::string p(effect_mode_name(m));
    csv << ',' << p << "_mean_estimate," << p << "_bias," << p << "_rmse," << p << "_coverage,"
        << p << "_n_failed";
  }
  csv << ",n_failed\n";
  // Effects in percentage points, coverage in percent, as in the published table.
  for (const auto& s : scenarios) {
    for (double xi : s.shifts) {
      std::size_t n_failed = 0;
      std::ostringstream row;
      double truth = 0.0;
      for (EffectMode m : modes) {
        const SimCell& c = r.cell(s.label, xi, m);
        truth = c.true_effect;
        n_failed = std::max(n_failed, c.n_failed);
        row << ',' << full(100.0 * c.mean_estimate) << ',' << full(100.0 * c.mean_bias) << ','
            << full(100.0 * c.rmse) << ',' << full(100.0 * c.coverage) << ',' << c.n_failed;
      }
      csv << s.label << ',' << s.n << ',' << full(xi) << ',' << full(100.0 * truth) << row.str()
          << ',' << n_failed << '\n';
    }
  }
  return csv.str();
}

std::string study_table(const SimStudyResult& r, const std::vector<SimScenario>& scenarios,
                        const std::vector<EffectMode>& modes) {
  std::ostringstream t;
  t << "measure  N      shift  true(%)";
  for (EffectMode m : modes) {
    const std::string p(effect_mode_name(m));
    t << "  " << p << ":bias  rmse  cover";
  }
  t << "  failed\n";
  for (const auto& s : scenarios) {
    for (double xi : s.shifts) {
      char head[96];
      std::size_t n_failed = 0;
      const double truth = r.cell(s.label, xi, modes.front()).true_effect;
      std::snprintf(head, sizeof head, "%-8s %-6zu %-6s %7s", s.label.c_str(), s.n,
                    num(xi).c_str(), pct(truth).c_str());
      t << head;
      for (EffectMode m : modes) {
        const SimCell& c = r.cell(s.label, xi, m);
        n_failed = std::max(n_failed, c.n_failed);
        char cell[96];
        std::snprintf(cell, sizeof cell, "  %*s %5s %6s",
                      static_cast<int>(effect_mode_name(m).size() + 5), pct(c.mean_bias).c_str(),
                      pct(c.rmse).c_str(), pct(c.coverage).c_str());
        t << cell;
      }
      t << "  " << n_failed << '\n';
    }
  }
  return t.str();
}

std::string estimates_csv(const SimStudyResult& r) {
  std::ostringstream csv;
  csv << "measure,sample_size,rep,mode,shift,ok,estimate,se,ci_low,ci_high\n";
  for (const auto& e : r.estimates) {
    csv << e.label << ',' << e.n << ',' << e.rep << ',' << effect_mode_name(e.mode) << ','
        << full(e.shift) << ',' << (e.ok ? 1 : 0);
    if (e.ok) {
      csv << ',' << full(e.estimate) << ',' << full(e.se) << ',' << full(e.ci_low) << ','
          << full(e.ci_high) << '\n';
    } else {
      csv << ",NA,NA,NA,NA\n";
    }
  }
  return csv.str();
}

int cmd_simulate(const SimulateArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  apply_threads(a.common);
  SimScenario base = base_scenario(a.scenario);
  if (a.assay_limit) base.assay_limit = *a.assay_limit;
  std::vector<std::size_t> sizes = a.n.empty() ? std::vector<std::size_t>{base.n} : a.n;
  std::vector<SimScenario> scenarios;
  for (std::size_t n : sizes) {
    SimScenario s = base;
    s.n = n;
    s.validate();
    scenarios.push_back(s);
  }
  SimStudyOptions so;
  so.modes.clear();
  for (const auto& m : a.modes) {
    so.modes.push_back(m == "ignored" ? EffectMode::ignored : EffectMode::adjusted);
  }
  so.level = a.level;
  so.keep_estimates = !a.emit_estimates.empty();

  Manifest manifest("simulate", argv);
  if (std::filesystem::exists(a.scenario) && a.scenario != "carna" && a.scenario != "sca") {
    manifest.input("scenario", a.scenario);
  }
  if (!a.common.config.empty()) manifest.input("config", a.common.config);
  manifest.seed("study", a.seed);
  Json& cfg = manifest.config();
  cfg["scenario"] = a.scenario;
  cfg["label"] = base.label;
  cfg["alpha"] = base.alpha;
  cfg["sigma_m"] = base.sigma_m;
  cfg["sigma_u"] = base.sigma_u;
  cfg["beta"] = base.beta;
  cfg["p_c1"] = base.p_c1;
  cfg["assay_limit"] = std::isfinite(base.assay_limit) ? Json(base.assay_limit) : Json(nullptr);
  cfg["shifts"] = base.shifts;
  cfg["n"] = sizes;
  cfg["reps"] = a.reps;
  cfg["seed"] = a.seed;
  cfg["modes"] = a.modes;
  cfg["level"] = a.level;
  cfg["emit_estimates"] = a.emit_estimates.empty() ? Json(nullptr) : Json(a.emit_estimates);

  const SimStudyResult r = run_study(scenarios, a.reps, a.seed, so);
  const std::string csv = study_csv(r, scenarios, so.modes);
  if (a.common.out.empty()) {
    out << csv;
  } else {
    write_text_file(a.common.out, csv);
    Json sidecar = document("simulate");
    sidecar["results"] = a.common.out;
    if (!a.emit_estimates.empty()) sidecar["estimates"] = a.emit_estimates;
    sidecar["manifest"] = manifest.to_json();
    write_text_file(a.common.out + ".manifest.json", sidecar.dump(2) + "\n");
    out << study_table(r, scenarios, so.modes);
  }
  if (!a.emit_estimates.empty()) write_text_file(a.emit_estimates, estimates_csv(r));
  return kExitOk;
}

int report(std::ostream& err, ErrorCode code, const std::string& msg) {
  const int exit = is_numerical(code) ? kExitNumerical : kExitValidation;
  std::string flat = msg;
  std::replace(flat.begin(), flat.end(), '\n', ' ');
  std::replace(flat.begin(), flat.end(), '"', '\'');
  err << "error reason=" << reason_string(code) << " exit=" << exit << " msg=\"" << flat
      << "\"\n";
  return exit;
}

}  // namespace

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Indirect effects of a mediator shift with a censored, error-prone mediator",
               "medshift"};
  app.require_subcommand(1);
  app.set_version_flag("--version", MEDSHIFT_VERSION);

  FitArgs fit_args;
  AdjustArgs adjust_args;
  EffectArgs effect_args;
  SimulateArgs sim_args;
  auto* fit = add_fit(app, fit_args);
  auto* adj = add_adjust(app, adjust_args);
  auto* eff = add_effect(app, effect_args);
  auto* sim = add_simulate(app, sim_args);

  try {
    std::vector<std::string> args = args_in;
    if (const auto path = config_path(args)) args = inject_config(args, read_json_file(*path));
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::CallForVersion&) {
      out << MEDSHIFT_VERSION << '\n';
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "error reason=usage exit=" << kExitUsage << " msg=\"" << e.what() << "\"\n"
          << app.help();
      return kExitUsage;
    }

    if (fit->parsed()) return cmd_fit(fit_args, args_in, out, err);
    if (adj->parsed()) return cmd_adjust(adjust_args, args_in, out);
    if (eff->parsed()) return cmd_effect(effect_args, args_in, out);
    if (sim->parsed()) return cmd_simulate(sim_args, args_in, out);
    err << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error reason=usage exit=" << kExitUsage << " msg=\"" << e.what() << "\"\n";
    return kExitUsage;
  } catch (const Error& e) {
    return report(err, e.code(), e.what());
  } catch (const Json::exception& e) {
    return report(err, ErrorCode::parse_error, e.what());
  } catch (const std::exception& e) {
    return report(err, ErrorCode::evaluation_error, e.what());
  }
}

}  // namespace medshift::cli
