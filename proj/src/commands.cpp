#include "tsqn/commands.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "tsqn/error.hpp"
#include "tsqn/io.hpp"
#include "tsqn/monte_carlo.hpp"

namespace tsqn {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kSeedEnv = "TSQN_SEED";

struct Options {
  std::string command;
  std::string config_path;
  std::string data_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string mu;
  std::string plugin;
  std::optional<double> alpha, t, tau;
  std::optional<std::size_t> K, N;
  std::optional<unsigned> threads;
  bool exact = false;
  std::vector<std::string> inputs;
};

std::uint64_t parse_seed(const std::string& text, const char* where) {
  std::uint64_t v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::Config, std::string(where) + " must be an unsigned 64-bit integer, got '" + text + "'");
  }
  return v;
}

/// Config plus command-line overrides; precedence flag > environment > file.
AppConfig resolve(const Options& o) {
  AppConfig cfg = load_config(o.config_path);
  if (const char* env = std::getenv(kSeedEnv); env && *env) cfg.seed = parse_seed(env, kSeedEnv);
  if (o.seed) cfg.seed = *o.seed;
  if (cfg.scenario) cfg.scenario->seed = cfg.seed;
  if (o.mu == "constant") {
    cfg.estimator.mu = MuPolicy::constant(cfg.estimator.mu.value);
  } else if (o.mu == "adaptive" && cfg.estimator.mu.kind != MuPolicy::Kind::Adaptive) {
    cfg.estimator.mu = MuPolicy::adaptive();
  }
  if (!o.plugin.empty()) cfg.ci.plugin = plugin_from_string(o.plugin);
  if (o.alpha) cfg.ci.alpha = cfg.mc.alpha = *o.alpha;
  if (o.t) cfg.mc.t = *o.t;
  if (o.tau) cfg.ci.tau = *o.tau;
  if (o.K) cfg.mc.K = *o.K;
  if (o.N) cfg.ci.N = *o.N;
  if (o.threads) cfg.mc.threads = *o.threads;
  return cfg;
}

struct RunData {
  std::vector<ObservationRecord> records;
  std::optional<Vector> truth;
};

RunData acquire(const Options& o, const AppConfig& cfg) {
  RunData d;
  if (cfg.scenario) d.truth = cfg.scenario->theta_true;
  if (!o.data_path.empty()) {
    d.records = load_dataset(o.data_path, cfg.estimator.dimension());
    return d;
  }
  if (!cfg.scenario) throw Error(ErrorCode::Config, "no --data given and the config has no scenario");
  const auto& sc = *cfg.scenario;
  d.records = gen_observations(gen_regressors(sc), sc.theta_true, sc.specs, sc.noise, sc.seed);
  return d;
}

RunTrace traced(const AppConfig& cfg, const RunData& d) {
  RunTrace trace = trace_run(cfg.estimator, d.records, d.truth);
  trace.config_hash = cfg.hash;
  trace.seed = cfg.seed;
  return trace;
}

std::string out_path(const Options& o, const std::string& name) {
  fs::create_directories(o.out_dir);
  return (fs::path(o.out_dir) / name).string();
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json trace_summary(const RunTrace& trace) {
  json s = {{"steps", trace.size()}};
  if (trace.size() == 0) return s;
  const auto& last = trace.steps.back();
  s["theta_hat"] = vec_json(last.theta_hat_next);
  s["theta_bar"] = vec_json(last.theta_bar_next);
  const auto ex = excitation_ratio(trace, trace.size());
  s["excitation_ratio"] = ex.ratio;
  s["excitation_non_convergent"] = ex.non_convergent;
  if (trace.truth) {
    s["error_hat"] = (last.theta_hat_next - *trace.truth).norm();
    s["error_bar"] = (last.theta_bar_next - *trace.truth).norm();
    const double n = static_cast<double>(trace.size());
    s["avg_regret_hat"] = cumulative_regret(trace, trace.size(), Layer::Accelerated) / n;
    s["avg_regret_bar"] = cumulative_regret(trace, trace.size(), Layer::Preliminary) / n;
  }
  return s;
}

json write_trace_files(const Options& o, const RunTrace& trace, const RunData* data) {
  json files = json::array();
  if (o.out_dir.empty()) return files;
  if (data) {
    std::ostringstream ds;
    write_dataset(data->records, ds);
    write_text(out_path(o, "data.csv"), ds.str());
    files.push_back(out_path(o, "data.csv"));
  }
  std::ostringstream ts;
  write_trace(trace, ts, o.exact);
  write_text(out_path(o, "trace.csv"), ts.str());
  files.push_back(out_path(o, "trace.csv"));
  return files;
}

json emit_report(const Options& o, const std::string& name, const json& doc) {
  json files = json::array();
  if (!o.out_dir.empty()) {
    write_text(out_path(o, name), doc.dump(2) + "\n");
    files.push_back(out_path(o, name));
  }
  return files;
}

json cmd_simulate(const Options& o, const AppConfig& cfg) {
  if (!cfg.scenario) throw Error(ErrorCode::Config, "simulate needs a 'scenario' section");
  RunData d = acquire(Options{}, cfg);
  const RunTrace trace = traced(cfg, d);
  json s = trace_summary(trace);
  s["files"] = write_trace_files(o, trace, &d);
  return s;
}

json cmd_fit(const Options& o, const AppConfig& cfg) {
  if (o.data_path.empty()) throw Error(ErrorCode::Config, "fit needs --data");
  const RunData d = acquire(o, cfg);
  const RunTrace trace = traced(cfg, d);
  json s = trace_summary(trace);
  s["files"] = write_trace_files(o, trace, nullptr);
  return s;
}

json cmd_validate(const Options& o, const AppConfig& cfg) {
  const RunData d = acquire(o, cfg);
  const auto rep = validate_records(d.records, cfg.estimator, d.truth);
  json doc = to_json(rep);
  doc["config_hash"] = cfg.hash;
  doc["seed"] = cfg.seed;
  json s = {{"pass", rep.pass()}, {"records", d.records.size()}};
  s["files"] = emit_report(o, "validation.json", doc);
  if (!rep.pass()) {
    for (const auto& c : rep.checks) {
      if (!c.pass) throw Error(ErrorCode::Assumption, c.name + ": " + c.message);
    }
  }
  return s;
}

json summarize_ci(const ConfidenceReport& rep) {
  json s = {{"method", rep.method}, {"confidence", rep.confidence}};
  s["lower"] = rep.lower;
  s["upper"] = rep.upper;
  if (!rep.warnings.empty()) s["warnings"] = rep.warnings;
  return s;
}

json cmd_ci_asymptotic(const Options& o, const AppConfig& cfg) {
  const RunData d = acquire(o, cfg);
  const RunTrace trace = traced(cfg, d);
  if (trace.size() == 0) throw Error(ErrorCode::Data, "no records");
  const auto rep = asymptotic_ci(trace, trace.size(), cfg.ci.alpha);
  json s = summarize_ci(rep);
  s["files"] = emit_report(o, "ci_asymptotic.json", to_json(rep));
  return s;
}

json cmd_ci_lyapunov(const Options& o, const AppConfig& cfg) {
  const RunData d = acquire(o, cfg);
  const RunTrace trace = traced(cfg, d);
  if (trace.size() < 2) throw Error(ErrorCode::Data, "the finite-sample bound needs at least two records");
  const std::size_t N = cfg.ci.N.value_or(trace.size() - 1);
  auto rep = lyapunov_bound(trace, N, cfg.ci.alpha, cfg.ci.tau, cfg.ci.plugin);
  json s = summarize_ci(rep);
  s["regret_bound"] = rep.constants.at("regret_bound");
  s["files"] = emit_report(o, "ci_lyapunov.json", to_json(rep));
  return s;
}

json cmd_ci_mc(const Options& o, const AppConfig& cfg) {
  if (!(cfg.mc.alpha > 0.0) || !(cfg.mc.t > 0.0) || !(cfg.mc.alpha + cfg.mc.t < 1.0)) {
    throw Error(ErrorCode::Domain, "ci-mc needs alpha > 0, t > 0 and alpha + t < 1");
  }
  const RunData d = acquire(o, cfg);
  McDesign design;
  design.K = cfg.mc.K;
  design.estimator = cfg.estimator;
  design.seed = substream_seed(cfg.seed, 0x6d63);
  design.threads = cfg.mc.threads;
  for (const auto& r : d.records) {
    design.regressors.push_back(r.phi);
    design.specs.push_back(r.spec);
  }
  if (design.specs.empty()) design.specs = {SaturationSpec::linear()};
  TsqnEstimator est(cfg.estimator);
  for (const auto& r : d.records) est.update(r);
  const Vector theta_hat = est.state().theta_hat;
  const Matrix errors = replicate_errors(design);
  auto rep = mc_interval(errors, cfg.mc.alpha, cfg.mc.t, &theta_hat);
  rep.provenance["config_hash"] = cfg.hash;
  rep.provenance["seed"] = std::to_string(cfg.seed);
  json s = summarize_ci(rep);
  s["files"] = emit_report(o, "ci_mc.json", to_json(rep));
  if (!o.out_dir.empty()) {
    std::ostringstream es;
    es << "replication";
    for (Eigen::Index j = 0; j < errors.cols(); ++j) es << ",error_" << j;
    es << '\n';
    for (Eigen::Index i = 0; i < errors.rows(); ++i) {
      es << i;
      for (Eigen::Index j = 0; j < errors.cols(); ++j) es << ',' << format_double(errors(i, j));
      es << '\n';
    }
    write_text(out_path(o, "mc_errors.csv"), es.str());
    s["files"].push_back(out_path(o, "mc_errors.csv"));
  }
  return s;
}

json cmd_report(const Options& o, const AppConfig& cfg) {
  const RunData d = acquire(o, cfg);
  const RunTrace trace = traced(cfg, d);
  json doc = {{"config_hash", cfg.hash}, {"seed", cfg.seed}, {"trace", trace_summary(trace)}};
  json reports = json::array();
  for (const auto& path : o.inputs) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Config, "cannot open report '" + path + "'");
    try {
      reports.push_back(json::parse(in));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Schema, "report '" + path + "': " + e.what());
    }
  }
  doc["reports"] = reports;
  json s = {{"reports", reports.size()}, {"steps", trace.size()}};
  s["files"] = emit_report(o, "report.json", doc);
  if (!o.out_dir.empty()) {
    std::ostringstream ts;
    write_trace(trace, ts, o.exact);
    write_text(out_path(o, "trace.csv"), ts.str());
    s["files"].push_back(out_path(o, "trace.csv"));
  }
  return s;
}

json dispatch(const Options& o, const AppConfig& cfg) {
  if (o.command == "simulate") return cmd_simulate(o, cfg);
  if (o.command == "fit") return cmd_fit(o, cfg);
  if (o.command == "validate") return cmd_validate(o, cfg);
  if (o.command == "ci-asymptotic") return cmd_ci_asymptotic(o, cfg);
  if (o.command == "ci-lyapunov") return cmd_ci_lyapunov(o, cfg);
  if (o.command == "ci-mc") return cmd_ci_mc(o, cfg);
  return cmd_report(o, cfg);
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Two-step quasi-Newton identification with saturated observations", "tsqn"};
  app.require_subcommand(1);
  Options o;
  std::string seed_text;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed_text, "RNG seed; overrides the config and " + std::string(kSeedEnv));
    sub->add_option("--out", o.out_dir, "Output directory");
    sub->add_option("--data", o.data_path, "Dataset CSV instead of the config scenario");
    sub->add_option("--mu", o.mu, "Regularization policy")->check(CLI::IsMember({"constant", "adaptive"}));
    sub->add_flag("--exact", o.exact, "Add hexadecimal float columns to the trace");
  };
  for (const char* name : {"simulate", "fit", "validate", "ci-asymptotic", "ci-lyapunov", "ci-mc", "report"}) {
    auto* sub = app.add_subcommand(name);
    add_common(sub);
    const std::string n = name;
    if (n.rfind("ci-", 0) == 0) sub->add_option("--alpha", o.alpha, "Significance level");
    if (n == "ci-lyapunov") {
      sub->add_option("--plugin", o.plugin, "Moment plug-in")->check(CLI::IsMember({"true", "estimate", "worst"}));
      sub->add_option("--tau", o.tau, "Exponent slack tau > 0");
      sub->add_option("--N", o.N, "Last step of the bound");
    }
    if (n == "ci-mc") {
      sub->add_option("--t", o.t, "Hoeffding confidence slack");
      sub->add_option("--K", o.K, "Replications");
      sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
    }
    if (n == "report") sub->add_option("--input", o.inputs, "Report JSON files to merge");
    sub->callback([&o, n] { o.command = n; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cout << json{{"command", o.command}, {"status", "error"}, {"code", "config"}, {"message", e.what()}}.dump()
              << std::endl;
    return exit_code(ErrorCode::Config);
  }

  try {
    if (!seed_text.empty()) o.seed = parse_seed(seed_text, "--seed");
    const AppConfig cfg = resolve(o);
    json summary = dispatch(o, cfg);
    summary["command"] = o.command;
    summary["status"] = "ok";
    summary["config_hash"] = cfg.hash;
    summary["seed"] = cfg.seed;
    std::cout << summary.dump() << std::endl;
    return 0;
  } catch (const Error& e) {
    std::cerr << "tsqn " << o.command << ": " << to_string(e.code()) << " error: " << e.what() << std::endl;
    std::cout << json{{"command", o.command}, {"status", "error"}, {"code", to_string(e.code())}, {"message", e.what()}}
                     .dump()
              << std::endl;
    return exit_code(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "tsqn " << o.command << ": " << e.what() << std::endl;
    std::cout << json{{"command", o.command}, {"status", "error"}, {"code", "config"}, {"message", e.what()}}.dump()
              << std::endl;
    return exit_code(ErrorCode::Config);
  }
}

}  // namespace tsqn
