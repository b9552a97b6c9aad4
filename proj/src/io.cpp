#include "tsqn/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tsqn/checkpoint.hpp"
#include "tsqn/error.hpp"

namespace tsqn {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  if (text == "inf" || text == "+inf") return kInf;
  if (text == "-inf") return -kInf;
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != last) {
    throw Error(ErrorCode::Parse, "not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::string config_hash(const json& document) {
  json copy = document;
  if (copy.is_object()) copy.erase("seed");
  const std::string text = copy.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Config

namespace {

double number(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    try {
      return parse_double(j.get<std::string>());
    } catch (const Error&) {
    }
  }
  throw Error(ErrorCode::Schema, where + ": expected a number");
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  return obj.contains(key) ? number(obj.at(key), where + "." + key) : fallback;
}

Vector vector_of(const json& j, const std::string& where) {
  if (!j.is_array()) throw Error(ErrorCode::Schema, where + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], where);
  return v;
}

Matrix matrix_of(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::Schema, where + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix A(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vector r = vector_of(j[static_cast<std::size_t>(i)], where);
    if (r.size() != cols) throw Error(ErrorCode::Schema, where + ": ragged matrix");
    A.row(i) = r.transpose();
  }
  return A;
}

void only_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::Schema, where + ": expected an object");
  for (const auto& [k, _] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
      throw Error(ErrorCode::Schema, where + ": unknown key '" + k + "'");
    }
  }
}

SaturationSpec spec_of(const json& j, const std::string& where) {
  only_keys(j, {"l", "u", "L", "U"}, where);
  const double l = number_or(j, "l", -kInf, where);
  const double u = number_or(j, "u", kInf, where);
  const double L = number_or(j, "L", l, where);
  const double U = number_or(j, "U", u, where);
  try {
    return SaturationSpec::make(l, u, L, U);
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, where + ": " + e.what());
  }
}

DomainSet domain_of(const json& j) {
  const std::string where = "domain";
  only_keys(j, {"type", "lower", "upper", "dimension", "half_width", "center", "radius"}, where);
  const std::string type = j.value("type", "box");
  if (type == "box") return DomainSet::box(vector_of(j.at("lower"), "domain.lower"), vector_of(j.at("upper"), "domain.upper"));
  if (type == "cube") {
    return DomainSet::cube(j.at("dimension").get<Eigen::Index>(), number(j.at("half_width"), "domain.half_width"));
  }
  if (type == "ball") return DomainSet::ball(vector_of(j.at("center"), "domain.center"), number(j.at("radius"), "domain.radius"));
  throw Error(ErrorCode::Schema, "domain.type must be box, cube or ball");
}

NoiseModel noise_of(const json& j) {
  only_keys(j, {"type", "variance", "grid", "cdf", "pdf", "eta"}, "noise");
  const std::string type = j.value("type", "gaussian");
  const double eta = number_or(j, "eta", 1.0, "noise");
  if (type == "gaussian") return NoiseModel::gaussian(number_or(j, "variance", 1.0, "noise"), eta);
  if (type == "tabulated") {
    auto list = [&](const char* key) {
      const Vector v = vector_of(j.at(key), std::string("noise.") + key);
      return std::vector<double>(v.data(), v.data() + v.size());
    };
    return NoiseModel::tabulated(list("grid"), list("cdf"), list("pdf"), eta);
  }
  throw Error(ErrorCode::Schema, "noise.type must be gaussian or tabulated");
}

EstimatorConfig estimator_of(const json& j, DomainSet domain, NoiseModel noise) {
  only_keys(j,
            {"mu", "mu_value", "mu_min", "mu_max", "p0_scale", "p0_bar_scale", "P0", "P0_bar", "theta0", "theta0_bar",
             "beta_tie_epsilon", "M_inflation", "beta_uses_updated_bar", "resync_interval"},
            "estimator");
  const std::string w = "estimator";
  EstimatorConfig c = EstimatorConfig::defaults(std::move(domain), std::move(noise), number_or(j, "p0_scale", 100.0, w));
  const auto m = c.dimension();
  if (j.contains("p0_bar_scale")) c.P0_bar = number(j.at("p0_bar_scale"), w) * Matrix::Identity(m, m);
  if (j.contains("P0")) c.P0 = matrix_of(j.at("P0"), "estimator.P0");
  if (j.contains("P0_bar")) c.P0_bar = matrix_of(j.at("P0_bar"), "estimator.P0_bar");
  if (j.contains("theta0")) c.theta0 = vector_of(j.at("theta0"), "estimator.theta0");
  if (j.contains("theta0_bar")) c.theta0_bar = vector_of(j.at("theta0_bar"), "estimator.theta0_bar");
  const std::string mu = j.value("mu", "adaptive");
  if (mu == "constant") {
    c.mu = MuPolicy::constant(number_or(j, "mu_value", 1.0, w));
  } else if (mu == "adaptive") {
    c.mu = MuPolicy::adaptive(number_or(j, "mu_min", 1e-6, w), number_or(j, "mu_max", 1e6, w));
    c.mu.value = number_or(j, "mu_value", 1.0, w);
  } else {
    throw Error(ErrorCode::Config, "estimator.mu must be constant or adaptive");
  }
  c.beta_tie_epsilon = number_or(j, "beta_tie_epsilon", c.beta_tie_epsilon, w);
  c.M_inflation = number_or(j, "M_inflation", c.M_inflation, w);
  c.beta_uses_updated_bar = j.value("beta_uses_updated_bar", c.beta_uses_updated_bar);
  c.resync_interval = j.value("resync_interval", c.resync_interval);
  return c;
}

ScenarioConfig scenario_of(const json& j, const NoiseModel& noise, std::uint64_t seed) {
  only_keys(j, {"preset", "A", "A_diag", "input_scale", "theta_true", "spec", "specs", "n"}, "scenario");
  ScenarioConfig s;
  if (j.contains("preset")) {
    if (j.at("preset") != "reference") throw Error(ErrorCode::Config, "scenario.preset must be 'reference'");
    s = ScenarioConfig::reference(seed);
  }
  if (j.contains("A")) s.A = matrix_of(j.at("A"), "scenario.A");
  if (j.contains("A_diag")) s.A = vector_of(j.at("A_diag"), "scenario.A_diag").asDiagonal();
  if (j.contains("theta_true")) s.theta_true = vector_of(j.at("theta_true"), "scenario.theta_true");
  s.input_scale = number_or(j, "input_scale", s.input_scale, "scenario");
  if (j.contains("spec")) s.specs = {spec_of(j.at("spec"), "scenario.spec")};
  if (j.contains("specs")) {
    s.specs.clear();
    for (std::size_t i = 0; i < j.at("specs").size(); ++i) {
      s.specs.push_back(spec_of(j.at("specs")[i], "scenario.specs[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("n")) s.n = j.at("n").get<std::size_t>();
  s.noise = noise;
  s.seed = seed;
  return s;
}

}  // namespace

AppConfig parse_config(const json& doc) {
  try {
    only_keys(doc, {"schema_version", "seed", "domain", "noise", "estimator", "scenario", "ci", "monte_carlo"},
              "config");
    if (doc.value("schema_version", kConfigSchemaVersion) != kConfigSchemaVersion) {
      throw Error(ErrorCode::Schema, "unsupported config schema_version");
    }
    AppConfig cfg;
    cfg.document = doc;
    cfg.hash = config_hash(doc);
    cfg.seed = doc.value("seed", std::uint64_t{0});

    const NoiseModel noise = doc.contains("noise") ? noise_of(doc.at("noise")) : NoiseModel::gaussian(1.0);
    const bool reference = doc.contains("scenario") && doc.at("scenario").contains("preset");
    DomainSet domain = DomainSet::cube(1, 1.0);
    if (doc.contains("domain")) {
      domain = domain_of(doc.at("domain"));
    } else if (reference) {
      domain = reference_domain();
    } else {
      throw Error(ErrorCode::Schema, "config: 'domain' is required");
    }
    cfg.estimator = estimator_of(doc.value("estimator", json::object()), domain, noise);
    cfg.estimator.validate();
    if (doc.contains("scenario")) {
      cfg.scenario = scenario_of(doc.at("scenario"), noise, cfg.seed);
      cfg.scenario->validate();
    }
    if (doc.contains("ci")) {
      const auto& c = doc.at("ci");
      only_keys(c, {"alpha", "tau", "plugin", "N"}, "ci");
      cfg.ci.alpha = number_or(c, "alpha", cfg.ci.alpha, "ci");
      cfg.ci.tau = number_or(c, "tau", cfg.ci.tau, "ci");
      if (c.contains("plugin")) cfg.ci.plugin = plugin_from_string(c.at("plugin").get<std::string>());
      if (c.contains("N")) cfg.ci.N = c.at("N").get<std::size_t>();
    }
    if (doc.contains("monte_carlo")) {
      const auto& c = doc.at("monte_carlo");
      only_keys(c, {"K", "alpha", "t", "threads"}, "monte_carlo");
      cfg.mc.K = c.value("K", cfg.mc.K);
      cfg.mc.alpha = number_or(c, "alpha", cfg.mc.alpha, "monte_carlo");
      cfg.mc.t = number_or(c, "t", cfg.mc.t, "monte_carlo");
      cfg.mc.threads = c.value("threads", cfg.mc.threads);
    }
    return cfg;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Schema, std::string("config: ") + e.what());
  } catch (const Error& e) {
    // Validation failures raised as Data by shared constructors are configuration problems here.
    if (e.code() == ErrorCode::Data) throw Error(ErrorCode::Config, e.what());
    throw;
  }
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Schema, "config '" + path + "': " + e.what());
  }
  return parse_config(doc);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    auto cell = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!cell.empty() && (cell.front() == ' ')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r')) cell.remove_suffix(1);
    out.push_back(cell);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string at_line(std::size_t line, const std::string& msg) { return "line " + std::to_string(line) + ": " + msg; }

}  // namespace

std::vector<ObservationRecord> read_dataset(std::istream& in, Eigen::Index dimension) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<ObservationRecord> out;
  if (!std::getline(in, line)) return out;
  ++lineno;
  const auto header = split_csv(line);
  if (header.size() < 7 || header.front() != "k") {
    throw Error(ErrorCode::Schema, at_line(lineno, "dataset header must be k,phi_0..phi_{m-1},l,u,L,U,y"));
  }
  const auto m = static_cast<Eigen::Index>(header.size() - 6);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (header[static_cast<std::size_t>(i) + 1] != "phi_" + std::to_string(i)) {
      throw Error(ErrorCode::Schema, at_line(lineno, "expected column phi_" + std::to_string(i)));
    }
  }
  const char* tail[] = {"l", "u", "L", "U", "y"};
  for (std::size_t i = 0; i < 5; ++i) {
    if (header[static_cast<std::size_t>(m) + 1 + i] != tail[i]) {
      throw Error(ErrorCode::Schema, at_line(lineno, std::string("expected column ") + tail[i]));
    }
  }
  if (dimension >= 0 && m != dimension) {
    throw Error(ErrorCode::Schema, "dataset has " + std::to_string(m) + " regressor columns, config expects " +
                                       std::to_string(dimension));
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::Schema, at_line(lineno, "expected " + std::to_string(header.size()) + " cells, got " +
                                                         std::to_string(cells.size())));
    }
    std::vector<double> v(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      try {
        v[i] = parse_double(cells[i]);
      } catch (const Error& e) {
        throw Error(ErrorCode::Parse, at_line(lineno, std::string(header[i]) + ": " + e.what()));
      }
    }
    if (v[0] != static_cast<double>(out.size())) {
      throw Error(ErrorCode::Data, at_line(lineno, "k must be contiguous from 0, expected " + std::to_string(out.size())));
    }
    ObservationRecord r;
    r.phi = Eigen::Map<const Vector>(v.data() + 1, m);
    const auto base = static_cast<std::size_t>(m) + 1;
    r.spec = {v[base], v[base + 1], v[base + 2], v[base + 3]};
    r.y = v[base + 4];
    if (auto why = describe_violation(r.spec); !why.empty()) {
      throw Error(ErrorCode::Data, at_line(lineno, "threshold ordering L <= l <= u <= U violated: " + why));
    }
    if (!r.phi.allFinite()) throw Error(ErrorCode::Data, at_line(lineno, "regressor must be finite"));
    if (!std::isfinite(r.y) || r.y < r.spec.L || r.y > r.spec.U) {
      throw Error(ErrorCode::Data, at_line(lineno, "y outside [L, U]"));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ObservationRecord> load_dataset(const std::string& path, Eigen::Index dimension) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open dataset '" + path + "'");
  return read_dataset(in, dimension);
}

void write_dataset(const std::vector<ObservationRecord>& records, std::ostream& out) {
  const Eigen::Index m = records.empty() ? 0 : records.front().phi.size();
  out << "k";
  for (Eigen::Index i = 0; i < m; ++i) out << ",phi_" << i;
  out << ",l,u,L,U,y\n";
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    out << k;
    for (Eigen::Index i = 0; i < m; ++i) out << ',' << format_double(r.phi(i));
    out << ',' << format_double(r.spec.l) << ',' << format_double(r.spec.u) << ',' << format_double(r.spec.L) << ','
        << format_double(r.spec.U) << ',' << format_double(r.y) << '\n';
  }
}

void write_trace(const RunTrace& trace, std::ostream& out, bool exact) {
  const Eigen::Index m = trace.config.dimension();
  const bool truth = trace.truth.has_value();
  out << "k,y,prediction,prediction_bar";
  for (Eigen::Index i = 0; i < m; ++i) out << ",theta_bar_" << i;
  for (Eigen::Index i = 0; i < m; ++i) out << ",theta_hat_" << i;
  out << ",beta_bar,a_bar,beta,a,mu,g_lo,g_hi,M,phi_P_phi,phi_P_bar_phi";
  for (Eigen::Index i = 0; i < m; ++i) out << ",P_diag_" << i;
  out << ",logdet_P_inv,logdet_P_bar_inv,lambda_min,lambda_max";
  if (truth) out << ",error_bar,error_hat,regret_bar,regret_hat";
  if (exact) {
    for (Eigen::Index i = 0; i < m; ++i) out << ",theta_bar_hex_" << i;
    for (Eigen::Index i = 0; i < m; ++i) out << ",theta_hat_hex_" << i;
  }
  out << '\n';
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto& s = trace.steps[k];
    const auto& g = s.gains;
    auto put = [&out](double v) { out << ',' << format_double(v); };
    out << s.k;
    put(s.y);
    put(s.prediction);
    put(s.prediction_bar);
    for (Eigen::Index i = 0; i < m; ++i) put(s.theta_bar_next(i));
    for (Eigen::Index i = 0; i < m; ++i) put(s.theta_hat_next(i));
    for (double v : {g.beta_bar, g.a_bar, g.beta, g.a, g.mu, g.g_lo, g.g_hi, g.M, s.phi_P_phi, s.phi_P_bar_phi}) put(v);
    for (Eigen::Index i = 0; i < m; ++i) put(s.P_diag_next(i));
    for (double v : {s.logdet_P_inv_next, s.logdet_P_bar_inv_next, s.info_lambda_min, s.info_lambda_max}) put(v);
    if (truth) {
      put((s.theta_bar_next - *trace.truth).norm());
      put((s.theta_hat_next - *trace.truth).norm());
      put(regret(trace, k, Layer::Preliminary));
      put(regret(trace, k, Layer::Accelerated));
    }
    if (exact) {
      for (Eigen::Index i = 0; i < m; ++i) out << ',' << hex_encode(s.theta_bar_next(i));
      for (Eigen::Index i = 0; i < m; ++i) out << ',' << hex_encode(s.theta_hat_next(i));
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Reports

namespace {

json num_json(double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); }

}  // namespace

json to_json(const ConfidenceReport& r) {
  json intervals = json::array();
  for (std::size_t j = 0; j < r.lower.size(); ++j) {
    intervals.push_back({{"component", j},
                         {"center", num_json(r.center.at(j))},
                         {"lower", num_json(r.lower[j])},
                         {"upper", num_json(r.upper[j])}});
  }
  json constants = json::object();
  for (const auto& [k, v] : r.constants) constants[k] = num_json(v);
  return {{"method", r.method},
          {"confidence", r.confidence},
          {"intervals", intervals},
          {"constants", constants},
          {"provenance", r.provenance},
          {"warnings", r.warnings}};
}

json to_json(const LyapunovConstants& c) {
  json bound = json::array();
  for (double v : c.squared_error_bound) bound.push_back(num_json(v));
  return {{"sigma_b", num_json(c.sigma_b)},     {"sigma_a", num_json(c.sigma_a)},
          {"sigma_bar_b", num_json(c.sigma_bar_b)}, {"sigma_bar_a", num_json(c.sigma_bar_a)},
          {"Phi", num_json(c.Phi)},             {"Phi_bar", num_json(c.Phi_bar)},
          {"gamma", num_json(c.gamma)},         {"Psi", num_json(c.Psi)},
          {"rho", num_json(c.rho)},             {"lambda_N", num_json(c.lambda_N)},
          {"delta0", num_json(c.delta0)},       {"c0", num_json(c.c0)},
          {"V0", num_json(c.V0)},               {"V0_bar", num_json(c.V0_bar)},
          {"Gamma", num_json(c.Gamma)},         {"Gamma_bar", num_json(c.Gamma_bar)},
          {"C", num_json(c.C)},                 {"squared_error_bound", bound},
          {"regret_bound", num_json(c.regret_bound)}};
}

bool ValidationReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

ValidationReport validate_records(const std::vector<ObservationRecord>& records, const EstimatorConfig& config,
                                  const std::optional<Vector>& theta) {
  ValidationReport rep;
  const auto m = config.dimension();

  AssumptionCheck bounded{"bounded_regressors_and_interior_parameter", true, "", json::object()};
  double max_norm = 0.0, max_M = 0.0;
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    if (r.phi.size() != m || !r.phi.allFinite()) {
      bounded.pass = false;
      bounded.message = "regressor " + std::to_string(k) + " has the wrong size or is not finite";
      break;
    }
    max_norm = std::max(max_norm, r.phi.norm());
    max_M = std::max(max_M, sup_abs_inner(r.phi, config.domain));
  }
  bounded.witness["max_phi_norm"] = num_json(max_norm);
  bounded.witness["max_M"] = num_json(max_M);
  if (theta) {
    const bool inside = theta->size() == m && config.domain.interior(*theta);
    bounded.witness["theta_interior"] = inside;
    if (!inside) {
      bounded.pass = false;
      bounded.message = "true parameter is not interior to the domain";
    }
  }
  rep.checks.push_back(bounded);

  AssumptionCheck ordering{"threshold_ordering", true, "", json::object()};
  double c = 0.0, l_plus = 0.0, u_minus = 0.0;
  std::vector<SaturationSpec> distinct;
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& s = records[k].spec;
    if (auto why = describe_violation(s); !why.empty()) {
      ordering.pass = false;
      ordering.message = "step " + std::to_string(k) + ": " + why;
      break;
    }
    if (s.has_lower()) {
      c = std::max(c, s.l - s.L);
      l_plus = std::max(l_plus, std::max(s.l, 0.0));
    }
    if (s.has_upper()) {
      c = std::max(c, s.U - s.u);
      u_minus = std::max(u_minus, std::max(-s.u, 0.0));
    }
    if (distinct.size() < 64 && std::find(distinct.begin(), distinct.end(), s) == distinct.end()) {
      distinct.push_back(s);
    }
  }
  ordering.witness = {{"c", num_json(c)}, {"sup_l_plus", num_json(l_plus)}, {"sup_u_minus", num_json(u_minus)}};
  rep.checks.push_back(ordering);

  AssumptionCheck link{"link_derivative_bounds", true, "", json::object()};
  const double M = max_M * config.M_inflation;
  link.witness["M"] = num_json(M);
  if (!(config.noise.variance() > 0.0)) {
    link.pass = false;
    link.message = "noise variance must be positive";
  }
  double g_lo = kInf, g_hi = 0.0;
  bool floored = false;
  if (link.pass && ordering.pass && M > 0.0) {
    for (const auto& s : distinct) {
      try {
        const auto b = g_bounds(M, s, config.noise, config.link, false);
        g_lo = std::min(g_lo, b.g_lo);
        g_hi = std::max(g_hi, b.g_hi);
        floored = floored || b.g_lo_floored;
      } catch (const Error& e) {
        link.pass = false;
        link.message = e.what();
        break;
      }
    }
    link.witness["g_lo"] = num_json(g_lo);
    link.witness["g_hi"] = num_json(g_hi);
    link.witness["g_lo_underflow"] = floored;
    if (floored) link.message = "lower derivative bound is positive but below the smallest normal double";
  }
  rep.checks.push_back(link);
  return rep;
}

json to_json(const ValidationReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"message", c.message}, {"witness", c.witness}});
  }
  return {{"pass", r.pass()}, {"checks", checks}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Config, "cannot write '" + path + "'");
  out << text;
}

}  // namespace tsqn
