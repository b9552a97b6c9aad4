#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tsqn/commands.hpp"
#include "tsqn/error.hpp"
#include "tsqn/io.hpp"

using namespace tsqn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("tsqn_io_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tsqn");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  testing::internal::CaptureStdout();
  const int rc = run_cli(static_cast<int>(argv.size()), argv.data());
  testing::internal::GetCapturedStdout();
  return rc;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::Config;
}

}  // namespace

TEST(Numbers, RoundTrip) {
  for (double v : {0.1, -3.25e-300, 1.0 / 3.0, 6.02214076e23, kInf, -kInf}) {
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(format_double(kInf), "inf");
  EXPECT_EQ(code_of([] { parse_double("1.2.3"); }), ErrorCode::Parse);
}

TEST(Dataset, EmptyAndRoundTrip) {
  std::istringstream empty("");
  EXPECT_TRUE(read_dataset(empty).empty());
  std::vector<ObservationRecord> recs;
  for (int k = 0; k < 5; ++k) {
    Vector phi(2);
    phi << 0.1 * k, -1.0 / (k + 3);
    recs.push_back({phi, k % 2 ? SaturationSpec::linear() : SaturationSpec::censored(0.0, 15.0), 0.7 + k});
  }
  std::ostringstream out;
  write_dataset(recs, out);
  std::istringstream in(out.str());
  const auto back = read_dataset(in, 2);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t k = 0; k < recs.size(); ++k) {
    EXPECT_EQ(back[k].phi, recs[k].phi);
    EXPECT_EQ(back[k].spec, recs[k].spec);
    EXPECT_EQ(back[k].y, recs[k].y);
  }
}

TEST(Dataset, ErrorsCarryLineNumbersAndDistinctCodes) {
  const std::string header = "k,phi_0,l,u,L,U,y\n";
  std::istringstream bad_order(header + "0,1,0,15,0,15,3\n1,1,5,2,0,15,3\n");
  try {
    read_dataset(bad_order);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Data);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("L <= l <= u <= U"), std::string::npos);
  }
  std::istringstream non_numeric(header + "0,abc,0,15,0,15,3\n");
  EXPECT_EQ(code_of([&] { read_dataset(non_numeric); }), ErrorCode::Parse);
  std::istringstream wrong_header("k,x,l,u,L,U,y\n");
  EXPECT_EQ(code_of([&] { read_dataset(wrong_header); }), ErrorCode::Schema);
  std::istringstream gap(header + "1,1,0,15,0,15,3\n");
  EXPECT_EQ(code_of([&] { read_dataset(gap); }), ErrorCode::Data);
  std::istringstream out_of_range(header + "0,1,0,15,0,15,16\n");
  EXPECT_EQ(code_of([&] { read_dataset(out_of_range); }), ErrorCode::Data);
}

TEST(Config, ParsesAndHashesWithoutSeed) {
  const auto doc = nlohmann::json::parse(R"({
    "schema_version": 1, "seed": 3,
    "domain": {"type": "cube", "dimension": 2, "half_width": 2},
    "noise": {"type": "gaussian", "variance": 0.5},
    "estimator": {"mu": "constant", "mu_value": 0.5, "p0_scale": 0.1},
    "scenario": {"A_diag": [0.5, 0.2], "theta_true": [1, -1], "spec": {"l": 0, "u": "inf"}, "n": 20},
    "ci": {"alpha": 0.1, "plugin": "worst"},
    "monte_carlo": {"K": 50, "t": 0.1}
  })");
  const auto cfg = parse_config(doc);
  EXPECT_EQ(cfg.seed, 3u);
  EXPECT_EQ(cfg.estimator.mu.kind, MuPolicy::Kind::Constant);
  EXPECT_EQ(cfg.scenario->specs[0].u, kInf);
  EXPECT_EQ(cfg.ci.plugin, Plugin::WorstCase);
  EXPECT_EQ(cfg.mc.K, 50u);
  auto other = doc;
  other["seed"] = 99;
  EXPECT_EQ(config_hash(other), cfg.hash);
  other["noise"]["variance"] = 0.6;
  EXPECT_NE(config_hash(other), cfg.hash);
}

TEST(Config, SchemaAndValueErrors) {
  EXPECT_EQ(code_of([] { parse_config(nlohmann::json::parse(R"({"domian": {}})")); }), ErrorCode::Schema);
  EXPECT_EQ(code_of([] {
              parse_config(nlohmann::json::parse(R"({"domain": {"type": "cube", "dimension": 1, "half_width": 1},
                                                    "estimator": {"theta0": [4]}})"));
            }),
            ErrorCode::Config);
}

TEST(Validation, PassesOnSimulatedData) {
  const auto sc = ScenarioConfig::reference(2, 500);
  const auto recs = gen_observations(gen_regressors(sc), sc.theta_true, sc.specs, sc.noise, sc.seed);
  const auto cfg = EstimatorConfig::defaults(reference_domain(), sc.noise);
  const auto rep = validate_records(recs, cfg, sc.theta_true);
  EXPECT_TRUE(rep.pass()) << to_json(rep).dump();
  EXPECT_EQ(to_json(rep)["checks"][1]["witness"]["c"], 0.0);
}

class Cli : public testing::Test {
 protected:
  void SetUp() override {
    dir = scratch(testing::UnitTest::GetInstance()->current_test_info()->name());
    config = (dir / "cfg.json").string();
    std::ofstream(config) << R"({"schema_version": 1, "seed": 4,
      "domain": {"type": "cube", "dimension": 2, "half_width": 3},
      "estimator": {"p0_scale": 0.1},
      "scenario": {"A_diag": [0.5, 0.3], "input_scale": 2, "theta_true": [1.0, -0.5],
                   "spec": {"l": 0, "u": 15}, "n": 200},
      "monte_carlo": {"K": 20, "threads": 1}})";
  }
  void TearDown() override { fs::remove_all(dir); }
  fs::path dir;
  std::string config;
};

TEST_F(Cli, SimulateThenFitReproducesTrace) {
  ASSERT_EQ(cli({"simulate", "--config", config, "--out", (dir / "sim").string(), "--exact"}), 0);
  ASSERT_EQ(cli({"fit", "--config", config, "--data", (dir / "sim" / "data.csv").string(), "--out",
                 (dir / "fit").string(), "--exact"}),
            0);
  EXPECT_EQ(slurp(dir / "sim" / "trace.csv"), slurp(dir / "fit" / "trace.csv"));
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(cli({"ci-mc", "--config", config, "--alpha", "0.5", "--t", "0.5"}), 2);
  EXPECT_EQ(cli({"ci-mc", "--config", config, "--K", "20"}), 0);
  EXPECT_EQ(cli({"ci-asymptotic", "--config", config}), 0);
  EXPECT_EQ(cli({"ci-lyapunov", "--config", config, "--plugin", "true"}), 0);
  EXPECT_EQ(cli({"validate", "--config", config}), 0);
  EXPECT_EQ(cli({"simulate", "--config", config, "--seed", "x"}), 2);
  EXPECT_EQ(cli({"nonsense"}), 2);
  std::ofstream(dir / "bad.csv") << "k,phi_0,phi_1,l,u,L,U,y\n0,1,1,0,15,0,15,oops\n";
  EXPECT_EQ(cli({"fit", "--config", config, "--data", (dir / "bad.csv").string()}), 3);
}

TEST_F(Cli, ReportMergesInputs) {
  ASSERT_EQ(cli({"ci-asymptotic", "--config", config, "--out", dir.string()}), 0);
  ASSERT_EQ(cli({"report", "--config", config, "--out", (dir / "r").string(), "--input",
                 (dir / "ci_asymptotic.json").string()}),
            0);
  const auto doc = nlohmann::json::parse(slurp(dir / "r" / "report.json"));
  EXPECT_EQ(doc["reports"][0]["method"], "asymptotic");
  EXPECT_EQ(doc["seed"], 4);
}
