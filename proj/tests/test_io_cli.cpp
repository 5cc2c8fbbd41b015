#include "pdruin/commands.hpp"
#include "pdruin/errors.hpp"
#include "pdruin/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pdruin;
namespace fs = std::filesystem;

namespace {

const char* constant_cfg = R"({
  "schema_version": 1,
  "model": {
    "drift": {"kind": "constant", "c": 1.0},
    "jump_rate": 1.0,
    "kill_rate": 0.0,
    "jumps": {"beta": [1.0], "B": [[-2.0]]}
  },
  "grid": {"from": 0.0, "to": 2.0, "points": 5},
  "simulation": {"x0": 0.5, "paths": 2000, "seed": 3},
  "output": {"prefix": "const"}
})";

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("pdruin_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name, std::ios::binary) << text;
    return path_ / name;
  }

 private:
  fs::path path_;
};

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "pdruin");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ParsesAndValidates) {
  const auto cfg = parse_config(constant_cfg);
  EXPECT_EQ(cfg.model.jump_rate, 1.0);
  EXPECT_EQ(cfg.grid.points, 5);
  EXPECT_EQ(cfg.simulation.paths, 2000);
  EXPECT_TRUE(cfg.problem.one_sided());
  EXPECT_EQ(cfg.output.format, "csv");
}

TEST(Config, ParseErrorReportsLineAndColumn) {
  const std::string msg = config_error("{\n  \"schema_version\": 1,\n  \"model\": {,}\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column"), std::string::npos);
}

TEST(Config, UnknownFieldsAndSchemaVersion) {
  std::string text = constant_cfg;
  text.replace(text.find("\"jump_rate\""), 11, "\"jump_ratee\"");
  EXPECT_NE(config_error(text).find("model.jump_ratee"), std::string::npos);

  text = constant_cfg;
  text.replace(text.find("\"schema_version\": 1"), 19, "\"schema_version\": 2");
  EXPECT_NE(config_error(text).find("schema_version"), std::string::npos);

  text = constant_cfg;
  text.replace(text.find("[[-2.0]]"), 8, "[[2.0]]");
  EXPECT_NE(config_error(text).find("model.jumps"), std::string::npos);

  EXPECT_NE(config_error(R"({"schema_version": 1})").find("model"), std::string::npos);
  EXPECT_THROW(load_config("/nonexistent/pdruin.json"), ConfigError);
}

TEST(Config, RoundTripIsByteIdentical) {
  for (const auto& cfg : {parse_config(constant_cfg), figure1_config()}) {
    const std::string a = dump_config(cfg);
    const std::string b = dump_config(parse_config(a));
    EXPECT_EQ(a, b);
  }
  // infinity is written as null
  EXPECT_TRUE(config_to_json(figure1_config())["problem"]["upper"].is_null());
}

TEST(Output, NumbersAndCsv) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(std::stod(format_number(M_PI)), M_PI);

  SolutionCurve c;
  c.grid = {0.0, 1.0};
  c.psi = {0.5, 0.25};
  c.m = Eigen::MatrixXd(2, 1);
  c.m << 1.0, 0.5;
  c.method = Method::closed_form;
  std::ostringstream os;
  write_csv(os, c);
  EXPECT_EQ(os.str(), "x,psi,m_1,method\n0,0.5,1,closed_form\n1,0.25,0.5,closed_form\n");
}

TEST(Dispatch, ChoosesMethodByGates) {
  auto cfg = parse_config(constant_cfg);
  const auto grid = cfg.grid.points_vector();
  EXPECT_EQ(solve_dispatch(cfg.model, cfg.problem, grid).method, Method::closed_form);

  const auto fig = figure1_config();
  EXPECT_EQ(solve_dispatch(fig.model, fig.problem, fig.grid.points_vector()).method, Method::closed_form);

  // wavy drift fails the integrability test; q > 0 rules out the quadrature formula
  std::vector<double> xs, ph;
  for (int i = 0; i <= 60; ++i) {
    xs.push_back(i * 0.25);
    ph.push_back(1.0 + 0.3 * std::sin(xs.back()));
  }
  cfg.model.drift = DriftSpec::tabulated(xs, ph);
  cfg.model.kill_rate = 0.4;
  EXPECT_EQ(solve_dispatch(cfg.model, cfg.problem, grid).method, Method::ode_bvp);

  cfg.problem.overshoot_xi = 1.0;
  try {
    solve_dispatch(cfg.model, cfg.problem, grid);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("overshoot"), std::string::npos);
  }
}

TEST(Compare, NothingToCompare) {
  auto cfg = parse_config(constant_cfg);
  cfg.compare.methods = {Method::closed_form};
  cfg.compare.mc_points = 0;
  try {
    compare_methods(cfg);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "nothing to compare");
  }
}

TEST(Compare, ConstantDriftMethodsAgree) {
  auto cfg = parse_config(constant_cfg);
  cfg.compare.mc_points = 0;
  const auto cmp = compare_methods(cfg);
  EXPECT_GE(cmp.methods.size(), 2u);
  EXPECT_LT(cmp.max_discrepancy, 1e-7);
  EXPECT_TRUE(cmp.passed);
}

TEST(Cli, ExitCodes) {
  TempDir tmp;
  EXPECT_EQ(cli({}).code, exit_usage);
  EXPECT_EQ(cli({"solve"}).code, exit_usage);
  EXPECT_EQ(cli({"bogus"}).code, exit_usage);
  EXPECT_EQ(cli({"solve", "--config", (tmp.path() / "missing.json").string()}).code, exit_usage);
  EXPECT_EQ(cli({"--help"}).code, exit_ok);

  const auto bad = tmp.write("bad.json", "{\"schema_version\": 1,");
  const auto r = cli({"solve", "--config", bad.string()});
  EXPECT_EQ(r.code, exit_usage);
  EXPECT_NE(r.err.find("line"), std::string::npos);

  const auto good = tmp.write("c.json", constant_cfg);
  const auto out = (tmp.path() / "out").string();
  EXPECT_EQ(cli({"solve", "--config", good.string(), "--output", out}).code, exit_ok);
  EXPECT_EQ(cli({"simulate", "--config", good.string(), "--output", out, "--paths", "0"}).code, exit_usage);
  // every path censored
  EXPECT_EQ(cli({"simulate", "--config", good.string(), "--output", out, "--max-time", "1e-9", "--paths", "50"}).code,
            exit_numerical);
}

TEST(Cli, CheckSolvability) {
  TempDir tmp;
  const auto q0 = tmp.write("q0.json", constant_cfg);
  auto r = cli({"check-solvability", "--config", q0.string()});
  ASSERT_EQ(r.code, exit_ok) << r.err;
  EXPECT_NE(r.out.find("dimension 2, solvable"), std::string::npos) << r.out;

  std::string text = constant_cfg;
  text.replace(text.find("\"kill_rate\": 0.0"), 16, "\"kill_rate\": 0.5");
  const auto q5 = tmp.write("q5.json", text);
  r = cli({"check-solvability", "--config", q5.string()});
  ASSERT_EQ(r.code, exit_ok) << r.err;
  EXPECT_NE(r.out.find("dimension 4, non-solvable (gl(2,R))"), std::string::npos) << r.out;

  r = cli({"check-solvability", "--config", q5.string(), "--format", "json"});
  ASSERT_EQ(r.code, exit_ok);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["dimension"], 4);
  EXPECT_EQ(j["solvable"], false);
}

TEST(Cli, CheckIntegrability) {
  TempDir tmp;
  const auto c = tmp.write("c.json", constant_cfg);
  const auto r = cli({"check-integrability", "--config", c.string()});
  ASSERT_EQ(r.code, exit_ok) << r.err;
  EXPECT_EQ(r.out.rfind("integrable", 0), 0u) << r.out;
}

TEST(Cli, SolveWritesCsv) {
  TempDir tmp;
  const auto c = tmp.write("c.json", constant_cfg);
  const auto r = cli({"solve", "--config", c.string(), "--output", tmp.path().string(), "--quiet"});
  ASSERT_EQ(r.code, exit_ok) << r.err;
  EXPECT_TRUE(r.out.empty());
  const std::string csv = slurp(tmp.path() / "const_solve.csv");
  EXPECT_EQ(csv.rfind("x,psi,m_1,method\n0,0.5,1,closed_form\n", 0), 0u) << csv;
  EXPECT_EQ(csv.find('\r'), std::string::npos);
}

TEST(Cli, SimulateIsReproducibleThroughEmittedConfig) {
  TempDir tmp;
  const auto c = tmp.write("c.json", constant_cfg);
  const auto emitted = tmp.path() / "emitted.json";
  const auto d1 = tmp.path() / "a", d2 = tmp.path() / "b";
  ASSERT_EQ(cli({"simulate", "--config", c.string(), "--output", d1.string(), "--emit-config", emitted.string(),
                 "--seed", "17"})
                .code,
            exit_ok);
  // the emitted file carries the seed and output directory; re-running it elsewhere gives the same bytes
  ASSERT_EQ(cli({"simulate", "--config", emitted.string(), "--output", d2.string()}).code, exit_ok);
  EXPECT_EQ(slurp(d1 / "const_simulate.csv"), slurp(d2 / "const_simulate.csv"));
  EXPECT_EQ(parse_config(slurp(emitted)).simulation.seed, 17u);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  TempDir tmp;
  const auto c = tmp.write("c.json", constant_cfg);
  const auto env = tmp.path() / "env";
  ::setenv("PDRUIN_OUTPUT_DIR", env.c_str(), 1);
  const auto r = cli({"solve", "--config", c.string(), "--quiet"});
  ::unsetenv("PDRUIN_OUTPUT_DIR");
  ASSERT_EQ(r.code, exit_ok) << r.err;
  EXPECT_TRUE(fs::exists(env / "const_solve.csv"));
}

TEST(Cli, PlotDefaults) {
  TempDir tmp;
  const auto r = cli({"figure1", "--output", tmp.path().string()});
  ASSERT_EQ(r.code, exit_ok) << r.err;
  EXPECT_NE(r.out.find("psi(0) = 1, M(0) = 1"), std::string::npos) << r.out;

  std::ifstream is(tmp.path() / "figure1_psi_m.csv");
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "x,psi,m_1,method");
  std::vector<double> xs, psi;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string a, b;
    std::getline(ls, a, ',');
    std::getline(ls, b, ',');
    xs.push_back(std::stod(a));
    psi.push_back(std::stod(b));
  }
  ASSERT_EQ(xs.size(), 101u);
  EXPECT_EQ(psi.front(), 1.0);
  for (std::size_t i = 1; i < psi.size(); ++i) EXPECT_LT(psi[i], psi[i - 1]);

  std::ifstream ds(tmp.path() / "figure1_drift.csv");
  std::getline(ds, line);
  std::getline(ds, line);
  EXPECT_NEAR(std::stod(line.substr(line.find(',') + 1)), -1.0 / 6.0, 1e-15);
}

TEST(Cli, CompareReferenceCase) {
  TempDir tmp;
  const auto r = cli({"compare", "--output", tmp.path().string(), "--config",
                      tmp.write("f.json", dump_config(figure1_config())).string(), "--paths", "4000"});
  EXPECT_EQ(r.code, exit_ok) << r.out << r.err;
  EXPECT_TRUE(fs::exists(tmp.path() / "figure1_compare.csv"));
}
