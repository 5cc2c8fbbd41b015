#ifndef PDRUIN_IO_HPP
#define PDRUIN_IO_HPP

// JSON run configuration and result serialization (JSON, CSV).

#include "pdruin/lie_algebra.hpp"
#include "pdruin/mc_sim.hpp"
#include "pdruin/model.hpp"
#include "pdruin/riccati.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace pdruin {

inline constexpr int schema_version = 1;

struct GridSpec {
  double from = 0.0;
  double to = 5.0;
  int points = 51;

  std::vector<double> points_vector() const { return linear_grid(from, to, points); }
};

struct SimSettings {
  double x0 = 0.0;
  std::int64_t paths = 10000;
  std::uint64_t seed = 1;
  double max_time = 0.0;
  KillingMode killing = KillingMode::weight;
  int threads = 0;
  double flow_tolerance = 1e-10;
};

struct CompareSettings {
  std::vector<Method> methods{Method::closed_form, Method::ode_bvp, Method::riccati_numeric, Method::monte_carlo};
  int mc_points = 10;  // grid points that also get a Monte Carlo estimate
};

struct OutputSettings {
  std::string directory;  // empty: PDRUIN_OUTPUT_DIR or the working directory
  std::string format = "csv";  // csv or json
  std::string prefix = "pdruin";
};

struct RunConfig {
  ModelSpec model;
  PassageProblem problem;
  GridSpec grid;
  SimSettings simulation;
  CompareSettings compare;
  OutputSettings output;
};

/// Defaults of the figure1 subcommand: mu = 1.5, lambda = q = 0.5, K = 0.75 on [0, 5].
RunConfig figure1_config();

/// Throws ConfigError with a line/column or field-path diagnostic.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

nlohmann::ordered_json config_to_json(const RunConfig& cfg);
std::string dump_config(const RunConfig& cfg);

/// Phase-type law as {"beta": [...], "B": [[...], ...]}.
nlohmann::ordered_json to_json(const PhaseType& pt);
PhaseType phase_type_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const ClosureReport& rep);
nlohmann::ordered_json to_json(const IntegrabilityResult& res);
nlohmann::ordered_json to_json(const SolutionCurve& curve);
nlohmann::ordered_json to_json(const PassageEstimate& est, double x0);

/// %.17g
std::string format_number(double v);

/// Header x,psi,m_1..m_n,method; LF line endings.
void write_csv(std::ostream& os, const SolutionCurve& curve);

void write_estimate_csv_header(std::ostream& os);
void write_estimate_csv_row(std::ostream& os, const PassageEstimate& est, double x0);

}  // namespace pdruin

#endif  // PDRUIN_IO_HPP
