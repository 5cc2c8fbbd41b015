#ifndef PDRUIN_MC_SIM_HPP
#define PDRUIN_MC_SIM_HPP

// Monte Carlo estimation of killed first-passage functionals of the
// piecewise deterministic process.

#include "pdruin/model.hpp"
#include "pdruin/phase_type.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pdruin {

enum class KillingMode {
  weight,            // e^{-q tau} attached to each ruined path
  explicit_horizon,  // draw e_q ~ Exp(q) and stop the path there
};

struct SimConfig {
  ModelSpec model;
  PassageProblem problem;
  double x0 = 0.0;
  std::int64_t n_paths = 10000;
  std::uint64_t seed = 1;
  double max_time = 0.0;          // <= 0 selects default_max_time()
  double flow_tolerance = 1e-10;  // event location accuracy in x
  KillingMode killing = KillingMode::weight;
  int threads = 0;                // 0: hardware concurrency

  void validate() const;
};

/// 50 x the deterministic crossing-time scale D / |phi(x0)|, with
/// D = max(mean jump, |x0 - l|, L - x0) and at least 50 / lambda.
double default_max_time(const SimConfig& cfg);

enum class OutcomeKind { ruined, escaped, censored, killed };

struct PathOutcome {
  OutcomeKind kind = OutcomeKind::censored;
  double time = 0.0;       // passage (or censoring / killing) time
  double overshoot = 0.0;  // l - X_tau >= 0 for ruin, X_tau - L for upward escape
  double position = 0.0;   // X at that time
  int jumps = 0;
};

/// Deterministic per-path generator: mt19937_64 seeded from (seed, index).
Rng path_rng(std::uint64_t seed, std::uint64_t index);

PathOutcome simulate_path(const SimConfig& cfg, Rng& rng);

/// Outcomes of paths first .. first + count - 1 (same streams as estimate()).
std::vector<PathOutcome> simulate_paths(const SimConfig& cfg, std::int64_t first, std::int64_t count);

struct PassageEstimate {
  std::string target;  // psi_q, psi_q_xi or exit_above
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n_paths = 0;
  std::int64_t n_ruined = 0;
  std::int64_t n_escaped = 0;
  std::int64_t n_censored = 0;
  std::int64_t n_killed = 0;  // explicit_horizon mode only
  double max_time = 0.0;
  bool all_censored = false;

  double censored_fraction() const { return n_paths ? static_cast<double>(n_censored) / n_paths : 0.0; }
};

std::string target_name(const PassageProblem& problem);

/// Path weight for the configured target.
double path_weight(const SimConfig& cfg, const PathOutcome& out);

/// Paths are split into fixed blocks with their own streams; block results
/// are merged in index order, so the estimate does not depend on `threads`.
PassageEstimate estimate(const SimConfig& cfg);

}  // namespace pdruin

#endif  // PDRUIN_MC_SIM_HPP
