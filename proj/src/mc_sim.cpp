#include "pdruin/mc_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace pdruin {

namespace {

constexpr std::int64_t block_size = 1024;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct FlowEvent {
  bool hit = false;
  double time = 0.0;
  double x = 0.0;  // position at `time` (the boundary on a hit)
  bool lower = true;
};

// Monotone flow over [0, dt]; stops at l when moving down or at L when moving up.
FlowEvent advance(const DriftSpec& drift, double x, double dt, double l, double L, double tol) {
  FlowEvent ev;
  const double v = drift(x);
  if (v == 0.0 || dt == 0.0) {
    ev.x = x;
    ev.time = dt;
    return ev;
  }
  const bool down = v < 0.0;
  const double level = down ? l : L;
  if (!std::isfinite(level)) {
    ev.x = drift.flow(x, dt);
    ev.time = dt;
    return ev;
  }
  auto crossed = [&](double y) { return down ? y <= level : y >= level; };

  if (auto th = drift.exact_hitting_time(x, level)) {
    if (*th <= dt) return {true, *th, level, down};
    ev.x = drift.flow(x, dt);
    ev.time = dt;
    if (crossed(ev.x)) ev.x = down ? std::nextafter(level, infinity) : std::nextafter(level, -infinity);
    return ev;
  }

  const double x_end = drift.flow(x, dt);
  if (!crossed(x_end)) return {false, dt, x_end, down};
  double lo = 0.0, hi = dt;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double xm = drift.flow(x, mid);
    if (crossed(xm)) hi = mid;
    else lo = mid;
    if (std::abs(xm - level) < tol || hi - lo <= 1e-15 * std::max(1.0, hi)) break;
  }
  return {true, hi, level, down};
}

struct Accumulator {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  std::int64_t ruined = 0, escaped = 0, censored = 0, killed = 0;

  void add(double w) {
    ++n;
    const double d = w - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (w - mean);
  }

  void merge(const Accumulator& o) {
    if (o.n == 0) return;
    const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
    const double d = o.mean - mean;
    const double tot = na + nb;
    mean += d * nb / tot;
    m2 += o.m2 + d * d * na * nb / tot;
    n += o.n;
    ruined += o.ruined;
    escaped += o.escaped;
    censored += o.censored;
    killed += o.killed;
  }
};

double effective_max_time(const SimConfig& cfg) { return cfg.max_time > 0.0 ? cfg.max_time : default_max_time(cfg); }

}  // namespace

void SimConfig::validate() const {
  model.validate();
  problem.validate();
  if (n_paths < 1) throw std::invalid_argument("SimConfig: n_paths must be >= 1");
  if (!(max_time >= 0.0) || !std::isfinite(max_time))
    throw std::invalid_argument("SimConfig: max_time must be finite and > 0 (0 selects the default)");
  if (!(x0 >= problem.lower && x0 <= problem.upper)) throw std::invalid_argument("SimConfig: x0 outside [l, L]");
  if (!(flow_tolerance > 0.0)) throw std::invalid_argument("SimConfig: flow_tolerance must be positive");
}

double default_max_time(const SimConfig& cfg) {
  double D = std::max(cfg.model.jumps.mean(), std::abs(cfg.x0 - cfg.problem.lower));
  if (std::isfinite(cfg.problem.upper)) D = std::max(D, cfg.problem.upper - cfg.x0);
  const double speed = std::abs(cfg.model.drift(cfg.x0));
  double scale = cfg.model.jump_rate > 0.0 ? 1.0 / cfg.model.jump_rate : 0.0;
  if (speed > 0.0) scale = std::max(scale, D / speed);
  if (!(scale > 0.0)) scale = 1.0;
  return 50.0 * scale;
}

Rng path_rng(std::uint64_t seed, std::uint64_t index) { return Rng(splitmix64(splitmix64(seed) ^ index)); }

PathOutcome simulate_path(const SimConfig& cfg, Rng& rng) {
  const auto& m = cfg.model;
  const double l = cfg.problem.lower;
  const double L = cfg.problem.upper;
  const bool down_jumps = m.direction == JumpDirection::downward;
  std::exponential_distribution<double> unit(1.0);

  double horizon = effective_max_time(cfg);
  bool kill_first = false;
  if (cfg.killing == KillingMode::explicit_horizon && m.kill_rate > 0.0) {
    const double tk = unit(rng) / m.kill_rate;
    if (tk < horizon) {
      horizon = tk;
      kill_first = true;
    }
  }

  PathOutcome out;
  double x = cfg.x0;
  double t = 0.0;
  while (true) {
    const double gap = m.jump_rate > 0.0 ? unit(rng) / m.jump_rate : infinity;
    const double dt = std::min(gap, horizon - t);
    const FlowEvent ev = advance(m.drift, x, dt, l, L, cfg.flow_tolerance);
    if (ev.hit) {
      out.kind = ev.lower ? OutcomeKind::ruined : OutcomeKind::escaped;
      out.time = t + ev.time;
      out.position = ev.x;
      return out;
    }
    x = ev.x;
    if (gap >= horizon - t) {
      out.kind = kill_first ? OutcomeKind::killed : OutcomeKind::censored;
      out.time = horizon;
      out.position = x;
      return out;
    }
    t += gap;
    const double c = sample(m.jumps, rng);
    ++out.jumps;
    x = down_jumps ? x - c : x + c;
    if (x < l) {
      out.kind = OutcomeKind::ruined;
      out.time = t;
      out.overshoot = l - x;
      out.position = x;
      return out;
    }
    if (x > L) {
      out.kind = OutcomeKind::escaped;
      out.time = t;
      out.overshoot = x - L;
      out.position = x;
      return out;
    }
  }
}

std::vector<PathOutcome> simulate_paths(const SimConfig& cfg, std::int64_t first, std::int64_t count) {
  cfg.validate();
  std::vector<PathOutcome> res;
  res.reserve(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
  for (std::int64_t i = first; i < first + count; ++i) {
    Rng rng = path_rng(cfg.seed, static_cast<std::uint64_t>(i));
    res.push_back(simulate_path(cfg, rng));
  }
  return res;
}

std::string target_name(const PassageProblem& problem) {
  if (problem.estimand == Estimand::exit_above) return "exit_above";
  return problem.overshoot_xi != 0.0 ? "psi_q_xi" : "psi_q";
}

double path_weight(const SimConfig& cfg, const PathOutcome& out) {
  const bool weighted = cfg.killing == KillingMode::weight;
  const double discount = weighted ? std::exp(-cfg.model.kill_rate * out.time) : 1.0;
  if (cfg.problem.estimand == Estimand::exit_above) return out.kind == OutcomeKind::escaped ? discount : 0.0;
  if (out.kind != OutcomeKind::ruined) return 0.0;
  if (cfg.problem.overshoot_xi != 0.0) return discount * std::exp(cfg.problem.overshoot_xi * (out.position - cfg.problem.lower));
  return discount;
}

PassageEstimate estimate(const SimConfig& cfg) {
  cfg.validate();
  const std::int64_t blocks = (cfg.n_paths + block_size - 1) / block_size;
  std::vector<Accumulator> acc(static_cast<std::size_t>(blocks));
  std::atomic<std::int64_t> next{0};

  auto worker = [&] {
    for (std::int64_t b = next++; b < blocks; b = next++) {
      Accumulator& a = acc[static_cast<std::size_t>(b)];
      const std::int64_t end = std::min(cfg.n_paths, (b + 1) * block_size);
      for (std::int64_t i = b * block_size; i < end; ++i) {
        Rng rng = path_rng(cfg.seed, static_cast<std::uint64_t>(i));
        const PathOutcome out = simulate_path(cfg, rng);
        switch (out.kind) {
          case OutcomeKind::ruined: ++a.ruined; break;
          case OutcomeKind::escaped: ++a.escaped; break;
          case OutcomeKind::censored: ++a.censored; break;
          case OutcomeKind::killed: ++a.killed; break;
        }
        a.add(path_weight(cfg, out));
      }
    }
  };

  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = static_cast<int>(std::clamp<std::int64_t>(threads, 1, blocks));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  Accumulator total;
  for (const auto& a : acc) total.merge(a);

  PassageEstimate est;
  est.target = target_name(cfg.problem);
  est.n_paths = total.n;
  est.mean = total.mean;
  est.std_error = total.n > 1 ? std::sqrt(total.m2 / static_cast<double>(total.n - 1) / static_cast<double>(total.n)) : 0.0;
  est.n_ruined = total.ruined;
  est.n_escaped = total.escaped;
  est.n_censored = total.censored;
  est.n_killed = total.killed;
  est.max_time = effective_max_time(cfg);
  est.all_censored = total.censored == total.n;
  return est;
}

}  // namespace pdruin
