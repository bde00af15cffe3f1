#include "stochmather/diffusion_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "stochmather/error.hpp"

namespace stochmather {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path) {
  return splitmix64(splitmix64(seed) ^ (path * 0xd1b54a32d192ed03ULL));
}

// One path; occupation counts accumulate into `counts` (integers, so the
// merge order across threads is irrelevant).
Coord run_path(const VectorField& drift, double sigma, const SimulationConfig& cfg,
               std::int64_t steps, std::int64_t burn_in, std::uint64_t path,
               std::vector<std::uint64_t>& counts) {
  const TorusGrid& g = drift.grid();
  const int dim = g.dim();
  const int n = g.nodes_per_axis();
  std::mt19937_64 rng(path_seed(cfg.seed, path));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double noise = sigma * std::sqrt(cfg.dt);

  Coord x = cfg.x0;
  for (std::int64_t s = 0; s < steps; ++s) {
    const Coord v = interpolate_drift(drift, x);
    for (int a = 0; a < dim; ++a) {
      const double dw = noise != 0.0 ? noise * normal(rng) : 0.0;
      x[a] += v[a] * cfg.dt + dw;
    }
    if (s + 1 >= burn_in) {
      Offset m{0, 0};
      for (int a = 0; a < dim; ++a) m[a] = static_cast<int>(std::lround(x[a] * n));
      ++counts[g.index(m)];
    }
  }
  return x;
}

}  // namespace

Coord interpolate_drift(const VectorField& drift, const Coord& x) {
  const TorusGrid& g = drift.grid();
  const int n = g.nodes_per_axis();
  Offset base{0, 0};
  Coord frac{0.0, 0.0};
  for (int a = 0; a < g.dim(); ++a) {
    const double s = x[a] * n;
    const double f = std::floor(s);
    frac[a] = s - f;
    // Reduce before the cast so large unwrapped positions stay in range.
    base[a] = static_cast<int>(std::fmod(f, static_cast<double>(n)));
  }
  Coord out{0.0, 0.0};
  if (g.dim() == 1) {
    const std::size_t i0 = g.index(base);
    const std::size_t i1 = g.index({base[0] + 1, 0});
    out[0] = (1.0 - frac[0]) * drift(i0, 0) + frac[0] * drift(i1, 0);
    return out;
  }
  for (int c0 = 0; c0 < 2; ++c0) {
    for (int c1 = 0; c1 < 2; ++c1) {
      const double w = (c0 ? frac[0] : 1.0 - frac[0]) * (c1 ? frac[1] : 1.0 - frac[1]);
      const std::size_t k = g.index({base[0] + c0, base[1] + c1});
      out[0] += w * drift(k, 0);
      out[1] += w * drift(k, 1);
    }
  }
  return out;
}

PathEnsemble simulate(const CellSolution& solution, const SimulationConfig& cfg) {
  if (!(cfg.horizon > 0.0) || !(cfg.dt > 0.0) || cfg.paths < 1) {
    throw Error(ErrorCode::invalid_argument, "simulate: need horizon > 0, dt > 0, paths >= 1");
  }
  const VectorField& drift = solution.drift;
  const TorusGrid& g = drift.grid();
  const double vmax = drift.max_abs();
  if (vmax > 0.0 && cfg.dt > g.spacing() / (2.0 * vmax)) {
    throw Error(ErrorCode::step_too_large,
                "simulate: dt " + std::to_string(cfg.dt) + " exceeds h/(2 max|v|) = " +
                    std::to_string(g.spacing() / (2.0 * vmax)));
  }
  const int dim = g.dim();
  const auto steps = static_cast<std::int64_t>(std::llround(cfg.horizon / cfg.dt));
  if (steps < 2) throw Error(ErrorCode::invalid_argument, "simulate: horizon shorter than two steps");
  const std::int64_t burn_in = steps / 2;

  PathEnsemble ens{cfg, steps, std::vector<double>(static_cast<std::size_t>(cfg.paths) * dim),
                   std::vector<double>(static_cast<std::size_t>(cfg.paths) * dim), ScalarField(g)};

  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cfg.paths));
  std::vector<std::vector<std::uint64_t>> counts(threads,
                                                 std::vector<std::uint64_t>(g.node_count(), 0));
  std::vector<Coord> ends(static_cast<std::size_t>(cfg.paths));
  auto worker = [&](unsigned t) {
    for (auto p = static_cast<std::size_t>(t); p < ends.size(); p += threads) {
      ends[p] = run_path(drift, solution.sigma, cfg, steps, burn_in, p, counts[t]);
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
  }

  const double T = static_cast<double>(steps) * cfg.dt;
  for (std::size_t p = 0; p < ends.size(); ++p) {
    for (int a = 0; a < dim; ++a) {
      ens.endpoints[p * dim + a] = ends[p][a];
      ens.displacement[p * dim + a] = (ends[p][a] - cfg.x0[a]) / T;
    }
  }
  std::uint64_t total = 0;
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    std::uint64_t c = 0;
    for (const auto& cnt : counts) c += cnt[k];
    ens.histogram[k] = static_cast<double>(c);
    total += c;
  }
  const double norm = 1.0 / (static_cast<double>(total) * g.cell_volume());
  for (std::size_t k = 0; k < g.node_count(); ++k) ens.histogram[k] *= norm;
  return ens;
}

RotationEstimate rotation_vector(const PathEnsemble& ens) {
  const int dim = ens.histogram.grid().dim();
  const auto n = ens.displacement.size() / static_cast<std::size_t>(dim);
  if (n < 2) throw Error(ErrorCode::invalid_argument, "rotation_vector: need at least two paths");
  RotationEstimate r{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  for (int a = 0; a < dim; ++a) {
    double mean = 0.0;
    for (std::size_t p = 0; p < n; ++p) mean += ens.displacement[p * dim + a];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const double d = ens.displacement[p * dim + a] - mean;
      ss += d * d;
    }
    r.mean[a] = mean;
    r.standard_error[a] = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  return r;
}

}  // namespace stochmather
