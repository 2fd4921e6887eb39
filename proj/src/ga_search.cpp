// SPDX-License-Identifier: Apache-2.0

#include "biped_gait/hybrid_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

namespace biped {

void GaConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw GaitError(ErrorCode::kInvalidArgument, what);
  };
  require(population > 1, "population must exceed 1");
  require(islands >= 1 && population % islands == 0, "islands must divide the population");
  require(elite_count >= 0 && elite_count < population, "elite count must be below population");
  require(elite_count % islands == 0, "islands must divide the elite count");
  require(crossover_fraction >= 0.0 && crossover_fraction <= 1.0, "crossover fraction in [0, 1]");
  require(migration_fraction >= 0.0 && migration_fraction <= 1.0, "migration fraction in [0, 1]");
  require(migration_interval > 0, "migration interval must be positive");
  require(init_lower < init_upper, "initial range is empty");
  require(stall_generations > 0, "stall generations must be positive");
  require(max_evaluations > population, "evaluation budget must exceed the population");
  require(mutation_scale >= 0.0 && mutation_shrink >= 0.0 && mutation_shrink <= 1.0,
          "mutation scale/shrink out of range");
  require(spread_mutation >= 0.0, "spread mutation factor must be non-negative");
  require(blend_alpha >= 0.0, "blend alpha must be non-negative");
  require(gene_limit > 0.0, "gene limit must be positive");
  require(threads >= 1, "threads must be positive");
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// One independent stream per (seed, generation, genome).
std::mt19937_64 stream(std::uint64_t seed, int generation, int index) {
  std::uint64_t h = splitmix(seed);
  h = splitmix(h ^ static_cast<std::uint64_t>(generation));
  h = splitmix(h ^ (static_cast<std::uint64_t>(index) << 20));
  return std::mt19937_64(h);
}

// Index-ordered evaluation; threads only change who computes which slot.
void evaluate(const ScalarObjective& f, const std::vector<Eigen::VectorXd>& genomes,
              std::vector<double>& fitness, std::size_t first, int threads) {
  const std::size_t count = genomes.size() - first;
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double v = f(genomes[first + i]);
      fitness[first + i] = std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  if (workers <= 1) {
    run(0, count);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin < end) pool.emplace_back(run, begin, end);
  }
  for (auto& t : pool) t.join();
}

struct Island {
  std::vector<Eigen::VectorXd> genomes;
  std::vector<double> fitness;
};

std::vector<int> ranked(const std::vector<double>& fitness) {
  std::vector<int> order(fitness.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return fitness[static_cast<std::size_t>(a)] <
                                              fitness[static_cast<std::size_t>(b)]; });
  return order;
}

}  // namespace

GaResult ga_search(const ScalarObjective& objective, int dimension, const GaConfig& cfg) {
  cfg.validate();
  if (dimension <= 0) throw GaitError(ErrorCode::kInvalidArgument, "dimension must be positive");

  const int island_size = cfg.population / cfg.islands;
  const int island_elite = cfg.elite_count / cfg.islands;
  const int children_per_island = island_size - island_elite;
  const int children_per_generation = children_per_island * cfg.islands;
  const int crossover_children =
      static_cast<int>(std::lround(cfg.crossover_fraction * children_per_island));
  const int max_generations =
      children_per_generation > 0
          ? (cfg.max_evaluations - cfg.population) / children_per_generation
          : 0;
  const double range = cfg.init_upper - cfg.init_lower;
  const int migrants = static_cast<int>(std::lround(cfg.migration_fraction * island_size));

  // Rank-scaled roulette: weight 1/sqrt(rank).
  std::vector<double> cumulative(static_cast<std::size_t>(island_size));
  {
    double acc = 0.0;
    for (int r = 0; r < island_size; ++r) {
      acc += 1.0 / std::sqrt(static_cast<double>(r + 1));
      cumulative[static_cast<std::size_t>(r)] = acc;
    }
  }
  auto pick = [&](std::mt19937_64& rng, const std::vector<int>& order) -> int {
    std::uniform_real_distribution<double> u(0.0, cumulative.back());
    const double x = u(rng);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
    const auto r = std::min<std::ptrdiff_t>(it - cumulative.begin(), island_size - 1);
    return order[static_cast<std::size_t>(r)];
  };

  std::vector<Island> islands(static_cast<std::size_t>(cfg.islands));
  GaResult result;

  // Generation 0.
  {
    std::vector<Eigen::VectorXd> all;
    all.reserve(static_cast<std::size_t>(cfg.population));
    for (int i = 0; i < cfg.population; ++i) {
      auto rng = stream(cfg.seed, 0, i);
      std::uniform_real_distribution<double> u(cfg.init_lower, cfg.init_upper);
      Eigen::VectorXd g(dimension);
      for (int d = 0; d < dimension; ++d) g[d] = u(rng);
      all.push_back(std::move(g));
    }
    std::vector<double> fit(all.size());
    evaluate(objective, all, fit, 0, cfg.threads);
    result.evaluations = cfg.population;
    for (int k = 0; k < cfg.islands; ++k) {
      auto& isl = islands[static_cast<std::size_t>(k)];
      for (int i = 0; i < island_size; ++i) {
        const auto src = static_cast<std::size_t>(k * island_size + i);
        isl.genomes.push_back(all[src]);
        isl.fitness.push_back(fit[src]);
      }
    }
  }

  auto record_best = [&] {
    bool first = result.history.empty();
    for (const auto& isl : islands) {
      for (std::size_t i = 0; i < isl.fitness.size(); ++i) {
        if (first || isl.fitness[i] < result.best_value) {
          result.best_value = isl.fitness[i];
          result.best = isl.genomes[i];
          first = false;
        }
      }
    }
    result.history.push_back(result.best_value);
  };
  record_best();

  double stall_reference = result.best_value;
  int last_improvement = 0;

  for (int gen = 1; gen <= max_generations; ++gen) {
    if (result.evaluations + children_per_generation > cfg.max_evaluations) break;
    const double progress = max_generations > 0 ? static_cast<double>(gen - 1) / max_generations : 0.0;
    const double sigma = cfg.mutation_scale * range * (1.0 - cfg.mutation_shrink * progress);

    for (int k = 0; k < cfg.islands; ++k) {
      auto& isl = islands[static_cast<std::size_t>(k)];
      const std::vector<int> order = ranked(isl.fitness);
      Eigen::VectorXd step = Eigen::VectorXd::Constant(dimension, sigma);
      if (cfg.spread_mutation > 0.0) {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(dimension);
        for (const auto& g : isl.genomes) mean += g;
        mean /= island_size;
        Eigen::VectorXd var = Eigen::VectorXd::Zero(dimension);
        for (const auto& g : isl.genomes) var += (g - mean).cwiseAbs2();
        step = step.cwiseMin(cfg.spread_mutation * (var / island_size).cwiseSqrt());
      }
      Island next;
      next.genomes.reserve(static_cast<std::size_t>(island_size));
      next.fitness.reserve(static_cast<std::size_t>(island_size));
      for (int e = 0; e < island_elite; ++e) {
        next.genomes.push_back(isl.genomes[static_cast<std::size_t>(order[static_cast<std::size_t>(e)])]);
        next.fitness.push_back(isl.fitness[static_cast<std::size_t>(order[static_cast<std::size_t>(e)])]);
      }
      for (int c = 0; c < children_per_island; ++c) {
        auto rng = stream(cfg.seed, gen, k * island_size + c);
        Eigen::VectorXd child(dimension);
        if (c < crossover_children) {
          const auto& a = isl.genomes[static_cast<std::size_t>(pick(rng, order))];
          const auto& b = isl.genomes[static_cast<std::size_t>(pick(rng, order))];
          std::uniform_real_distribution<double> u(-cfg.blend_alpha, 1.0 + cfg.blend_alpha);
          for (int d = 0; d < dimension; ++d) child[d] = a[d] + u(rng) * (b[d] - a[d]);
        } else {
          const auto& a = isl.genomes[static_cast<std::size_t>(pick(rng, order))];
          std::normal_distribution<double> n(0.0, 1.0);
          for (int d = 0; d < dimension; ++d) child[d] = a[d] + step[d] * n(rng);
        }
        for (int d = 0; d < dimension; ++d) {
          child[d] = std::clamp(child[d], -cfg.gene_limit, cfg.gene_limit);
        }
        next.genomes.push_back(std::move(child));
        next.fitness.push_back(0.0);
      }
      evaluate(objective, next.genomes, next.fitness, static_cast<std::size_t>(island_elite),
               cfg.threads);
      isl = std::move(next);
    }
    result.evaluations += children_per_generation;

    if (cfg.islands > 1 && migrants > 0 && gen % cfg.migration_interval == 0) {
      // Best of island k replace the worst of island k+1, all taken from the
      // pre-migration snapshot.
      std::vector<Island> snapshot = islands;
      for (int k = 0; k < cfg.islands; ++k) {
        const auto& src = snapshot[static_cast<std::size_t>(k)];
        auto& dst = islands[static_cast<std::size_t>((k + 1) % cfg.islands)];
        const std::vector<int> src_order = ranked(src.fitness);
        const std::vector<int> dst_order =
            ranked(snapshot[static_cast<std::size_t>((k + 1) % cfg.islands)].fitness);
        for (int m = 0; m < migrants; ++m) {
          const auto from = static_cast<std::size_t>(src_order[static_cast<std::size_t>(m)]);
          const auto to = static_cast<std::size_t>(
              dst_order[static_cast<std::size_t>(island_size - 1 - m)]);
          dst.genomes[to] = src.genomes[from];
          dst.fitness[to] = src.fitness[from];
        }
      }
    }

    record_best();
    result.generations = gen;

    const double gain = stall_reference - result.best_value;
    if (gain > cfg.stall_tolerance * std::max(1.0, std::abs(stall_reference))) {
      stall_reference = result.best_value;
      last_improvement = gen;
    } else if (gen - last_improvement >= cfg.stall_generations) {
      break;
    }
  }
  return result;
}

}  // namespace biped
