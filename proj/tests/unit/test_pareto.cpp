#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"

using namespace sweetspot;

namespace {

// O(N^2) front peeling, independent of the library's bookkeeping.
std::vector<int> brute_ranks(const std::vector<Objectives>& objs) {
  std::vector<int> rank(objs.size(), -1);
  int r = 0;
  size_t left = objs.size();
  while (left > 0) {
    std::vector<size_t> layer;
    for (size_t i = 0; i < objs.size(); ++i) {
      if (rank[i] >= 0) continue;
      bool dominated = false;
      for (size_t j = 0; j < objs.size() && !dominated; ++j) {
        if (j == i || rank[j] >= 0) continue;
        dominated = objs[j][0] <= objs[i][0] && objs[j][1] <= objs[i][1] &&
                    (objs[j][0] < objs[i][0] || objs[j][1] < objs[i][1]);
      }
      if (!dominated) layer.push_back(i);
    }
    for (auto i : layer) rank[i] = r;
    left -= layer.size();
    ++r;
  }
  return rank;
}

}  // namespace

TEST_CASE("dominance") {
  CHECK(dominates({1, 1}, {2, 2}));
  CHECK(dominates({1, 2}, {1, 3}));
  CHECK_FALSE(dominates({1, 1}, {1, 1}));
  CHECK_FALSE(dominates({1, 3}, {2, 2}));
}

TEST_CASE("non-dominated sort agrees with front peeling") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> grid(0, 9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Objectives> objs(5 + trial % 40);
    for (auto& o : objs) o = {1e-3 * (1 + grid(rng)), 1e-2 * (1 + grid(rng))};
    const auto fronts = non_dominated_sort(objs);
    const auto ranks = brute_ranks(objs);
    size_t total = 0;
    for (size_t f = 0; f < fronts.size(); ++f) {
      total += fronts[f].size();
      for (auto i : fronts[f]) CHECK(ranks[i] == static_cast<int>(f));
    }
    CHECK(total == objs.size());
  }
}

TEST_CASE("crowding distance keeps the extremes") {
  const std::vector<Objectives> objs{{1, 4}, {2, 3}, {3, 2}, {4, 1}};
  const auto norm = normalized_objectives(objs);
  const auto cd = crowding_distance(norm, {0, 1, 2, 3});
  CHECK(std::isinf(cd[0]));
  CHECK(std::isinf(cd[3]));
  CHECK(std::isfinite(cd[1]));
  CHECK(cd[1] > 0.0);
}

TEST_CASE("genome flattening and bounds") {
  const Genome g = fixtures::genome(fixtures::kDrives[2]);
  const Genome back = Genome::unflatten(g.flatten(), 4);
  CHECK(back.flatten() == g.flatten());
  CHECK(Genome::lower_bounds(4).size() == 10);
  CHECK(Genome::upper_bounds(4)[9] == Genome::kFracHi);
  Genome bad = g;
  bad.p0 = -0.1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = g;
  bad.omega_d_frac = 1.6;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("seeds and variation are deterministic and stay in the box") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  OptimizerConfig cfg;
  const Genome a = fixtures::genome(fixtures::kDrives[0]);
  const Genome b = fixtures::genome(fixtures::kDrives[2]);
  const auto lo = Genome::lower_bounds(4);
  const auto hi = Genome::upper_bounds(4);
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto [c, d] = vary(a, b, cfg, s);
    for (const Genome* g : {&c, &d}) {
      const auto x = g->flatten();
      for (size_t i = 0; i < x.size(); ++i) {
        CHECK(x[i] >= lo[i]);
        CHECK(x[i] <= hi[i]);
      }
    }
  }
  const auto [c1, d1] = vary(a, b, cfg, 42);
  const auto [c2, d2] = vary(a, b, cfg, 42);
  CHECK(c1.flatten() == c2.flatten());
  CHECK(d1.flatten() == d2.flatten());
}

TEST_CASE("selection helpers") {
  const std::vector<Objectives> objs{{1, 4}, {2, 3}, {3, 2}, {4, 1}, {4, 4}};
  const auto norm = normalized_objectives(objs);
  const Spea2Fitness f = spea2_fitness(objs, norm, 2);
  CHECK(f.raw[0] == 0.0);
  CHECK(f.raw[4] > 0.0);
  CHECK(f.fitness[4] > 1.0);
  CHECK(epsilon_indicator({1, 1}, {2, 2}) < 0.0);
  const auto w = moead_weights(5);
  CHECK(w.size() == 5);
  for (const auto& v : w) CHECK(v[0] + v[1] == doctest::Approx(1.0));
  const auto nb = moead_neighborhoods(w, 3);
  CHECK(nb[0].size() == 3);
  CHECK(nb[0][0] == 0);
}

TEST_CASE("small optimizer runs are reproducible for every strategy") {
  const auto& ctx = fixtures::context();
  for (Strategy s : {Strategy::nsga2, Strategy::spea2, Strategy::ibea, Strategy::moead}) {
    CAPTURE(to_string(s));
    OptimizerConfig cfg;
    cfg.population_m = 8;
    cfg.generations_n = 3;
    cfg.n = 2;
    cfg.strategy = s;
    cfg.seed = 99;
    cfg.threads = 2;
    const ParetoFront a = run_stage1(cfg, ctx);
    const ParetoFront b = run_stage1(cfg, ctx);
    REQUIRE(a.points.size() == b.points.size());
    REQUIRE_FALSE(a.points.empty());
    for (size_t i = 0; i < a.points.size(); ++i) {
      CHECK(a.points[i].genome.flatten() == b.points[i].genome.flatten());
      CHECK(a.points[i].provenance.strategy == to_string(s));
    }
    for (const auto& p : a.points)
      for (const auto& q : a.points) CHECK_FALSE(dominates(p.objectives, q.objectives));
  }
  CHECK(strategy_from_string("spea2") == Strategy::spea2);
  CHECK_THROWS_AS(strategy_from_string("tdea"), Error);
}

TEST_CASE("aggregation keeps only non-dominated points") {
  ParetoFront a, b;
  auto mk = [](double x, double y) {
    Individual i;
    i.objectives = {x, y};
    i.genome.p_re = {0.0};
    i.genome.p_im = {x};
    return i;
  };
  a.points = {mk(1, 5), mk(3, 3)};
  b.points = {mk(2, 2), mk(5, 1)};
  const ParetoFront agg = aggregate_fronts({a, b});
  std::set<std::pair<double, double>> got;
  for (const auto& p : agg.points) got.insert({p.objectives[0], p.objectives[1]});
  CHECK(got == std::set<std::pair<double, double>>{{1, 5}, {2, 2}, {5, 1}});
  CHECK_THROWS_AS(aggregate_fronts({}), Error);
}

TEST_CASE("optimizer configuration validation") {
  OptimizerConfig cfg;
  cfg.population_m = 1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = OptimizerConfig{};
  cfg.crossover_rate = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = OptimizerConfig{};
  CHECK(cfg.effective_mutation_rate() == doctest::Approx(0.1));
}

TEST_CASE("sorting examples") {
  const auto f = non_dominated_sort(std::vector<Objectives>{{1, 1}, {2, 2}, {1, 3}, {3, 1}});
  REQUIRE(f.size() == 2);
  CHECK(f[0] == std::vector<std::size_t>{0});
  CHECK(std::set<std::size_t>(f[1].begin(), f[1].end()) == std::set<std::size_t>{1, 2, 3});
  CHECK(non_dominated_sort(std::vector<Objectives>(5, Objectives{2, 2})).size() == 1);
  CHECK(dominates({1, 2}, {2, 3}));
  CHECK_FALSE(dominates({1, 3}, {3, 1}));
  CHECK_FALSE(dominates({3, 1}, {1, 3}));
}

TEST_CASE("nsga2 selection keeps a non-dominated set and its boundary points") {
  OptimizerConfig cfg;
  auto mk = [](double a, double b) {
    Individual i;
    i.objectives = {a, b};
    i.genome.p_re = {a};
    i.genome.p_im = {b};
    return i;
  };
  std::vector<Individual> nd{mk(1, 8), mk(2, 4), mk(4, 2), mk(8, 1)};
  const auto same = environmental_select(Strategy::nsga2, nd, 4, cfg);
  std::set<std::pair<double, double>> got;
  for (const auto& p : same) got.insert({p.objectives[0], p.objectives[1]});
  CHECK(got.size() == 4);

  const std::vector<Objectives> tri{{1e-3, 3e-3}, {2e-3, 2e-3}, {3e-3, 1e-3}};
  const auto cd = crowding_distance(normalized_objectives(tri), {0, 1, 2});
  CHECK(std::isinf(cd[0]));
  CHECK(std::isinf(cd[2]));
  CHECK(std::isfinite(cd[1]));
  const auto two = environmental_select(Strategy::nsga2, {mk(1e-3, 3e-3), mk(2e-3, 2e-3), mk(3e-3, 1e-3)}, 2, cfg);
  got.clear();
  for (const auto& p : two) got.insert({p.objectives[0], p.objectives[1]});
  CHECK(got == std::set<std::pair<double, double>>{{1e-3, 3e-3}, {3e-3, 1e-3}});
}

TEST_CASE("SPEA2 strengths and raw fitness on a six-point cloud") {
  // (2,4) dominates (3,5); (4,2) dominates (5,3); nothing else dominates.
  const std::vector<Objectives> objs{{1, 6}, {2, 4}, {3, 5}, {4, 2}, {5, 3}, {6, 1}};
  const Spea2Fitness f = spea2_fitness(objs, normalized_objectives(objs), 2);
  CHECK(f.strength == std::vector<int>{0, 1, 0, 1, 0, 0});
  CHECK(f.raw == std::vector<double>{0, 0, 1, 0, 1, 0});
  for (size_t i = 0; i < objs.size(); ++i) {
    CHECK(f.density[i] > 0.0);
    CHECK(f.density[i] < 1.0);
    CHECK(f.fitness[i] == doctest::Approx(f.raw[i] + f.density[i]));
  }
}

TEST_CASE("aggregation examples") {
  auto mk = [](double a, double b) {
    Individual i;
    i.objectives = {a, b};
    i.genome.p_re = {a};
    i.genome.p_im = {b};
    return i;
  };
  ParetoFront a, b;
  a.points = {mk(1, 4), mk(2, 2), mk(4, 1)};
  b.points = {mk(2, 5), mk(3, 3), mk(5, 2)};
  CHECK(aggregate_fronts({a}).points.size() == 3);
  const auto agg = aggregate_fronts({a, b});
  CHECK(agg.points.size() == 3);
  for (const auto& p : agg.points) CHECK(p.objectives[0] + p.objectives[1] <= 5.0);
}

TEST_CASE("evaluation is deterministic and infeasible points carry infinite objectives") {
  const auto& ctx = fixtures::context();
  const Genome g = fixtures::genome(fixtures::kDrives[1]);
  CHECK(evaluate_individual(g, ctx).objectives == evaluate_individual(g, ctx).objectives);
  Genome stat;
  stat.p_re = {0.0};
  stat.p_im = {0.0};
  stat.omega_d_frac = 1.0;  // exact fold: gap equals w_d
  const Evaluation ev = evaluate_individual(stat, ctx);
  CHECK_FALSE(ev.feasible);
  CHECK(std::isinf(ev.objectives[0]));
}

TEST_CASE("smoke run is mutually non-dominated and elitist") {
  const auto& ctx = fixtures::context();
  for (Strategy s : {Strategy::nsga2, Strategy::spea2, Strategy::ibea}) {
    CAPTURE(to_string(s));
    OptimizerConfig cfg;
    cfg.population_m = 16;
    cfg.generations_n = 20;
    cfg.strategy = s;
    cfg.seed = 4;
    Objectives best{1e300, 1e300};
    bool monotone = true;
    const ParetoFront f = run_stage1(cfg, ctx, [&](const GenerationSnapshot& snap) {
      Objectives now{1e300, 1e300};
      for (const auto& p : snap.population) {
        now[0] = std::min(now[0], p.objectives[0]);
        now[1] = std::min(now[1], p.objectives[1]);
      }
      monotone = monotone && now[0] <= best[0] && now[1] <= best[1];
      best = now;
    });
    CHECK(monotone);
    for (const auto& p : f.points)
      for (const auto& q : f.points) CHECK_FALSE(dominates(p.objectives, q.objectives));
  }
}

TEST_CASE("desk-scale nsga2 reaches the DSS regime") {
  const auto& ctx = fixtures::context();
  OptimizerConfig cfg;
  cfg.population_m = 32;
  cfg.generations_n = 200;
  cfg.seed = 11;
  const ParetoFront f = run_stage1(cfg, ctx);
  int dss = 0;
  for (const auto& p : f.points) {
    const Evaluation ev = evaluate_individual(p.genome, ctx);
    dss += ev.feasible && std::abs(ev.weights.z(0)) < 1e-4;
  }
  CHECK(dss >= 1);
}
