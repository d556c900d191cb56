#include <doctest.h>

#include <cmath>

#include "fdrl/error.hpp"
#include "fdrl/netsim.hpp"
#include "oracles.hpp"

using namespace fdrl;

namespace {

struct Instance {
  GainTensor g;
  PowerAllocation p;
  double noise;
};

Instance random_instance(RandomStream& rng, std::size_t cells, std::size_t users) {
  const UserLayout layout(cells, users);
  Instance inst{GainTensor(layout), PowerAllocation(layout), rng.uniform(0.01, 1.0)};
  for (double& v : inst.g.flat()) v = rng.uniform(0.0, 1.0) * std::pow(10.0, rng.uniform(-3.0, 0.0));
  for (double& v : inst.p.flat()) v = rng.uniform(0.0, 2.0);
  return inst;
}

}  // namespace

TEST_CASE("action_to_power") {
  const double p_max = dbm_to_watts(38.0);
  CHECK(std::abs(p_max - 6.3096) < 1e-4);
  CHECK(action_to_power(0, 10, 6.31) == 0.0);
  CHECK(action_to_power(9, 10, 6.31) == 6.31);
  CHECK(std::abs(action_to_power(3, 10, 6.31) - 2.1033) < 1e-4);
  CHECK(action_to_power(9, 10, p_max) == p_max);
  CHECK_THROWS_AS(action_to_power(10, 10, 6.31), DomainError);
  CHECK_THROWS_AS(action_to_power(-1, 10, 6.31), DomainError);
  CHECK_THROWS_AS(action_to_power(0, 1, 6.31), DomainError);
}

TEST_CASE("sinr worked examples") {
  SUBCASE("single link") {
    const UserLayout l(1, 1);
    GainTensor g(l, 1.0);
    PowerAllocation p(l, 1.0);
    CHECK(sinr(g, p, 1.0, 0, 0) == 1.0);
  }
  SUBCASE("two users in one cell") {
    const UserLayout l(1, 2);
    GainTensor g(l, 1.0);
    PowerAllocation p(l, 1.0);
    CHECK(sinr(g, p, 1.0, 0, 0) == 0.5);
    CHECK(sinr(g, p, 1.0, 0, 1) == 0.5);
  }
  SUBCASE("two cells, one user each") {
    const UserLayout l(2, 1);
    GainTensor g(l, 0.1);
    g(0, 0, 0) = 1.0;
    g(1, 1, 0) = 1.0;
    PowerAllocation p(l, 1.0);
    CHECK(sinr(g, p, 0.1, 0, 0) == doctest::Approx(5.0));
    CHECK(sinr(g, p, 0.1, 1, 0) == doctest::Approx(5.0));
  }
  SUBCASE("intra-cell term uses the receiver's own direct gain") {
    const UserLayout l(1, 2);
    GainTensor g(l);
    g(0, 0, 0) = 2.0;
    g(0, 0, 1) = 0.5;
    PowerAllocation p(l, 1.0);
    CHECK(sinr(g, p, 1.0, 0, 0) == doctest::Approx(2.0 / 3.0));
    CHECK(sinr(g, p, 1.0, 0, 1) == doctest::Approx(0.5 / 1.5));
  }
  const UserLayout l(1, 1);
  CHECK_THROWS_AS(sinr(GainTensor(l, 1.0), PowerAllocation(l, 1.0), 0.0, 0, 0), DomainError);
}

TEST_CASE("sinr matches the naive triple loop") {
  RandomStream rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t cells = 1 + rng.index(3);
    const std::size_t users = 1 + rng.index(2);
    const Instance inst = random_instance(rng, cells, users);
    for (std::size_t n = 0; n < cells; ++n) {
      for (std::size_t k = 0; k < users; ++k) {
        const double expected = oracle::naive_sinr(inst.g, inst.p, inst.noise, n, k);
        const double got = sinr(inst.g, inst.p, inst.noise, n, k);
        CHECK(std::abs(got - expected) <= 1e-12 * std::max(1.0, std::abs(expected)));
      }
    }
  }
}

TEST_CASE("rates and sum rate") {
  const UserLayout l(1, 1);
  GainTensor g(l, 1.0);
  for (auto [p, expected] : {std::pair{1.0, 1.0}, std::pair{0.0, 0.0}, std::pair{3.0, 2.0}}) {
    CHECK(rates(g, PowerAllocation(l, p), 1.0)(0, 0) == doctest::Approx(expected));
  }

  RateMatrix zero(UserLayout(2, 2), 0.0);
  CHECK(network_sum_rate(zero) == 0.0);
  RateMatrix ones(UserLayout(2, 2), 1.0);
  CHECK(network_sum_rate(ones) == 4.0);
  RateMatrix m(UserLayout(2, 2));
  m(0, 0) = 1.5;
  m(0, 1) = 0.5;
  m(1, 0) = 2.0;
  m(1, 1) = 0.0;
  CHECK(network_sum_rate(m) == 4.0);
}

TEST_CASE("rates are monotone in own power and antitone in others'") {
  RandomStream rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    Instance inst = random_instance(rng, 1 + rng.index(3), 1 + rng.index(2));
    const auto& layout = inst.p.layout();
    const std::size_t target = rng.index(layout.total_users());
    const std::size_t other = rng.index(layout.total_users());
    double prev_own = -1.0;
    double prev_victim = INFINITY;
    for (int step = 0; step <= 10; ++step) {
      Instance own = inst;
      own.p.flat()[target] = 0.2 * step;
      const double c_own = rates(own.g, own.p, own.noise).flat()[target];
      CHECK(c_own >= prev_own);
      prev_own = c_own;
      if (other != target) {
        Instance cross = inst;
        cross.p.flat()[other] = 0.2 * step;
        const double c_victim = rates(cross.g, cross.p, cross.noise).flat()[target];
        CHECK(c_victim <= prev_victim);
        prev_victim = c_victim;
      }
    }
  }
}

TEST_CASE("rate is zero iff power or direct gain is zero") {
  const UserLayout l(2, 2);
  GainTensor g(l, 0.3);
  PowerAllocation p(l, 1.0);
  p(0, 1) = 0.0;
  g(1, 1, 0) = 0.0;
  const RateMatrix c = rates(g, p, 0.1);
  CHECK(c(0, 1) == 0.0);
  CHECK(c(1, 0) == 0.0);
  CHECK(c(0, 0) > 0.0);
  CHECK(c(1, 1) > 0.0);
}

TEST_CASE("reward") {
  RateMatrix c(UserLayout(2, 2));
  c(0, 0) = 1.0;
  c(0, 1) = 2.0;
  c(1, 0) = 0.5;
  c(1, 1) = 0.5;
  const std::vector<std::size_t> u0{1};
  CHECK(reward(0, c, 0.0, u0) == 3.0);
  CHECK(reward(0, c, 1.0, u0) == 4.0);
  CHECK(reward(0, c, 0.5, u0) == 3.5);
  CHECK_THROWS_AS(reward(0, c, -1.0, u0), DomainError);
}

TEST_CASE("reward decomposition over the neighbor graph") {
  RandomStream rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    TopologyConfig cfg;
    cfg.grid_side = 1 + rng.index(4);
    cfg.users_per_cell = 1 + rng.index(3);
    cfg.neighbor_count = rng.index(6);
    const Topology t = build_topology(cfg, rng);
    RateMatrix c(t.users);
    for (double& v : c.flat()) v = rng.uniform(0.0, 3.0);

    double total = 0.0;
    for (std::size_t n = 0; n < t.n_cells(); ++n) total += reward(n, c, 1.0, t.neighbor_sets[n]);

    std::vector<std::size_t> indegree(t.n_cells(), 0);
    for (const auto& set : t.neighbor_sets) {
      for (std::size_t m : set) ++indegree[m];
    }
    double recount = 0.0;
    for (std::size_t n = 0; n < t.n_cells(); ++n) {
      double cell = 0.0;
      for (double v : c.cell(n)) cell += v;
      recount += cell * (1.0 + static_cast<double>(indegree[n]));
    }
    CHECK(total == doctest::Approx(recount).epsilon(1e-12));
  }
}

TEST_CASE("build_observation features") {
  const UserLayout l(3, 1);
  GainTensor g(l, 1e-12);
  g(0, 0, 0) = 1e-10;
  const PowerAllocation zero_p(l, 0.0);
  const RateMatrix zero_c(l, 0.0);
  NormStats norm;
  norm.p_max = 2.0;
  const std::vector<std::size_t> neighbors{1, 2};

  const Observation first = build_observation(0, 0, g, neighbors, 4, zero_p, zero_c, norm);
  REQUIRE(first.size() == observation_dim(4));
  CHECK(first[0] == doctest::Approx(0.0));            // -100 dB own gain
  CHECK(first[1] == doctest::Approx(-1.0));           // -120 dB
  CHECK(first[3] == 0.0);                             // padding
  CHECK(first[4] == 0.0);
  CHECK(first[5] == 0.0);                             // previous power
  CHECK(first[6] == 0.0);                             // previous rate

  PowerAllocation p(l, 1.0);
  RateMatrix c(l, 2.5);
  g(0, 0, 0) = 0.0;  // floors at -200 dB, clipped feature stays finite
  const Observation next = build_observation(0, 0, g, neighbors, 4, p, c, norm);
  CHECK(next[0] == doctest::Approx(-5.0));
  CHECK(next[5] == 0.5);
  CHECK(next[6] == 0.5);
}

TEST_CASE("environment stepping") {
  TopologyConfig topo;
  EnvConfig env;
  SUBCASE("zero power gives zero rates and rewards") {
    Environment e(topo, env, 1);
    e.reset();
    const EnvStep s = e.step(ActionTensor(e.users(), 0));
    for (double c : s.rates.flat()) CHECK(c == 0.0);
    for (double r : s.rewards) CHECK(r == 0.0);
  }
  SUBCASE("single cell reward equals own sum rate") {
    TopologyConfig one = topo;
    one.grid_side = 1;
    env.beta = 3.0;
    Environment e(one, env, 1);
    e.reset();
    const EnvStep s = e.step(ActionTensor(e.users(), 5));
    CHECK(s.rewards[0] == doctest::Approx(network_sum_rate(s.rates)));
  }
  SUBCASE("done exactly at the horizon, then usage error") {
    Environment e(topo, env, 1);
    e.reset();
    for (std::size_t t = 1; t <= env.horizon; ++t) {
      const EnvStep s = e.step(ActionTensor(e.users(), 9));
      CHECK(s.done == (t == env.horizon));
      for (double r : s.rewards) CHECK(std::isfinite(r));
      for (const auto& o : s.observations.flat()) {
        CHECK(o.size() == e.observation_size());
        for (double f : o) CHECK(std::isfinite(f));
      }
    }
    CHECK_THROWS_AS(e.step(ActionTensor(e.users(), 9)), UsageError);
  }
  SUBCASE("first observation has zero history") {
    Environment e(topo, env, 1);
    const auto obs = e.reset();
    for (const auto& o : obs.flat()) {
      CHECK(o[o.size() - 2] == 0.0);
      CHECK(o[o.size() - 1] == 0.0);
    }
  }
  SUBCASE("step uses the current channel and advances it") {
    Environment e(topo, env, 4);
    e.reset();
    const GainTensor before = e.current_gains();
    PowerAllocation p(e.users(), e.p_max());
    const RateMatrix predicted = rates(before, p, e.noise());
    const EnvStep s = e.step(ActionTensor(e.users(), 9));
    CHECK(s.rates == predicted);
    CHECK_FALSE(e.current_gains() == before);
  }
}

TEST_CASE("environment is deterministic under a fixed seed") {
  auto rollout = [](std::uint64_t seed) {
    Environment e(TopologyConfig{}, EnvConfig{}, seed);
    std::vector<double> trace;
    for (int ep = 0; ep < 2; ++ep) {
      e.reset();
      int a = 0;
      while (!e.done()) {
        ActionTensor act(e.users());
        for (int& v : act.flat()) v = (a++) % 10;
        const EnvStep s = e.step(act);
        trace.insert(trace.end(), s.rewards.begin(), s.rewards.end());
        for (const auto& o : s.observations.flat()) trace.insert(trace.end(), o.begin(), o.end());
      }
    }
    return trace;
  };
  CHECK(rollout(8) == rollout(8));
  CHECK_FALSE(rollout(8) == rollout(9));
}
