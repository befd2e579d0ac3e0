#include <doctest.h>

#include "coperc/world.hpp"
#include "oracles.hpp"

using namespace coperc;

TEST_CASE("sensing region uses grid-center distance") {
  const GridWorld grids(400, 400, 10);
  VehicleState v;
  v.position = Vec2(0, 0);
  const auto region = sensing_region(v, grids, 50);
  CHECK(std::binary_search(region.begin(), region.end(), grids.locate(Vec2(5, 5))));
  CHECK_FALSE(std::binary_search(region.begin(), region.end(), grids.locate(Vec2(55, 5))));
}

TEST_CASE("sensing region matches brute force enumeration") {
  const GridWorld grids(400, 400, 10);
  VehicleState v;
  v.position = Vec2(200, 200);
  CHECK(sensing_region(v, grids, 50) == oracle::grids_within(200, 200, 50, 40, 40, 10));

  Rng rng(7);
  std::uniform_real_distribution<double> u(-20, 420), r(1, 120);
  for (int t = 0; t < 200; ++t) {
    v.position = Vec2(u(rng), u(rng));
    const double radius = r(rng);
    REQUIRE(sensing_region(v, grids, radius) ==
            oracle::grids_within(v.position.x(), v.position.y(), radius, 40, 40, 10));
  }
}

TEST_CASE("cluster requirement region is the union of member regions") {
  const GridWorld grids(400, 400, 10);
  std::vector<VehicleState> vs(2);
  vs[0].position = Vec2(150, 200);
  vs[1].position = Vec2(250, 200);
  CHECK(cluster_requirement_region(std::span(vs).first(1), grids, 75) == sensing_region(vs[0], grids, 75));

  auto a = oracle::grids_within(150, 200, 75, 40, 40, 10);
  auto b = oracle::grids_within(250, 200, 75, 40, 40, 10);
  std::set<int> both(a.begin(), a.end());
  both.insert(b.begin(), b.end());
  CHECK(cluster_requirement_region(vs, grids, 75).size() == both.size());

  vs[1].position = vs[0].position;
  CHECK(cluster_requirement_region(vs, grids, 75) == sensing_region(vs[0], grids, 75));
}

TEST_CASE("density surrogate") {
  ScenarioConfig cfg;
  const GridWorld grids(cfg);
  VehicleState v;
  v.is_cav = true;
  v.position = Vec2(203, 197);
  const Eigen::VectorXd rho = generate_density(v, grids, cfg);
  const auto sens = sensing_region(v, grids, cfg.r_sens);

  SUBCASE("support is the sensing region") {
    for (int g = 0; g < grids.size(); ++g) {
      if (!std::binary_search(sens.begin(), sens.end(), g)) REQUIRE(rho[g] == 0.0);
    }
  }
  SUBCASE("frame carries points_per_frame points") {
    CHECK(rho.sum() * cfg.grid_size * cfg.grid_size == doctest::Approx(5600).epsilon(1e-6));
  }
  SUBCASE("non-increasing in center distance") {
    for (int a : sens) {
      for (int b : sens) {
        if ((grids.center(a) - v.position).norm() < (grids.center(b) - v.position).norm() - 1e-9)
          REQUIRE(rho[a] >= rho[b]);
      }
    }
    const Vec2 near = v.position + Vec2(10, 0), far = v.position + Vec2(40, 0);
    CHECK(rho[grids.locate(near)] > rho[grids.locate(far)]);
  }
}

TEST_CASE("mobility") {
  ScenarioConfig cfg;
  Rng rng(3);
  std::vector<VehicleState> vs(2);
  vs[0].position = Vec2(100, 198);
  vs[0].velocity = Vec2(10, 0);
  vs[1].position = Vec2(50, 50);
  step_mobility(vs, 0.1, cfg, rng);
  CHECK(vs[0].position.x() == doctest::Approx(101));
  CHECK(vs[0].position.y() == doctest::Approx(198));
  CHECK(vs[1].position == Vec2(50, 50));
  CHECK_THROWS_AS(step_mobility(vs, 0.0, cfg, rng), std::invalid_argument);

  SUBCASE("respawn draws a fresh in-range speed and bumps the epoch") {
    vs[0].position = Vec2(399.9, 198);
    step_mobility(vs, 0.1, cfg, rng);
    CHECK(vs[0].epoch == 1);
    CHECK(vs[0].velocity.norm() >= cfg.speed_min);
    CHECK(vs[0].velocity.norm() <= cfg.speed_max);
    CHECK(GridWorld(cfg).contains(vs[0].position + vs[0].velocity * 1e-3));
  }

  SUBCASE("seeded trajectories are reproducible") {
    Rng a = make_stream(11, Stream::kMobility), b = make_stream(11, Stream::kMobility);
    auto fa = spawn_fleet(cfg, a), fb = spawn_fleet(cfg, b);
    for (int c = 0; c < 300; ++c) {
      step_mobility(fa, 0.1, cfg, a);
      step_mobility(fb, 0.1, cfg, b);
    }
    for (std::size_t i = 0; i < fa.size(); ++i) REQUIRE(fa[i].position == fb[i].position);
  }
}

TEST_CASE("snapshot layout") {
  ScenarioConfig cfg;
  GridWorld grids(cfg);
  Rng rng(5);
  auto fleet = spawn_fleet(cfg, rng);
  const auto snap = make_snapshot(fleet, grids, cfg, 0);
  CHECK(snap.n_cavs == 20);
  CHECK(snap.rho.rows() == 20);
  CHECK(snap.rho.cols() == 1600);
  for (int i = 0; i < snap.n_cavs; ++i) {
    // r_sens <= r_req
    REQUIRE(set_intersection(snap.sens[i], snap.req[i]) == snap.sens[i]);
  }
  std::swap(fleet[0], fleet[50]);
  CHECK_THROWS_AS(make_snapshot(fleet, grids, cfg, 0), std::invalid_argument);
}

TEST_CASE("scenario validation") {
  ScenarioConfig cfg;
  cfg.n_cavs = 200;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.grid_size = 7;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
