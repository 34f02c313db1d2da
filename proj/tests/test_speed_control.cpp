#include <doctest.h>

#include <cmath>
#include <sstream>

#include "finegrid/error.hpp"
#include "finegrid/simulation.hpp"
#include "finegrid/speed_control.hpp"

using namespace finegrid;

namespace {

// Moves admitted within one second when every step proposes `step` meters.
int admitted_per_second(double cell, double cap, bool diagonal, double dt = 0.025) {
  DisplacementLedger ledger;
  const double step = diagonal ? cell * std::sqrt(2.0) : cell;
  int n = 0;
  for (int k = 0; k < static_cast<int>(std::lround(1.0 / dt)); ++k) n += apply_speed_cap(ledger, step, cap, cap, k * dt);
  return n;
}

}  // namespace

TEST_SUITE("speed_control") {

TEST_CASE("heading sectors") {
  CHECK(heading_sector(1, 0) == 0);
  CHECK(heading_sector(0, 1) == 3);
  CHECK(heading_sector(-1, 0) == 6);
  CHECK(heading_sector(1, -0.01) == 0);
  const double t15 = std::tan(15.0 * std::acos(-1.0) / 180.0);
  CHECK(heading_sector(1, t15) == 1);
  CHECK(heading_sector(1, -t15) == 0);  // boundary goes counterclockwise
  CHECK_THROWS_AS(heading_sector(0, 0), Error);
}

TEST_CASE("perception rectangle geometry") {
  const PerceptionConfig cfg;  // 2.5 wide, 3.5 long
  const OrientedRect east = perception_rect({5, 5}, 0, cfg);
  const Rect box = east.bounding_box();
  CHECK(box.x_min == doctest::Approx(5.0));
  CHECK(box.x_max == doctest::Approx(8.5));
  CHECK(box.y_min == doctest::Approx(3.75));
  CHECK(box.y_max == doctest::Approx(6.25));

  const Rect west = perception_rect({5, 5}, 6, cfg).bounding_box();
  CHECK(west.x_min == doctest::Approx(1.5));
  CHECK(west.x_max == doctest::Approx(5.0));
  CHECK(west.y_min == doctest::Approx(3.75));

  const Rect room{0, 0, 30, 4};
  CHECK(east.clipped_area(Rect{0, 0, 30, 10}) == doctest::Approx(8.75));
  CHECK(perception_rect({5, 0.5}, 0, cfg).clipped_area(room) < 8.75);
}

TEST_CASE("local density") {
  const PerceptionConfig cfg;
  const OrientedRect east = perception_rect({5, 5}, 0, cfg);
  const Rect room{0, 0, 30, 10};
  std::vector<float> xs{5.5f, 6.f, 6.5f, 7.f, 7.5f, 8.f, 8.4f, 5.f, 9.f};
  std::vector<float> ys{5.f, 5.f, 5.f, 5.f, 5.f, 5.f, 5.f, 5.f, 5.f};
  // index 7 is the perceiver, index 8 is beyond the far edge
  CHECK(local_density({xs, ys}, east, room, 7) == doctest::Approx(7.0 / 8.75));
  CHECK(local_density({{}, {}}, east, room) == 0.0);

  // centered on the wall: half of the rectangle is clipped away
  const OrientedRect wall = perception_rect({5, 0}, 0, cfg);
  std::vector<float> wx{6.f, 7.f}, wy{0.5f, 1.f};
  CHECK(local_density({wx, wy}, wall, Rect{0, 0, 30, 4}) == doctest::Approx(2.0 / (8.75 / 2)));

  // fully outside the bounds
  const OrientedRect gone = perception_rect({40, 2}, 0, cfg);
  CHECK(local_density({wx, wy}, gone, Rect{0, 0, 30, 4}) == 0.0);
}

TEST_CASE("speed-density curve") {
  const SpeedDensityCurve k = SpeedDensityCurve::kladek(KladekForm{});
  CHECK(k.speed_at(1.0) == doctest::Approx(1.058063).epsilon(1e-6));
  CHECK(k.speed_at(0.0) == doctest::Approx(1.34));
  CHECK(k.speed_at(5.4) == 0.0);
  CHECK(k.speed_at(9.0) == 0.0);
  for (double d = 0.0; d < 6.0; d += 0.05) CHECK(k.speed_at(d + 0.05) <= k.speed_at(d));

  std::istringstream in("# density speed\n0 1.2\n1 1.0\n\n2 0.5 # tail\n");
  const SpeedDensityCurve c = SpeedDensityCurve::parse(in, "t.txt");
  CHECK(c.free_flow_speed() == doctest::Approx(1.2));
  CHECK(c.speed_at(1.5) == doctest::Approx(0.75));
  CHECK(c.speed_at(3.0) == doctest::Approx(0.5));

  std::istringstream bad("0 1.0\n1 1.2\n");
  CHECK_THROWS_AS(SpeedDensityCurve::parse(bad), Error);
  std::istringstream junk("0 1.0\n1 x\n");
  try {
    SpeedDensityCurve::parse(junk, "j.txt");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find("j.txt:2") != std::string::npos);
  }
}

TEST_CASE("shipped curve file matches the closed form") {
  const SpeedDensityCurve file = SpeedDensityCurve::load(FINEGRID_SOURCE_DIR "/data/weidmann.txt");
  const SpeedDensityCurve exact = SpeedDensityCurve::kladek(KladekForm{});
  for (double d = 0.0; d <= 5.4; d += 0.037) CHECK(file.speed_at(d) == doctest::Approx(exact.speed_at(d)).epsilon(1e-3));
}

TEST_CASE("gate probability") {
  const SpeedGate g = gate_probability(1.0, 0.05, 0.025);
  CHECK(g.max_moves_per_second == doctest::Approx(40));
  CHECK(g.allowed_moves_per_second == doctest::Approx(20));
  CHECK(g.move_probability == doctest::Approx(0.5));
  CHECK(gate_probability(0.0, 0.05, 0.025).move_probability == 0.0);
  CHECK(gate_probability(2.0, 0.05, 0.025).move_probability == doctest::Approx(1.0));
  CHECK(gate_probability(3.0, 0.05, 0.025).move_probability == 1.0);
  for (double rho = 0.0; rho < 5.5; rho += 0.1) {
    const auto& curve = SpeedDensityCurve::kladek(KladekForm{});
    CHECK(gate_probability(curve.speed_at(rho + 0.1), 0.05, 0.025).move_probability <=
          gate_probability(curve.speed_at(rho), 0.05, 0.025).move_probability);
  }
}

TEST_CASE("bernoulli draws") {
  Rng rng(99);
  const SpeedGate always{40, 40, 1.0}, never{0, 40, 0.0}, half{20, 40, 0.5};
  for (int i = 0; i < 1000; ++i) {
    CHECK(sample_move_allowed(always, rng));
    CHECK_FALSE(sample_move_allowed(never, rng));
  }
  int hits = 0;
  for (int i = 0; i < 100000; ++i) hits += sample_move_allowed(half, rng);
  CHECK(std::abs(hits / 1e5 - 0.5) < 0.01);
}

TEST_CASE("speed cap counts per second") {
  CHECK(admitted_per_second(0.05, 1.4, false) == 28);
  CHECK(admitted_per_second(0.05, 1.4, true) == 19);
  CHECK(admitted_per_second(0.4, 1.4, false) == 3);
  CHECK(admitted_per_second(0.4, 1.4, true) == 2);
}

TEST_CASE("speed cap window resets on whole seconds of the local clock") {
  DisplacementLedger l;
  CHECK(apply_speed_cap(l, 1.0, 1.34, 1.0, 0.2));
  CHECK_FALSE(apply_speed_cap(l, 0.05, 1.34, 1.0, 0.9));
  CHECK(apply_speed_cap(l, 0.05, 1.34, 1.0, 1.0));
  CHECK(l.window_start == doctest::Approx(1.0));
  CHECK(apply_speed_cap(l, 0.05, 1.34, 1.0, 3.5));
  CHECK(l.window_start == doctest::Approx(3.0));
  CHECK(l.accumulated == doctest::Approx(0.05));
  // the lower of free-flow and desired speed binds
  DisplacementLedger m;
  CHECK_FALSE(apply_speed_cap(m, 0.05, 1.34, 0.0, 0.0));
}

TEST_CASE("per-second displacement never exceeds the cap") {
  Rng rng(12);
  for (double cap : {0.3, 0.9, 1.34}) {
    DisplacementLedger l;
    double window = 0.0;
    int second = 0;
    for (int k = 0; k < 4000; ++k) {
      const double now = k * 0.025;
      if (static_cast<int>(now + 1e-9) != second) {
        CHECK(window <= cap + 1e-9);
        window = 0.0;
        second = static_cast<int>(now + 1e-9);
      }
      const double step = std::bernoulli_distribution(0.5)(rng) ? 0.05 * std::sqrt(2.0) : 0.05;
      if (apply_speed_cap(l, step, 1.34, cap, now)) window += step;
    }
  }
}

TEST_CASE("isolated pedestrian realizes the desired speed") {
  for (double v : {0.6, 1.0, 1.3}) {
    Scenario s;
    s.width = 700.0;
    s.height = 2.0;
    s.sinks.push_back({"end", Rect{699.5, 0.0, 700.0, 2.0}});
    s.reporting_area = Rect{0.0, 0.0, 700.0, 2.0};
    s.curve = SpeedDensityCurve::from_samples({{0.0, v}, {6.0, v}});
    s.transition.model = TransitionModel::Greedy;  // straight line, direct steps only
    s.seed = 77;
    Simulation sim(s);
    REQUIRE(sim.place({20, 20}, 0, s.sinks[0].area));
    sim.run(500.0);
    REQUIRE(sim.samples().size() == 500);
    double sum = 0.0;
    for (const auto& x : sim.samples()) sum += x.speed;
    CHECK(std::abs(sum / 500.0 - v) <= 0.08);
  }
}

}  // TEST_SUITE
