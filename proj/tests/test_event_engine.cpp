#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <vector>

#include "desplant/errors.hpp"
#include "desplant/event_engine.hpp"
#include "desplant/plant.hpp"

#include "support/common.hpp"
#include "support/oracle.hpp"
#include "support/random_system.hpp"

using namespace desplant;
using testsupport::quadrant_partition;
using testsupport::sv;

TEST_CASE("plant symbols print, parse and enumerate", "[events]") {
  CHECK(PlantSymbol{1, Direction::plus}.name() == "z1+");
  CHECK(PlantSymbol{2, Direction::minus}.name() == "z2-");
  CHECK(PlantSymbol::parse("z1+") == PlantSymbol{1, Direction::plus});
  CHECK(PlantSymbol::parse("z12-") == PlantSymbol{12, Direction::minus});

  SECTION("malformed symbols are rejected") {
    CHECK_THROWS_AS(PlantSymbol::parse("q1+"), InputError);
    CHECK_THROWS_AS(PlantSymbol::parse("z+"), InputError);
    CHECK_THROWS_AS(PlantSymbol::parse("z1"), InputError);
    CHECK_THROWS_AS(PlantSymbol::parse("z0+"), InputError);
    CHECK_THROWS_AS(PlantSymbol::parse("zx-"), InputError);
  }

  SECTION("the alphabet lists both directions per surface in order") {
    const auto alphabet = plant_symbol_alphabet(2);
    REQUIRE(alphabet.size() == 4);
    CHECK(alphabet[0].name() == "z1+");
    CHECK(alphabet[1].name() == "z1-");
    CHECK(alphabet[2].name() == "z2+");
    CHECK(alphabet[3].name() == "z2-");
  }

  SECTION("events convert to their announcing symbol") {
    const PlantEvent e{2, Direction::plus, 1.5, {0.0, 0.0}, {0.0, 0.1}};
    CHECK(event_to_symbol(e).name() == "z2+");
  }
}

TEST_CASE("event scan finds strict crossings and localizes them", "[events]") {
  const VectorField plant = VectorField::double_integrator();
  const PartitionSpec partition = quadrant_partition();

  SECTION("a coasting trajectory crosses the position axis once") {
    const TrajectorySegment seg = flow(plant, {0.0}, {-1.0, 1.0}, 0.0, 2.0, 1e-3);
    const auto events = detect_events(seg, partition);
    REQUIRE(events.size() == 1);
    CHECK(events[0].surface == 1);
    CHECK(events[0].dir == Direction::plus);
    CHECK(events[0].time == Catch::Approx(1.0).margin(1e-8));
    CHECK(std::abs(events[0].state[0]) < kDefaultEpsH);
    CHECK(events[0].post_state[0] > 0.0);
  }

  SECTION("a segment that stays inside its cell reports nothing") {
    const TrajectorySegment seg = flow(plant, {1.0}, {1.0, 1.0}, 0.0, 2.0, 1e-3);
    CHECK(detect_events(seg, partition).empty());
  }

  SECTION("thrust up from the left half-plane crosses only the position axis") {
    const TrajectorySegment seg = flow(plant, {1.0}, {-1.0, 0.5}, 0.0, 2.0, 1e-3);
    const auto events = detect_events(seg, partition);
    REQUIRE(events.size() == 1);
    CHECK(events[0].surface == 1);
    CHECK(events[0].dir == Direction::plus);
    CHECK(events[0].time == Catch::Approx(1.0).margin(1e-8));
  }

  SECTION("a braking arc crosses position, velocity, then position again") {
    const TrajectorySegment seg = flow(plant, {-1.0}, {-1.0, 2.0}, 0.0, 5.0, 1e-3);
    const auto events = detect_events(seg, partition);
    const auto expected = oracle::crossings(-1.0, 2.0, -1.0, seg.end_time());
    REQUIRE(events.size() == expected.size());
    REQUIRE(events.size() == 3);
    for (std::size_t k = 0; k < events.size(); ++k) {
      CHECK(events[k].surface == expected[k].surface);
      CHECK((events[k].dir == Direction::plus ? +1 : -1) == expected[k].dir);
      CHECK(events[k].time == Catch::Approx(expected[k].time).margin(1e-8));
    }
    CHECK(events[1].surface == 2);
    CHECK(events[1].time == Catch::Approx(2.0).margin(1e-8));
  }

  SECTION("a start on a hypersurface is rejected") {
    const TrajectorySegment seg = flow(plant, {1.0}, {0.0, 1.0}, 0.0, 1.0, 1e-3);
    CHECK_THROWS_AS(detect_events(seg, partition), BoundaryStateError);
  }

  SECTION("random segments agree with the hand-solved crossings") {
    testsupport::Rng rng(31);
    for (int trial = 0; trial < 150; ++trial) {
      Vec x0(2);
      do {
        x0[0] = testsupport::uniform(rng, -5.0, 5.0);
        x0[1] = testsupport::uniform(rng, -5.0, 5.0);
      } while (std::abs(x0[0]) < 1e-3 || std::abs(x0[1]) < 1e-3);
      const double u = testsupport::uniform(rng, -2.0, 2.0);
      const double horizon = testsupport::uniform(rng, 0.5, 6.0);

      const TrajectorySegment seg = flow(plant, {u}, x0, 0.0, horizon, 1e-3);
      const auto events = detect_events(seg, partition);
      const auto expected = oracle::crossings(x0[0], x0[1], u, seg.end_time());
      REQUIRE(events.size() == expected.size());
      for (std::size_t k = 0; k < events.size(); ++k) {
        REQUIRE(events[k].surface == expected[k].surface);
        REQUIRE((events[k].dir == Direction::plus ? +1 : -1) == expected[k].dir);
        REQUIRE(events[k].time == Catch::Approx(expected[k].time).margin(1e-8));
      }
    }
  }
}

TEST_CASE("a tangential graze is flagged as sliding, not crossed", "[events]") {
  // Along thrust-down arcs the quantity x1 - x2^2/2 is conserved, so a
  // functional built on it can hug zero for many samples without a sign
  // change. From (-0.5, 1) under u = -1 it rises as -(t-1)^2 and peaks at
  // exactly zero at t = 1, while the velocity axis is crossed at the same
  // moment.
  std::vector<Functional> fns;
  fns.emplace_back(1, "energy_gap", 2,
                   [](const Vec& x) { return x[0] - 0.5 * x[1] * x[1]; });
  fns.emplace_back(2, Vec{0.0, 1.0}, 0.0);
  const PartitionSpec partition(std::move(fns));

  const VectorField plant = VectorField::double_integrator();
  const TrajectorySegment seg = flow(plant, {-1.0}, {-0.5, 1.0}, 0.0, 2.0, 1e-3);

  EventScanDiagnostics diag;
  const auto events = detect_events(seg, partition, 1e-9, 1e-4, &diag);

  REQUIRE(events.size() == 1);
  CHECK(events[0].surface == 2);
  CHECK(events[0].dir == Direction::minus);
  CHECK(events[0].time == Catch::Approx(1.0).margin(1e-6));
  CHECK(diag.sliding_surfaces == std::vector<int>{1});
}

TEST_CASE("simultaneity check groups and reorders near-coincident events", "[events]") {
  const PlantEvent late_low{1, Direction::minus, 1.0 + 5e-10, {0.0, 0.0}, {0.0, 0.0}};
  const PlantEvent early_high{3, Direction::plus, 1.0, {0.0, 0.0}, {0.0, 0.0}};

  SECTION("events inside one tolerance window are flagged and surface-ordered") {
    const SimultaneityResult r = check_simultaneity({late_low, early_high}, 1e-9);
    CHECK(r.violation);
    REQUIRE(r.events.size() == 2);
    CHECK(r.events[0].surface == 1);
    CHECK(r.events[1].surface == 3);
  }

  SECTION("well-separated events keep time order and raise no flag") {
    const PlantEvent second{1, Direction::minus, 2.0, {0.0, 0.0}, {0.0, 0.0}};
    const SimultaneityResult r = check_simultaneity({second, early_high}, 1e-9);
    CHECK_FALSE(r.violation);
    REQUIRE(r.events.size() == 2);
    CHECK(r.events[0].surface == 3);
    CHECK(r.events[1].surface == 1);
  }

  SECTION("an empty list is trivially fine") {
    const SimultaneityResult r = check_simultaneity({}, 1e-9);
    CHECK_FALSE(r.violation);
    CHECK(r.events.empty());
  }
}

TEST_CASE("leg integration stops at the first settled crossing", "[events]") {
  const VectorField plant = VectorField::double_integrator();
  const PartitionSpec partition = quadrant_partition();

  SECTION("a single crossing ends the leg just past the surface") {
    const LegResult leg =
        integrate_until_event(plant, {1.0}, {-1.0, 0.5}, 0.0, partition, 100.0);
    REQUIRE_FALSE(leg.no_event);
    REQUIRE(leg.events.size() == 1);
    CHECK_FALSE(leg.coincident_events);
    CHECK(leg.events[0].surface == 1);
    CHECK(leg.events[0].dir == Direction::plus);
    CHECK(leg.events[0].time == Catch::Approx(1.0).margin(1e-8));
    CHECK(partition.quality(leg.end_state) == sv({1, 1}));
    CHECK(leg.end_time > leg.events[0].time);
    CHECK(leg.end_time - leg.events[0].time < 3e-3);
  }

  SECTION("horizon expiry reports no event and the final state") {
    const LegResult leg =
        integrate_until_event(plant, {1.0}, {1.0, 1.0}, 0.0, partition, 5.0);
    CHECK(leg.no_event);
    CHECK(leg.events.empty());
    CHECK(leg.end_time >= 5.0);
    const Vec expect = closed_form_double_integrator({1.0, 1.0}, 1.0, leg.end_time);
    CHECK(leg.end_state[0] == Catch::Approx(expect[0]).margin(1e-9));
    CHECK(leg.end_state[1] == Catch::Approx(expect[1]).margin(1e-9));
  }

  SECTION("a leg must start strictly inside a cell") {
    CHECK_THROWS_AS(integrate_until_event(plant, {1.0}, {0.0, 1.0}, 0.0, partition, 1.0),
                    BoundaryStateError);
  }

  SECTION("two crossings hidden in one coarse step are split apart") {
    // With dt = 1 the first sample already sits past both the position
    // crossing at t = 0.2732 and the velocity crossing at t = 0.1; the leg
    // must re-land between them and keep only the earlier one.
    const LegResult leg =
        integrate_until_event(plant, {-1.0}, {0.01, 0.1}, 0.0, partition, 5.0, 1.0);
    REQUIRE_FALSE(leg.no_event);
    CHECK_FALSE(leg.coincident_events);
    REQUIRE(leg.events.size() == 1);
    CHECK(leg.events[0].surface == 2);
    CHECK(leg.events[0].dir == Direction::minus);
    CHECK(leg.events[0].time == Catch::Approx(0.1).margin(1e-8));
    CHECK(partition.quality(leg.end_state) == sv({1, -1}));
    CHECK(leg.end_time < 0.2732);
  }

  SECTION("genuinely coincident crossings are flagged and surface-ordered") {
    // Both diagonals pass through the origin, and from (-0.5, 1) under
    // u = -1 the trajectory hits the origin at t = 1, so the two surfaces
    // are crossed at exactly the same moment.
    std::vector<Functional> fns;
    fns.emplace_back(1, Vec{1.0, 1.0}, 0.0);
    fns.emplace_back(2, Vec{1.0, -1.0}, 0.0);
    const PartitionSpec diagonals(std::move(fns));

    const LegResult leg =
        integrate_until_event(plant, {-1.0}, {-0.5, 1.0}, 0.0, diagonals, 5.0);
    REQUIRE_FALSE(leg.no_event);
    CHECK(leg.coincident_events);
    REQUIRE(leg.events.size() == 2);
    CHECK(leg.events[0].surface == 1);
    CHECK(leg.events[0].dir == Direction::minus);
    CHECK(leg.events[1].surface == 2);
    CHECK(leg.events[1].dir == Direction::plus);
    CHECK(leg.events[0].time == Catch::Approx(1.0).margin(1e-6));
    CHECK(leg.events[1].time == Catch::Approx(1.0).margin(1e-6));
    CHECK(diagonals.quality(leg.end_state) == sv({-1, 1}));
  }
}
