#include "doctest.h"

#include <cmath>
#include <vector>

#include "eet/channels.hpp"
#include "eet/gallager.hpp"
#include "eet/prob.hpp"

using namespace eet;

TEST_CASE("z_channel") {
  const Dmc id = z_channel(0.0);
  CHECK(id.w(0, 0) == 1.0);
  CHECK(id.w(1, 1) == 1.0);

  const Dmc all_zero = z_channel(1.0);
  CHECK(all_zero.w(1, 0) == 1.0);
  CHECK(all_zero.w(1, 1) == 0.0);

  const Dmc z = z_channel(0.101);
  CHECK(z.w(0, 0) == 1.0);
  CHECK(z.w(0, 1) == 0.0);
  CHECK(z.w(1, 0) == doctest::Approx(0.101));
  CHECK(z.w(1, 1) == doctest::Approx(0.899));

  CHECK_THROWS_AS(z_channel(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(z_channel(1.5), std::invalid_argument);
}

TEST_CASE("virtual_mac") {
  const Dmc z = z_channel(0.101);
  const MacChannel mac = virtual_mac(z, BinaryOp::xor_op(2));
  CHECK(mac.w(0, 1, 0) == doctest::Approx(0.101));
  CHECK(mac.w(0, 1, 1) == doctest::Approx(0.899));
  CHECK(mac.w(1, 1, 0) == 1.0);

  // XOR of a noiseless channel: z = x ^ y deterministically.
  const MacChannel noiseless = virtual_mac(z_channel(0.0), BinaryOp::xor_op(2));
  for (std::size_t x = 0; x < 2; ++x) {
    for (std::size_t y = 0; y < 2; ++y) {
      CHECK(noiseless.w(x, y, x ^ y) == 1.0);
    }
  }

  // First projection: the second input is irrelevant.
  const MacChannel proj = virtual_mac(z, BinaryOp::first_projection(2));
  for (std::size_t x = 0; x < 2; ++x) {
    for (std::size_t zz = 0; zz < 2; ++zz) {
      CHECK(proj.w(x, 0, zz) == proj.w(x, 1, zz));
    }
  }

  const Dmc three(3, 2, {1.0, 0.0, 0.5, 0.5, 0.0, 1.0});
  CHECK_THROWS_AS(virtual_mac(three, BinaryOp::xor_op(2)),
                  std::invalid_argument);
}

TEST_CASE("compose_joint") {
  const MacChannel mac = virtual_mac(z_channel(0.101), BinaryOp::xor_op(2));
  const Dist p1({0.3, 0.7});
  const Dist p2({0.6, 0.4});
  const Joint joint = compose_joint(mac, p1, p2);

  const Dist mx = joint.axis_marginal("X");
  const Dist my = joint.axis_marginal("Y");
  CHECK(mx[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(my[0] == doctest::Approx(0.6).epsilon(1e-12));

  // Cell-by-cell product formula for the uniform-input case.
  const Joint u = compose_joint(mac, Dist::uniform(2), Dist::uniform(2));
  for (std::size_t x = 0; x < 2; ++x) {
    for (std::size_t y = 0; y < 2; ++y) {
      for (std::size_t z = 0; z < 2; ++z) {
        const double expected = 0.25 * ((x ^ y) == 0
                                            ? (z == 0 ? 1.0 : 0.0)
                                            : (z == 0 ? 0.101 : 0.899));
        const std::size_t coords[3] = {x, y, z};
        CHECK(u.at(coords) == doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }

  // Deterministic mac: at most one nonzero output per input pair.
  const Joint det =
      compose_joint(virtual_mac(z_channel(0.0), BinaryOp::xor_op(2)),
                    Dist::uniform(2), Dist::uniform(2));
  int support = 0;
  for (double v : det.probs()) {
    if (v > 0.0) ++support;
  }
  CHECK(support == 4);

  CHECK_THROWS_AS(compose_joint(mac, Dist::uniform(3), p2),
                  std::invalid_argument);
}

TEST_CASE("symmetric capacity input: noiseless xor") {
  const MacChannel mac = virtual_mac(z_channel(0.0), BinaryOp::xor_op(2));
  const Dist p = symmetric_capacity_input(mac);
  // The objective is quartically flat at 1/2, so the grid tie-break may land
  // a fraction of a grid step to the left; the attained value is what the
  // contract pins down.
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(symmetric_sum_information(mac, p) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("symmetric capacity input: degenerate mac returns uniform") {
  // Output ignores both inputs.
  std::vector<double> w(8);
  for (std::size_t i = 0; i < 4; ++i) {
    w[2 * i] = 0.42;
    w[2 * i + 1] = 0.58;
  }
  const MacChannel mac(2, 2, 2, w);
  const Dist p = symmetric_capacity_input(mac);
  CHECK(p[0] == doctest::Approx(0.5));
}

TEST_CASE("symmetric capacity input beats a scalar grid") {
  const MacChannel mac = virtual_mac(z_channel(0.101), BinaryOp::xor_op(2));
  const Dist p = symmetric_capacity_input(mac);
  const double value = symmetric_sum_information(mac, p);
  double grid_best = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double p0 = i / 1000.0;
    grid_best =
        std::max(grid_best, symmetric_sum_information(mac, Dist({p0, 1 - p0})));
  }
  CHECK(value >= grid_best - 1e-9);
  // Independent coarse-grid oracle pins the optimum region.
  CHECK(value == doctest::Approx(grid_best).epsilon(1e-4));
  // Ties resolve to the lexicographically smaller of the two mirrored roots.
  CHECK(p[0] < 0.5);

  const MacChannel rect(2, 3, 2, std::vector<double>(12, 0.5));
  CHECK_THROWS_AS(symmetric_capacity_input(rect), std::invalid_argument);
}

TEST_CASE("channel spec shorthand") {
  const ParsedChannel ch = parse_channel_spec("z:0.101");
  CHECK(ch.dmc.w(1, 0) == doctest::Approx(0.101));
  CHECK(ch.op.apply(1, 1) == 0);
  CHECK_THROWS_AS(parse_channel_spec("z:abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_channel_spec("z:0.5x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_channel_spec(""), std::invalid_argument);
}

TEST_CASE("channel spec json") {
  const char* doc = R"({
    "input_alphabet": 2,
    "output_alphabet": 2,
    "rows": [1.0, 0.0, 0.101, 0.899],
    "op": "xor"
  })";
  const ParsedChannel ch = parse_channel_spec(doc);
  CHECK(ch.dmc.inputs() == 2);
  CHECK(ch.dmc.w(1, 1) == doctest::Approx(0.899));

  // Row-stochastic within 1e-9 passes and is normalized exactly.
  const char* near = R"({"input_alphabet":1,"output_alphabet":2,
                         "rows":[0.5000000001, 0.5]})";
  const ParsedChannel n = parse_channel_spec(near);
  CHECK(n.dmc.w(0, 0) + n.dmc.w(0, 1) == doctest::Approx(1.0).epsilon(1e-15));

  const char* bad_sum = R"({"input_alphabet":1,"output_alphabet":2,
                            "rows":[0.6, 0.5]})";
  CHECK_THROWS_WITH_AS(parse_channel_spec(bad_sum), doctest::Contains("row"),
                       std::invalid_argument);

  const char* bad_field = R"({"output_alphabet":2,"rows":[1.0,0.0]})";
  CHECK_THROWS_WITH_AS(parse_channel_spec(bad_field),
                       doctest::Contains("input_alphabet"),
                       std::invalid_argument);

  const char* table_op = R"({
    "input_alphabet": 2, "output_alphabet": 2,
    "rows": [1.0, 0.0, 0.101, 0.899],
    "op": [[0, 1], [1, 0]]
  })";
  const ParsedChannel t = parse_channel_spec(table_op);
  CHECK(t.op.apply(0, 1) == 1);
  CHECK(t.op.apply(1, 1) == 0);
}

TEST_CASE("virtual mac rows are valid whenever inputs are valid") {
  // Row validity is enforced by construction; probe a few channels.
  for (double p : {0.0, 0.3, 0.7, 1.0}) {
    const MacChannel mac = virtual_mac(z_channel(p), BinaryOp::xor_op(2));
    for (std::size_t x = 0; x < 2; ++x) {
      for (std::size_t y = 0; y < 2; ++y) {
        double sum = 0.0;
        for (std::size_t z = 0; z < 2; ++z) sum += mac.w(x, y, z);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("composed conditional recovers the mac row") {
  const MacChannel mac = virtual_mac(z_channel(0.101), BinaryOp::xor_op(2));
  const Dist p({0.35, 0.65});
  const Joint joint = compose_joint(mac, p, p);
  double total = 0.0;
  for (double v : joint.probs()) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t x = 0; x < 2; ++x) {
    for (std::size_t y = 0; y < 2; ++y) {
      const std::size_t c0[3] = {x, y, 0};
      const std::size_t c1[3] = {x, y, 1};
      const double mass = joint.at(c0) + joint.at(c1);
      CHECK(joint.at(c0) / mass == doctest::Approx(mac.w(x, y, 0)).epsilon(1e-12));
    }
  }
}
