#include "doctest.h"

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "eet/prob.hpp"
#include "eet/rng.hpp"

using namespace eet;

namespace {

// Test-side oracles use natural logs so they do not share the library's
// log2-based code path.
double h_oracle(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h / std::log(2.0);
}

double kl_oracle(const std::vector<double>& v, const std::vector<double>& p) {
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > 0.0) {
      if (p[i] <= 0.0) return std::numeric_limits<double>::infinity();
      d += v[i] * std::log(v[i] / p[i]);
    }
  }
  return d / std::log(2.0);
}

Joint random_joint(Rng& rng, std::vector<Axis> axes) {
  std::size_t cells = 1;
  for (const auto& a : axes) cells *= a.size;
  std::vector<double> p(cells);
  double sum = 0.0;
  for (double& v : p) {
    v = -std::log(std::max(rng.unit(), 1e-12));
    sum += v;
  }
  for (double& v : p) v /= sum;
  double s2 = 0.0;
  for (double v : p) s2 += v;
  p.back() += 1.0 - s2;
  return Joint(std::move(axes), std::move(p));
}

}  // namespace

TEST_CASE("entropy basics") {
  CHECK(entropy(Dist::uniform(2)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(entropy(Dist::point_mass(5, 2)) == 0.0);
  const Dist d({0.101, 0.899});
  CHECK(entropy(d) == doctest::Approx(h_oracle({0.101, 0.899})).epsilon(1e-13));
  CHECK(entropy(Dist::uniform(8)) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("dist validation rejects rather than renormalizes") {
  CHECK_THROWS_AS(Dist({0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(Dist({-0.1, 1.1}), std::invalid_argument);
  CHECK_THROWS_AS(Dist(std::vector<double>{}), std::invalid_argument);
  CHECK_NOTHROW(Dist({0.5, 0.5 + 5e-13}));
}

TEST_CASE("kl divergence") {
  const Dist p({0.101, 0.899});
  CHECK(kl_divergence(p, p) == 0.0);
  const Dist u = Dist::uniform(2);
  CHECK(kl_divergence(u, p) ==
        doctest::Approx(kl_oracle({0.5, 0.5}, {0.101, 0.899})).epsilon(1e-13));
  CHECK(std::isinf(kl_divergence(Dist({0.5, 0.5}), Dist({1.0, 0.0}))));
  CHECK_THROWS_AS(kl_divergence(Dist::uniform(2), Dist::uniform(3)),
                  std::invalid_argument);
}

TEST_CASE("kl divergence on joints requires matching axes") {
  Rng rng(11);
  const Joint a = random_joint(rng, {{"X", 2}, {"Z", 3}});
  const Joint b = random_joint(rng, {{"X", 2}, {"Y", 3}});
  CHECK_THROWS_AS(kl_divergence(a, b), std::invalid_argument);
}

TEST_CASE("conditional mutual information") {
  const Joint prod = Joint::product({{"X", 2}, {"Y", 2}, {"Z", 2}},
                                    {Dist({0.3, 0.7}), Dist({0.6, 0.4}),
                                     Dist({0.25, 0.75})});
  CHECK(cond_mutual_information(prod, "X", "Z", "Y") ==
        doctest::Approx(0.0).epsilon(1e-12));

  // X copied to Z, Y independent: I(X;Z|Y) = H(X).
  std::vector<double> copy(8, 0.0);
  const double px0 = 0.3, py0 = 0.55;
  copy[0 * 4 + 0 * 2 + 0] = px0 * py0;
  copy[0 * 4 + 1 * 2 + 0] = px0 * (1 - py0);
  copy[1 * 4 + 0 * 2 + 1] = (1 - px0) * py0;
  copy[1 * 4 + 1 * 2 + 1] = (1 - px0) * (1 - py0);
  const Joint copy_joint({{"X", 2}, {"Y", 2}, {"Z", 2}}, copy);
  CHECK(cond_mutual_information(copy_joint, "X", "Z", "Y") ==
        doctest::Approx(h_oracle({px0, 1 - px0})).epsilon(1e-12));

  CHECK_THROWS_AS(cond_mutual_information(prod, "X", "Z", "W"),
                  std::invalid_argument);
}

TEST_CASE("cmi agrees across two decompositions on random joints") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const Joint v = random_joint(rng, {{"X", 2}, {"Y", 3}, {"Z", 2}});
    const double lhs = cond_mutual_information(v, "X", "Z", "Y");
    const std::vector<std::string> x{"X"}, z{"Z"}, y{"Y"}, xz{"X", "Z"};
    const double rhs = conditional_entropy(v, x, y) +
                       conditional_entropy(v, z, y) -
                       conditional_entropy(v, xz, y);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("multi information") {
  const Joint prod = Joint::product({{"X", 2}, {"Y", 2}, {"Z", 2}},
                                    {Dist({0.3, 0.7}), Dist({0.6, 0.4}),
                                     Dist({0.25, 0.75})});
  CHECK(multi_information(prod) == doctest::Approx(0.0).epsilon(1e-12));

  // Three identical copies of a uniform bit: (m-1) H = 2 bits.
  std::vector<double> tri(8, 0.0);
  tri[0] = 0.5;
  tri[7] = 0.5;
  const Joint triple({{"X", 2}, {"Y", 2}, {"Z", 2}}, tri);
  CHECK(multi_information(triple) == doctest::Approx(2.0).epsilon(1e-12));

  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const Joint v = random_joint(rng, {{"X", 2}, {"Y", 2}, {"Z", 2}});
    double expected = -entropy(v);
    for (const auto& axis : v.axes()) {
      expected += h_oracle(v.axis_marginal(axis.label).probs());
    }
    CHECK(multi_information(v) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("multi information of a pair equals mutual information") {
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const Joint v = random_joint(rng, {{"X", 3}, {"Y", 4}});
    const double expected = entropy(v.axis_marginal("X")) +
                            entropy(v.axis_marginal("Y")) - entropy(v);
    CHECK(multi_information(v) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("marginals") {
  const Dist px({0.3, 0.7});
  const Dist py({0.6, 0.4});
  const Dist pz({0.25, 0.75});
  const Joint prod = Joint::product({{"X", 2}, {"Y", 2}, {"Z", 2}}, {px, py, pz});

  const Joint xy = prod.marginal({"X", "Y"});
  for (std::size_t x = 0; x < 2; ++x) {
    for (std::size_t y = 0; y < 2; ++y) {
      const std::size_t coords[2] = {x, y};
      CHECK(xy.at(coords) == doctest::Approx(px[x] * py[y]).epsilon(1e-12));
    }
  }
  const Dist mx = prod.axis_marginal("X");
  CHECK(mx[0] == doctest::Approx(0.3).epsilon(1e-12));

  const Joint same = prod.marginal({"X", "Y", "Z"});
  for (std::size_t i = 0; i < prod.cells(); ++i) {
    CHECK(same.probs()[i] == doctest::Approx(prod.probs()[i]).epsilon(1e-14));
  }

  CHECK_THROWS_AS(prod.marginal(std::initializer_list<std::string>{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(prod.marginal({"X", "X"}), std::invalid_argument);
}

TEST_CASE("entropy chain rule on random joints") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const Joint v = random_joint(rng, {{"X", 3}, {"Y", 2}, {"Z", 2}});
    const std::vector<std::string> xz{"X", "Z"}, y{"Y"};
    const double joint_h = entropy(v);
    const double chain =
        entropy(v.axis_marginal("Y")) + conditional_entropy(v, xz, y);
    CHECK(joint_h == doctest::Approx(chain).epsilon(1e-10));
  }
}

TEST_CASE("kl nonnegative with equality iff equal") {
  Rng rng(37);
  for (int trial = 0; trial < 50; ++trial) {
    const Joint v = random_joint(rng, {{"X", 2}, {"Y", 3}});
    const Joint p = random_joint(rng, {{"X", 2}, {"Y", 3}});
    const double d = kl_divergence(v, p);
    CHECK(d >= 0.0);
    CHECK(kl_divergence(v, v) <= 1e-12);
    if (d < 1e-12) {
      for (std::size_t i = 0; i < v.cells(); ++i) {
        CHECK(v.probs()[i] == doctest::Approx(p.probs()[i]).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("type_of") {
  const std::vector<int> seq{0, 1, 0, 1};
  const TypeVector t = type_of(seq, 2);
  CHECK(t.counts() == std::vector<std::int64_t>{2, 2});
  CHECK(t.denominator() == 4);

  const std::vector<int> constant{1, 1, 1};
  const TypeVector tc = type_of(constant, 2);
  CHECK(tc.counts() == std::vector<std::int64_t>{0, 3});

  CHECK_THROWS_AS(type_of(std::vector<int>{}, 2), std::invalid_argument);
  CHECK_THROWS_AS(type_of(std::vector<int>{2}, 2), std::invalid_argument);
}

TEST_CASE("joint type consistent with per-axis marginals") {
  const std::vector<int> a{0, 1, 0, 1};
  const std::vector<int> b{1, 1, 0, 1};
  const std::vector<std::span<const int>> seqs{std::span<const int>(a),
                                               std::span<const int>(b)};
  const std::vector<std::size_t> alphabets{2, 2};
  const TypeVector jt = joint_type_of(seqs, alphabets);
  // cells row-major (a,b): (0,0)=1, (0,1)=1, (1,0)=0, (1,1)=2
  CHECK(jt.counts() == std::vector<std::int64_t>{1, 1, 0, 2});
  CHECK(jt.counts()[0] + jt.counts()[1] == type_of(a, 2).counts()[0]);
  CHECK(jt.counts()[0] + jt.counts()[2] == type_of(b, 2).counts()[0]);
}

TEST_CASE("enumerate_types") {
  const std::vector<std::size_t> binary{2};
  const auto types = enumerate_types(2, binary);
  CHECK(types.size() == 3);
  std::set<std::vector<std::int64_t>> seen;
  for (const auto& t : types) seen.insert(t.counts());
  CHECK(seen.count({2, 0}) == 1);
  CHECK(seen.count({1, 1}) == 1);
  CHECK(seen.count({0, 2}) == 1);

  const std::vector<std::size_t> two_by_two{2, 2};
  CHECK(enumerate_types(4, two_by_two).size() == 35);  // C(7,3)

  for (std::int64_t n = 1; n <= 8; ++n) {
    for (std::size_t cells : {2u, 3u, 5u, 16u}) {
      const std::vector<std::size_t> shape{cells};
      const auto list = enumerate_types(n, shape);
      CHECK(list.size() == count_types(n, cells));
      std::set<std::vector<std::int64_t>> uniq;
      for (const auto& t : list) uniq.insert(t.counts());
      CHECK(uniq.size() == list.size());
    }
  }

  CHECK_THROWS_WITH_AS(enumerate_types(100, std::vector<std::size_t>{16, 16}),
                       doctest::Contains("cap"), std::invalid_argument);
}

TEST_CASE("sample_type_class") {
  Rng rng(41);
  const TypeVector point({0, 3}, {2}, 3);
  CHECK(sample_type_class(point, rng) == std::vector<int>{1, 1, 1});

  const TypeVector mixed({3, 2, 1}, {3}, 6);
  for (int draw = 0; draw < 10000; ++draw) {
    const auto seq = sample_type_class(mixed, rng);
    CHECK(type_of(seq, 3) == mixed);
  }

  // Uniform over the 6 arrangements of (2,2), n=4: each count within 5 sigma.
  const TypeVector balanced({2, 2}, {2}, 4);
  std::map<std::vector<int>, int> freq;
  const int draws = 10000;
  for (int draw = 0; draw < draws; ++draw) {
    freq[sample_type_class(balanced, rng)] += 1;
  }
  CHECK(freq.size() == 6);
  const double expect = draws / 6.0;
  const double sigma = std::sqrt(draws * (1.0 / 6.0) * (5.0 / 6.0));
  for (const auto& [arrangement, count] : freq) {
    CHECK(std::abs(count - expect) <= 5.0 * sigma);
  }
}
