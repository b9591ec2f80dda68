#ifndef EET_PROB_HPP
#define EET_PROB_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eet/rng.hpp"

namespace eet {

// Everything below works in bits: logarithms are base 2, exponentials are
// powers of 2. 0*log(0) is 0, and v*log(v/0) for v>0 is +infinity (IEEE inf,
// which propagates through sums and compares greater than any finite value).

inline constexpr double kProbTol = 1e-12;

inline double pos_infinity() { return std::numeric_limits<double>::infinity(); }

// x log2(x), continuously extended by 0 at x = 0.
double xlog2x(double x);

// A probability vector over a finite alphabet. Construction validates
// (entries >= 0, sum within 1e-12 of 1) and rejects rather than renormalizes.
class Dist {
 public:
  explicit Dist(std::vector<double> probs);

  static Dist uniform(std::size_t n);
  static Dist point_mass(std::size_t n, std::size_t at);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& probs() const { return p_; }

 private:
  std::vector<double> p_;
};

struct Axis {
  std::string label;
  std::size_t size;
};

// A joint distribution over the cartesian product of 2..4 labeled axes,
// stored flat in row-major order (last axis fastest). Axis labels are the
// handles used by marginalization and the information measures.
class Joint {
 public:
  Joint(std::vector<Axis> axes, std::vector<double> probs);

  std::size_t rank() const { return axes_.size(); }
  const std::vector<Axis>& axes() const { return axes_; }
  const std::vector<double>& probs() const { return p_; }
  std::size_t cells() const { return p_.size(); }

  std::size_t axis_index(std::string_view label) const;  // throws if missing
  bool has_axis(std::string_view label) const;

  double at(std::span<const std::size_t> coords) const;
  std::size_t flat_index(std::span<const std::size_t> coords) const;

  // Sums out every axis not listed in `keep` (order of `keep` is the axis
  // order of the result). Throws on an empty or unknown subset.
  Joint marginal(std::span<const std::string> keep) const;
  Joint marginal(std::initializer_list<std::string> keep) const;

  // Single-axis marginal as a plain Dist.
  Dist axis_marginal(std::string_view label) const;

  // Product of independent factors, e.g. Joint::product({{"X",2},{"Y",2}},
  // {px, py}).
  static Joint product(const std::vector<Axis>& axes,
                       const std::vector<Dist>& factors);

 private:
  std::vector<Axis> axes_;
  std::vector<double> p_;
  std::vector<std::size_t> strides_;
};

double entropy(const Dist& d);
double entropy(const Joint& v);

// H(targets | given) = H(targets, given) - H(given).
double conditional_entropy(const Joint& v, std::span<const std::string> targets,
                           std::span<const std::string> given);

// sum_i v_i log2(v_i / p_i); +infinity iff v has mass where p has none.
// Shapes and axis labels must match.
double kl_divergence(const Dist& v, const Dist& p);
double kl_divergence(const Joint& v, const Joint& p);

// I(a ; b | given) for a joint with exactly the three named axes.
double cond_mutual_information(const Joint& v, std::string_view a,
                               std::string_view b, std::string_view given);

// sum of marginal entropies minus joint entropy, over all axes (2..4). For
// rank 2 this is the mutual information.
double multi_information(const Joint& v);

// An empirical distribution: integer counts over an alphabet (or product
// alphabet) summing exactly to the denominator.
class TypeVector {
 public:
  TypeVector(std::vector<std::int64_t> counts, std::vector<std::size_t> shape,
             std::int64_t denominator);

  const std::vector<std::int64_t>& counts() const { return counts_; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::int64_t denominator() const { return denom_; }
  std::size_t cells() const { return counts_.size(); }

  Dist to_dist() const;                       // flattened over cells
  Joint to_joint(std::vector<std::string> labels) const;  // multi-axis only

  bool operator==(const TypeVector& o) const = default;
  auto operator<=>(const TypeVector& o) const = default;

 private:
  std::vector<std::int64_t> counts_;
  std::vector<std::size_t> shape_;
  std::int64_t denom_;
};

// Type of a single sequence over [0, alphabet).
TypeVector type_of(std::span<const int> seq, std::size_t alphabet);

// Joint type of parallel sequences of equal length.
TypeVector joint_type_of(std::span<const std::span<const int>> seqs,
                         std::span<const std::size_t> alphabets);

// All ways to place n counts into the product-alphabet cells, each exactly
// once. Throws (reporting the required count) when the stars-and-bars total
// exceeds `cap`.
std::vector<TypeVector> enumerate_types(std::int64_t n,
                                        std::span<const std::size_t> shape,
                                        std::uint64_t cap = 10'000'000);

std::uint64_t count_types(std::int64_t n, std::size_t cells);  // C(n+m-1, m-1)

// Uniformly random sequence with exactly the given type (cells of a product
// alphabet are flattened row-major).
std::vector<int> sample_type_class(const TypeVector& t, Rng& rng);

}  // namespace eet

#endif
