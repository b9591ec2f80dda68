#ifndef EET_CHANNELS_HPP
#define EET_CHANNELS_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "eet/prob.hpp"

namespace eet {

// A discrete memoryless channel: row x is the output distribution given
// input x. Rows are validated like any other probability vector.
class Dmc {
 public:
  Dmc(std::size_t inputs, std::size_t outputs, std::vector<double> row_major);

  std::size_t inputs() const { return inputs_; }
  std::size_t outputs() const { return outputs_; }
  double w(std::size_t x, std::size_t z) const { return w_[x * outputs_ + z]; }
  Dist row(std::size_t x) const;

 private:
  std::size_t inputs_;
  std::size_t outputs_;
  std::vector<double> w_;
};

// A total binary operation given as an integer table: op(x1, x2) with
// x1 in [0, left), x2 in [0, right), values in [0, range).
class BinaryOp {
 public:
  BinaryOp(std::size_t left, std::size_t right, std::size_t range,
           std::vector<int> table);

  static BinaryOp xor_op(std::size_t n);  // bitwise xor on [0, n), n a power of 2
  static BinaryOp first_projection(std::size_t n);

  std::size_t left() const { return left_; }
  std::size_t right() const { return right_; }
  std::size_t range() const { return range_; }
  int apply(std::size_t x1, std::size_t x2) const {
    return table_[x1 * right_ + x2];
  }

 private:
  std::size_t left_, right_, range_;
  std::vector<int> table_;
};

// Two-input channel W(z | x, y); each (x, y) slice is a distribution over z.
class MacChannel {
 public:
  MacChannel(std::size_t x_inputs, std::size_t y_inputs, std::size_t outputs,
             std::vector<double> w);

  std::size_t x_inputs() const { return x_; }
  std::size_t y_inputs() const { return y_; }
  std::size_t outputs() const { return z_; }
  double w(std::size_t x, std::size_t y, std::size_t z) const {
    return w_[(x * y_ + y) * z_ + z];
  }

 private:
  std::size_t x_, y_, z_;
  std::vector<double> w_;
};

// Binary channel that passes 0 noiselessly and flips 1 to 0 with the given
// probability.
Dmc z_channel(double p_flip);

// W(z|x,y) = dmc(z | op(x,y)).
MacChannel virtual_mac(const Dmc& dmc, const BinaryOp& op);

// P(x,y,z) = mac(z|x,y) p1(x) p2(y), axes labeled X, Y, Z.
Joint compose_joint(const MacChannel& mac, const Dist& p1, const Dist& p2);

// I(X,Y ; Z) of the mac when X and Y are i.i.d. p.
double symmetric_sum_information(const MacChannel& mac, const Dist& p);

// The input distribution p maximizing I(X,Y ; Z) with X, Y i.i.d. p, to
// within tol of the maximum. Binary alphabets use a scalar grid plus
// golden-section refinement; ties resolve to the lexicographically smallest
// distribution on the grid. Larger alphabets use exponentiated-gradient
// ascent with random restarts.
Dist symmetric_capacity_input(const MacChannel& mac, double tol = 1e-10);

// --- channel spec documents ------------------------------------------------
//
// The CLI accepts either the shorthand "z:<p>" (a Z-channel with flip
// probability p) or a JSON document:
//
//   {
//     "input_alphabet": 2,
//     "output_alphabet": 2,
//     "rows": [1.0, 0.0, 0.101, 0.899],
//     "op": "xor"                      // or a nested integer table
//   }
//
// Rows are validated row-stochastic within 1e-9 and then normalized exactly.
// The "op" field is optional and defaults to xor for power-of-two alphabets.

struct ParsedChannel {
  Dmc dmc;
  BinaryOp op;
};

// Parses the shorthand or a JSON document (text, not a path). Throws
// std::invalid_argument with a field-level message on malformed input.
ParsedChannel parse_channel_spec(std::string_view text);

// Reads a file if the argument names one, otherwise treats the argument as
// inline spec text ("z:0.101" or a JSON document).
ParsedChannel load_channel_spec(const std::string& path_or_text);

}  // namespace eet

#endif
