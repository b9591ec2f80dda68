#ifndef EET_ASYNC_HPP
#define EET_ASYNC_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eet/channels.hpp"
#include "eet/prob.hpp"

namespace eet {

// Inputs of the inner minimization. `pattern_words` is the number of wrong
// codewords L in an error pattern (1..slots); `slots` is the number of
// codeword slots K per frame (odd, >= 3); `rate` is the per-window rate R of
// each sender. `composed` is P(x,y,z) = W(z|x,y) p*(x) p*(y).
struct AsyncObjectiveParams {
  int pattern_words;
  int slots;
  double rate;
  Dist p_star;
  Joint composed;

  AsyncObjectiveParams(int pattern_words_, int slots_, double rate_,
                       Dist p_star_, Joint composed_);
};

enum class BracketBranch { clipped, active };

inline const char* branch_name(BracketBranch b) {
  return b == BracketBranch::clipped ? "clipped" : "active";
}

struct AsyncResult {
  double exponent;
  Joint arg_v1;
  Joint arg_v12;
  int l_star;
  BracketBranch branch;
  double bracket_value;      // rate bracket at the argmin
  double marginal_residual;  // max |marginal - p*| at the argmin
};

struct SolverConfig {
  int restarts = 32;
  int iterations = 5000;
  std::uint64_t seed = 0x100;
  double feasibility_tol = 1e-9;
  int workers = 1;
};

// Thrown when the constrained minimization cannot reach feasibility; carries
// the best value seen so that callers can still report diagnostics.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& msg, double best_value, double residual)
      : std::runtime_error(msg), best_value(best_value), residual(residual) {}
  double best_value;
  double residual;
};

// D(v1||P) + (L-1)/2 D(v12||P) + | I_{v1}(X;Z|Y) + (L-1)/2 I_{v12}(X,Y,Z)
//   - L R |+ , all in bits. +infinity when a divergence is infinite.
double objective(const Joint& v1, const Joint& v12,
                 const AsyncObjectiveParams& params);

// Minimizes the objective over (v1, v12) subject to all four marginal
// constraints. The positive-part kink splits into two smooth problems:
// the clipped branch (divergences subject to bracket <= 0, via an outer
// quadratic penalty plus an exact feasibility pull), and the active branch
// (divergences plus the bracket, unconstrained). Both run as mirror descent
// on the support cells with an iterative-proportional-fitting projection
// onto the marginal constraints after every step; iterates are floored at
// 1e-12 away from the simplex boundary with a final unfloored polish.
AsyncResult minimize_fixed_l(const AsyncObjectiveParams& params,
                             const SolverConfig& cfg);

struct GridOracleResult {
  double value;  // exhaustive minimum over the step-grid
  double slack;  // sound discretization allowance (entropy-modulus bound)
  std::uint64_t feasible_points;
};

// Independent brute-force check for binary x binary x binary instances:
// enumerates every joint distribution whose entries are multiples of
// 1/step_den (step >= 1/32) and whose X and Y marginals are within step/2 of
// p*, and minimizes the exact objective over all (v1, v12) pairs from that
// set (via Pareto frontiers; the result equals the full pairwise minimum).
GridOracleResult grid_oracle(const AsyncObjectiveParams& params,
                             std::int64_t step_den);

// min over L in [1, slots] of minimize_fixed_l. Rates at or above the
// zero threshold return exactly 0 with v = P. Ties prefer the lowest L.
AsyncResult async_exponent(double rate, int slots, const MacChannel& mac,
                           const Dist& p_star, const SolverConfig& cfg);

// One row of the two-exponent comparison: the asynchronous exponent and the
// memory-1 time-varying trellis exponent, both normalized to the half
// blocklength (so the MAC values and rates are doubled).
struct ComparisonRow {
  double plotted_rate;
  double forney_memory1;
  double async_scaled;
  int l_star;
};

struct ComparisonCurve {
  std::vector<ComparisonRow> rows;
  double max_low_rate_rel_gap;   // max over rows of (async-forney)/max(...)
  double high_rate_rel_gap;      // gap at the largest rate with both > 0.01
  double low_rate_gap_at = 0.0;  // plotted rate attaining the max gap
  double high_rate_gap_at = 0.0;
};

// mac_rates are per-window MAC rates R; plotted rates are 2R (optionally
// scaled by (1 - 1/slots) when count_sync_overhead is set, applied to both
// curves). The trellis curve optimizes its input per point unless
// optimize_forney_input is cleared, in which case forney_input (or uniform)
// pins it.
ComparisonCurve comparison_curve(const Dmc& dmc, const BinaryOp& op, int slots,
                                 const std::vector<double>& mac_rates,
                                 const SolverConfig& cfg,
                                 bool count_sync_overhead = false,
                                 bool optimize_forney_input = true,
                                 const std::optional<Dist>& p_star_override =
                                     std::nullopt,
                                 const std::optional<Dist>& forney_input =
                                     std::nullopt);

}  // namespace eet

#endif
