#ifndef EET_GALLAGER_HPP
#define EET_GALLAGER_HPP

#include <optional>
#include <vector>

#include "eet/channels.hpp"
#include "eet/prob.hpp"

namespace eet {

// One sampled point of the trellis-code exponent curve.
struct GallagerPoint {
  double rate;      // bits per symbol
  double rho_star;  // in [0, 1]
  double exponent;  // memory * e0(rho_star), bits
  int memory;       // trellis memory length a >= 1
};

// e0(rho, p, W) = -log2 sum_z ( sum_x p(x) W(z|x)^(1/(1+rho)) )^(1+rho).
// Nondecreasing and concave in rho on [0, 1]; e0(0) = 0.
double e0(double rho, const Dist& p, const Dmc& dmc);

// Same formula without the [0, 1] cap on rho; the root search and residual
// checks need values above 1.
double e0_extended(double rho, const Dist& p, const Dmc& dmc);

// Mutual information I(X; Z) for input p through the channel (equals the
// slope of e0 at rho = 0).
double mutual_information(const Dist& p, const Dmc& dmc);

// The unique rho > 0 with e0(rho)/rho = rate, found by bisection (the ratio
// is nonincreasing in rho). Returns nullopt when no finite root exists below
// `cap` (flat-ratio channels such as the noiseless one); throws when the
// rate is not inside (0, I(p, dmc)).
std::optional<double> rho_of_rate(double rate, const Dist& p, const Dmc& dmc,
                                  double tol = 1e-10, double cap = 64.0);

// Exponent memory*e0(rho*) with rho* = min(1, rho_R); zero at and above the
// mutual information. The open constraint rho < rho_R is reported at its
// closed limit (e0 is continuous, so this is the supremum).
GallagerPoint trellis_exponent(double rate, int memory, const Dist& p,
                               const Dmc& dmc);

// Input distribution maximizing e0(rho, ., dmc). Binary inputs use a scalar
// golden-section; larger alphabets exponentiated-gradient ascent with 16
// random restarts. rho = 0 (flat objective) returns uniform.
Dist optimize_input(const Dmc& dmc, double rho, double tol = 1e-10);

// trellis_exponent with the input re-optimized per point (or fixed to `p`).
std::vector<GallagerPoint> gallager_curve(const Dmc& dmc,
                                          const std::vector<double>& rates,
                                          int memory, bool optimize_inputs,
                                          const std::optional<Dist>& fixed_input);

// The input actually used for a curve point (exposed so the CLI can print it).
Dist curve_input(const Dmc& dmc, double rate, bool optimize_inputs,
                 const std::optional<Dist>& fixed_input);

}  // namespace eet

#endif
