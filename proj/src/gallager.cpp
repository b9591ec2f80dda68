#include "eet/gallager.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "eet/rng.hpp"

namespace eet {

namespace {

// e0 without the [0,1] range guard; the root search walks rho above 1.
double e0_unchecked(double rho, const Dist& p, const Dmc& dmc) {
  const double inv = 1.0 / (1.0 + rho);
  double s = 0.0;
  for (std::size_t z = 0; z < dmc.outputs(); ++z) {
    double inner = 0.0;
    for (std::size_t x = 0; x < dmc.inputs(); ++x) {
      const double w = dmc.w(x, z);
      if (w > 0.0 && p[x] > 0.0) inner += p[x] * std::pow(w, inv);
    }
    if (inner > 0.0) s += std::pow(inner, 1.0 + rho);
  }
  return -std::log2(s);
}

}  // namespace

double e0(double rho, const Dist& p, const Dmc& dmc) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::invalid_argument("e0: rho must be in [0, 1]");
  }
  if (p.size() != dmc.inputs()) {
    throw std::invalid_argument("e0: input distribution size mismatch");
  }
  return e0_unchecked(rho, p, dmc);
}

double e0_extended(double rho, const Dist& p, const Dmc& dmc) {
  if (!(rho >= 0.0)) {
    throw std::invalid_argument("e0_extended: rho must be nonnegative");
  }
  if (p.size() != dmc.inputs()) {
    throw std::invalid_argument("e0_extended: input distribution size mismatch");
  }
  return e0_unchecked(rho, p, dmc);
}

double mutual_information(const Dist& p, const Dmc& dmc) {
  if (p.size() != dmc.inputs()) {
    throw std::invalid_argument("mutual_information: shape mismatch");
  }
  std::vector<double> q(dmc.outputs(), 0.0);
  for (std::size_t x = 0; x < dmc.inputs(); ++x) {
    for (std::size_t z = 0; z < dmc.outputs(); ++z) {
      q[z] += p[x] * dmc.w(x, z);
    }
  }
  double mi = 0.0;
  for (std::size_t x = 0; x < dmc.inputs(); ++x) {
    if (p[x] <= 0.0) continue;
    for (std::size_t z = 0; z < dmc.outputs(); ++z) {
      const double w = dmc.w(x, z);
      if (w > 0.0) mi += p[x] * w * (std::log2(w) - std::log2(q[z]));
    }
  }
  return std::max(mi, 0.0);
}

std::optional<double> rho_of_rate(double rate, const Dist& p, const Dmc& dmc,
                                  double tol, double cap) {
  if (rate <= 0.0) {
    throw std::invalid_argument("rho_of_rate: rate must be positive");
  }
  const double info = mutual_information(p, dmc);
  if (rate >= info) {
    throw std::invalid_argument("rho_of_rate: rate above achievable threshold");
  }
  const auto ratio = [&](double rho) { return e0_unchecked(rho, p, dmc) / rho; };
  if (ratio(cap) > rate) {
    return std::nullopt;  // ratio never drops to the rate below the cap
  }
  double lo = 1e-12;  // ratio(0+) -> I(p, dmc) > rate
  double hi = cap;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (ratio(mid) > rate) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

GallagerPoint trellis_exponent(double rate, int memory, const Dist& p,
                               const Dmc& dmc) {
  if (rate <= 0.0) {
    throw std::invalid_argument("trellis_exponent: rate must be positive");
  }
  if (memory < 1) {
    throw std::invalid_argument("trellis_exponent: memory must be >= 1");
  }
  const double info = mutual_information(p, dmc);
  if (rate >= info) {
    return GallagerPoint{rate, 0.0, 0.0, memory};
  }
  double rho_star;
  if (e0_unchecked(1.0, p, dmc) >= rate) {
    rho_star = 1.0;  // rho_R >= 1: the low-rate flat segment
  } else {
    // rho_R < 1 here, so the bisection stays inside the unit interval.
    const auto ratio = [&](double rho) { return e0_unchecked(rho, p, dmc) / rho; };
    double lo = 1e-12, hi = 1.0;
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      if (ratio(mid) > rate) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    rho_star = 0.5 * (lo + hi);
  }
  const double exponent = static_cast<double>(memory) * e0_unchecked(rho_star, p, dmc);
  return GallagerPoint{rate, rho_star, exponent, memory};
}

namespace {

Dist optimize_input_binary(const Dmc& dmc, double rho, double tol) {
  const auto f = [&](double p0) {
    return e0_unchecked(rho, Dist({p0, 1.0 - p0}), dmc);
  };
  const double step = 1e-3;
  std::vector<double> vals(1001);
  double grid_max = -1.0, grid_min = 2.0;
  for (int i = 0; i <= 1000; ++i) {
    vals[static_cast<std::size_t>(i)] = f(static_cast<double>(i) * step);
    grid_max = std::max(grid_max, vals[static_cast<std::size_t>(i)]);
    grid_min = std::min(grid_min, vals[static_cast<std::size_t>(i)]);
  }
  if (grid_max - grid_min <= 1e-13) return Dist::uniform(2);
  double best_p = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    if (vals[static_cast<std::size_t>(i)] >= grid_max - 1e-12) {
      best_p = static_cast<double>(i) * step;
      break;
    }
  }
  double lo = std::max(0.0, best_p - step);
  double hi = std::min(1.0, best_p + step);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  while (hi - lo > tol) {
    const double c = hi - gr * (hi - lo);
    const double d = lo + gr * (hi - lo);
    if (f(c) >= f(d)) {
      hi = d;
    } else {
      lo = c;
    }
  }
  const double p0 = 0.5 * (lo + hi);
  return Dist({p0, 1.0 - p0});
}

Dist optimize_input_general(const Dmc& dmc, double rho, double tol) {
  const std::size_t n = dmc.inputs();
  const double inv = 1.0 / (1.0 + rho);
  std::vector<double> a(n * dmc.outputs());
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t z = 0; z < dmc.outputs(); ++z) {
      a[x * dmc.outputs() + z] = std::pow(dmc.w(x, z), inv);
    }
  }
  const auto objective = [&](const std::vector<double>& p) {
    double s = 0.0;
    for (std::size_t z = 0; z < dmc.outputs(); ++z) {
      double inner = 0.0;
      for (std::size_t x = 0; x < n; ++x) inner += p[x] * a[x * dmc.outputs() + z];
      if (inner > 0.0) s += std::pow(inner, 1.0 + rho);
    }
    return -std::log2(s);
  };

  Rng rng(0xe0);
  std::vector<double> best(n, 1.0 / static_cast<double>(n));
  double best_val = objective(best);
  for (int r = 0; r < 16; ++r) {
    std::vector<double> p(n);
    double sum = 0.0;
    for (double& v : p) {
      v = (r == 0) ? 1.0 : -std::log(std::max(rng.unit(), 1e-12));
      sum += v;
    }
    for (double& v : p) v /= sum;
    for (int t = 0; t < 2000; ++t) {
      // Gradient of e0 in p (s and the inner sums are cheap to recompute).
      double s = 0.0;
      std::vector<double> inner(dmc.outputs(), 0.0);
      for (std::size_t z = 0; z < dmc.outputs(); ++z) {
        for (std::size_t x = 0; x < n; ++x) inner[z] += p[x] * a[x * dmc.outputs() + z];
        if (inner[z] > 0.0) s += std::pow(inner[z], 1.0 + rho);
      }
      if (s <= 0.0) break;
      // d e0 / d p_x; a uniform shift cancels in the multiplicative update,
      // only the relative sizes matter.
      std::vector<double> g(n, 0.0);
      for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t z = 0; z < dmc.outputs(); ++z) {
          if (inner[z] > 0.0) {
            g[x] -= (1.0 + rho) * std::pow(inner[z], rho) *
                    a[x * dmc.outputs() + z] / (s * std::log(2.0));
          }
        }
      }
      const double eta = 0.5 / std::sqrt(static_cast<double>(t) + 1.0);
      double zsum = 0.0;
      for (std::size_t x = 0; x < n; ++x) {
        p[x] = std::max(p[x], 1e-15) * std::exp(eta * g[x]);
        zsum += p[x];
      }
      for (double& v : p) v /= zsum;
    }
    const double v = objective(p);
    if (v > best_val + tol) {
      best_val = v;
      best = p;
    }
  }
  return Dist(best);
}

}  // namespace

Dist optimize_input(const Dmc& dmc, double rho, double tol) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::invalid_argument("optimize_input: rho must be in [0, 1]");
  }
  if (rho == 0.0) return Dist::uniform(dmc.inputs());  // objective is flat
  if (dmc.inputs() == 2) return optimize_input_binary(dmc, rho, tol);
  return optimize_input_general(dmc, rho, tol);
}

namespace {

double optimized_e0(const Dmc& dmc, double rho) {
  if (rho <= 0.0) return 0.0;
  return e0_unchecked(rho, optimize_input(dmc, rho, 1e-10), dmc);
}

double optimized_capacity(const Dmc& dmc) {
  // max_p I(p, dmc) via the same scalar/general machinery at rho -> 0, done
  // directly on the mutual information.
  if (dmc.inputs() == 2) {
    const auto f = [&](double p0) {
      return mutual_information(Dist({p0, 1.0 - p0}), dmc);
    };
    double lo = 0.0, hi = 1.0;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    while (hi - lo > 1e-12) {
      const double c = hi - gr * (hi - lo);
      const double d = lo + gr * (hi - lo);
      if (f(c) >= f(d)) {
        hi = d;
      } else {
        lo = c;
      }
    }
    return f(0.5 * (lo + hi));
  }
  double best = 0.0;
  Rng rng(0xca9);
  for (int r = 0; r < 16; ++r) {
    std::vector<double> p(dmc.inputs());
    double sum = 0.0;
    for (double& v : p) {
      v = (r == 0) ? 1.0 : -std::log(std::max(rng.unit(), 1e-12));
      sum += v;
    }
    for (double& v : p) v /= sum;
    // Blahut-style fixed point iterations.
    for (int t = 0; t < 2000; ++t) {
      std::vector<double> q(dmc.outputs(), 0.0);
      for (std::size_t x = 0; x < dmc.inputs(); ++x) {
        for (std::size_t z = 0; z < dmc.outputs(); ++z) q[z] += p[x] * dmc.w(x, z);
      }
      std::vector<double> w(dmc.inputs(), 0.0);
      double zsum = 0.0;
      for (std::size_t x = 0; x < dmc.inputs(); ++x) {
        double d = 0.0;
        for (std::size_t z = 0; z < dmc.outputs(); ++z) {
          const double wv = dmc.w(x, z);
          if (wv > 0.0 && q[z] > 0.0) d += wv * (std::log2(wv) - std::log2(q[z]));
        }
        w[x] = p[x] * std::exp2(d);
        zsum += w[x];
      }
      for (std::size_t x = 0; x < dmc.inputs(); ++x) p[x] = w[x] / zsum;
    }
    best = std::max(best, mutual_information(Dist(p), dmc));
  }
  return best;
}

}  // namespace

Dist curve_input(const Dmc& dmc, double rate, bool optimize_inputs,
                 const std::optional<Dist>& fixed_input) {
  if (!optimize_inputs) {
    return fixed_input ? *fixed_input : Dist::uniform(dmc.inputs());
  }
  // Input attached to the rho actually used at this rate.
  const double cap = optimized_capacity(dmc);
  if (rate >= cap) return optimize_input(dmc, 1e-6, 1e-10);
  double rho_star;
  if (optimized_e0(dmc, 1.0) >= rate) {
    rho_star = 1.0;
  } else {
    double lo = 1e-9, hi = 1.0;
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      if (optimized_e0(dmc, mid) / mid > rate) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    rho_star = 0.5 * (lo + hi);
  }
  return optimize_input(dmc, rho_star, 1e-10);
}

std::vector<GallagerPoint> gallager_curve(const Dmc& dmc,
                                          const std::vector<double>& rates,
                                          int memory, bool optimize_inputs,
                                          const std::optional<Dist>& fixed_input) {
  if (memory < 1) {
    throw std::invalid_argument("gallager_curve: memory must be >= 1");
  }
  std::vector<GallagerPoint> out;
  out.reserve(rates.size());
  if (!optimize_inputs) {
    const Dist p = fixed_input ? *fixed_input : Dist::uniform(dmc.inputs());
    for (double r : rates) out.push_back(trellis_exponent(r, memory, p, dmc));
    return out;
  }
  const double cap = optimized_capacity(dmc);
  const double e1 = optimized_e0(dmc, 1.0);
  for (double r : rates) {
    if (r <= 0.0) {
      throw std::invalid_argument("gallager_curve: rates must be positive");
    }
    if (r >= cap) {
      out.push_back(GallagerPoint{r, 0.0, 0.0, memory});
      continue;
    }
    double rho_star;
    if (e1 >= r) {
      // Pointwise-optimized e0 keeps the nonincreasing ratio property, so the
      // flat segment test mirrors the fixed-input case.
      rho_star = 1.0;
    } else {
      double lo = 1e-9, hi = 1.0;
      while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (optimized_e0(dmc, mid) / mid > r) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      rho_star = 0.5 * (lo + hi);
    }
    const double expnt = static_cast<double>(memory) * optimized_e0(dmc, rho_star);
    out.push_back(GallagerPoint{r, rho_star, expnt, memory});
  }
  return out;
}

}  // namespace eet
