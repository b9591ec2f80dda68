#include "eet/async.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <thread>

#include "eet/gallager.hpp"
#include "eet/rng.hpp"

namespace eet {

namespace {

void run_parallel(int jobs, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || jobs <= 1) {
    for (int i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const int used = std::min(workers, jobs);
  // Static partition; results are written to per-job slots so scheduling
  // cannot reorder anything.
  pool.reserve(static_cast<std::size_t>(used));
  for (int w = 0; w < used; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < jobs; i += used) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Support-compressed view of the X x Y x Z problem. All solver work happens
// on the cells where P is positive; mass never moves off that support, so
// divergences stay finite by construction.
struct Workspace {
  std::size_t nx, ny, nz;
  std::vector<std::size_t> cx, cy, cz;    // per support cell coordinates
  std::vector<std::size_t> cxy, cyz;      // marginal bucket indices
  std::vector<double> p;                  // P on support
  std::vector<double> log2p;
  std::vector<double> p_star;

  explicit Workspace(const Joint& composed, const Dist& pstar) {
    nx = composed.axes()[0].size;
    ny = composed.axes()[1].size;
    nz = composed.axes()[2].size;
    p_star = pstar.probs();
    const auto& probs = composed.probs();
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t y = 0; y < ny; ++y) {
        for (std::size_t z = 0; z < nz; ++z) {
          const double v = probs[(x * ny + y) * nz + z];
          if (v > 0.0) {
            cx.push_back(x);
            cy.push_back(y);
            cz.push_back(z);
            cxy.push_back(x * ny + y);
            cyz.push_back(y * nz + z);
            p.push_back(v);
            log2p.push_back(std::log2(v));
          }
        }
      }
    }
  }

  std::size_t cells() const { return p.size(); }

  double divergence(const std::vector<double>& v) const {
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] > 0.0) d += v[i] * (std::log2(v[i]) - log2p[i]);
    }
    return std::max(d, 0.0);
  }

  void marginals(const std::vector<double>& v, std::vector<double>& mx,
                 std::vector<double>& my, std::vector<double>& mz,
                 std::vector<double>& mxy, std::vector<double>& myz) const {
    mx.assign(nx, 0.0);
    my.assign(ny, 0.0);
    mz.assign(nz, 0.0);
    mxy.assign(nx * ny, 0.0);
    myz.assign(ny * nz, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
      mx[cx[i]] += v[i];
      my[cy[i]] += v[i];
      mz[cz[i]] += v[i];
      mxy[cxy[i]] += v[i];
      myz[cyz[i]] += v[i];
    }
  }

  // I(X ; Z | Y) = H(XY) + H(YZ) - H(Y) - H(XYZ)
  double cond_mutual_info(const std::vector<double>& v) const {
    std::vector<double> mx, my, mz, mxy, myz;
    marginals(v, mx, my, mz, mxy, myz);
    double h = 0.0;
    for (double q : mxy) h -= xlog2x(q);
    for (double q : myz) h -= xlog2x(q);
    for (double q : my) h += xlog2x(q);
    for (double q : v) h += xlog2x(q);
    return std::max(h, 0.0);
  }

  // I(X ; Y ; Z) = H(X) + H(Y) + H(Z) - H(XYZ)
  double multi_info(const std::vector<double>& v) const {
    std::vector<double> mx, my, mz, mxy, myz;
    marginals(v, mx, my, mz, mxy, myz);
    double h = 0.0;
    for (double q : mx) h -= xlog2x(q);
    for (double q : my) h -= xlog2x(q);
    for (double q : mz) h -= xlog2x(q);
    for (double q : v) h += xlog2x(q);
    return std::max(h, 0.0);
  }

  double marginal_residual(const std::vector<double>& v) const {
    std::vector<double> mx, my, mz, mxy, myz;
    marginals(v, mx, my, mz, mxy, myz);
    double r = 0.0;
    for (std::size_t x = 0; x < nx; ++x) r = std::max(r, std::abs(mx[x] - p_star[x]));
    for (std::size_t y = 0; y < ny; ++y) r = std::max(r, std::abs(my[y] - p_star[y]));
    return r;
  }

  // Projection onto {v : v^X = v^Y = p*} by alternating slice scaling.
  // Converges for strictly positive iterates; an emptied slice is reseeded
  // (cannot happen while the iterate floor is active).
  void ipf(std::vector<double>& v, int max_rounds = 200,
           double tol = 1e-13) const {
    std::vector<double> mx(nx), my(ny);
    const auto rescale = [&](const std::vector<std::size_t>& coord,
                             std::vector<double>& marg,
                             const std::size_t n) {
      marg.assign(n, 0.0);
      for (std::size_t i = 0; i < v.size(); ++i) marg[coord[i]] += v[i];
      bool reseeded = false;
      for (std::size_t a = 0; a < n; ++a) {
        if (marg[a] <= 0.0 && p_star[a] > 0.0) {
          for (std::size_t i = 0; i < v.size(); ++i) {
            if (coord[i] == a) v[i] = 1e-12;
          }
          reseeded = true;
        }
      }
      if (reseeded) {
        marg.assign(n, 0.0);
        for (std::size_t i = 0; i < v.size(); ++i) marg[coord[i]] += v[i];
      }
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (marg[coord[i]] > 0.0) v[i] *= p_star[coord[i]] / marg[coord[i]];
      }
    };
    for (int round = 0; round < max_rounds; ++round) {
      rescale(cx, mx, nx);
      rescale(cy, my, ny);
      mx.assign(nx, 0.0);
      for (std::size_t i = 0; i < v.size(); ++i) mx[cx[i]] += v[i];
      double worst = 0.0;
      for (std::size_t x = 0; x < nx; ++x) {
        worst = std::max(worst, std::abs(mx[x] - p_star[x]));
      }
      if (worst <= tol) return;
    }
  }

  // d/dv of the divergence; the uniform +1/ln2 shift is dropped (it cancels
  // in the multiplicative update).
  void grad_divergence(const std::vector<double>& v, std::vector<double>& g) const {
    g.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      g[i] = (v[i] > 0.0) ? std::log2(v[i]) - log2p[i] : 0.0;
    }
  }

  void grad_cond_mutual_info(const std::vector<double>& v,
                             std::vector<double>& g) const {
    std::vector<double> mx, my, mz, mxy, myz;
    marginals(v, mx, my, mz, mxy, myz);
    g.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] <= 0.0) {
        g[i] = 0.0;
        continue;
      }
      g[i] = -std::log2(mxy[cxy[i]]) - std::log2(myz[cyz[i]]) +
             std::log2(my[cy[i]]) + std::log2(v[i]);
    }
  }

  void grad_multi_info(const std::vector<double>& v, std::vector<double>& g) const {
    std::vector<double> mx, my, mz, mxy, myz;
    marginals(v, mx, my, mz, mxy, myz);
    g.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] <= 0.0) {
        g[i] = 0.0;
        continue;
      }
      g[i] = -std::log2(mx[cx[i]]) - std::log2(my[cy[i]]) -
             std::log2(mz[cz[i]]) + std::log2(v[i]);
    }
  }

  std::vector<double> p_as_vector() const { return p; }

  // Product anchor p*(x) p*(y) delta(z = z0) with z0 chosen inside the
  // support of every (x, y) slice; both information terms vanish there.
  std::optional<std::vector<double>> bracket_anchor(const Joint& composed) const {
    const auto& probs = composed.probs();
    for (std::size_t z0 = 0; z0 < nz; ++z0) {
      bool ok = true;
      for (std::size_t x = 0; x < nx && ok; ++x) {
        for (std::size_t y = 0; y < ny && ok; ++y) {
          double mass = probs[(x * ny + y) * nz + z0];
          if (p_star[x] > 0.0 && p_star[y] > 0.0 && mass <= 0.0) ok = false;
        }
      }
      if (!ok) continue;
      std::vector<double> v(cells(), 0.0);
      for (std::size_t i = 0; i < cells(); ++i) {
        if (cz[i] == z0) v[i] = p_star[cx[i]] * p_star[cy[i]];
      }
      return v;
    }
    return std::nullopt;
  }

  Joint to_joint(const std::vector<double>& v) const {
    std::vector<double> full(nx * ny * nz, 0.0);
    double sum = 0.0;
    for (double q : v) sum += q;
    for (std::size_t i = 0; i < v.size(); ++i) {
      full[(cx[i] * ny + cy[i]) * nz + cz[i]] = v[i] / sum;
    }
    return Joint({{"X", nx}, {"Y", ny}, {"Z", nz}}, std::move(full));
  }
};

void validate_composed(const Joint& composed, const Dist& p_star) {
  if (composed.rank() != 3 || !composed.has_axis("X") ||
      !composed.has_axis("Y") || !composed.has_axis("Z")) {
    throw std::invalid_argument(
        "async: composed distribution must have axes X, Y, Z");
  }
  const Dist mx = composed.axis_marginal("X");
  const Dist my = composed.axis_marginal("Y");
  if (mx.size() != p_star.size() || my.size() != p_star.size()) {
    throw std::invalid_argument("async: p* size mismatch with composed");
  }
  for (std::size_t i = 0; i < p_star.size(); ++i) {
    if (std::abs(mx[i] - p_star[i]) > kProbTol ||
        std::abs(my[i] - p_star[i]) > kProbTol) {
      throw std::invalid_argument(
          "async: composed marginals must equal p* within 1e-12");
    }
  }
}

}  // namespace

AsyncObjectiveParams::AsyncObjectiveParams(int pattern_words_, int slots_,
                                           double rate_, Dist p_star_,
                                           Joint composed_)
    : pattern_words(pattern_words_),
      slots(slots_),
      rate(rate_),
      p_star(std::move(p_star_)),
      composed(std::move(composed_)) {
  if (slots < 3 || slots % 2 == 0) {
    throw std::invalid_argument("async: slots must be odd and >= 3");
  }
  if (pattern_words < 1 || pattern_words > slots) {
    throw std::invalid_argument("async: pattern_words must lie in [1, slots]");
  }
  if (rate < 0.0) {
    throw std::invalid_argument("async: rate must be nonnegative");
  }
  validate_composed(composed, p_star);
}

double objective(const Joint& v1, const Joint& v12,
                 const AsyncObjectiveParams& params) {
  const auto check_shape = [&](const Joint& v, const char* name) {
    if (v.rank() != 3) {
      throw std::invalid_argument(std::string("objective: ") + name +
                                  " must have three axes");
    }
    for (std::size_t i = 0; i < 3; ++i) {
      if (v.axes()[i].label != params.composed.axes()[i].label ||
          v.axes()[i].size != params.composed.axes()[i].size) {
        throw std::invalid_argument(std::string("objective: ") + name +
                                    " axis mismatch with composed");
      }
    }
  };
  check_shape(v1, "v1");
  check_shape(v12, "v12");

  const double c = 0.5 * (params.pattern_words - 1);
  const double d1 = kl_divergence(v1, params.composed);
  if (std::isinf(d1)) return pos_infinity();
  double total = d1;
  double bracket = cond_mutual_information(v1, "X", "Z", "Y") -
                   params.pattern_words * params.rate;
  if (c > 0.0) {
    const double d12 = kl_divergence(v12, params.composed);
    if (std::isinf(d12)) return pos_infinity();
    total += c * d12;
    bracket += c * multi_information(v12);
  }
  return total + std::max(bracket, 0.0);
}

namespace {

struct CandidateResult {
  double value = pos_infinity();
  std::vector<double> v1, v12;
  double bracket = 0.0;
};

// One mirror-descent run of `iters` steps on the smooth objective whose
// gradient grad_fn fills into g1/g12.
void mirror_descent(const Workspace& ws, std::vector<double>& v1,
                    std::vector<double>& v12, bool use_v12, int iters,
                    double floor_at,
                    const std::function<void(const std::vector<double>&,
                                             const std::vector<double>&,
                                             std::vector<double>&,
                                             std::vector<double>&)>& grad_fn) {
  std::vector<double> g1, g12;
  const double clamp = 60.0;
  if (floor_at > 0.0) {
    // Lift hard zeros left by an earlier unfloored polish so mass can return.
    for (double& q : v1) q = std::max(q, floor_at);
    ws.ipf(v1);
    if (use_v12) {
      for (double& q : v12) q = std::max(q, floor_at);
      ws.ipf(v12);
    }
  }
  for (int t = 0; t < iters; ++t) {
    const double eta = 0.5 / std::sqrt(static_cast<double>(t) + 1.0);
    grad_fn(v1, v12, g1, g12);
    double sum = 0.0;
    for (std::size_t i = 0; i < v1.size(); ++i) {
      if (v1[i] > 0.0) {
        const double step = std::clamp(g1[i], -clamp, clamp);
        v1[i] = std::max(v1[i] * std::exp2(-eta * step), floor_at);
      }
      sum += v1[i];
    }
    for (double& q : v1) q /= sum;
    ws.ipf(v1);
    if (use_v12) {
      sum = 0.0;
      for (std::size_t i = 0; i < v12.size(); ++i) {
        if (v12[i] > 0.0) {
          const double step = std::clamp(g12[i], -clamp, clamp);
          v12[i] = std::max(v12[i] * std::exp2(-eta * step), floor_at);
        }
        sum += v12[i];
      }
      for (double& q : v12) q /= sum;
      ws.ipf(v12);
    }
  }
}

std::vector<double> random_feasible(const Workspace& ws, Rng& rng) {
  std::vector<double> v(ws.cells());
  double sum = 0.0;
  for (double& q : v) {
    q = -std::log(std::max(rng.unit(), 1e-12));
    sum += q;
  }
  for (double& q : v) q /= sum;
  ws.ipf(v, 400);
  return v;
}

}  // namespace

AsyncResult minimize_fixed_l(const AsyncObjectiveParams& params,
                             const SolverConfig& cfg) {
  const Workspace ws(params.composed, params.p_star);
  const double c = 0.5 * (params.pattern_words - 1);
  const double lr = params.pattern_words * params.rate;
  const bool use_v12 = c > 0.0;

  const auto bracket_of = [&](const std::vector<double>& v1,
                              const std::vector<double>& v12) {
    double b = ws.cond_mutual_info(v1) - lr;
    if (use_v12) b += c * ws.multi_info(v12);
    return b;
  };
  const auto exact_value = [&](const std::vector<double>& v1,
                               const std::vector<double>& v12) {
    double val = ws.divergence(v1);
    if (use_v12) val += c * ws.divergence(v12);
    return val + std::max(bracket_of(v1, v12), 0.0);
  };

  const std::vector<double> p_vec = ws.p_as_vector();
  const auto anchor = ws.bracket_anchor(params.composed);

  CandidateResult best;
  const auto consider = [&](const std::vector<double>& v1,
                            const std::vector<double>& v12) {
    const double val = exact_value(v1, v12);
    if (val < best.value) {
      best.value = val;
      best.v1 = v1;
      best.v12 = v12;
      best.bracket = bracket_of(v1, v12);
    }
  };

  // P itself is always feasible; at and above the zero threshold it closes
  // the bracket with zero divergence, making the exponent exactly zero.
  consider(p_vec, p_vec);
  if (best.value == 0.0) {
    return AsyncResult{0.0,
                       ws.to_joint(p_vec),
                       ws.to_joint(p_vec),
                       params.pattern_words,
                       BracketBranch::clipped,
                       best.bracket,
                       ws.marginal_residual(p_vec)};
  }
  if (anchor) consider(*anchor, use_v12 ? *anchor : p_vec);

  std::vector<CandidateResult> per_restart(
      static_cast<std::size_t>(cfg.restarts));

  run_parallel(cfg.restarts, cfg.workers, [&](int restart) {
    Rng rng(Rng::derive(cfg.seed, (static_cast<std::uint64_t>(
                                       params.pattern_words)
                                   << 32) ^
                                      static_cast<std::uint64_t>(restart)));
    CandidateResult local;
    const auto local_consider = [&](const std::vector<double>& v1,
                                    const std::vector<double>& v12) {
      const double val = exact_value(v1, v12);
      if (val < local.value) {
        local.value = val;
        local.v1 = v1;
        local.v12 = v12;
        local.bracket = bracket_of(v1, v12);
      }
    };
    // Blend an infeasible point toward the anchor until the bracket closes,
    // then score the feasible endpoint (the clipped branch evaluates only
    // the divergence part there).
    const auto repair_and_consider = [&](const std::vector<double>& v1,
                                         const std::vector<double>& v12) {
      if (!anchor) return;
      const std::vector<double>& a1 = *anchor;
      const std::vector<double>& a12 = use_v12 ? *anchor : p_vec;
      const auto blend = [&](double t, std::vector<double>& b1,
                             std::vector<double>& b12) {
        b1.resize(v1.size());
        b12.resize(v12.size());
        for (std::size_t i = 0; i < v1.size(); ++i) {
          b1[i] = (1.0 - t) * v1[i] + t * a1[i];
        }
        for (std::size_t i = 0; i < v12.size(); ++i) {
          b12[i] = (1.0 - t) * v12[i] + t * a12[i];
        }
      };
      std::vector<double> b1, b12;
      blend(1.0, b1, b12);
      if (bracket_of(b1, b12) > 0.0) return;
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        blend(mid, b1, b12);
        if (bracket_of(b1, b12) > 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      blend(hi, b1, b12);
      local_consider(b1, b12);
    };

    // The positive part splits the problem into the active branch (the
    // bracket counts in full, multiplier 1) and the clipped branch (bracket
    // pinned to zero, multiplier in [0, 1)). Scanning the multiplier makes
    // every subproblem a separable smooth minimization:
    //   min  D(v1||P) + lambda I(v1)   and   min  D(v12||P) + lambda I(v12),
    // warm-started along the path. Every visited point is scored with the
    // exact objective, so the scan can only improve the reported minimum.
    std::vector<double> v1 = random_feasible(ws, rng);
    std::vector<double> v12 = use_v12 ? random_feasible(ws, rng) : p_vec;
    const int lambda_steps = 16;
    const int iters_per_step =
        std::max(cfg.iterations / (lambda_steps / 2), 50);
    const int polish = std::max(iters_per_step / 8, 10);
    for (int step = lambda_steps; step >= 0; --step) {
      const double lambda = static_cast<double>(step) / lambda_steps;
      const auto grad = [&](const std::vector<double>& a,
                            const std::vector<double>& b,
                            std::vector<double>& g1, std::vector<double>& g12) {
        std::vector<double> t1, t2;
        ws.grad_divergence(a, g1);
        if (lambda > 0.0) {
          ws.grad_cond_mutual_info(a, t1);
          for (std::size_t i = 0; i < g1.size(); ++i) g1[i] += lambda * t1[i];
        }
        if (use_v12) {
          ws.grad_divergence(b, g12);
          if (lambda > 0.0) {
            ws.grad_multi_info(b, t2);
            for (std::size_t i = 0; i < g12.size(); ++i) g12[i] += lambda * t2[i];
          }
          for (double& q : g12) q *= c;
        }
      };
      mirror_descent(ws, v1, v12, use_v12, iters_per_step - polish, 1e-12, grad);
      mirror_descent(ws, v1, v12, use_v12, polish, 0.0, grad);
      local_consider(v1, v12);
      if (bracket_of(v1, v12) > 0.0) repair_and_consider(v1, v12);
    }

    per_restart[static_cast<std::size_t>(restart)] = std::move(local);
  });

  for (const CandidateResult& r : per_restart) {
    if (r.value < best.value) best = r;
  }

  const std::vector<double>& v12_final = best.v12.empty() ? p_vec : best.v12;
  const double residual = std::max(ws.marginal_residual(best.v1),
                                   ws.marginal_residual(v12_final));
  if (residual > cfg.feasibility_tol) {
    std::ostringstream os;
    os << "minimize_fixed_l: marginal residual " << residual
       << " above tolerance " << cfg.feasibility_tol << " (best value "
       << best.value << ")";
    throw SolverError(os.str(), best.value, residual);
  }
  return AsyncResult{std::max(best.value, 0.0),
                     ws.to_joint(best.v1),
                     ws.to_joint(v12_final),
                     params.pattern_words,
                     best.bracket > 1e-6 ? BracketBranch::active
                                         : BracketBranch::clipped,
                     best.bracket,
                     residual};
}

namespace {

double entropy_modulus(double theta, std::size_t cells) {
  // |H(P) - H(Q)| <= theta log2(cells - 1) + h2(theta) for L1 distance theta
  // (capped at 1/2 so the binary-entropy term is monotone).
  theta = std::min(theta, 0.5);
  if (theta <= 0.0) return 0.0;
  const double h2 = -theta * std::log2(theta) -
                    (1.0 - theta) * std::log2(1.0 - theta);
  const double m = cells > 1 ? static_cast<double>(cells - 1) : 1.0;
  return theta * std::log2(std::max(m, 2.0)) + h2;
}

}  // namespace

GridOracleResult grid_oracle(const AsyncObjectiveParams& params,
                             std::int64_t step_den) {
  const Joint& composed = params.composed;
  if (composed.axes()[0].size != 2 || composed.axes()[1].size != 2 ||
      composed.axes()[2].size != 2) {
    throw std::invalid_argument("grid_oracle: oracle limited to binary alphabets");
  }
  if (step_den < 2 || step_den > 32) {
    throw std::invalid_argument("grid_oracle: step must satisfy 1/32 <= step <= 1/2");
  }
  const Workspace ws(composed, params.p_star);
  const double step = 1.0 / static_cast<double>(step_den);
  const double tol = 0.5 * step + 1e-12;
  const std::size_t m = ws.cells();

  // Pareto frontiers over (divergence, information) per role: the objective
  // is nondecreasing in every coordinate, so only non-dominated grid points
  // can attain the pairwise minimum.
  std::vector<std::pair<double, double>> role1;  // (cmi, divergence)
  std::vector<std::pair<double, double>> role12; // (multi, divergence)
  std::uint64_t feasible = 0;

  std::vector<std::int64_t> counts(m, 0);
  std::vector<double> v(m, 0.0);
  const auto visit = [&]() {
    for (std::size_t i = 0; i < m; ++i) {
      v[i] = static_cast<double>(counts[i]) * step;
    }
    double mx0 = 0.0, my0 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (ws.cx[i] == 0) mx0 += v[i];
      if (ws.cy[i] == 0) my0 += v[i];
    }
    if (std::abs(mx0 - ws.p_star[0]) > tol) return;
    if (std::abs(my0 - ws.p_star[0]) > tol) return;
    ++feasible;
    const double d = ws.divergence(v);
    role1.emplace_back(ws.cond_mutual_info(v), d);
    role12.emplace_back(ws.multi_info(v), d);
  };
  // Compositions of step_den over the support cells.
  const auto rec = [&](auto&& self, std::size_t cell, std::int64_t rem) -> void {
    if (cell == m - 1) {
      counts[cell] = rem;
      visit();
      return;
    }
    for (std::int64_t cnt = 0; cnt <= rem; ++cnt) {
      counts[cell] = cnt;
      self(self, cell + 1, rem - cnt);
    }
  };
  rec(rec, 0, step_den);

  if (role1.empty()) {
    throw std::runtime_error(
        "grid_oracle: no grid point satisfies the marginal constraints");
  }

  const auto frontier = [](std::vector<std::pair<double, double>>& pts) {
    std::sort(pts.begin(), pts.end());
    std::vector<std::pair<double, double>> keep;
    double dmin = pos_infinity();
    for (const auto& [info, d] : pts) {
      if (d < dmin - 1e-15) {
        keep.emplace_back(info, d);
        dmin = d;
      }
    }
    return keep;
  };
  const auto f1 = frontier(role1);
  const auto f12 = frontier(role12);

  const double c = 0.5 * (params.pattern_words - 1);
  const double lr = params.pattern_words * params.rate;
  double best = pos_infinity();
  if (c == 0.0) {
    for (const auto& [info, d] : f1) {
      best = std::min(best, d + std::max(info - params.rate, 0.0));
    }
  } else {
    // prefix_min_d[j]: min divergence among f12[0..j];
    // suffix_min_di[j]: min (divergence + info) among f12[j..].
    std::vector<double> prefix_min_d(f12.size());
    std::vector<double> suffix_min_di(f12.size());
    double acc = pos_infinity();
    for (std::size_t j = 0; j < f12.size(); ++j) {
      acc = std::min(acc, f12[j].second);
      prefix_min_d[j] = acc;
    }
    acc = pos_infinity();
    for (std::size_t j = f12.size(); j-- > 0;) {
      acc = std::min(acc, f12[j].second + f12[j].first);
      suffix_min_di[j] = acc;
    }
    for (const auto& [i1, d1] : f1) {
      const double cap = (lr - i1) / c;
      // Clipped pairs: i1 + c i12 <= LR.
      auto it = std::upper_bound(
          f12.begin(), f12.end(), std::make_pair(cap + 1e-12, pos_infinity()));
      if (it != f12.begin()) {
        const std::size_t j = static_cast<std::size_t>(it - f12.begin()) - 1;
        best = std::min(best, d1 + c * prefix_min_d[j]);
      }
      // Active pairs: i1 + c i12 >= LR.
      auto it2 = std::lower_bound(
          f12.begin(), f12.end(), std::make_pair(cap - 1e-12, -pos_infinity()));
      if (it2 != f12.end()) {
        const std::size_t j = static_cast<std::size_t>(it2 - f12.begin());
        best = std::min(best, d1 + i1 + c * suffix_min_di[j] - lr);
      }
    }
  }

  // Sound allowance for what the grid can miss: rounding a feasible point to
  // the grid moves each cell by at most ~1.5 steps (cell quantization plus
  // marginal repair); propagate that through entropy moduli of every table
  // the objective touches.
  const double delta = 1.5 * step;
  const double l1 = std::min(1.0, static_cast<double>(m) * delta);
  double log_p_sum = 0.0;
  for (double lp : ws.log2p) log_p_sum += std::abs(lp);
  const double mod_div = entropy_modulus(l1, m) + delta * log_p_sum;
  const double mod_cmi = entropy_modulus(l1, 4) + entropy_modulus(l1, 4) +
                         entropy_modulus(l1, 2) + entropy_modulus(l1, m);
  const double mod_multi = 3.0 * entropy_modulus(l1, 2) + entropy_modulus(l1, m);
  const double slack = (1.0 + c) * mod_div + mod_cmi + c * mod_multi;

  return GridOracleResult{std::max(best, 0.0), slack, feasible};
}

AsyncResult async_exponent(double rate, int slots, const MacChannel& mac,
                           const Dist& p_star, const SolverConfig& cfg) {
  if (slots < 3 || slots % 2 == 0) {
    throw std::invalid_argument("async_exponent: slots must be odd and >= 3");
  }
  const Joint composed = compose_joint(mac, p_star, p_star);
  std::optional<AsyncResult> best;
  for (int l = 1; l <= slots; ++l) {
    AsyncObjectiveParams params(l, slots, rate, p_star, composed);
    AsyncResult r = minimize_fixed_l(params, cfg);
    if (!best || r.exponent < best->exponent - 1e-15) {
      best = std::move(r);
    }
    if (best->exponent == 0.0) break;  // no lower value exists
  }
  return *best;
}

ComparisonCurve comparison_curve(const Dmc& dmc, const BinaryOp& op, int slots,
                                 const std::vector<double>& mac_rates,
                                 const SolverConfig& cfg,
                                 bool count_sync_overhead,
                                 bool optimize_forney_input,
                                 const std::optional<Dist>& p_star_override,
                                 const std::optional<Dist>& forney_input) {
  const MacChannel mac = virtual_mac(dmc, op);
  const Dist p_star =
      p_star_override ? *p_star_override : symmetric_capacity_input(mac);
  const double sync_factor =
      count_sync_overhead ? 1.0 - 1.0 / static_cast<double>(slots) : 1.0;

  ComparisonCurve curve;
  curve.rows.resize(mac_rates.size());

  for (std::size_t i = 0; i < mac_rates.size(); ++i) {
    const double r = mac_rates[i];
    if (r <= 0.0) {
      throw std::invalid_argument("comparison_curve: rates must be positive");
    }
    const AsyncResult a = async_exponent(r, slots, mac, p_star, cfg);
    const double plotted = 2.0 * r * sync_factor;
    const auto forney = gallager_curve(dmc, {plotted}, 1, optimize_forney_input,
                                       forney_input);
    curve.rows[i] =
        ComparisonRow{plotted, forney[0].exponent, 2.0 * a.exponent, a.l_star};
  }

  // Gap bookkeeping: relative gap is |async - forney| / max of the two,
  // evaluated only where both exponents exceed 0.01 (near a threshold one
  // curve vanishes and the ratio degenerates). The reported low-rate figure
  // is the maximum over qualifying rows, the high-rate figure the value at
  // the largest qualifying rate.
  curve.max_low_rate_rel_gap = 0.0;
  curve.high_rate_rel_gap = 0.0;
  double last_both = -1.0;
  for (const ComparisonRow& row : curve.rows) {
    if (row.async_scaled <= 0.01 || row.forney_memory1 <= 0.01) continue;
    const double m = std::max(row.async_scaled, row.forney_memory1);
    const double gap = (row.async_scaled - row.forney_memory1) / m;
    if (gap > curve.max_low_rate_rel_gap) {
      curve.max_low_rate_rel_gap = gap;
      curve.low_rate_gap_at = row.plotted_rate;
    }
    if (row.plotted_rate > last_both) {
      last_both = row.plotted_rate;
      curve.high_rate_rel_gap = std::abs(gap);
      curve.high_rate_gap_at = row.plotted_rate;
    }
  }
  return curve;
}

}  // namespace eet
