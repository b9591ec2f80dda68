#include "eet/prob.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace eet {

double xlog2x(double x) {
  if (x <= 0.0) return 0.0;
  return x * std::log2(x);
}

namespace {

void check_probs(const std::vector<double>& p, const char* what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) {  // also catches NaN
      throw std::invalid_argument(std::string(what) +
                                  ": entries must be nonnegative");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kProbTol) {
    std::ostringstream os;
    os << what << ": entries must sum to 1 within " << kProbTol << " (got "
       << sum << ")";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

Dist::Dist(std::vector<double> probs) : p_(std::move(probs)) {
  if (p_.empty()) throw std::invalid_argument("Dist: empty alphabet");
  check_probs(p_, "Dist");
}

Dist Dist::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Dist::uniform: empty alphabet");
  return Dist(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Dist Dist::point_mass(std::size_t n, std::size_t at) {
  if (at >= n) throw std::invalid_argument("Dist::point_mass: index out of range");
  std::vector<double> p(n, 0.0);
  p[at] = 1.0;
  return Dist(std::move(p));
}

Joint::Joint(std::vector<Axis> axes, std::vector<double> probs)
    : axes_(std::move(axes)), p_(std::move(probs)) {
  if (axes_.size() < 2 || axes_.size() > 4) {
    throw std::invalid_argument("Joint: rank must be between 2 and 4");
  }
  std::size_t cells = 1;
  for (const Axis& a : axes_) {
    if (a.size == 0) throw std::invalid_argument("Joint: empty axis");
    if (a.label.empty()) throw std::invalid_argument("Joint: unlabeled axis");
    cells *= a.size;
  }
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    for (std::size_t j = i + 1; j < axes_.size(); ++j) {
      if (axes_[i].label == axes_[j].label) {
        throw std::invalid_argument("Joint: duplicate axis label " +
                                    axes_[i].label);
      }
    }
  }
  if (p_.size() != cells) {
    throw std::invalid_argument("Joint: probability table size mismatch");
  }
  check_probs(p_, "Joint");
  strides_.assign(axes_.size(), 1);
  for (std::size_t i = axes_.size(); i-- > 1;) {
    strides_[i - 1] = strides_[i] * axes_[i].size;
  }
}

std::size_t Joint::axis_index(std::string_view label) const {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (axes_[i].label == label) return i;
  }
  throw std::invalid_argument("Joint: no axis labeled " + std::string(label));
}

bool Joint::has_axis(std::string_view label) const {
  for (const Axis& a : axes_) {
    if (a.label == label) return true;
  }
  return false;
}

std::size_t Joint::flat_index(std::span<const std::size_t> coords) const {
  if (coords.size() != axes_.size()) {
    throw std::invalid_argument("Joint: coordinate rank mismatch");
  }
  std::size_t idx = 0;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (coords[i] >= axes_[i].size) {
      throw std::invalid_argument("Joint: coordinate out of range");
    }
    idx += coords[i] * strides_[i];
  }
  return idx;
}

double Joint::at(std::span<const std::size_t> coords) const {
  return p_[flat_index(coords)];
}

Joint Joint::marginal(std::span<const std::string> keep) const {
  if (keep.empty()) {
    throw std::invalid_argument("Joint::marginal: empty axis subset");
  }
  if (keep.size() == 1) {
    throw std::invalid_argument(
        "Joint::marginal: single-axis marginal, use axis_marginal");
  }
  std::vector<std::size_t> keep_idx;
  keep_idx.reserve(keep.size());
  for (const std::string& label : keep) keep_idx.push_back(axis_index(label));
  for (std::size_t i = 0; i < keep_idx.size(); ++i) {
    for (std::size_t j = i + 1; j < keep_idx.size(); ++j) {
      if (keep_idx[i] == keep_idx[j]) {
        throw std::invalid_argument("Joint::marginal: repeated axis");
      }
    }
  }

  std::vector<Axis> out_axes;
  out_axes.reserve(keep_idx.size());
  std::size_t out_cells = 1;
  for (std::size_t k : keep_idx) {
    out_axes.push_back(axes_[k]);
    out_cells *= axes_[k].size;
  }
  std::vector<std::size_t> out_strides(keep_idx.size(), 1);
  for (std::size_t i = keep_idx.size(); i-- > 1;) {
    out_strides[i - 1] = out_strides[i] * out_axes[i].size;
  }

  std::vector<double> out(out_cells, 0.0);
  std::vector<std::size_t> coord(axes_.size(), 0);
  for (std::size_t flat = 0; flat < p_.size(); ++flat) {
    std::size_t rem = flat;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
      coord[i] = rem / strides_[i];
      rem %= strides_[i];
    }
    std::size_t oidx = 0;
    for (std::size_t i = 0; i < keep_idx.size(); ++i) {
      oidx += coord[keep_idx[i]] * out_strides[i];
    }
    out[oidx] += p_[flat];
  }
  return Joint(std::move(out_axes), std::move(out));
}

Joint Joint::marginal(std::initializer_list<std::string> keep) const {
  std::vector<std::string> k(keep);
  return marginal(std::span<const std::string>(k));
}

Dist Joint::axis_marginal(std::string_view label) const {
  const std::size_t k = axis_index(label);
  std::vector<double> out(axes_[k].size, 0.0);
  std::vector<std::size_t> coord(axes_.size(), 0);
  for (std::size_t flat = 0; flat < p_.size(); ++flat) {
    std::size_t rem = flat;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
      coord[i] = rem / strides_[i];
      rem %= strides_[i];
    }
    out[coord[k]] += p_[flat];
  }
  return Dist(std::move(out));
}

Joint Joint::product(const std::vector<Axis>& axes,
                     const std::vector<Dist>& factors) {
  if (axes.size() != factors.size()) {
    throw std::invalid_argument("Joint::product: axes/factors mismatch");
  }
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (axes[i].size != factors[i].size()) {
      throw std::invalid_argument("Joint::product: axis size mismatch");
    }
  }
  std::size_t cells = 1;
  for (const Axis& a : axes) cells *= a.size;
  std::vector<double> p(cells, 1.0);
  std::vector<std::size_t> strides(axes.size(), 1);
  for (std::size_t i = axes.size(); i-- > 1;) {
    strides[i - 1] = strides[i] * axes[i].size;
  }
  for (std::size_t flat = 0; flat < cells; ++flat) {
    std::size_t rem = flat;
    for (std::size_t i = 0; i < axes.size(); ++i) {
      const std::size_t c = rem / strides[i];
      rem %= strides[i];
      p[flat] *= factors[i][c];
    }
  }
  return Joint(axes, std::move(p));
}

namespace {

double entropy_of(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) h -= xlog2x(v);
  return std::max(h, 0.0);
}

double kl_of(const std::vector<double>& v, const std::vector<double>& p) {
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > 0.0) {
      if (p[i] <= 0.0) return pos_infinity();
      d += v[i] * (std::log2(v[i]) - std::log2(p[i]));
    }
  }
  return std::max(d, 0.0);
}

}  // namespace

double entropy(const Dist& d) { return entropy_of(d.probs()); }
double entropy(const Joint& v) { return entropy_of(v.probs()); }

double conditional_entropy(const Joint& v, std::span<const std::string> targets,
                           std::span<const std::string> given) {
  std::vector<std::string> both(targets.begin(), targets.end());
  both.insert(both.end(), given.begin(), given.end());
  double h_both;
  if (both.size() == v.rank()) {
    h_both = entropy(v);
  } else {
    h_both = entropy(v.marginal(std::span<const std::string>(both)));
  }
  double h_given;
  if (given.empty()) {
    h_given = 0.0;
  } else if (given.size() == 1) {
    h_given = entropy(v.axis_marginal(given[0]));
  } else {
    h_given = entropy(v.marginal(given));
  }
  return h_both - h_given;
}

double kl_divergence(const Dist& v, const Dist& p) {
  if (v.size() != p.size()) {
    throw std::invalid_argument("kl_divergence: alphabet size mismatch");
  }
  return kl_of(v.probs(), p.probs());
}

double kl_divergence(const Joint& v, const Joint& p) {
  if (v.rank() != p.rank()) {
    throw std::invalid_argument("kl_divergence: rank mismatch");
  }
  for (std::size_t i = 0; i < v.rank(); ++i) {
    if (v.axes()[i].label != p.axes()[i].label ||
        v.axes()[i].size != p.axes()[i].size) {
      throw std::invalid_argument("kl_divergence: axis mismatch");
    }
  }
  return kl_of(v.probs(), p.probs());
}

double cond_mutual_information(const Joint& v, std::string_view a,
                               std::string_view b, std::string_view given) {
  if (v.rank() != 3) {
    throw std::invalid_argument(
        "cond_mutual_information: joint must have exactly three axes");
  }
  if (!v.has_axis(a) || !v.has_axis(b) || !v.has_axis(given)) {
    throw std::invalid_argument("cond_mutual_information: missing axis");
  }
  const std::string sa(a), sb(b), sg(given);
  // I(a;b|g) = H(a,g) + H(b,g) - H(g) - H(a,b,g)
  const double h_ag = entropy(v.marginal({sa, sg}));
  const double h_bg = entropy(v.marginal({sb, sg}));
  const double h_g = entropy(v.axis_marginal(sg));
  const double h_abg = entropy(v);
  return std::max(h_ag + h_bg - h_g - h_abg, 0.0);
}

double multi_information(const Joint& v) {
  double sum_marginals = 0.0;
  for (const Axis& a : v.axes()) {
    sum_marginals += entropy(v.axis_marginal(a.label));
  }
  return std::max(sum_marginals - entropy(v), 0.0);
}

TypeVector::TypeVector(std::vector<std::int64_t> counts,
                       std::vector<std::size_t> shape, std::int64_t denominator)
    : counts_(std::move(counts)), shape_(std::move(shape)), denom_(denominator) {
  if (denom_ <= 0) throw std::invalid_argument("TypeVector: denominator <= 0");
  if (shape_.empty()) throw std::invalid_argument("TypeVector: empty shape");
  std::size_t cells = 1;
  for (std::size_t s : shape_) {
    if (s == 0) throw std::invalid_argument("TypeVector: empty axis");
    cells *= s;
  }
  if (counts_.size() != cells) {
    throw std::invalid_argument("TypeVector: counts/shape mismatch");
  }
  std::int64_t sum = 0;
  for (std::int64_t c : counts_) {
    if (c < 0) throw std::invalid_argument("TypeVector: negative count");
    sum += c;
  }
  if (sum != denom_) {
    throw std::invalid_argument("TypeVector: counts must sum to denominator");
  }
}

Dist TypeVector::to_dist() const {
  std::vector<double> p(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    p[i] = static_cast<double>(counts_[i]) / static_cast<double>(denom_);
  }
  return Dist(std::move(p));
}

Joint TypeVector::to_joint(std::vector<std::string> labels) const {
  if (labels.size() != shape_.size()) {
    throw std::invalid_argument("TypeVector::to_joint: label count mismatch");
  }
  std::vector<Axis> axes;
  axes.reserve(shape_.size());
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    axes.push_back({std::move(labels[i]), shape_[i]});
  }
  std::vector<double> p(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    p[i] = static_cast<double>(counts_[i]) / static_cast<double>(denom_);
  }
  return Joint(std::move(axes), std::move(p));
}

TypeVector type_of(std::span<const int> seq, std::size_t alphabet) {
  if (seq.empty()) throw std::invalid_argument("type_of: empty sequence");
  std::vector<std::int64_t> counts(alphabet, 0);
  for (int s : seq) {
    if (s < 0 || static_cast<std::size_t>(s) >= alphabet) {
      throw std::invalid_argument("type_of: symbol out of range");
    }
    ++counts[static_cast<std::size_t>(s)];
  }
  return TypeVector(std::move(counts), {alphabet},
                    static_cast<std::int64_t>(seq.size()));
}

TypeVector joint_type_of(std::span<const std::span<const int>> seqs,
                         std::span<const std::size_t> alphabets) {
  if (seqs.empty() || seqs.size() != alphabets.size()) {
    throw std::invalid_argument("joint_type_of: sequence/alphabet mismatch");
  }
  const std::size_t n = seqs[0].size();
  if (n == 0) throw std::invalid_argument("joint_type_of: empty sequences");
  for (const auto& s : seqs) {
    if (s.size() != n) {
      throw std::invalid_argument("joint_type_of: length mismatch");
    }
  }
  std::size_t cells = 1;
  for (std::size_t a : alphabets) cells *= a;
  std::vector<std::int64_t> counts(cells, 0);
  for (std::size_t pos = 0; pos < n; ++pos) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      const int s = seqs[i][pos];
      if (s < 0 || static_cast<std::size_t>(s) >= alphabets[i]) {
        throw std::invalid_argument("joint_type_of: symbol out of range");
      }
      idx = idx * alphabets[i] + static_cast<std::size_t>(s);
    }
    ++counts[idx];
  }
  return TypeVector(std::move(counts),
                    std::vector<std::size_t>(alphabets.begin(), alphabets.end()),
                    static_cast<std::int64_t>(n));
}

std::uint64_t count_types(std::int64_t n, std::size_t cells) {
  // C(n + cells - 1, cells - 1) without overflow for desk-scale sizes.
  std::uint64_t result = 1;
  const std::uint64_t k = cells - 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (static_cast<std::uint64_t>(n) + i) / i;
  }
  return result;
}

std::vector<TypeVector> enumerate_types(std::int64_t n,
                                        std::span<const std::size_t> shape,
                                        std::uint64_t cap) {
  if (n <= 0) throw std::invalid_argument("enumerate_types: n must be positive");
  if (shape.empty()) throw std::invalid_argument("enumerate_types: empty shape");
  std::size_t cells = 1;
  for (std::size_t s : shape) cells *= s;
  const std::uint64_t total = count_types(n, cells);
  if (total > cap) {
    std::ostringstream os;
    os << "enumerate_types: would produce " << total << " types, cap is " << cap;
    throw std::invalid_argument(os.str());
  }

  std::vector<TypeVector> out;
  out.reserve(total);
  std::vector<std::int64_t> counts(cells, 0);
  std::vector<std::size_t> shape_vec(shape.begin(), shape.end());
  // Recursive composition of n into `cells` parts.
  auto rec = [&](auto&& self, std::size_t cell, std::int64_t remaining) -> void {
    if (cell == cells - 1) {
      counts[cell] = remaining;
      out.emplace_back(counts, shape_vec, n);
      return;
    }
    for (std::int64_t c = 0; c <= remaining; ++c) {
      counts[cell] = c;
      self(self, cell + 1, remaining - c);
    }
  };
  rec(rec, 0, n);
  return out;
}

std::vector<int> sample_type_class(const TypeVector& t, Rng& rng) {
  std::vector<int> seq;
  seq.reserve(static_cast<std::size_t>(t.denominator()));
  for (std::size_t cell = 0; cell < t.cells(); ++cell) {
    for (std::int64_t c = 0; c < t.counts()[cell]; ++c) {
      seq.push_back(static_cast<int>(cell));
    }
  }
  rng.shuffle(seq);
  return seq;
}

}  // namespace eet
