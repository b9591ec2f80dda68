#include "eet/channels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "eet/rng.hpp"
#include "json.hpp"

namespace eet {

Dmc::Dmc(std::size_t inputs, std::size_t outputs, std::vector<double> row_major)
    : inputs_(inputs), outputs_(outputs), w_(std::move(row_major)) {
  if (inputs_ == 0 || outputs_ == 0) {
    throw std::invalid_argument("Dmc: empty alphabet");
  }
  if (w_.size() != inputs_ * outputs_) {
    throw std::invalid_argument("Dmc: matrix size mismatch");
  }
  for (std::size_t x = 0; x < inputs_; ++x) {
    // Row validation through Dist enforces the usual tolerance.
    Dist(std::vector<double>(w_.begin() + static_cast<std::ptrdiff_t>(x * outputs_),
                             w_.begin() + static_cast<std::ptrdiff_t>((x + 1) * outputs_)));
  }
}

Dist Dmc::row(std::size_t x) const {
  if (x >= inputs_) throw std::invalid_argument("Dmc::row: input out of range");
  return Dist(std::vector<double>(w_.begin() + static_cast<std::ptrdiff_t>(x * outputs_),
                                  w_.begin() + static_cast<std::ptrdiff_t>((x + 1) * outputs_)));
}

BinaryOp::BinaryOp(std::size_t left, std::size_t right, std::size_t range,
                   std::vector<int> table)
    : left_(left), right_(right), range_(range), table_(std::move(table)) {
  if (left_ == 0 || right_ == 0 || range_ == 0) {
    throw std::invalid_argument("BinaryOp: empty alphabet");
  }
  if (table_.size() != left_ * right_) {
    throw std::invalid_argument("BinaryOp: table size mismatch");
  }
  for (int v : table_) {
    if (v < 0 || static_cast<std::size_t>(v) >= range_) {
      throw std::invalid_argument("BinaryOp: table entry out of range");
    }
  }
}

BinaryOp BinaryOp::xor_op(std::size_t n) {
  if (n == 0 || (n & (n - 1)) != 0) {
    throw std::invalid_argument("BinaryOp::xor_op: alphabet must be a power of 2");
  }
  std::vector<int> table(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      table[a * n + b] = static_cast<int>(a ^ b);
    }
  }
  return BinaryOp(n, n, n, std::move(table));
}

BinaryOp BinaryOp::first_projection(std::size_t n) {
  std::vector<int> table(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      table[a * n + b] = static_cast<int>(a);
    }
  }
  return BinaryOp(n, n, n, std::move(table));
}

MacChannel::MacChannel(std::size_t x_inputs, std::size_t y_inputs,
                       std::size_t outputs, std::vector<double> w)
    : x_(x_inputs), y_(y_inputs), z_(outputs), w_(std::move(w)) {
  if (x_ == 0 || y_ == 0 || z_ == 0) {
    throw std::invalid_argument("MacChannel: empty alphabet");
  }
  if (w_.size() != x_ * y_ * z_) {
    throw std::invalid_argument("MacChannel: tensor size mismatch");
  }
  for (std::size_t x = 0; x < x_; ++x) {
    for (std::size_t y = 0; y < y_; ++y) {
      const auto base = (x * y_ + y) * z_;
      Dist(std::vector<double>(w_.begin() + static_cast<std::ptrdiff_t>(base),
                               w_.begin() + static_cast<std::ptrdiff_t>(base + z_)));
    }
  }
}

Dmc z_channel(double p_flip) {
  if (!(p_flip >= 0.0 && p_flip <= 1.0)) {
    throw std::invalid_argument("z_channel: flip probability must be in [0,1]");
  }
  return Dmc(2, 2, {1.0, 0.0, p_flip, 1.0 - p_flip});
}

MacChannel virtual_mac(const Dmc& dmc, const BinaryOp& op) {
  if (op.range() != dmc.inputs()) {
    throw std::invalid_argument(
        "virtual_mac: operation range must equal the channel input alphabet");
  }
  const std::size_t zn = dmc.outputs();
  std::vector<double> w(op.left() * op.right() * zn);
  for (std::size_t x = 0; x < op.left(); ++x) {
    for (std::size_t y = 0; y < op.right(); ++y) {
      const std::size_t u = static_cast<std::size_t>(op.apply(x, y));
      for (std::size_t z = 0; z < zn; ++z) {
        w[(x * op.right() + y) * zn + z] = dmc.w(u, z);
      }
    }
  }
  return MacChannel(op.left(), op.right(), zn, std::move(w));
}

Joint compose_joint(const MacChannel& mac, const Dist& p1, const Dist& p2) {
  if (p1.size() != mac.x_inputs() || p2.size() != mac.y_inputs()) {
    throw std::invalid_argument("compose_joint: input distribution shape mismatch");
  }
  std::vector<double> p(mac.x_inputs() * mac.y_inputs() * mac.outputs());
  std::size_t idx = 0;
  for (std::size_t x = 0; x < mac.x_inputs(); ++x) {
    for (std::size_t y = 0; y < mac.y_inputs(); ++y) {
      for (std::size_t z = 0; z < mac.outputs(); ++z) {
        p[idx++] = mac.w(x, y, z) * p1[x] * p2[y];
      }
    }
  }
  return Joint({{"X", mac.x_inputs()}, {"Y", mac.y_inputs()}, {"Z", mac.outputs()}},
               std::move(p));
}

double symmetric_sum_information(const MacChannel& mac, const Dist& p) {
  const Joint joint = compose_joint(mac, p, p);
  // I(X,Y ; Z) = H(Z) - H(Z | X,Y)
  const double h_z = entropy(joint.axis_marginal("Z"));
  double h_z_xy = 0.0;
  for (std::size_t x = 0; x < mac.x_inputs(); ++x) {
    for (std::size_t y = 0; y < mac.y_inputs(); ++y) {
      double h = 0.0;
      for (std::size_t z = 0; z < mac.outputs(); ++z) {
        h -= xlog2x(mac.w(x, y, z));
      }
      h_z_xy += p[x] * p[y] * h;
    }
  }
  return std::max(h_z - h_z_xy, 0.0);
}

namespace {

double sum_information_binary(const MacChannel& mac, double p0) {
  return symmetric_sum_information(mac, Dist({p0, 1.0 - p0}));
}

Dist capacity_input_binary(const MacChannel& mac, double tol) {
  // Grid scan at 1e-4; ties (values within 1e-12 of the grid maximum) break
  // toward the lexicographically smallest distribution, then golden-section
  // refinement inside the bracketing interval.
  const double grid_step = 1e-4;
  const int cells = static_cast<int>(std::round(1.0 / grid_step));
  std::vector<double> vals(static_cast<std::size_t>(cells) + 1);
  double grid_max = -1.0, grid_min = 2.0;
  for (int i = 0; i <= cells; ++i) {
    vals[static_cast<std::size_t>(i)] =
        sum_information_binary(mac, static_cast<double>(i) * grid_step);
    grid_max = std::max(grid_max, vals[static_cast<std::size_t>(i)]);
    grid_min = std::min(grid_min, vals[static_cast<std::size_t>(i)]);
  }
  if (grid_max - grid_min <= 1e-13) {
    return Dist::uniform(2);  // objective is flat; every input is optimal
  }
  double best_p = 0.0;
  double best_val = 0.0;
  for (int i = 0; i <= cells; ++i) {
    if (vals[static_cast<std::size_t>(i)] >= grid_max - 1e-12) {
      best_p = static_cast<double>(i) * grid_step;
      best_val = vals[static_cast<std::size_t>(i)];
      break;
    }
  }
  double lo = std::max(0.0, best_p - grid_step);
  double hi = std::min(1.0, best_p + grid_step);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  while (hi - lo > tol) {
    const double c = hi - gr * (hi - lo);
    const double d = lo + gr * (hi - lo);
    if (sum_information_binary(mac, c) >= sum_information_binary(mac, d)) {
      hi = d;
    } else {
      lo = c;
    }
  }
  const double refined = 0.5 * (lo + hi);
  if (sum_information_binary(mac, refined) >= best_val) {
    return Dist({refined, 1.0 - refined});
  }
  return Dist({best_p, 1.0 - best_p});
}

Dist capacity_input_general(const MacChannel& mac, double tol) {
  const std::size_t n = mac.x_inputs();
  Rng rng(0x10aded);
  Dist best = Dist::uniform(n);
  double best_val = symmetric_sum_information(mac, best);
  const int restarts = 16;
  const int iters = 4000;
  for (int r = 0; r < restarts; ++r) {
    std::vector<double> p(n);
    double sum = 0.0;
    for (double& v : p) {
      v = (r == 0) ? 1.0 : -std::log(std::max(rng.unit(), 1e-12));
      sum += v;
    }
    for (double& v : p) v /= sum;
    for (int t = 0; t < iters; ++t) {
      // Numeric gradient of the symmetric objective (alphabets are tiny).
      const double eps = 1e-7;
      std::vector<double> g(n);
      const double base = symmetric_sum_information(mac, Dist(p));
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> q = p;
        double delta = eps * (1.0 - q[i]);
        if (delta < 1e-12) delta = eps;
        // Move along the simplex toward vertex i.
        for (std::size_t j = 0; j < n; ++j) {
          q[j] = (1.0 - delta) * p[j] + (j == i ? delta : 0.0);
        }
        g[i] = (symmetric_sum_information(mac, Dist(q)) - base) / delta;
      }
      const double eta = 0.5 / std::sqrt(static_cast<double>(t) + 1.0);
      double z = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = std::max(p[i], 1e-12) * std::exp(eta * g[i]);
        z += p[i];
      }
      for (double& v : p) v /= z;
    }
    const double v = symmetric_sum_information(mac, Dist(p));
    if (v > best_val + tol) {
      best_val = v;
      best = Dist(p);
    }
  }
  return best;
}

}  // namespace

Dist symmetric_capacity_input(const MacChannel& mac, double tol) {
  if (mac.x_inputs() != mac.y_inputs()) {
    throw std::invalid_argument(
        "symmetric_capacity_input: input alphabets must be identical");
  }
  if (mac.x_inputs() == 2) return capacity_input_binary(mac, tol);
  return capacity_input_general(mac, tol);
}

namespace {

using nlohmann::json;

Dmc dmc_from_json(const json& doc) {
  if (!doc.contains("input_alphabet") || !doc["input_alphabet"].is_number_integer()) {
    throw std::invalid_argument("channel spec: missing integer field input_alphabet");
  }
  if (!doc.contains("output_alphabet") || !doc["output_alphabet"].is_number_integer()) {
    throw std::invalid_argument("channel spec: missing integer field output_alphabet");
  }
  if (!doc.contains("rows") || !doc["rows"].is_array()) {
    throw std::invalid_argument("channel spec: missing array field rows");
  }
  const auto nx = doc["input_alphabet"].get<std::int64_t>();
  const auto nz = doc["output_alphabet"].get<std::int64_t>();
  if (nx <= 0 || nz <= 0) {
    throw std::invalid_argument("channel spec: alphabets must be positive");
  }
  std::vector<double> rows;
  rows.reserve(doc["rows"].size());
  for (const auto& v : doc["rows"]) {
    if (!v.is_number()) {
      throw std::invalid_argument("channel spec: rows must contain numbers");
    }
    rows.push_back(v.get<double>());
  }
  if (rows.size() != static_cast<std::size_t>(nx * nz)) {
    std::ostringstream os;
    os << "channel spec: rows has " << rows.size() << " entries, expected "
       << nx * nz;
    throw std::invalid_argument(os.str());
  }
  // Validate row-stochastic within 1e-9, then normalize exactly so the
  // stricter Dist tolerance holds downstream.
  for (std::int64_t x = 0; x < nx; ++x) {
    double sum = 0.0;
    for (std::int64_t z = 0; z < nz; ++z) {
      const double v = rows[static_cast<std::size_t>(x * nz + z)];
      if (!(v >= 0.0)) {
        std::ostringstream os;
        os << "channel spec: row " << x << " has a negative entry";
        throw std::invalid_argument(os.str());
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      std::ostringstream os;
      os << "channel spec: row " << x << " sums to " << sum
         << ", must be 1 within 1e-9";
      throw std::invalid_argument(os.str());
    }
    for (std::int64_t z = 0; z < nz; ++z) {
      rows[static_cast<std::size_t>(x * nz + z)] /= sum;
    }
  }
  return Dmc(static_cast<std::size_t>(nx), static_cast<std::size_t>(nz),
             std::move(rows));
}

BinaryOp op_from_json(const json& doc, std::size_t inputs) {
  if (!doc.contains("op")) {
    return BinaryOp::xor_op(inputs);
  }
  const auto& op = doc["op"];
  if (op.is_string()) {
    if (op.get<std::string>() == "xor") return BinaryOp::xor_op(inputs);
    throw std::invalid_argument("channel spec: unknown op \"" +
                                op.get<std::string>() + "\" (use \"xor\" or a table)");
  }
  if (op.is_array()) {
    // Nested rows: op[x1][x2].
    const std::size_t left = op.size();
    if (left == 0) throw std::invalid_argument("channel spec: empty op table");
    std::size_t right = 0;
    std::vector<int> table;
    for (const auto& row : op) {
      if (!row.is_array()) {
        throw std::invalid_argument("channel spec: op table rows must be arrays");
      }
      if (right == 0) {
        right = row.size();
      } else if (row.size() != right) {
        throw std::invalid_argument("channel spec: ragged op table");
      }
      for (const auto& v : row) {
        if (!v.is_number_integer()) {
          throw std::invalid_argument("channel spec: op table entries must be integers");
        }
        table.push_back(v.get<int>());
      }
    }
    return BinaryOp(left, right, inputs, std::move(table));
  }
  throw std::invalid_argument("channel spec: op must be \"xor\" or a table");
}

}  // namespace

ParsedChannel parse_channel_spec(std::string_view text) {
  // Trim surrounding whitespace.
  std::size_t b = text.find_first_not_of(" \t\r\n");
  std::size_t e = text.find_last_not_of(" \t\r\n");
  if (b == std::string_view::npos) {
    throw std::invalid_argument("channel spec: empty document");
  }
  text = text.substr(b, e - b + 1);

  if (text.rfind("z:", 0) == 0) {
    const std::string num(text.substr(2));
    std::size_t used = 0;
    double p = 0.0;
    try {
      p = std::stod(num, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("channel spec: malformed z:<p> shorthand");
    }
    if (used != num.size()) {
      throw std::invalid_argument("channel spec: trailing characters after z:<p>");
    }
    return ParsedChannel{z_channel(p), BinaryOp::xor_op(2)};
  }

  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw std::invalid_argument(std::string("channel spec: ") + err.what());
  }
  Dmc dmc = dmc_from_json(doc);
  BinaryOp op = op_from_json(doc, dmc.inputs());
  return ParsedChannel{std::move(dmc), std::move(op)};
}

ParsedChannel load_channel_spec(const std::string& path_or_text) {
  if (path_or_text.rfind("z:", 0) == 0 || path_or_text.find('{') != std::string::npos) {
    return parse_channel_spec(path_or_text);
  }
  std::ifstream in(path_or_text);
  if (!in) {
    throw std::invalid_argument("channel spec: cannot open file " + path_or_text);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_channel_spec(buf.str());
}

}  // namespace eet
