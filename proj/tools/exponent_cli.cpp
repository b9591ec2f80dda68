// Command-line surface: exponent curves, the two-exponent comparison,
// Monte Carlo simulation of the shifted-stream construction, and the
// packing-bound verifier. All outputs are byte-deterministic for a fixed
// seed; numbers are printed in fixed scientific notation with 12
// significant digits.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eet/async.hpp"
#include "eet/channels.hpp"
#include "eet/gallager.hpp"
#include "eet/packing.hpp"
#include "eet/prob.hpp"
#include "eet/trellis.hpp"
#include "json.hpp"

namespace {

using nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

std::vector<double> parse_rate_grid(const std::string& grid) {
  const auto bad = [&](const std::string& why) {
    throw std::invalid_argument("rate grid \"" + grid + "\": " + why);
  };
  std::vector<double> parts;
  std::stringstream ss(grid);
  std::string tok;
  while (std::getline(ss, tok, ':')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      bad("not a number: " + tok);
    }
    if (used != tok.size()) bad("trailing characters in " + tok);
    parts.push_back(v);
  }
  if (parts.size() != 3) bad("expected start:step:stop");
  const double start = parts[0], step = parts[1], stop = parts[2];
  if (step <= 0.0) bad("step must be positive");
  if (stop < start) bad("stop below start");
  std::vector<double> rates;
  const auto count = static_cast<std::size_t>(
      std::floor((stop - start) / step + 1e-9));
  for (std::size_t i = 0; i <= count; ++i) {
    rates.push_back(start + static_cast<double>(i) * step);
  }
  return rates;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    out.push_back(std::stod(tok));
  }
  return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    out.push_back(std::stoll(tok));
  }
  return out;
}

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file " + out_path);
  f << content;
}

int env_workers() {
  const char* env = std::getenv("EET_WORKERS");
  if (env == nullptr) return 1;
  const int w = std::atoi(env);
  return w >= 1 ? w : 1;
}

// Largest-remainder rounding of p to an integer composition of k.
eet::TypeVector round_to_type(const eet::Dist& p, int k) {
  const std::size_t cells = p.size();
  std::vector<std::int64_t> counts(cells, 0);
  std::vector<std::pair<double, std::size_t>> rem(cells);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double exact = p[i] * static_cast<double>(k);
    counts[i] = static_cast<std::int64_t>(std::floor(exact));
    assigned += counts[i];
    rem[i] = {exact - std::floor(exact), i};
  }
  std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::int64_t left = k - assigned; left > 0; --left) {
    counts[rem[static_cast<std::size_t>(k - assigned - left)].second] += 1;
  }
  return eet::TypeVector(counts, {cells}, k);
}

struct CommonOpts {
  std::string channel;
  std::string out_path;
  std::string format = "csv";
  std::uint64_t seed = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_channel = true) {
  if (needs_channel) {
    cmd->add_option("--channel", opts.channel,
                    "channel spec: z:<p>, a JSON document, or a path to one")
        ->required();
  }
  cmd->add_option("--out", opts.out_path, "output path (default: stdout)");
  cmd->add_option("--format", opts.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--seed", opts.seed, "random seed");
}

int run_gallager(const CommonOpts& opts, const std::string& rates_arg,
                 int memory, const std::string& input_arg) {
  const eet::ParsedChannel ch = eet::load_channel_spec(opts.channel);
  const std::vector<double> rates = parse_rate_grid(rates_arg);

  bool optimize = true;
  std::optional<eet::Dist> fixed;
  if (input_arg == "uniform") {
    optimize = false;
  } else if (!input_arg.empty() && input_arg != "optimize") {
    optimize = false;
    fixed = eet::Dist(parse_double_list(input_arg));
  }

  const auto points =
      eet::gallager_curve(ch.dmc, rates, memory, optimize, fixed);

  std::ostringstream os;
  if (opts.format == "csv") {
    os << "rate,rho_star,exponent";
    for (std::size_t i = 0; i < ch.dmc.inputs(); ++i) os << ",input_" << i;
    os << "\n";
    for (const auto& pt : points) {
      const eet::Dist used = eet::curve_input(ch.dmc, pt.rate, optimize, fixed);
      os << fmt(pt.rate) << "," << fmt(pt.rho_star) << "," << fmt(pt.exponent);
      for (std::size_t i = 0; i < used.size(); ++i) os << "," << fmt(used[i]);
      os << "\n";
    }
  } else {
    ordered_json doc;
    doc["command"] = "gallager";
    doc["memory"] = memory;
    ordered_json rows = ordered_json::array();
    for (const auto& pt : points) {
      const eet::Dist used = eet::curve_input(ch.dmc, pt.rate, optimize, fixed);
      ordered_json row;
      row["rate"] = fmt(pt.rate);
      row["rho_star"] = fmt(pt.rho_star);
      row["exponent"] = fmt(pt.exponent);
      ordered_json input = ordered_json::array();
      for (std::size_t i = 0; i < used.size(); ++i) input.push_back(fmt(used[i]));
      row["input"] = input;
      rows.push_back(row);
    }
    doc["points"] = rows;
    os << doc.dump(2) << "\n";
  }
  write_output(opts.out_path, os.str());
  return 0;
}

int run_async(const CommonOpts& opts, const std::string& rates_arg, int slots,
              bool with_oracle, int restarts, int iterations,
              const std::string& pstar_arg) {
  const eet::ParsedChannel ch = eet::load_channel_spec(opts.channel);
  const std::vector<double> rates = parse_rate_grid(rates_arg);
  const eet::MacChannel mac = eet::virtual_mac(ch.dmc, ch.op);
  const eet::Dist p_star = pstar_arg.empty()
                               ? eet::symmetric_capacity_input(mac)
                               : eet::Dist(parse_double_list(pstar_arg));

  eet::SolverConfig cfg;
  cfg.restarts = restarts;
  cfg.iterations = iterations;
  cfg.seed = opts.seed;
  cfg.workers = env_workers();

  const eet::Joint composed = eet::compose_joint(mac, p_star, p_star);

  struct Row {
    double rate, exponent, residual, oracle, oracle_slack;
    int l_star;
    std::string branch;
  };
  std::vector<Row> table;
  for (double r : rates) {
    Row row{r, 0.0, 0.0, 0.0, 0.0, 0, ""};
    try {
      const eet::AsyncResult res = eet::async_exponent(r, slots, mac, p_star, cfg);
      row.exponent = res.exponent;
      row.residual = res.marginal_residual;
      row.l_star = res.l_star;
      row.branch = eet::branch_name(res.branch);
    } catch (const eet::SolverError& err) {
      row.exponent = err.best_value;
      row.residual = err.residual;
      row.branch = "failed";  // flagged, run continues
    }
    if (with_oracle) {
      double best_oracle = eet::pos_infinity();
      double slack = 0.0;
      for (int l = 1; l <= slots; ++l) {
        const eet::AsyncObjectiveParams params(l, slots, r, p_star, composed);
        const eet::GridOracleResult o = eet::grid_oracle(params, 32);
        if (o.value < best_oracle) {
          best_oracle = o.value;
          slack = o.slack;
        }
      }
      row.oracle = best_oracle;
      row.oracle_slack = slack;
    }
    table.push_back(std::move(row));
  }

  std::ostringstream os;
  if (opts.format == "csv") {
    os << "rate,exponent,l_star,branch,solver_residual";
    if (with_oracle) os << ",oracle,oracle_slack";
    os << "\n";
    for (const Row& row : table) {
      os << fmt(row.rate) << "," << fmt(row.exponent) << "," << row.l_star
         << "," << row.branch << "," << fmt(row.residual);
      if (with_oracle) os << "," << fmt(row.oracle) << "," << fmt(row.oracle_slack);
      os << "\n";
    }
  } else {
    ordered_json doc;
    doc["command"] = "async";
    doc["slots"] = slots;
    doc["seed"] = opts.seed;
    ordered_json rows_json = ordered_json::array();
    for (const Row& row : table) {
      ordered_json j;
      j["rate"] = fmt(row.rate);
      j["exponent"] = fmt(row.exponent);
      j["l_star"] = row.l_star;
      j["branch"] = row.branch;
      j["solver_residual"] = fmt(row.residual);
      if (with_oracle) {
        j["oracle"] = fmt(row.oracle);
        j["oracle_slack"] = fmt(row.oracle_slack);
      }
      rows_json.push_back(j);
    }
    doc["points"] = rows_json;
    os << doc.dump(2) << "\n";
  }
  write_output(opts.out_path, os.str());
  return 0;
}

int run_compare(const CommonOpts& opts, const std::string& rates_arg, int slots,
                bool sync_overhead, const std::string& input_arg,
                const std::string& pstar_arg, int restarts, int iterations) {
  const eet::ParsedChannel ch = eet::load_channel_spec(opts.channel);
  const std::vector<double> rates = parse_rate_grid(rates_arg);

  eet::SolverConfig cfg;
  cfg.restarts = restarts;
  cfg.iterations = iterations;
  cfg.seed = opts.seed;
  cfg.workers = env_workers();

  std::optional<eet::Dist> p_star;
  if (!pstar_arg.empty()) p_star = eet::Dist(parse_double_list(pstar_arg));
  const bool optimize_forney = input_arg.empty() || input_arg == "optimize";
  // A fixed non-uniform trellis input is handled by the curve routine via
  // the gallager module directly.
  std::optional<eet::Dist> forney_fixed;
  if (!optimize_forney && input_arg != "uniform") {
    forney_fixed = eet::Dist(parse_double_list(input_arg));
  }

  bool is_xor = true;
  for (std::size_t a = 0; a < ch.op.left() && is_xor; ++a) {
    for (std::size_t b = 0; b < ch.op.right() && is_xor; ++b) {
      if (ch.op.apply(a, b) != static_cast<int>(a ^ b)) is_xor = false;
    }
  }
  if (!is_xor) {
    std::cerr << "note: non-xor combining operation; the shared marginal "
                 "constraint assumes identical stream alphabets\n";
  }

  const eet::ComparisonCurve curve =
      eet::comparison_curve(ch.dmc, ch.op, slots, rates, cfg, sync_overhead,
                            optimize_forney, p_star, forney_fixed);

  std::ostringstream os;
  if (opts.format == "csv") {
    os << "plotted_rate,forney_memory1,async_scaled\n";
    for (const auto& row : curve.rows) {
      os << fmt(row.plotted_rate) << "," << fmt(row.forney_memory1) << ","
         << fmt(row.async_scaled) << "\n";
    }
    os << "# summary,max_low_rate_rel_gap=" << fmt(curve.max_low_rate_rel_gap)
       << ",at_plotted_rate=" << fmt(curve.low_rate_gap_at) << "\n";
    os << "# summary,high_rate_rel_gap=" << fmt(curve.high_rate_rel_gap)
       << ",at_plotted_rate=" << fmt(curve.high_rate_gap_at) << "\n";
  } else {
    ordered_json doc;
    doc["command"] = "compare";
    doc["slots"] = slots;
    doc["seed"] = opts.seed;
    ordered_json rows_json = ordered_json::array();
    for (const auto& row : curve.rows) {
      ordered_json j;
      j["plotted_rate"] = fmt(row.plotted_rate);
      j["forney_memory1"] = fmt(row.forney_memory1);
      j["async_scaled"] = fmt(row.async_scaled);
      j["l_star"] = row.l_star;
      rows_json.push_back(j);
    }
    doc["points"] = rows_json;
    doc["max_low_rate_rel_gap"] = fmt(curve.max_low_rate_rel_gap);
    doc["max_low_rate_rel_gap_at"] = fmt(curve.low_rate_gap_at);
    doc["high_rate_rel_gap"] = fmt(curve.high_rate_rel_gap);
    doc["high_rate_rel_gap_at"] = fmt(curve.high_rate_gap_at);
    os << doc.dump(2) << "\n";
  }
  write_output(opts.out_path, os.str());
  return 0;
}

int run_simulate(const CommonOpts& opts, int k, int slots, double rate,
                 int messages, std::uint64_t trials, std::uint64_t batch,
                 bool two_codebooks, const std::string& type_arg) {
  const eet::ParsedChannel ch = eet::load_channel_spec(opts.channel);
  const eet::FrameLayout layout(k, slots);

  eet::TypeVector comp_type = [&]() {
    if (!type_arg.empty()) {
      const auto counts = parse_int_list(type_arg);
      return eet::TypeVector(counts, {counts.size()}, k);
    }
    const eet::MacChannel mac = eet::virtual_mac(ch.dmc, ch.op);
    const eet::Dist p_star = eet::symmetric_capacity_input(mac);
    return round_to_type(p_star, k);
  }();

  eet::MonteCarloConfig cfg{ch.dmc,
                            ch.op,
                            layout,
                            comp_type,
                            messages,
                            rate,
                            trials,
                            opts.seed,
                            batch,
                            two_codebooks,
                            env_workers()};

  const auto t0 = std::chrono::steady_clock::now();
  const eet::ErrorStats stats = eet::monte_carlo(cfg);
  const auto t1 = std::chrono::steady_clock::now();
  const double wall_s =
      std::chrono::duration_cast<std::chrono::duration<double>>(t1 - t0).count();
  // Wall time goes to stderr so the output file stays byte-deterministic.
  std::cerr << "wall_time_s=" << wall_s << "\n";

  ordered_json doc;
  doc["command"] = "simulate";
  doc["half_block"] = k;
  doc["slots"] = slots;
  doc["messages"] = stats.m;
  doc["realized_rate"] = fmt(stats.realized_rate);
  doc["trials"] = stats.trials;
  doc["seed"] = opts.seed;
  ordered_json type = ordered_json::array();
  for (auto c : comp_type.counts()) type.push_back(c);
  doc["composition_type"] = type;
  doc["two_codebooks"] = two_codebooks;
  doc["frame_errors"] = stats.frame_errors;
  doc["frame_error_rate"] = fmt(stats.frame_error_rate);
  doc["frame_error_wilson_lo"] = fmt(stats.frame_interval.lo);
  doc["frame_error_wilson_hi"] = fmt(stats.frame_interval.hi);
  doc["message_errors"] = stats.message_errors;
  doc["messages_total"] = stats.messages_total;
  doc["message_error_rate"] = fmt(stats.message_error_rate);
  write_output(opts.out_path, doc.dump(2) + "\n");
  return 0;
}

int run_verify_packing(const CommonOpts& opts, int k, int slots, int messages,
                       std::uint64_t trials, int slack_exp,
                       const std::string& type_arg, std::size_t alphabet,
                       std::uint64_t cap, bool summary_only) {
  eet::TypeVector comp_type = [&]() {
    if (!type_arg.empty()) {
      const auto counts = parse_int_list(type_arg);
      return eet::TypeVector(counts, {counts.size()}, k);
    }
    return round_to_type(eet::Dist::uniform(alphabet), k);
  }();

  const eet::VerifyLemmaConfig cfg{k,          slots, messages, comp_type,
                                   trials,     slack_exp, opts.seed, cap,
                                   !summary_only};

  const eet::LemmaReport report = eet::verify_lemma(cfg);

  ordered_json doc;
  doc["command"] = "verify-packing";
  doc["half_block"] = report.k;
  doc["slots"] = report.slots;
  doc["messages"] = report.m;
  doc["trials"] = report.trials;
  doc["slack_exp"] = report.slack_exp;
  doc["seed"] = opts.seed;
  doc["realized_rate"] = fmt(report.realized_rate);
  doc["type_entropy"] = fmt(report.type_entropy);
  doc["delta_n"] = fmt(report.delta_n);
  doc["rate_hypothesis_ok"] = report.rate_hypothesis_ok;
  if (!report.rate_hypothesis_ok) {
    doc["rate_hypothesis_warning"] =
        "realized rate is not below type entropy minus delta_n; the bound's "
        "hypothesis fails at this blocklength";
  }
  doc["cells"] = report.cells;
  doc["mean_failures"] = report.mean_failures;
  doc["mean_pass_fraction"] = fmt(report.mean_pass_fraction);
  doc["per_trial_pass_fraction"] = fmt(report.per_trial_pass_fraction);
  doc["trials_all_cells_pass"] = report.trials_all_cells_pass;
  doc["codebook_pass_fraction"] = fmt(report.codebook_pass_fraction);
  // Contiguous single-boundary pattern shapes; every wrong-word count from
  // 1 to 2*slots-2 is realizable, odd and even alike.
  ordered_json shapes = ordered_json::array();
  for (const auto& pat : eet::enumerate_irreducible(slots)) {
    ordered_json s;
    s["run_length"] = pat.run_length;
    s["wrong_words"] = pat.stream1_words + pat.stream2_words;
    s["stream1_words"] = pat.stream1_words;
    s["stream2_words"] = pat.stream2_words;
    s["positions"] = pat.multiplicity;
    s["representative"] = eet::pattern_to_string(pat.representative);
    shapes.push_back(s);
  }
  doc["irreducible_patterns"] = shapes;
  if (!summary_only) {
    ordered_json cells = ordered_json::array();
    for (const auto& cell : report.cell_details) {
      ordered_json c;
      c["pattern"] = eet::pattern_to_string(cell.pattern);
      c["self_overlap"] = cell.self_overlap;
      c["total_count"] = cell.total_count;
      c["trials_present"] = cell.trials_present;
      c["trials_failed"] = cell.trials_failed;
      c["mean_lhs"] = fmt(cell.mean_lhs);
      c["rhs"] = fmt(cell.rhs);
      c["mean_ok"] = cell.mean_ok;
      ordered_json types = ordered_json::array();
      for (const auto& tv : cell.types.v) {
        ordered_json t = ordered_json::array();
        for (auto cnt : tv.counts()) t.push_back(cnt);
        types.push_back(t);
      }
      c["types"] = types;
      cells.push_back(c);
    }
    doc["cell_details"] = cells;
  }
  write_output(opts.out_path, doc.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"error exponent toolkit: trellis and asynchronous multiple "
               "access exponents for virtual two-user channels"};
  app.require_subcommand(1);

  // gallager
  CommonOpts g_opts;
  std::string g_rates, g_input = "optimize";
  int g_memory = 1;
  auto* g_cmd = app.add_subcommand(
      "gallager", "time-varying trellis exponent curve");
  add_common(g_cmd, g_opts);
  g_cmd->add_option("--rates", g_rates, "rate grid start:step:stop")->required();
  g_cmd->add_option("--memory", g_memory, "trellis memory length a");
  g_cmd->add_option("--input", g_input,
                    "optimize (default), uniform, or a comma list");

  // async
  CommonOpts a_opts;
  std::string a_rates, a_pstar;
  int a_slots = 3, a_restarts = 32, a_iterations = 5000;
  bool a_oracle = false;
  auto* a_cmd = app.add_subcommand(
      "async", "asynchronous random-coding exponent curve");
  add_common(a_cmd, a_opts);
  a_cmd->add_option("--rates", a_rates, "per-window rate grid start:step:stop")
      ->required();
  a_cmd->add_option("--slots", a_slots, "codeword slots per frame (odd)");
  a_cmd->add_flag("--oracle", a_oracle,
                  "append the binary grid-oracle columns");
  a_cmd->add_option("--restarts", a_restarts, "solver restarts");
  a_cmd->add_option("--iterations", a_iterations, "solver iterations");
  a_cmd->add_option("--pstar", a_pstar, "override p* (comma list)");

  // compare
  CommonOpts c_opts;
  std::string c_rates, c_input = "optimize", c_pstar;
  int c_slots = 9, c_restarts = 32, c_iterations = 5000;
  bool c_sync = false;
  auto* c_cmd = app.add_subcommand(
      "compare", "both exponents on the half-blocklength scale");
  add_common(c_cmd, c_opts);
  c_cmd->add_option("--rates", c_rates, "per-window MAC rate grid start:step:stop")
      ->required();
  c_cmd->add_option("--slots", c_slots, "codeword slots per frame (odd)");
  c_cmd->add_flag("--sync-overhead", c_sync,
                  "scale both rate axes by (1 - 1/slots)");
  c_cmd->add_option("--input", c_input, "trellis curve input: optimize or uniform");
  c_cmd->add_option("--pstar", c_pstar, "override p* (comma list)");
  c_cmd->add_option("--restarts", c_restarts, "solver restarts");
  c_cmd->add_option("--iterations", c_iterations, "solver iterations");

  // simulate
  CommonOpts s_opts;
  int s_k = 8, s_slots = 5, s_messages = 0;
  double s_rate = 0.1;
  std::uint64_t s_trials = 1000, s_batch = 1;
  bool s_two = false;
  std::string s_type;
  auto* s_cmd = app.add_subcommand(
      "simulate", "Monte Carlo error measurement of the construction");
  add_common(s_cmd, s_opts);
  s_cmd->add_option("--half-block", s_k, "subblock length k (codewords are 2k)");
  s_cmd->add_option("--slots", s_slots, "codeword slots per frame (odd)");
  s_cmd->add_option("--rate", s_rate, "per-window target rate R");
  s_cmd->add_option("--messages", s_messages,
                    "codebook size M (overrides --rate)");
  s_cmd->add_option("--trials", s_trials, "frames to simulate");
  s_cmd->add_option("--batch", s_batch, "trials per fresh codebook");
  s_cmd->add_flag("--two-codebooks", s_two,
                  "independent codebooks per stream (period-2 variant)");
  s_cmd->add_option("--type", s_type,
                    "composition type counts (default: p* rounded to k)");

  // verify-packing
  CommonOpts v_opts;
  int v_k = 4, v_slots = 3, v_messages = 2, v_slack = 8;
  std::uint64_t v_trials = 200, v_cap = 20'000'000;
  std::size_t v_alphabet = 2;
  std::string v_type;
  bool v_summary = false;
  auto* v_cmd = app.add_subcommand(
      "verify-packing", "statistical check of the counting bound");
  add_common(v_cmd, v_opts, /*needs_channel=*/false);
  v_cmd->add_option("--half-block", v_k, "subblock length k");
  v_cmd->add_option("--slots", v_slots, "codeword slots per frame (odd)");
  v_cmd->add_option("--messages", v_messages, "codebook size M");
  v_cmd->add_option("--trials", v_trials, "random codebooks to sample");
  v_cmd->add_option("--slack-exp", v_slack, "polynomial factor exponent");
  v_cmd->add_option("--alphabet", v_alphabet, "input alphabet size");
  v_cmd->add_option("--type", v_type, "composition type counts (comma list)");
  v_cmd->add_option("--cap", v_cap, "tuple enumeration cap");
  v_cmd->add_flag("--summary-only", v_summary, "omit per-cell details");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (g_cmd->parsed()) return run_gallager(g_opts, g_rates, g_memory, g_input);
    if (a_cmd->parsed()) {
      return run_async(a_opts, a_rates, a_slots, a_oracle, a_restarts,
                       a_iterations, a_pstar);
    }
    if (c_cmd->parsed()) {
      return run_compare(c_opts, c_rates, c_slots, c_sync, c_input, c_pstar,
                         c_restarts, c_iterations);
    }
    if (s_cmd->parsed()) {
      return run_simulate(s_opts, s_k, s_slots, s_rate, s_messages, s_trials,
                          s_batch, s_two, s_type);
    }
    if (v_cmd->parsed()) {
      return run_verify_packing(v_opts, v_k, v_slots, v_messages, v_trials,
                                v_slack, v_type, v_alphabet, v_cap, v_summary);
    }
  } catch (const eet::SolverError& e) {
    std::cerr << "error: solver: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    const bool spec = what.rfind("channel spec", 0) == 0;
    std::cerr << "error: " << (spec ? "channel-spec" : "invalid-argument")
              << ": " << what << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
