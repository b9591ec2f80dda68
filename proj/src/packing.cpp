#include "eet/packing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace eet {

namespace {

// Coverage geometry of the shifted frame, 1-based subblocks.
int stream1_word(int s) { return (s + 1) / 2; }
int stream1_half(int s) { return s % 2 == 1 ? 0 : 1; }  // 0: first, 1: second
int stream2_word(int s, int slots) {
  if (s % 2 == 0) return s / 2;
  return s == 1 ? slots : (s - 1) / 2;
}
int stream2_half(int s) { return s % 2 == 0 ? 0 : 1; }

std::vector<int> bits_to_list(std::uint64_t mask) {
  std::vector<int> out;
  for (int s = 1; mask != 0; ++s, mask >>= 1) {
    if (mask & 1ULL) out.push_back(s);
  }
  return out;
}

}  // namespace

std::vector<int> ErrorPattern::s1_list() const { return bits_to_list(s1); }
std::vector<int> ErrorPattern::s2_list() const { return bits_to_list(s2); }
std::vector<int> ErrorPattern::s12_list() const { return bits_to_list(s12); }

std::string pattern_to_string(const ErrorPattern& p) {
  const auto join = [](const std::vector<int>& v) {
    std::ostringstream os;
    os << "{";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) os << ",";
      os << v[i];
    }
    os << "}";
    return os.str();
  };
  return "S1=" + join(p.s1_list()) + " S2=" + join(p.s2_list()) +
         " S12=" + join(p.s12_list());
}

ErrorPattern classify_tuple(const std::vector<int>& i_true,
                            const std::vector<int>& i_hat,
                            const std::vector<int>& j_true,
                            const std::vector<int>& j_hat,
                            const FrameLayout& layout) {
  const auto slots = static_cast<std::size_t>(layout.slots);
  if (i_true.size() != slots || i_hat.size() != slots ||
      j_true.size() != slots || j_hat.size() != slots) {
    throw std::invalid_argument("classify_tuple: vectors must have one entry per slot");
  }
  const std::size_t sync1 = static_cast<std::size_t>(layout.sync_slot_stream1()) - 1;
  const std::size_t sync2 = static_cast<std::size_t>(layout.sync_slot_stream2()) - 1;
  if (i_true[sync1] != 0 || i_hat[sync1] != 0 || j_true[sync2] != 0 ||
      j_hat[sync2] != 0) {
    throw std::invalid_argument("classify_tuple: synch slots must hold the synch word");
  }
  for (const auto* v : {&i_true, &i_hat, &j_true, &j_hat}) {
    for (int x : *v) {
      if (x < 0) throw std::invalid_argument("classify_tuple: negative message index");
    }
  }

  ErrorPattern p;
  for (int s = 1; s <= layout.subblocks(); ++s) {
    const std::size_t a = static_cast<std::size_t>(stream1_word(s)) - 1;
    const std::size_t b = static_cast<std::size_t>(stream2_word(s, layout.slots)) - 1;
    const bool d1 = i_true[a] != i_hat[a];
    const bool d2 = j_true[b] != j_hat[b];
    if (d1 && d2) {
      p.s12 |= ErrorPattern::bit(s);
    } else if (d1) {
      p.s1 |= ErrorPattern::bit(s);
    } else if (d2) {
      p.s2 |= ErrorPattern::bit(s);
    }
  }
  return p;
}

namespace {

// Pattern induced by the word-difference sets alone (used by the shape
// enumeration; synch exclusions are deliberately ignored there).
ErrorPattern pattern_from_word_sets(std::uint64_t words1, std::uint64_t words2,
                                    int slots) {
  ErrorPattern p;
  for (int s = 1; s <= 2 * slots; ++s) {
    const int a = stream1_word(s);
    const int b = stream2_word(s, slots);
    const bool d1 = (words1 >> (a - 1)) & 1ULL;
    const bool d2 = (words2 >> (b - 1)) & 1ULL;
    if (d1 && d2) {
      p.s12 |= ErrorPattern::bit(s);
    } else if (d1) {
      p.s1 |= ErrorPattern::bit(s);
    } else if (d2) {
      p.s2 |= ErrorPattern::bit(s);
    }
  }
  return p;
}

}  // namespace

std::vector<IrreduciblePattern> enumerate_irreducible(int slots) {
  if (slots < 3 || slots % 2 == 0) {
    throw std::invalid_argument("enumerate_irreducible: slots must be odd >= 3");
  }
  const int nsub = 2 * slots;
  // Group key: run length. Shapes exist for every circular position; the
  // two boundary subblocks are single-user, everything between is double.
  std::map<int, IrreduciblePattern> by_length;

  for (int start = 1; start <= nsub; ++start) {
    for (int len = 2; len <= nsub - 1; ++len) {
      const auto in_run = [&](int s) {
        const int rel = ((s - start) % nsub + nsub) % nsub;
        return rel < len;
      };
      // Words of each stream whose full coverage lies inside the run.
      std::uint64_t words1 = 0, words2 = 0;
      for (int t = 1; t <= slots; ++t) {
        if (in_run(2 * t - 1) && in_run(2 * t)) words1 |= 1ULL << (t - 1);
        const int s_first = 2 * t;
        const int s_second = (2 * t) % nsub + 1;  // 2t+1, wrapping to 1
        if (in_run(s_first) && in_run(s_second)) words2 |= 1ULL << (t - 1);
      }
      if (words1 == 0 && words2 == 0) continue;
      const ErrorPattern p = pattern_from_word_sets(words1, words2, slots);
      // Must cover exactly the run, with single-user boundaries and a
      // double-error interior.
      std::uint64_t run_mask = 0;
      for (int s = 1; s <= nsub; ++s) {
        if (in_run(s)) run_mask |= ErrorPattern::bit(s);
      }
      if (p.all() != run_mask) continue;
      const int end = (start - 1 + len - 1) % nsub + 1;
      const std::uint64_t boundary = ErrorPattern::bit(start) | ErrorPattern::bit(end);
      if ((p.s1 | p.s2) != boundary) continue;
      if (p.s12 != (run_mask & ~boundary)) continue;

      auto it = by_length.find(len);
      if (it == by_length.end()) {
        by_length.emplace(len, IrreduciblePattern{
                                   p, len, std::popcount(words1),
                                   std::popcount(words2), 1});
      } else {
        it->second.multiplicity += 1;
      }
    }
  }

  std::vector<IrreduciblePattern> out;
  out.reserve(by_length.size());
  for (auto& [len, pat] : by_length) out.push_back(pat);
  return out;
}

double rhs_bound(const ErrorPattern& pattern, const TypeSequence& types,
                 double r1, double r2, int k, int slots, int slack_exp) {
  const int nsub = 2 * slots;
  if (types.v.size() != static_cast<std::size_t>(nsub)) {
    throw std::invalid_argument("rhs_bound: need one type per subblock");
  }
  const double n = 2.0 * static_cast<double>(k);
  double log2rhs = static_cast<double>(slack_exp) * std::log2(n + 1.0) +
                   n * static_cast<double>(slots - 1) * (r1 + r2);
  for (int s = 1; s <= nsub; ++s) {
    const TypeVector& tv = types.v[static_cast<std::size_t>(s - 1)];
    if (tv.denominator() != k) {
      throw std::invalid_argument("rhs_bound: type denominator must be k");
    }
    const Joint v = tv.to_joint({"X", "Xh", "Y", "Yh"});
    const std::uint64_t b = ErrorPattern::bit(s);
    double info;
    double rate_credit = 0.0;
    if (pattern.s1 & b) {
      info = multi_information(v.marginal({"Xh", "X", "Y"}));
      rate_credit = r1;
    } else if (pattern.s2 & b) {
      info = multi_information(v.marginal({"Yh", "X", "Y"}));
      rate_credit = r2;
    } else if (pattern.s12 & b) {
      info = multi_information(v);
      rate_credit = r1 + r2;
    } else {
      info = multi_information(v.marginal({"X", "Y"}));
    }
    log2rhs -= static_cast<double>(k) * (info - rate_credit);
  }
  return std::exp2(log2rhs);
}

namespace {

struct CellKey {
  ErrorPattern pattern;
  TypeSequence types;
  auto operator<=>(const CellKey&) const = default;
};

// Calls visit(i, i_hat, j, j_hat) for every admissible message tuple: synch
// slots pinned to 0, all other slots over 1..m in each of the four vectors.
template <typename Visit>
void for_each_tuple(int m, const FrameLayout& layout, Visit&& visit) {
  const int slots = layout.slots;
  const int free_slots = slots - 1;
  const std::size_t sync1 = static_cast<std::size_t>(layout.sync_slot_stream1()) - 1;
  const std::size_t sync2 = static_cast<std::size_t>(layout.sync_slot_stream2()) - 1;

  std::vector<int> i_true(static_cast<std::size_t>(slots), 0);
  std::vector<int> i_hat(static_cast<std::size_t>(slots), 0);
  std::vector<int> j_true(static_cast<std::size_t>(slots), 0);
  std::vector<int> j_hat(static_cast<std::size_t>(slots), 0);

  std::vector<std::size_t> free1, free2;
  for (std::size_t t = 0; t < static_cast<std::size_t>(slots); ++t) {
    if (t != sync1) free1.push_back(t);
    if (t != sync2) free2.push_back(t);
  }

  const int digits = 4 * free_slots;
  std::vector<int> digit(static_cast<std::size_t>(digits), 1);
  while (true) {
    int d = 0;
    for (int f = 0; f < free_slots; ++f, ++d) i_true[free1[static_cast<std::size_t>(f)]] = digit[static_cast<std::size_t>(d)];
    for (int f = 0; f < free_slots; ++f, ++d) i_hat[free1[static_cast<std::size_t>(f)]] = digit[static_cast<std::size_t>(d)];
    for (int f = 0; f < free_slots; ++f, ++d) j_true[free2[static_cast<std::size_t>(f)]] = digit[static_cast<std::size_t>(d)];
    for (int f = 0; f < free_slots; ++f, ++d) j_hat[free2[static_cast<std::size_t>(f)]] = digit[static_cast<std::size_t>(d)];
    visit(i_true, i_hat, j_true, j_hat);

    int pos = digits - 1;
    while (pos >= 0 && digit[static_cast<std::size_t>(pos)] == m) {
      digit[static_cast<std::size_t>(pos)] = 1;
      --pos;
    }
    if (pos < 0) break;
    ++digit[static_cast<std::size_t>(pos)];
  }
}

TypeSequence types_of_tuple(const Codebook& cb, const std::vector<int>& i_true,
                            const std::vector<int>& i_hat,
                            const std::vector<int>& j_true,
                            const std::vector<int>& j_hat,
                            const FrameLayout& layout, std::size_t alphabet) {
  const int k = layout.k;
  TypeSequence ts;
  ts.v.reserve(static_cast<std::size_t>(layout.subblocks()));
  std::vector<std::int64_t> counts(alphabet * alphabet * alphabet * alphabet);
  for (int s = 1; s <= layout.subblocks(); ++s) {
    const std::size_t a = static_cast<std::size_t>(stream1_word(s)) - 1;
    const std::size_t b = static_cast<std::size_t>(stream2_word(s, layout.slots)) - 1;
    const int off1 = stream1_half(s) * k;
    const int off2 = stream2_half(s) * k;
    const auto& wx = cb.word(i_true[a]);
    const auto& wxh = cb.word(i_hat[a]);
    const auto& wy = cb.word(j_true[b]);
    const auto& wyh = cb.word(j_hat[b]);
    std::fill(counts.begin(), counts.end(), 0);
    for (int pos = 0; pos < k; ++pos) {
      const std::size_t idx =
          ((static_cast<std::size_t>(wx[static_cast<std::size_t>(off1 + pos)]) * alphabet +
            static_cast<std::size_t>(wxh[static_cast<std::size_t>(off1 + pos)])) *
               alphabet +
           static_cast<std::size_t>(wy[static_cast<std::size_t>(off2 + pos)])) *
              alphabet +
          static_cast<std::size_t>(wyh[static_cast<std::size_t>(off2 + pos)]);
      ++counts[idx];
    }
    ts.v.emplace_back(counts,
                      std::vector<std::size_t>{alphabet, alphabet, alphabet, alphabet},
                      static_cast<std::int64_t>(k));
  }
  return ts;
}

bool tuple_has_cross_stream_word(const std::vector<int>& i_true,
                                 const std::vector<int>& i_hat,
                                 const std::vector<int>& j_true,
                                 const std::vector<int>& j_hat,
                                 const FrameLayout& layout) {
  // A non-synch codebook word meeting itself across the two streams inside
  // one subblock (its first half against its own second half).
  for (int s = 1; s <= layout.subblocks(); ++s) {
    const std::size_t a = static_cast<std::size_t>(stream1_word(s)) - 1;
    const std::size_t b = static_cast<std::size_t>(stream2_word(s, layout.slots)) - 1;
    const int xs[2] = {i_true[a], i_hat[a]};
    const int ys[2] = {j_true[b], j_hat[b]};
    for (int xi : xs) {
      if (xi == 0) continue;
      for (int yi : ys) {
        if (xi == yi) return true;
      }
    }
  }
  return false;
}

std::uint64_t tuple_space_size(int m, int slots) {
  std::uint64_t total = 1;
  for (int i = 0; i < 4 * (slots - 1); ++i) {
    total *= static_cast<std::uint64_t>(m);
    if (total > (1ULL << 62)) return UINT64_MAX;
  }
  return total;
}

}  // namespace

std::uint64_t count_lhs(const Codebook& cb, const ErrorPattern& pattern,
                        const TypeSequence& types, const FrameLayout& layout,
                        std::uint64_t cap) {
  const int m = cb.message_count();
  const std::uint64_t space = tuple_space_size(m, layout.slots);
  if (space > cap) {
    std::ostringstream os;
    os << "count_lhs: enumeration needs " << space << " tuples, cap is " << cap;
    throw std::invalid_argument(os.str());
  }
  std::size_t alphabet = 1;
  for (std::size_t s : cb.comp_type().shape()) alphabet *= s;

  std::uint64_t count = 0;
  for_each_tuple(m, layout, [&](const std::vector<int>& i_true,
                                const std::vector<int>& i_hat,
                                const std::vector<int>& j_true,
                                const std::vector<int>& j_hat) {
    const ErrorPattern p = classify_tuple(i_true, i_hat, j_true, j_hat, layout);
    if (!(p == pattern)) return;
    const TypeSequence ts =
        types_of_tuple(cb, i_true, i_hat, j_true, j_hat, layout, alphabet);
    if (ts == types) ++count;
  });
  return count;
}

std::uint64_t pattern_tuple_count(const ErrorPattern& pattern,
                                  const FrameLayout& layout, int m) {
  // Words differing in each stream are determined by the pattern.
  std::uint64_t words1 = 0, words2 = 0;
  for (int t = 1; t <= layout.slots; ++t) {
    if ((pattern.s1 | pattern.s12) & ErrorPattern::bit(2 * t - 1)) {
      words1 |= 1ULL << (t - 1);
    }
    const int s_first = 2 * t;
    if ((pattern.s2 | pattern.s12) & ErrorPattern::bit(s_first)) {
      words2 |= 1ULL << (t - 1);
    }
  }
  const int a = std::popcount(words1);
  const int b = std::popcount(words2);
  const int free_slots = layout.slots - 1;
  double total = std::pow(static_cast<double>(m), 2.0 * free_slots) *
                 std::pow(static_cast<double>(m - 1), a + b);
  return static_cast<std::uint64_t>(std::llround(total));
}

LemmaReport verify_lemma(const VerifyLemmaConfig& cfg) {
  const FrameLayout layout(cfg.k, cfg.slots);
  const std::uint64_t space = tuple_space_size(cfg.m, cfg.slots);
  if (space > cfg.cap) {
    std::ostringstream os;
    os << "verify_lemma: enumeration needs " << space << " tuples per trial, cap is "
       << cfg.cap;
    throw std::invalid_argument(os.str());
  }
  std::size_t alphabet = 1;
  for (std::size_t s : cfg.comp_type.shape()) alphabet *= s;

  const int n = 2 * cfg.k;
  const double rate = std::log2(static_cast<double>(cfg.m)) / static_cast<double>(n);

  struct CellState {
    std::uint64_t total = 0;
    std::uint64_t present = 0;
    std::uint64_t failed = 0;
    bool overlap = false;
    double rhs = 0.0;
  };
  std::map<CellKey, CellState> cells;
  std::uint64_t all_pass_trials = 0;

  for (std::uint64_t trial = 0; trial < cfg.trials; ++trial) {
    Rng rng(Rng::derive(cfg.seed, trial));
    const Codebook cb = generate_codebook(rng, cfg.k, cfg.comp_type, cfg.m);

    std::map<CellKey, std::pair<std::uint64_t, bool>> local;
    for_each_tuple(cfg.m, layout, [&](const std::vector<int>& i_true,
                                      const std::vector<int>& i_hat,
                                      const std::vector<int>& j_true,
                                      const std::vector<int>& j_hat) {
      const ErrorPattern p = classify_tuple(i_true, i_hat, j_true, j_hat, layout);
      TypeSequence ts =
          types_of_tuple(cb, i_true, i_hat, j_true, j_hat, layout, alphabet);
      auto& slot = local[CellKey{p, std::move(ts)}];
      slot.first += 1;
      if (!slot.second) {
        slot.second =
            tuple_has_cross_stream_word(i_true, i_hat, j_true, j_hat, layout);
      }
    });

    bool trial_clean = true;
    for (auto& [key, val] : local) {
      auto it = cells.find(key);
      if (it == cells.end()) {
        CellState st;
        st.rhs = rhs_bound(key.pattern, key.types, rate, rate, cfg.k, cfg.slots,
                           cfg.slack_exp);
        it = cells.emplace(key, st).first;
      }
      CellState& st = it->second;
      st.total += val.first;
      st.present += 1;
      st.overlap = st.overlap || val.second;
      if (static_cast<double>(val.first) > st.rhs) {
        st.failed += 1;
        trial_clean = false;
      }
    }
    if (trial_clean) ++all_pass_trials;
  }

  LemmaReport report;
  report.k = cfg.k;
  report.slots = cfg.slots;
  report.m = cfg.m;
  report.trials = cfg.trials;
  report.slack_exp = cfg.slack_exp;
  report.realized_rate = rate;
  report.type_entropy = entropy(cfg.comp_type.to_dist());
  report.delta_n = 3.0 * std::log2(static_cast<double>(n)) /
                   static_cast<double>(n) * static_cast<double>(alphabet);
  report.rate_hypothesis_ok = rate < report.type_entropy - report.delta_n;
  report.cells = cells.size();

  std::uint64_t per_trial_failures = 0;
  for (auto& [key, st] : cells) {
    const double mean = static_cast<double>(st.total) / static_cast<double>(cfg.trials);
    const bool mean_ok = mean <= st.rhs;
    if (!mean_ok) ++report.mean_failures;
    per_trial_failures += st.failed;
    if (cfg.keep_cells) {
      report.cell_details.push_back(LemmaCell{key.pattern, key.types, st.total,
                                              st.present, st.failed, st.overlap,
                                              st.rhs, mean, mean_ok});
    }
  }
  const double cell_trials =
      static_cast<double>(cells.size()) * static_cast<double>(cfg.trials);
  report.per_trial_pass_fraction =
      cell_trials > 0.0 ? 1.0 - static_cast<double>(per_trial_failures) / cell_trials
                        : 1.0;
  report.mean_pass_fraction =
      report.cells > 0
          ? 1.0 - static_cast<double>(report.mean_failures) / static_cast<double>(report.cells)
          : 1.0;
  report.trials_all_cells_pass = all_pass_trials;
  report.codebook_pass_fraction =
      cfg.trials > 0
          ? static_cast<double>(all_pass_trials) / static_cast<double>(cfg.trials)
          : 1.0;
  return report;
}

}  // namespace eet
