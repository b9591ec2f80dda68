#include "eet/trellis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace eet {

FrameLayout::FrameLayout(int k_, int slots_) : k(k_), slots(slots_) {
  if (k < 1) throw std::invalid_argument("FrameLayout: k must be >= 1");
  if (slots < 3 || slots % 2 == 0) {
    throw std::invalid_argument("FrameLayout: slots must be odd and >= 3");
  }
}

Codebook::Codebook(std::vector<std::vector<int>> words, TypeVector comp_type)
    : words_(std::move(words)), comp_type_(std::move(comp_type)) {
  if (words_.size() < 2) {
    throw std::invalid_argument("Codebook: need the synch word plus messages");
  }
  const std::size_t n = words_[0].size();
  if (n == 0 || n % 2 != 0) {
    throw std::invalid_argument("Codebook: blocklength must be even");
  }
  const std::int64_t k = static_cast<std::int64_t>(n) / 2;
  if (comp_type_.denominator() != k) {
    throw std::invalid_argument("Codebook: composition denominator must be k");
  }
  std::size_t alphabet = 1;
  for (std::size_t s : comp_type_.shape()) alphabet *= s;
  for (const auto& w : words_) {
    if (w.size() != n) throw std::invalid_argument("Codebook: ragged words");
    const auto first = type_of(std::span<const int>(w.data(), static_cast<std::size_t>(k)), alphabet);
    const auto second = type_of(std::span<const int>(w.data() + k, static_cast<std::size_t>(k)), alphabet);
    if (!(first == comp_type_) || !(second == comp_type_)) {
      throw std::invalid_argument(
          "Codebook: every half must carry the composition type");
    }
  }
}

std::vector<int> Codebook::first_half(int index) const {
  const auto& w = word(index);
  return std::vector<int>(w.begin(), w.begin() + k());
}

std::vector<int> Codebook::second_half(int index) const {
  const auto& w = word(index);
  return std::vector<int>(w.begin() + k(), w.end());
}

namespace {

bool op_symmetric(const BinaryOp& op) {
  if (op.left() != op.right()) return false;
  for (std::size_t a = 0; a < op.left(); ++a) {
    for (std::size_t b = 0; b < op.right(); ++b) {
      if (op.apply(a, b) != op.apply(b, a)) return false;
    }
  }
  return true;
}

std::vector<int> combine(const std::vector<int>& s1, const std::vector<int>& s2,
                         const BinaryOp& op) {
  std::vector<int> out(s1.size());
  for (std::size_t i = 0; i < s1.size(); ++i) {
    out[i] = op.apply(static_cast<std::size_t>(s1[i]),
                      static_cast<std::size_t>(s2[i]));
  }
  return out;
}

}  // namespace

TrellisCode::TrellisCode(const Codebook& cb, const BinaryOp& op)
    : k_(cb.k()), message_count_(cb.message_count()) {
  // Shared codebook: at odd interleaved steps the stream-1 word is current,
  // at even steps it is previous. A symmetric op makes the two tables equal,
  // which is exactly the time-invariance of the construction.
  time_invariant_ = op_symmetric(op);
  const int states = message_count_ + 1;
  const int tables = time_invariant_ ? 1 : 2;
  emissions_.resize(static_cast<std::size_t>(tables));
  for (int parity = 0; parity < tables; ++parity) {
    auto& table = emissions_[static_cast<std::size_t>(parity)];
    table.resize(static_cast<std::size_t>(states) * states);
    for (int cur = 0; cur < states; ++cur) {
      for (int prev = 0; prev < states; ++prev) {
        const auto idx = static_cast<std::size_t>(cur) * states + prev;
        if (parity == 0) {
          table[idx] = combine(cb.first_half(cur), cb.second_half(prev), op);
        } else {
          table[idx] = combine(cb.second_half(prev), cb.first_half(cur), op);
        }
      }
    }
  }
}

TrellisCode::TrellisCode(const Codebook& cb_stream1, const Codebook& cb_stream2,
                         const BinaryOp& op)
    : k_(cb_stream1.k()), message_count_(cb_stream1.message_count()) {
  if (cb_stream2.k() != k_ || cb_stream2.message_count() != message_count_) {
    throw std::invalid_argument("TrellisCode: codebook shape mismatch");
  }
  time_invariant_ = false;  // two codebooks alternate with period 2
  const int states = message_count_ + 1;
  emissions_.resize(2);
  for (int parity = 0; parity < 2; ++parity) {
    auto& table = emissions_[static_cast<std::size_t>(parity)];
    table.resize(static_cast<std::size_t>(states) * states);
    for (int cur = 0; cur < states; ++cur) {
      for (int prev = 0; prev < states; ++prev) {
        const auto idx = static_cast<std::size_t>(cur) * states + prev;
        if (parity == 0) {
          // odd step: current message is a stream-1 word
          table[idx] = combine(cb_stream1.first_half(cur),
                               cb_stream2.second_half(prev), op);
        } else {
          // even step: current message is a stream-2 word
          table[idx] = combine(cb_stream1.second_half(prev),
                               cb_stream2.first_half(cur), op);
        }
      }
    }
  }
}

const std::vector<int>& TrellisCode::emission(int current, int previous,
                                              int step) const {
  const int states = message_count_ + 1;
  if (current < 0 || current >= states || previous < 0 || previous >= states) {
    throw std::invalid_argument("TrellisCode::emission: message out of range");
  }
  const std::size_t parity =
      emissions_.size() == 1 ? 0 : static_cast<std::size_t>((step - 1) & 1);
  return emissions_[parity][static_cast<std::size_t>(current) * states + previous];
}

Codebook generate_codebook(Rng& rng, int k, const TypeVector& comp_type, int m) {
  if (m < 1) throw std::invalid_argument("generate_codebook: m must be >= 1");
  if (comp_type.denominator() != k) {
    throw std::invalid_argument("generate_codebook: composition denominator != k");
  }
  std::vector<std::vector<int>> words;
  words.reserve(static_cast<std::size_t>(m) + 1);
  for (int i = 0; i <= m; ++i) {
    std::vector<int> w = sample_type_class(comp_type, rng);
    std::vector<int> second = sample_type_class(comp_type, rng);
    w.insert(w.end(), second.begin(), second.end());
    words.push_back(std::move(w));
  }
  return Codebook(std::move(words), comp_type);
}

namespace {

void check_messages(const std::vector<int>& messages_1,
                    const std::vector<int>& messages_2, int m,
                    const FrameLayout& layout) {
  const auto slots = static_cast<std::size_t>(layout.slots);
  if (messages_1.size() != slots || messages_2.size() != slots) {
    throw std::invalid_argument("encode_frame: message vectors must have one entry per slot");
  }
  for (int v : messages_1) {
    if (v < 0 || v > m) throw std::invalid_argument("encode_frame: message index out of range");
  }
  for (int v : messages_2) {
    if (v < 0 || v > m) throw std::invalid_argument("encode_frame: message index out of range");
  }
  if (messages_1[static_cast<std::size_t>(layout.sync_slot_stream1() - 1)] != 0 ||
      messages_2[static_cast<std::size_t>(layout.sync_slot_stream2() - 1)] != 0) {
    throw std::invalid_argument("encode_frame: synch slots must hold the synch word");
  }
}

}  // namespace

std::vector<int> encode_frame(const std::vector<int>& messages_1,
                              const std::vector<int>& messages_2,
                              const Codebook& cb, const FrameLayout& layout,
                              const BinaryOp& op) {
  check_messages(messages_1, messages_2, cb.message_count(), layout);
  if (cb.k() != layout.k) {
    throw std::invalid_argument("encode_frame: codebook half length != layout k");
  }
  const int n = layout.n();
  const int window = layout.window();

  std::vector<int> stream1(static_cast<std::size_t>(window));
  std::vector<int> stream2_concat(static_cast<std::size_t>(window));
  for (int slot = 0; slot < layout.slots; ++slot) {
    const auto& w1 = cb.word(messages_1[static_cast<std::size_t>(slot)]);
    const auto& w2 = cb.word(messages_2[static_cast<std::size_t>(slot)]);
    for (int i = 0; i < n; ++i) {
      stream1[static_cast<std::size_t>(slot * n + i)] = w1[static_cast<std::size_t>(i)];
      stream2_concat[static_cast<std::size_t>(slot * n + i)] = w2[static_cast<std::size_t>(i)];
    }
  }
  // Stream 2 rotates right by k inside the window: it opens with the last k
  // symbols of its final (synch) word.
  std::vector<int> out(static_cast<std::size_t>(window));
  for (int p = 0; p < window; ++p) {
    const int src = (p - layout.k + window) % window;
    out[static_cast<std::size_t>(p)] =
        op.apply(static_cast<std::size_t>(stream1[static_cast<std::size_t>(p)]),
                 static_cast<std::size_t>(stream2_concat[static_cast<std::size_t>(src)]));
  }
  return out;
}

std::vector<int> interleave_messages(const std::vector<int>& messages_1,
                                     const std::vector<int>& messages_2) {
  if (messages_1.size() != messages_2.size()) {
    throw std::invalid_argument("interleave_messages: length mismatch");
  }
  std::vector<int> m;
  m.reserve(2 * messages_1.size());
  for (std::size_t t = 0; t < messages_1.size(); ++t) {
    m.push_back(messages_1[t]);
    m.push_back(messages_2[t]);
  }
  return m;
}

void deinterleave_messages(const std::vector<int>& interleaved,
                           std::vector<int>& messages_1,
                           std::vector<int>& messages_2) {
  if (interleaved.size() % 2 != 0) {
    throw std::invalid_argument("deinterleave_messages: odd length");
  }
  const std::size_t slots = interleaved.size() / 2;
  messages_1.assign(slots, 0);
  messages_2.assign(slots, 0);
  for (std::size_t t = 0; t < slots; ++t) {
    messages_1[t] = interleaved[2 * t];
    messages_2[t] = interleaved[2 * t + 1];
  }
}

std::vector<int> encode_interleaved(const std::vector<int>& interleaved,
                                    const TrellisCode& tc,
                                    const FrameLayout& layout) {
  if (interleaved.size() != static_cast<std::size_t>(layout.interleaved_steps())) {
    throw std::invalid_argument("encode_interleaved: wrong number of steps");
  }
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(layout.window()));
  int prev = 0;  // initial memory state is the synch word
  for (int s = 1; s <= layout.interleaved_steps(); ++s) {
    const int cur = interleaved[static_cast<std::size_t>(s - 1)];
    const auto& sub = tc.emission(cur, prev, s);
    out.insert(out.end(), sub.begin(), sub.end());
    prev = cur;
  }
  return out;
}

TrellisCode trellis_view(const Codebook& cb, const BinaryOp& op) {
  return TrellisCode(cb, op);
}

std::vector<int> simulate_channel(const std::vector<int>& input, const Dmc& dmc,
                                  Rng& rng) {
  std::vector<int> out(input.size());
  std::vector<std::vector<double>> rows;
  rows.reserve(dmc.inputs());
  for (std::size_t x = 0; x < dmc.inputs(); ++x) rows.push_back(dmc.row(x).probs());
  for (std::size_t i = 0; i < input.size(); ++i) {
    const int x = input[i];
    if (x < 0 || static_cast<std::size_t>(x) >= dmc.inputs()) {
      throw std::invalid_argument("simulate_channel: symbol out of range");
    }
    out[i] = static_cast<int>(rng.categorical(rows[static_cast<std::size_t>(x)]));
  }
  return out;
}

namespace {

struct ViterbiNode {
  double metric = -std::numeric_limits<double>::infinity();
  int back = -1;
  bool reachable = false;
};

std::vector<int> backtrack(const std::vector<std::vector<ViterbiNode>>& dp,
                           int steps, int state) {
  std::vector<int> path(static_cast<std::size_t>(steps));
  int cur = state;
  for (int s = steps; s >= 1; --s) {
    path[static_cast<std::size_t>(s - 1)] = cur;
    cur = dp[static_cast<std::size_t>(s)][static_cast<std::size_t>(cur)].back;
  }
  return path;
}

}  // namespace

std::vector<int> viterbi_decode(const std::vector<int>& output,
                                const TrellisCode& tc, const Dmc& dmc,
                                const FrameLayout& layout) {
  const int steps = layout.interleaved_steps();
  const int k = layout.k;
  if (output.size() != static_cast<std::size_t>(layout.window())) {
    throw std::invalid_argument("viterbi_decode: output length != window");
  }
  if (tc.k() != k) {
    throw std::invalid_argument("viterbi_decode: trellis half length mismatch");
  }
  const int m = tc.message_count();
  const int states = m + 1;

  // Precompute log-likelihood lookups (zeros map to -infinity).
  std::vector<double> loglik(dmc.inputs() * dmc.outputs());
  for (std::size_t x = 0; x < dmc.inputs(); ++x) {
    for (std::size_t z = 0; z < dmc.outputs(); ++z) {
      const double w = dmc.w(x, z);
      loglik[x * dmc.outputs() + z] =
          w > 0.0 ? std::log2(w) : -std::numeric_limits<double>::infinity();
    }
  }
  const auto subblock_loglik = [&](const std::vector<int>& emitted, int step) {
    double ll = 0.0;
    const int base = (step - 1) * k;
    for (int i = 0; i < k; ++i) {
      const int x = emitted[static_cast<std::size_t>(i)];
      const int z = output[static_cast<std::size_t>(base + i)];
      if (z < 0 || static_cast<std::size_t>(z) >= dmc.outputs()) {
        throw std::invalid_argument("viterbi_decode: output symbol out of range");
      }
      ll += loglik[static_cast<std::size_t>(x) * dmc.outputs() +
                   static_cast<std::size_t>(z)];
    }
    return ll;
  };

  // dp[s][state]: best metric over paths ending in message `state` after
  // step s. Messages at the two forced steps are pinned to the synch word;
  // every other step ranges over the message indices 1..m.
  std::vector<std::vector<ViterbiNode>> dp(
      static_cast<std::size_t>(steps) + 1,
      std::vector<ViterbiNode>(static_cast<std::size_t>(states)));
  dp[0][0].metric = 0.0;
  dp[0][0].reachable = true;

  const auto allowed = [&](int step) -> std::pair<int, int> {
    if (step == layout.forced_step_1() || step == layout.forced_step_2()) {
      return {0, 0};
    }
    return {1, m};
  };

  for (int s = 1; s <= steps; ++s) {
    const auto [lo, hi] = allowed(s);
    const auto [plo, phi] = s == 1 ? std::pair<int, int>{0, 0} : allowed(s - 1);
    for (int cur = lo; cur <= hi; ++cur) {
      ViterbiNode& node = dp[static_cast<std::size_t>(s)][static_cast<std::size_t>(cur)];
      for (int prev = plo; prev <= phi; ++prev) {
        const ViterbiNode& pnode =
            dp[static_cast<std::size_t>(s - 1)][static_cast<std::size_t>(prev)];
        if (!pnode.reachable) continue;
        const double metric =
            pnode.metric + subblock_loglik(tc.emission(cur, prev, s), s);
        if (!node.reachable || metric > node.metric) {
          node.metric = metric;
          node.back = prev;
          node.reachable = true;
        } else if (metric == node.metric) {
          // Exact tie: keep the lexicographically smaller prefix path.
          const auto cand = backtrack(dp, s - 1, prev);
          const auto incumbent = backtrack(dp, s - 1, node.back);
          if (cand < incumbent) node.back = prev;
        }
      }
    }
  }

  const ViterbiNode& final_node =
      dp[static_cast<std::size_t>(steps)][0];  // final step is forced to 0
  if (!final_node.reachable) {
    throw std::runtime_error("viterbi_decode: no admissible path");
  }
  return backtrack(dp, steps, 0);
}

WilsonInterval wilson_interval(std::uint64_t errors, std::uint64_t trials) {
  if (trials == 0) return {0.0, 1.0};
  const double z = 1.959963984540054;  // 95%
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(errors) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = phat + z2 / (2.0 * n);
  const double spread =
      z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  const double lo = errors == 0 ? 0.0 : std::max(0.0, (center - spread) / denom);
  const double hi =
      errors == trials ? 1.0 : std::min(1.0, (center + spread) / denom);
  return {lo, hi};
}

int messages_for_rate(double rate, int n) {
  if (rate <= 0.0) throw std::invalid_argument("messages_for_rate: rate <= 0");
  const double m = std::round(std::exp2(rate * static_cast<double>(n)));
  if (m < 1.0) return 1;
  if (m > 1e9) throw std::invalid_argument("messages_for_rate: codebook too large");
  return static_cast<int>(m);
}

ErrorStats monte_carlo(const MonteCarloConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("monte_carlo: trials >= 1");
  const FrameLayout& layout = cfg.layout;
  const int n = layout.n();
  const int m = cfg.m > 0 ? cfg.m : messages_for_rate(cfg.rate, n);
  const std::uint64_t batch = std::max<std::uint64_t>(cfg.batch, 1);

  const int slots = layout.slots;
  const int steps = layout.interleaved_steps();
  const std::uint64_t informative =
      static_cast<std::uint64_t>(steps - 2);  // non-synch interleaved slots

  struct Tally {
    std::uint64_t frame_errors = 0;
    std::uint64_t message_errors = 0;
  };
  const int workers = std::max(cfg.workers, 1);
  std::vector<Tally> tallies(static_cast<std::size_t>(workers));

  const auto worker_fn = [&](int w) {
    Tally& tally = tallies[static_cast<std::size_t>(w)];
    std::uint64_t cached_batch = UINT64_MAX;
    std::vector<TrellisCode> tcs;
    std::vector<Codebook> cbs;
    for (std::uint64_t t = static_cast<std::uint64_t>(w); t < cfg.trials;
         t += static_cast<std::uint64_t>(workers)) {
      const std::uint64_t b = t / batch;
      if (b != cached_batch) {
        cached_batch = b;
        tcs.clear();
        cbs.clear();
        Rng cb_rng(Rng::derive(cfg.seed, 2 * b));
        cbs.push_back(generate_codebook(cb_rng, layout.k, cfg.comp_type, m));
        if (cfg.two_codebooks) {
          Rng cb2_rng(Rng::derive(cfg.seed, 2 * b + 1));
          cbs.push_back(generate_codebook(cb2_rng, layout.k, cfg.comp_type, m));
          tcs.emplace_back(cbs[0], cbs[1], cfg.op);
        } else {
          tcs.emplace_back(cbs[0], cfg.op);
        }
      }
      Rng rng(Rng::derive(cfg.seed, (1ULL << 40) + t));
      std::vector<int> m1(static_cast<std::size_t>(slots));
      std::vector<int> m2(static_cast<std::size_t>(slots));
      for (int s = 0; s < slots; ++s) {
        m1[static_cast<std::size_t>(s)] = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(m)));
        m2[static_cast<std::size_t>(s)] = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(m)));
      }
      m1[static_cast<std::size_t>(layout.sync_slot_stream1() - 1)] = 0;
      m2[static_cast<std::size_t>(layout.sync_slot_stream2() - 1)] = 0;

      const std::vector<int> interleaved = interleave_messages(m1, m2);
      const std::vector<int> sent = encode_interleaved(interleaved, tcs[0], layout);
      const std::vector<int> received = simulate_channel(sent, cfg.dmc, rng);
      const std::vector<int> decoded = viterbi_decode(received, tcs[0], cfg.dmc, layout);

      std::uint64_t wrong = 0;
      for (int s = 1; s <= steps; ++s) {
        if (s == layout.forced_step_1() || s == layout.forced_step_2()) continue;
        if (decoded[static_cast<std::size_t>(s - 1)] !=
            interleaved[static_cast<std::size_t>(s - 1)]) {
          ++wrong;
        }
      }
      tally.message_errors += wrong;
      if (wrong > 0) ++tally.frame_errors;
    }
  };

  if (workers <= 1) {
    worker_fn(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn, w);
    for (auto& th : pool) th.join();
  }

  std::uint64_t frame_errors = 0, message_errors = 0;
  for (const Tally& t : tallies) {
    frame_errors += t.frame_errors;
    message_errors += t.message_errors;
  }
  const std::uint64_t messages_total = informative * cfg.trials;
  return ErrorStats{
      cfg.trials,
      frame_errors,
      message_errors,
      messages_total,
      static_cast<double>(frame_errors) / static_cast<double>(cfg.trials),
      static_cast<double>(message_errors) / static_cast<double>(messages_total),
      wilson_interval(frame_errors, cfg.trials),
      std::log2(static_cast<double>(m)) / static_cast<double>(n),
      m};
}

}  // namespace eet
