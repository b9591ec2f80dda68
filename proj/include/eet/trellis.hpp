#ifndef EET_TRELLIS_HPP
#define EET_TRELLIS_HPP

#include <cstdint>
#include <vector>

#include "eet/channels.hpp"
#include "eet/prob.hpp"
#include "eet/rng.hpp"

namespace eet {

// Frame geometry. A frame holds `slots` (odd, = 2l+1) codeword slots of
// blocklength n = 2k per stream; stream 2 is circularly shifted by k inside
// the n*slots window, i.e. transmitted with delay (l + 1/2) n. The synch
// word (index 0) sits in stream-1 slot l+1 and stream-2 slot `slots`.
struct FrameLayout {
  int k;      // half blocklength
  int slots;  // codeword slots per frame (odd, >= 3)

  FrameLayout(int k_, int slots_);

  int n() const { return 2 * k; }
  int l() const { return (slots - 1) / 2; }
  int delay() const { return l() * n() + k; }           // (l + 1/2) n
  int window() const { return n() * slots; }            // symbols per frame
  int subblocks() const { return 2 * slots; }           // k-long pieces
  int sync_slot_stream1() const { return l() + 1; }     // 1-based slots
  int sync_slot_stream2() const { return slots; }
  int interleaved_steps() const { return 2 * slots; }
  // Interleaved positions (1-based) forced to the synch word.
  int forced_step_1() const { return 2 * sync_slot_stream1() - 1; }  // = slots
  int forced_step_2() const { return 2 * slots; }
};

// M message words plus the synch word (index 0), each of length n = 2k over
// the input alphabet; both halves of every word carry the same composition
// type (denominator k).
class Codebook {
 public:
  Codebook(std::vector<std::vector<int>> words, TypeVector comp_type);

  int message_count() const { return static_cast<int>(words_.size()) - 1; }
  int n() const { return static_cast<int>(words_[0].size()); }
  int k() const { return n() / 2; }
  const std::vector<int>& word(int index) const { return words_.at(static_cast<std::size_t>(index)); }
  const TypeVector& comp_type() const { return comp_type_; }

  std::vector<int> first_half(int index) const;
  std::vector<int> second_half(int index) const;

 private:
  std::vector<std::vector<int>> words_;  // words_[0] is the synch word
  TypeVector comp_type_;
};

// Per-state emission table of the induced memory-1 encoder: step s emits
// first_half(word[current]) xor second_half(word[previous]), independent of
// s. Built either from one shared codebook or from two independent ones (the
// two-codebook variant alternates tables with period 2).
class TrellisCode {
 public:
  TrellisCode(const Codebook& cb, const BinaryOp& op);
  TrellisCode(const Codebook& cb_stream1, const Codebook& cb_stream2,
              const BinaryOp& op);

  int k() const { return k_; }
  int message_count() const { return message_count_; }
  bool time_invariant() const { return time_invariant_; }

  // Emission for (current message, previous message) at interleaved step s
  // (1-based; the step index only matters for the two-codebook variant).
  const std::vector<int>& emission(int current, int previous, int step) const;

 private:
  int k_;
  int message_count_;
  bool time_invariant_;
  // emissions_[parity][current * (M+1) + previous]
  std::vector<std::vector<std::vector<int>>> emissions_;
};

// Draws M+1 words; each half sampled independently and uniformly from the
// type class of comp_type.
Codebook generate_codebook(Rng& rng, int k, const TypeVector& comp_type, int m);

// XOR-combined frame: stream-1 concatenation x(i_1)..x(i_slots) combined
// symbolwise (via op) with the stream-2 concatenation circularly shifted by
// k within the window. Synch slots must hold index 0.
std::vector<int> encode_frame(const std::vector<int>& messages_1,
                              const std::vector<int>& messages_2,
                              const Codebook& cb, const FrameLayout& layout,
                              const BinaryOp& op);

// Same frame through the interleaved memory-1 view: the concatenation of
// emission(m_s, m_{s-1}) over steps s = 1..2*slots with m_0 = 0,
// m = (i_1, j_1, i_2, j_2, ...).
std::vector<int> encode_interleaved(const std::vector<int>& interleaved,
                                    const TrellisCode& tc,
                                    const FrameLayout& layout);

TrellisCode trellis_view(const Codebook& cb, const BinaryOp& op);

// Interleave (i, j) message vectors into m and back.
std::vector<int> interleave_messages(const std::vector<int>& messages_1,
                                     const std::vector<int>& messages_2);
void deinterleave_messages(const std::vector<int>& interleaved,
                           std::vector<int>& messages_1,
                           std::vector<int>& messages_2);

// Per-symbol i.i.d. channel draw.
std::vector<int> simulate_channel(const std::vector<int>& input, const Dmc& dmc,
                                  Rng& rng);

// Maximum-likelihood message sequence over all trellis paths obeying the
// synch-slot constraints and the known initial state 0; exact ties resolve
// to the lexicographically smallest interleaved message sequence.
std::vector<int> viterbi_decode(const std::vector<int>& output,
                                const TrellisCode& tc, const Dmc& dmc,
                                const FrameLayout& layout);

struct WilsonInterval {
  double lo;
  double hi;
};

// 95% score interval for a binomial proportion.
WilsonInterval wilson_interval(std::uint64_t errors, std::uint64_t trials);

struct ErrorStats {
  std::uint64_t trials;
  std::uint64_t frame_errors;
  std::uint64_t message_errors;
  std::uint64_t messages_total;
  double frame_error_rate;
  double message_error_rate;
  WilsonInterval frame_interval;
  double realized_rate;  // log2(M)/n per stream
  int m;                 // realized codebook size
};

struct MonteCarloConfig {
  Dmc dmc;
  BinaryOp op;
  FrameLayout layout;
  TypeVector comp_type;
  int m;                     // messages per codebook (0: derive from rate)
  double rate = 0.0;         // per-window target rate when m == 0
  std::uint64_t trials = 1;
  std::uint64_t seed = 1;
  std::uint64_t batch = 1;   // trials per fresh codebook
  bool two_codebooks = false;
  int workers = 1;
};

// Codebook-averaged Monte Carlo error measurement: a fresh random codebook
// every `batch` trials, uniform messages in the non-synch slots, ML decoding,
// deterministic for a fixed seed regardless of worker count.
ErrorStats monte_carlo(const MonteCarloConfig& cfg);

// round(2^{nR}) with the realized rate reported back by the caller.
int messages_for_rate(double rate, int n);

}  // namespace eet

#endif
