#ifndef EET_PACKING_HPP
#define EET_PACKING_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "eet/prob.hpp"
#include "eet/trellis.hpp"

namespace eet {

// Which subblocks of the doubled frame carry single-user or double errors.
// Subblocks are 1-based over [1, 2*slots]; the sets are disjoint by
// construction. Stream-1 word t covers subblocks {2t-1, 2t}; the shifted
// stream-2 word t covers {2t, 2t+1} with word `slots` wrapping to {2K, 1}.
struct ErrorPattern {
  std::uint64_t s1 = 0;   // only stream 1 wrong
  std::uint64_t s2 = 0;   // only stream 2 wrong
  std::uint64_t s12 = 0;  // both wrong

  std::uint64_t all() const { return s1 | s2 | s12; }
  bool empty() const { return all() == 0; }
  bool operator==(const ErrorPattern&) const = default;
  auto operator<=>(const ErrorPattern&) const = default;

  static std::uint64_t bit(int subblock) { return 1ULL << (subblock - 1); }
  std::vector<int> s1_list() const;
  std::vector<int> s2_list() const;
  std::vector<int> s12_list() const;
};

std::string pattern_to_string(const ErrorPattern& p);

// Per-subblock joint types of (x_true, x_hat, y_true, y_hat), 2*slots
// entries with denominator k.
struct TypeSequence {
  std::vector<TypeVector> v;

  bool operator==(const TypeSequence&) const = default;
  auto operator<=>(const TypeSequence&) const = default;
};

// Error pattern induced by a tuple of true and competing message vectors
// (entries per slot, synch slots pinned to 0 in all four).
ErrorPattern classify_tuple(const std::vector<int>& i_true,
                            const std::vector<int>& i_hat,
                            const std::vector<int>& j_true,
                            const std::vector<int>& j_hat,
                            const FrameLayout& layout);

// A contiguous error pattern whose two boundary subblocks carry single-user
// errors and whose interior is double-error, together with the number of
// positions it can occupy once the synch constraints are respected.
struct IrreduciblePattern {
  ErrorPattern representative;  // lowest admissible position
  int run_length;               // subblocks covered
  int stream1_words;            // wrong words of stream 1
  int stream2_words;            // wrong words of stream 2
  int multiplicity;             // admissible positions
};

std::vector<IrreduciblePattern> enumerate_irreducible(int slots);

// The counting bound for one (pattern, type-sequence) cell:
//   (n+1)^slack_exp * 2^{ n(K-1)(R1+R2) - sum_{s not in S} k I(X;Y)
//     - sum_{S1} k [I(Xh;X;Y) - R1] - sum_{S2} k [I(Yh;X;Y) - R2]
//     - sum_{S12} k [I(Xh;Yh;X;Y) - R1 - R2] }
double rhs_bound(const ErrorPattern& pattern, const TypeSequence& types,
                 double r1, double r2, int k, int slots, int slack_exp);

// Exact number of message tuples (i, i_hat, j, j_hat) in the pattern class
// whose per-subblock joint types match `types`, for one shared codebook.
// Throws when M^{4(slots-1)} exceeds the cap.
std::uint64_t count_lhs(const Codebook& cb, const ErrorPattern& pattern,
                        const TypeSequence& types, const FrameLayout& layout,
                        std::uint64_t cap = 20'000'000);

struct LemmaCell {
  ErrorPattern pattern;
  TypeSequence types;
  std::uint64_t total_count = 0;   // across all trials
  std::uint64_t trials_present = 0;
  std::uint64_t trials_failed = 0;  // per-trial count above the bound
  bool self_overlap = false;        // some tuple shares a word across streams
  double rhs = 0.0;
  double mean_lhs = 0.0;
  bool mean_ok = true;
};

struct LemmaReport {
  int k = 0;
  int slots = 0;
  int m = 0;
  std::uint64_t trials = 0;
  int slack_exp = 0;
  double realized_rate = 0.0;   // R1 = R2 = log2(M) / n
  double delta_n = 0.0;         // (3 log2 n / n) max(|X|, |Y|)
  double type_entropy = 0.0;    // H of the composition type
  bool rate_hypothesis_ok = false;  // realized rate < H - delta_n
  std::uint64_t cells = 0;
  std::uint64_t mean_failures = 0;
  double per_trial_pass_fraction = 1.0;
  double mean_pass_fraction = 1.0;
  // Existence form: codebooks whose every cell obeys the bound. Random
  // word coincidences (distinct indices carrying equal sequences) can push
  // individual cells above the bound in expectation, while typical
  // codebooks avoid those configurations entirely.
  std::uint64_t trials_all_cells_pass = 0;
  double codebook_pass_fraction = 1.0;
  std::vector<LemmaCell> cell_details;
};

struct VerifyLemmaConfig {
  int k;
  int slots;
  int m;
  TypeVector comp_type;
  std::uint64_t trials = 200;
  int slack_exp = 8;
  std::uint64_t seed = 7;
  std::uint64_t cap = 20'000'000;
  bool keep_cells = true;  // include per-cell details in the report
};

// Samples `trials` random shared codebooks, tallies every nonempty
// (pattern, type-sequence) cell over all admissible message tuples, and
// checks both the per-trial counts and the across-trials mean against the
// bound. The mean check is the statement the random-selection argument
// guarantees.
LemmaReport verify_lemma(const VerifyLemmaConfig& cfg);

// Product formula for the number of tuples inducing exactly this pattern
// (every tuple is counted in exactly one pattern class).
std::uint64_t pattern_tuple_count(const ErrorPattern& pattern,
                                  const FrameLayout& layout, int m);

}  // namespace eet

#endif
