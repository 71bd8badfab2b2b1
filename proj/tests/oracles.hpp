// Test-only reference implementations, deliberately independent of the
// library code paths they cross-check.
#ifndef ADSRNOTE_TESTS_ORACLES_HPP
#define ADSRNOTE_TESTS_ORACLES_HPP

#include <span>
#include <vector>

#include "adsrnote/hmm.hpp"
#include "adsrnote/note_eval.hpp"
#include "adsrnote/note_event.hpp"

namespace adsrnote::testing {

// O(n^2) direct DFT magnitudes |X_k|, k = 0..n/2.
std::vector<double> naive_dft_magnitude(std::span<const double> signal);

struct BruteForceViterbi {
  double log_score;
  std::vector<AdsrState> path;  // lexicographically smallest maximizer
};

// Exhaustive search over all structurally valid paths (positive-probability
// edges and initial states only). Scores accumulate left to right exactly
// like the decoder, so equality checks can be bit-exact.
BruteForceViterbi brute_force_viterbi(const AdsrHmmSpec& spec,
                                      std::span<const float> key_activations);

// Log score of one fixed path under the given HMM (left-to-right accumulation);
// -inf for structurally impossible paths.
double path_log_score(const AdsrHmmSpec& spec,
                      const std::vector<AdsrState>& path,
                      std::span<const float> key_activations);

// Maximum matching cardinality by exhaustive assignment search.
int brute_force_matching_size(const std::vector<NoteEvent>& reference,
                              const std::vector<NoteEvent>& estimate,
                              const MatchingConfig& config);

}  // namespace adsrnote::testing

#endif  // ADSRNOTE_TESTS_ORACLES_HPP
