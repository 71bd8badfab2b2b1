#ifndef ADSRNOTE_HMM_HPP
#define ADSRNOTE_HMM_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adsrnote/activation.hpp"

namespace adsrnote {

// The seven states of the per-key note HMM: N (no note), two attack states,
// two decay states, sustain, release. The enum order is also the
// deterministic tie-break order of the decoder (lower index wins).
enum class AdsrState : int { N = 0, A0, A1, D0, D1, S, R };

inline constexpr int kNumAdsrStates = 7;

const char* to_string(AdsrState s);
// Throws std::invalid_argument for unknown names.
AdsrState adsr_state_from_string(const std::string& name);

// Which activation stream a state emits, optionally complemented
// (the no-note state emits 1 - onset by default).
struct EmissionSelector {
  Stream stream = kOnsetStream;
  bool complement = false;
};

// Structural HMM description. The transition support is fixed to the edge
// set {N->N, N->A0, A0->N, A0->A1, A1->D0, A1->N, D0->D1, D0->N, D1->S,
// D1->N, S->S, S->A0, S->R, R->N}; entries outside it must be exactly 0,
// rows must sum to 1. Probabilities and the emission map are configurable,
// the support is not.
struct AdsrHmmSpec {
  std::array<std::array<double, kNumAdsrStates>, kNumAdsrStates> transitions{};
  std::array<double, kNumAdsrStates> initial{};
  std::array<EmissionSelector, kNumAdsrStates> emissions{};
  // Lower bound on emission values before the log. Besides keeping exact
  // 0/1 activations finite, it bounds the penalty of an isolated bad frame
  // inside a note, so one zeroed prediction cannot out-cost a whole
  // decoded segment.
  double emission_floor = 0.05;

  // Throws std::invalid_argument on structural violations.
  void validate() const;
};

// True iff `from -> to` is in the structural edge set.
bool adsr_edge_allowed(AdsrState from, AdsrState to);

// Engineering defaults standing in for hand-tuned transition values:
//   N->N .70, N->A0 .30; A0->A1 .998, A0->N .002 (likewise A1, D0, D1);
//   S->S .975, S->R .02, S->A0 .005; R->N 1. Initial mass entirely on N.
// Tuned (see default_hmm_spec) so sustained plateaus score better inside
// S than idling in N regardless of note duration, and so isolated bad
// frames inside a note stay affordable.
AdsrHmmSpec default_hmm_spec();

// log of the state's mapped stream value, floored at spec.emission_floor so
// activations of exactly 0 or 1 stay finite.
double emission_logprob(const AdsrHmmSpec& spec, AdsrState state,
                        const float* activation_triple);

struct ViterbiResult {
  std::vector<AdsrState> path;
  double log_score = 0.0;
};

// Maximum log-probability state path for one key. `key_activations` holds
// T consecutive (onset, intermediate, offset) triples. Computed in the log
// domain; structural zeros are -inf (never floored). Ties break toward the
// lower-indexed state, both per step and at the final frame.
ViterbiResult viterbi(const AdsrHmmSpec& spec,
                      std::span<const float> key_activations);

// A decoded candidate note: [start_frame, end_frame) on one key.
// start_frame is the frame of the initiating A0; end_frame is the frame of
// the first R, the frame of a retriggering A0 (S->A0), or T at end of
// input. `states` covers [start_frame, end_frame) — A0 through the last
// sounding state, never R.
struct NoteSegment {
  int key = 0;
  int start_frame = 0;
  int end_frame = 0;
  bool reached_s = false;
  std::vector<AdsrState> states;
};

// Segments of one decoded path. Runs that never reach S are dropped here,
// which enforces the minimum note length of 5 frames (0.1 s at 50 frames/s):
// A0, A1, D0, D1, S each consume at least one frame.
std::vector<NoteSegment> extract_segments(const std::vector<AdsrState>& path,
                                          int key);

// Per-key Viterbi + segment extraction over all 88 keys; keys are
// independent and may be decoded concurrently. Result is sorted by
// (key, start_frame) regardless of thread count.
std::vector<NoteSegment> decode_all(const AdsrHmmSpec& spec,
                                    const ActivationMatrix& activations,
                                    int threads = 1);

// Human-editable JSON form (7x7 matrix, initial vector, floor, stream map).
std::string hmm_spec_to_json(const AdsrHmmSpec& spec);
AdsrHmmSpec hmm_spec_from_json(const std::string& text);

}  // namespace adsrnote

#endif  // ADSRNOTE_HMM_HPP
