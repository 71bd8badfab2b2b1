#include "adsrnote/segment_filter.hpp"

#include <stdexcept>
#include <string>

namespace adsrnote {

bool apply_filter(const FilterRule& rule, const NoteSegment& segment,
                  const ActivationMatrix& activations) {
  if (rule.theta < 0.0 || rule.theta > 1.0) {
    throw std::invalid_argument("theta must lie in [0,1]");
  }
  if (!segment.reached_s) {
    throw std::invalid_argument(
        "segment filter requires candidates that reached S");
  }
  if (segment.key < 0 || segment.key >= kNumKeys || segment.start_frame < 0 ||
      segment.end_frame > activations.frames ||
      segment.end_frame - segment.start_frame !=
          static_cast<int>(segment.states.size())) {
    throw std::invalid_argument(
        "segment [" + std::to_string(segment.start_frame) + ", " +
        std::to_string(segment.end_frame) + ") of key " +
        std::to_string(segment.key) + " does not fit a " +
        std::to_string(activations.frames) + "-frame activation matrix");
  }

  // Attack clause over {A0, A1} frames, decay/sustain clause over
  // {D0, D1, S}; both must see at least one raw activation >= theta.
  // The segment's own frames end at the last S, so nothing outside
  // [start, last S] is ever read.
  float attack_max = 0.0f;
  float sustain_max = 0.0f;
  for (std::size_t i = 0; i < segment.states.size(); ++i) {
    const int t = segment.start_frame + static_cast<int>(i);
    switch (segment.states[i]) {
      case AdsrState::A0:
      case AdsrState::A1:
        attack_max = std::max(attack_max,
                              activations.at(t, segment.key, kOnsetStream));
        break;
      case AdsrState::D0:
      case AdsrState::D1:
      case AdsrState::S:
        sustain_max = std::max(
            sustain_max, activations.at(t, segment.key, kIntermediateStream));
        break;
      default:
        break;
    }
  }
  return attack_max >= rule.theta && sustain_max >= rule.theta;
}

std::vector<NoteEvent> filter_all(const FilterRule& rule,
                                  const std::vector<NoteSegment>& segments,
                                  const ActivationMatrix& activations) {
  std::vector<NoteEvent> notes;
  notes.reserve(segments.size());
  for (const NoteSegment& segment : segments) {
    if (apply_filter(rule, segment, activations)) {
      notes.push_back({segment.start_frame / activations.frame_rate,
                       segment.end_frame / activations.frame_rate,
                       segment.key});
    }
  }
  return notes;
}

}  // namespace adsrnote
