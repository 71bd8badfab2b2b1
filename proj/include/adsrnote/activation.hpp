#ifndef ADSRNOTE_ACTIVATION_HPP
#define ADSRNOTE_ACTIVATION_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "adsrnote/note_event.hpp"

namespace adsrnote {

// Stream order of the per-key triple, everywhere: onset, intermediate, offset.
inline constexpr int kNumStreams = 3;
enum Stream : int { kOnsetStream = 0, kIntermediateStream = 1, kOffsetStream = 2 };

// Per-frame, per-key pseudo-probabilities for {onset, intermediate, offset},
// values in [0, 1]. Layout: frame-major, then key, stream axis last.
struct ActivationMatrix {
  int frames = 0;
  double frame_rate = 50.0;
  std::vector<float> values;  // frames * 88 * 3

  ActivationMatrix() = default;
  ActivationMatrix(int num_frames, double fps);

  float at(int t, int key, int stream) const {
    return values[(static_cast<std::size_t>(t) * 88 + key) * 3 + stream];
  }
  float& at(int t, int key, int stream) {
    return values[(static_cast<std::size_t>(t) * 88 + key) * 3 + stream];
  }

  // Throws std::invalid_argument on shape/value violations.
  void validate() const;
};

// Binary training targets of identical shape (streams onset, intermediate,
// offset), derived from note annotations.
struct TargetMatrix {
  int frames = 0;
  double frame_rate = 50.0;
  std::vector<std::uint8_t> values;  // frames * 88 * 3, each 0 or 1

  TargetMatrix() = default;
  TargetMatrix(int num_frames, double fps);

  std::uint8_t at(int t, int key, int stream) const {
    return values[(static_cast<std::size_t>(t) * 88 + key) * 3 + stream];
  }
  std::uint8_t& at(int t, int key, int stream) {
    return values[(static_cast<std::size_t>(t) * 88 + key) * 3 + stream];
  }
};

}  // namespace adsrnote

#endif  // ADSRNOTE_ACTIVATION_HPP
