#include "adsrnote/activation.hpp"

#include <stdexcept>
#include <string>

#include "adsrnote/note_event.hpp"

namespace adsrnote {

ActivationMatrix::ActivationMatrix(int num_frames, double fps)
    : frames(num_frames),
      frame_rate(fps),
      values(static_cast<std::size_t>(num_frames) * kNumKeys * kNumStreams, 0.0f) {}

void ActivationMatrix::validate() const {
  const std::size_t expected =
      static_cast<std::size_t>(frames) * kNumKeys * kNumStreams;
  if (values.size() != expected) {
    throw std::invalid_argument("activation matrix size " +
                                std::to_string(values.size()) +
                                " does not match " + std::to_string(frames) +
                                " frames x 88 x 3");
  }
  for (float v : values) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw std::invalid_argument("activation value outside [0,1]: " +
                                  std::to_string(v));
    }
  }
}

TargetMatrix::TargetMatrix(int num_frames, double fps)
    : frames(num_frames),
      frame_rate(fps),
      values(static_cast<std::size_t>(num_frames) * kNumKeys * kNumStreams, 0) {}

}  // namespace adsrnote
