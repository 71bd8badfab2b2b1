#include "adsrnote/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "adsrnote/rng.hpp"
#include "adsrnote/targets.hpp"

namespace adsrnote {

void SimConfig::validate() const {
  auto check_peak = [](double p, const char* name) {
    if (!(p > 0.0 && p <= 1.0)) {
      throw std::invalid_argument(std::string(name) + " peak must lie in (0,1]");
    }
  };
  check_peak(onset_peak, "onset");
  check_peak(intermediate_peak, "intermediate");
  check_peak(offset_peak, "offset");
  if (bump_width < 1 || bump_width % 2 == 0) {
    throw std::invalid_argument("bump_width must be odd and positive");
  }
  if (noise_sigma < 0.0) {
    throw std::invalid_argument("noise sigma must be nonnegative");
  }
  if (blip_prob < 0.0 || blip_prob > 1.0 || dropout_prob < 0.0 ||
      dropout_prob > 1.0) {
    throw std::invalid_argument("probabilities must lie in [0,1]");
  }
}

ActivationMatrix simulate(const std::vector<NoteEvent>& notes, int frames,
                          double frame_rate, const SimConfig& config) {
  config.validate();
  validate_notes(notes);
  ActivationMatrix acts(frames, frame_rate);

  // Clean ADSR-shaped pseudo probabilities: reuse the target geometry
  // (bumps mirror the three-frame target elongation when bump_width == 3).
  const double peaks[kNumStreams] = {config.onset_peak, config.intermediate_peak,
                                     config.offset_peak};
  const int half = config.bump_width / 2;
  auto bump = [&](int center, int key, int stream) {
    for (int f = center - half; f <= center + half; ++f) {
      if (f >= 0 && f < frames) {
        acts.at(f, key, stream) =
            std::max(acts.at(f, key, stream), static_cast<float>(peaks[stream]));
      }
    }
  };
  for (const NoteEvent& note : notes) {
    bump(static_cast<int>(std::floor(note.start * frame_rate)), note.key,
         kOnsetStream);
    bump(static_cast<int>(std::floor(note.end * frame_rate)), note.key,
         kOffsetStream);
  }
  // Intermediate plateaus via the target builder's frame rule.
  const TargetMatrix plateau = derive_targets(notes, frames, frame_rate);
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < kNumKeys; ++k) {
      if (plateau.at(t, k, kIntermediateStream)) {
        acts.at(t, k, kIntermediateStream) =
            std::max(acts.at(t, k, kIntermediateStream),
                     static_cast<float>(peaks[kIntermediateStream]));
      }
    }
  }

  Rng rng(config.seed);
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < kNumKeys; ++k) {
      if (rng.uniform() < config.dropout_prob) {
        for (int s = 0; s < kNumStreams; ++s) acts.at(t, k, s) = 0.0f;
      }
      if (rng.uniform() < config.blip_prob) {
        const int s = static_cast<int>(rng.uniform_int(kNumStreams));
        acts.at(t, k, s) =
            std::max(acts.at(t, k, s), static_cast<float>(peaks[s]));
      }
    }
  }
  if (config.noise_sigma > 0.0) {
    for (float& v : acts.values) {
      v = static_cast<float>(v + rng.normal(0.0, config.noise_sigma));
    }
  }
  for (float& v : acts.values) v = std::clamp(v, 0.0f, 1.0f);
  return acts;
}

}  // namespace adsrnote
