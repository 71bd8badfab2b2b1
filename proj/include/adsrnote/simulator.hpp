#ifndef ADSRNOTE_SIMULATOR_HPP
#define ADSRNOTE_SIMULATOR_HPP

#include <cstdint>
#include <vector>

#include "adsrnote/activation.hpp"
#include "adsrnote/note_event.hpp"

namespace adsrnote {

// Synthetic network-output generator: ADSR-shaped pseudo-probability bumps
// from ground-truth notes, plus a configurable error model (dropout inside
// notes, spurious blips, additive Gaussian noise). Deterministic given seed.
struct SimConfig {
  double onset_peak = 0.95;         // in (0, 1]
  double intermediate_peak = 0.95;  // in (0, 1]
  double offset_peak = 0.95;        // in (0, 1]
  int bump_width = 3;               // frames, odd; mirrors target elongation
  double noise_sigma = 0.0;         // additive Gaussian, per cell
  double blip_prob = 0.0;           // spurious activation per frame-key
  double dropout_prob = 0.0;        // zeroing a frame inside a note
  std::uint64_t seed = 0;

  void validate() const;
};

// Onset stream: bump of bump_width frames centered at floor(start * fps);
// intermediate: plateau over [start, end); offset: bump at floor(end * fps).
// Then dropout, blips, additive noise, clipping to [0, 1].
ActivationMatrix simulate(const std::vector<NoteEvent>& notes, int frames,
                          double frame_rate, const SimConfig& config);

}  // namespace adsrnote

#endif  // ADSRNOTE_SIMULATOR_HPP
