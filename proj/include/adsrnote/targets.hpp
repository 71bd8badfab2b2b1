#ifndef ADSRNOTE_TARGETS_HPP
#define ADSRNOTE_TARGETS_HPP

#include <string>
#include <vector>

#include "adsrnote/activation.hpp"
#include "adsrnote/note_event.hpp"

namespace adsrnote {

// Binary target streams per key, with event elongation:
//   onset frames  = {f-1, f, f+1} ∩ [0, T),  f = floor(start * fps)
//   offset frames = {g-1, g, g+1} ∩ [0, T),  g = floor(end * fps)
//   intermediate  = all frames f' with f'/fps in [start, end)
// Overlapping notes on the same key OR their marks together. Notes reaching
// beyond T are clipped and reported through `warnings` (when non-null);
// an invalid key throws.
TargetMatrix derive_targets(const std::vector<NoteEvent>& notes, int num_frames,
                            double frame_rate,
                            std::vector<std::string>* warnings = nullptr);

}  // namespace adsrnote

#endif  // ADSRNOTE_TARGETS_HPP
