#ifndef ADSRNOTE_SEGMENT_FILTER_HPP
#define ADSRNOTE_SEGMENT_FILTER_HPP

#include <vector>

#include "adsrnote/activation.hpp"
#include "adsrnote/hmm.hpp"
#include "adsrnote/note_event.hpp"

namespace adsrnote {

// Final binary decision rule: a segment is kept iff at least one raw onset
// activation reaches theta during its {A0, A1} frames AND at least one raw
// intermediate activation reaches theta during its {D0, D1, S} frames.
struct FilterRule {
  double theta = 0.5;  // in [0, 1]
};

// keep (true) / discard (false). Only frames inside
// [start_frame, last S frame] are inspected. Throws std::invalid_argument
// when the segment never reached S or lies outside the activation bounds.
bool apply_filter(const FilterRule& rule, const NoteSegment& segment,
                  const ActivationMatrix& activations);

// Kept segments converted to note events:
// start = start_frame / fps, end = end_frame / fps.
std::vector<NoteEvent> filter_all(const FilterRule& rule,
                                  const std::vector<NoteSegment>& segments,
                                  const ActivationMatrix& activations);

}  // namespace adsrnote

#endif  // ADSRNOTE_SEGMENT_FILTER_HPP
