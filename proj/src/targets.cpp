#include "adsrnote/targets.hpp"

#include <cmath>
#include <stdexcept>

namespace adsrnote {

namespace {

void mark(TargetMatrix& m, int frame, int key, int stream) {
  if (frame >= 0 && frame < m.frames) m.at(frame, key, stream) = 1;
}

// Smallest frame f with f / fps >= s. The division, not its algebraic
// inverse, is authoritative, so boundary frames land exactly where the
// [s, e) definition puts them.
int first_frame_at_or_after(double seconds, double fps) {
  int f = static_cast<int>(std::ceil(seconds * fps));
  while (f > 0 && (f - 1) / fps >= seconds) --f;
  while (f / fps < seconds) ++f;
  return f;
}

}  // namespace

TargetMatrix derive_targets(const std::vector<NoteEvent>& notes, int num_frames,
                            double frame_rate,
                            std::vector<std::string>* warnings) {
  if (num_frames < 0) {
    throw std::invalid_argument("num_frames must be nonnegative");
  }
  TargetMatrix targets(num_frames, frame_rate);
  for (const NoteEvent& note : notes) {
    validate_note(note);
    if (note.start * frame_rate >= num_frames && warnings != nullptr) {
      warnings->push_back("note (start=" + std::to_string(note.start) +
                          ", end=" + std::to_string(note.end) +
                          ", key=" + std::to_string(note.key) +
                          ") lies beyond the " + std::to_string(num_frames) +
                          "-frame target matrix; clipped");
    } else if (note.end * frame_rate > num_frames && warnings != nullptr) {
      warnings->push_back("note ending at " + std::to_string(note.end) +
                          " s extends past the target matrix; clipped");
    }

    const int onset = static_cast<int>(std::floor(note.start * frame_rate));
    const int offset = static_cast<int>(std::floor(note.end * frame_rate));
    for (int d = -1; d <= 1; ++d) {
      mark(targets, onset + d, note.key, kOnsetStream);
      mark(targets, offset + d, note.key, kOffsetStream);
    }
    const int first = first_frame_at_or_after(note.start, frame_rate);
    for (int f = first; f < num_frames && f / frame_rate < note.end; ++f) {
      mark(targets, f, note.key, kIntermediateStream);
    }
  }
  return targets;
}

}  // namespace adsrnote
