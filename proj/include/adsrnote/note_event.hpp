#ifndef ADSRNOTE_NOTE_EVENT_HPP
#define ADSRNOTE_NOTE_EVENT_HPP

#include <vector>

namespace adsrnote {

inline constexpr int kNumKeys = 88;
inline constexpr int kMidiPitchOfKey0 = 21;  // A0

// One piano note: start/end in seconds, key index 0..87 (key 0 = MIDI 21).
struct NoteEvent {
  double start = 0.0;
  double end = 0.0;
  int key = 0;

  bool operator==(const NoteEvent&) const = default;
};

// Throws std::invalid_argument if 0 <= start < end or 0 <= key <= 87 fails.
void validate_note(const NoteEvent& note);
void validate_notes(const std::vector<NoteEvent>& notes);

// Canonical ordering: by start, then key, then end.
void sort_notes(std::vector<NoteEvent>& notes);

}  // namespace adsrnote

#endif  // ADSRNOTE_NOTE_EVENT_HPP
