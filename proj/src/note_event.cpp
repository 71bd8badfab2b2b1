#include "adsrnote/note_event.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace adsrnote {

void validate_note(const NoteEvent& note) {
  if (!(note.start >= 0.0) || !(note.start < note.end)) {
    throw std::invalid_argument("note times must satisfy 0 <= start < end, got [" +
                                std::to_string(note.start) + ", " +
                                std::to_string(note.end) + ")");
  }
  if (note.key < 0 || note.key >= kNumKeys) {
    throw std::invalid_argument("note key out of range 0..87: " +
                                std::to_string(note.key));
  }
}

void validate_notes(const std::vector<NoteEvent>& notes) {
  for (const auto& n : notes) validate_note(n);
}

void sort_notes(std::vector<NoteEvent>& notes) {
  std::sort(notes.begin(), notes.end(), [](const NoteEvent& a, const NoteEvent& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.key != b.key) return a.key < b.key;
    return a.end < b.end;
  });
}

}  // namespace adsrnote
