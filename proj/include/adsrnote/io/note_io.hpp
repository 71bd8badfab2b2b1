#ifndef ADSRNOTE_IO_NOTE_IO_HPP
#define ADSRNOTE_IO_NOTE_IO_HPP

#include <string>
#include <vector>

#include "adsrnote/note_event.hpp"

namespace adsrnote {

// Standard MIDI file reader (format 0 or 1, PPQ division). Note-on /
// note-off pairs become NoteEvents; tempo changes are honored; sustain
// pedal (CC 64) and every other controller are ignored. Pitches outside
// the 88-key range (21..108) are an error. Parse errors name the byte
// offset.
std::vector<NoteEvent> read_midi_notes(const std::string& path);

// SMF type 0, single track, channel 0, program 0, fixed velocity 64,
// 480 ticks per quarter at 120 bpm. Byte output is deterministic for a
// given note list.
void write_midi_notes(const std::string& path,
                      const std::vector<NoteEvent>& notes);

// Plain-text mirror: one "start_sec<TAB>end_sec<TAB>midi_pitch" per line.
std::vector<NoteEvent> read_tsv_notes(const std::string& path);
void write_tsv_notes(const std::string& path,
                     const std::vector<NoteEvent>& notes);

// Dispatch by extension: .mid/.midi -> MIDI, .tsv/.txt -> TSV.
std::vector<NoteEvent> read_notes(const std::string& path);
void write_notes(const std::string& path, const std::vector<NoteEvent>& notes);

}  // namespace adsrnote

#endif  // ADSRNOTE_IO_NOTE_IO_HPP
