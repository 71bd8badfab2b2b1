#include "adsrnote/io/note_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace adsrnote {

namespace {

[[noreturn]] void fail(const std::string& path, std::size_t offset,
                       const std::string& what) {
  throw std::runtime_error(path + ": " + what + " at byte offset " +
                           std::to_string(offset));
}

struct MidiReader {
  const std::string& bytes;
  const std::string& path;
  std::size_t pos = 0;

  std::uint8_t u8(const char* what) {
    if (pos >= bytes.size()) fail(path, pos, std::string("truncated ") + what);
    return static_cast<std::uint8_t>(bytes[pos++]);
  }
  std::uint16_t u16be(const char* what) {
    const std::uint16_t hi = u8(what), lo = u8(what);
    return static_cast<std::uint16_t>(hi << 8 | lo);
  }
  std::uint32_t u32be(const char* what) {
    const std::uint32_t hi = u16be(what), lo = u16be(what);
    return hi << 16 | lo;
  }
  std::uint32_t varint() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const std::uint8_t b = u8("variable-length quantity");
      v = v << 7 | (b & 0x7f);
      if (!(b & 0x80)) return v;
    }
    fail(path, pos, "variable-length quantity longer than 4 bytes");
  }
  void skip(std::size_t n, const char* what) {
    if (pos + n > bytes.size()) fail(path, pos, std::string("truncated ") + what);
    pos += n;
  }
};

struct RawNote {
  std::uint64_t on_tick;
  std::uint64_t off_tick;
  int pitch;
};

}  // namespace

std::vector<NoteEvent> read_midi_notes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  MidiReader r{bytes, path};

  if (bytes.size() < 14 || bytes.compare(0, 4, "MThd") != 0) {
    fail(path, 0, "missing MThd header");
  }
  r.pos = 4;
  const std::uint32_t header_len = r.u32be("header length");
  const std::uint16_t format = r.u16be("format");
  const std::uint16_t num_tracks = r.u16be("track count");
  const std::uint16_t division = r.u16be("division");
  if (format > 1) fail(path, 8, "only SMF format 0 and 1 are supported");
  if (division & 0x8000) fail(path, 12, "SMPTE division is not supported");
  if (division == 0) fail(path, 12, "division must be positive");
  r.skip(header_len - 6, "header");

  // (tick, usec per quarter) tempo map plus raw note pairing, FIFO per
  // (channel, pitch). Note-on with velocity 0 counts as note-off.
  std::map<std::uint64_t, std::uint32_t> tempo_map;
  std::vector<RawNote> raw_notes;
  std::uint64_t max_tick = 0;

  for (int track = 0; track < num_tracks; ++track) {
    if (r.pos + 8 > bytes.size() || bytes.compare(r.pos, 4, "MTrk") != 0) {
      fail(path, r.pos, "missing MTrk header");
    }
    r.pos += 4;
    const std::uint32_t track_len = r.u32be("track length");
    const std::size_t track_end = r.pos + track_len;
    if (track_end > bytes.size()) fail(path, r.pos, "track overruns file");

    std::uint64_t tick = 0;
    std::uint8_t running_status = 0;
    std::map<std::pair<int, int>, std::deque<std::size_t>> pending;

    auto note_off = [&](int channel, int pitch) {
      auto& queue = pending[{channel, pitch}];
      if (queue.empty()) return;  // stray note-off, ignored
      raw_notes[queue.front()].off_tick = tick;
      queue.pop_front();
    };

    while (r.pos < track_end) {
      tick += r.varint();
      max_tick = std::max(max_tick, tick);
      std::uint8_t status = static_cast<std::uint8_t>(bytes[r.pos]);
      if (status & 0x80) {
        ++r.pos;
        if (status < 0xf0) running_status = status;
      } else {
        if (running_status == 0) fail(path, r.pos, "data byte without status");
        status = running_status;
      }

      if (status == 0xff) {
        const std::uint8_t type = r.u8("meta type");
        const std::uint32_t len = r.varint();
        if (type == 0x51 && len == 3) {
          const std::uint32_t usec = static_cast<std::uint32_t>(r.u8("tempo")) << 16 |
                                     static_cast<std::uint32_t>(r.u8("tempo")) << 8 |
                                     r.u8("tempo");
          tempo_map[tick] = usec;
        } else {
          r.skip(len, "meta event");
        }
      } else if (status == 0xf0 || status == 0xf7) {
        const std::uint32_t len = r.varint();
        r.skip(len, "sysex event");
      } else {
        const int kind = status >> 4;
        const int channel = status & 0x0f;
        switch (kind) {
          case 0x9: {  // note on
            const int pitch = r.u8("note number");
            const int velocity = r.u8("velocity");
            if (velocity == 0) {
              note_off(channel, pitch);
            } else {
              pending[{channel, pitch}].push_back(raw_notes.size());
              raw_notes.push_back({tick, UINT64_MAX, pitch});
            }
            break;
          }
          case 0x8: {  // note off
            const int pitch = r.u8("note number");
            r.u8("velocity");
            note_off(channel, pitch);
            break;
          }
          case 0xa:  // aftertouch
          case 0xb:  // controller (incl. CC64 sustain: deliberately ignored)
          case 0xe:  // pitch bend
            r.skip(2, "channel event");
            break;
          case 0xc:  // program change
          case 0xd:  // channel pressure
            r.skip(1, "channel event");
            break;
          default:
            fail(path, r.pos, "unexpected status byte");
        }
      }
    }
    // Close anything left hanging at the end of the track.
    for (auto& [key, queue] : pending) {
      for (std::size_t idx : queue) raw_notes[idx].off_tick = tick;
    }
  }

  // Piecewise-linear tick -> seconds conversion across tempo segments.
  if (!tempo_map.contains(0)) tempo_map[0] = 500000;
  std::vector<std::pair<std::uint64_t, double>> anchors;  // (tick, seconds)
  double seconds = 0.0;
  std::uint64_t prev_tick = 0;
  std::uint32_t prev_tempo = tempo_map.at(0);
  for (const auto& [t, usec] : tempo_map) {
    seconds += static_cast<double>(t - prev_tick) * prev_tempo / (1e6 * division);
    anchors.emplace_back(t, seconds);
    prev_tick = t;
    prev_tempo = usec;
  }
  auto tick_to_seconds = [&](std::uint64_t t) {
    auto it = std::upper_bound(
        anchors.begin(), anchors.end(), t,
        [](std::uint64_t v, const auto& a) { return v < a.first; });
    --it;
    const std::uint32_t tempo = tempo_map.at(it->first);
    return it->second +
           static_cast<double>(t - it->first) * tempo / (1e6 * division);
  };

  std::vector<NoteEvent> notes;
  notes.reserve(raw_notes.size());
  for (const RawNote& raw : raw_notes) {
    if (raw.pitch < kMidiPitchOfKey0 || raw.pitch >= kMidiPitchOfKey0 + kNumKeys) {
      throw std::runtime_error(path + ": MIDI pitch " + std::to_string(raw.pitch) +
                               " outside the 88-key range 21..108");
    }
    if (raw.off_tick <= raw.on_tick) {
      throw std::runtime_error(path + ": zero-length note at tick " +
                               std::to_string(raw.on_tick) + ", pitch " +
                               std::to_string(raw.pitch));
    }
    notes.push_back({tick_to_seconds(raw.on_tick), tick_to_seconds(raw.off_tick),
                     raw.pitch - kMidiPitchOfKey0});
  }
  sort_notes(notes);
  return notes;
}

namespace {

constexpr int kTicksPerQuarter = 480;
constexpr int kMicrosecPerQuarter = 500000;  // 120 bpm -> 960 ticks/s

void put_varint(std::string& out, std::uint32_t v) {
  char buf[4];
  int n = 0;
  buf[n++] = static_cast<char>(v & 0x7f);
  while ((v >>= 7) != 0) buf[n++] = static_cast<char>((v & 0x7f) | 0x80);
  while (n > 0) out.push_back(buf[--n]);
}

}  // namespace

void write_midi_notes(const std::string& path,
                      const std::vector<NoteEvent>& notes) {
  validate_notes(notes);
  const double ticks_per_second = kTicksPerQuarter * 1e6 / kMicrosecPerQuarter;

  struct Event {
    std::uint64_t tick;
    int kind;  // 0 = off, 1 = on; offs sort first at equal ticks
    int pitch;
    bool operator<(const Event& o) const {
      return std::tie(tick, kind, pitch) < std::tie(o.tick, o.kind, o.pitch);
    }
  };
  std::vector<Event> events;
  events.reserve(notes.size() * 2);
  for (const NoteEvent& n : notes) {
    const auto on = static_cast<std::uint64_t>(std::llround(n.start * ticks_per_second));
    auto off = static_cast<std::uint64_t>(std::llround(n.end * ticks_per_second));
    if (off <= on) off = on + 1;  // keep quantized notes nonzero length
    events.push_back({on, 1, n.key + kMidiPitchOfKey0});
    events.push_back({off, 0, n.key + kMidiPitchOfKey0});
  }
  std::sort(events.begin(), events.end());

  std::string track;
  put_varint(track, 0);
  track.append("\xff\x51\x03", 3);  // set tempo
  track.push_back(static_cast<char>(kMicrosecPerQuarter >> 16 & 0xff));
  track.push_back(static_cast<char>(kMicrosecPerQuarter >> 8 & 0xff));
  track.push_back(static_cast<char>(kMicrosecPerQuarter & 0xff));
  put_varint(track, 0);
  track.append("\xc0\x00", 2);  // program 0, channel 0

  std::uint64_t cursor = 0;
  for (const Event& e : events) {
    put_varint(track, static_cast<std::uint32_t>(e.tick - cursor));
    cursor = e.tick;
    track.push_back(e.kind == 1 ? '\x90' : '\x80');
    track.push_back(static_cast<char>(e.pitch));
    track.push_back('\x40');  // velocity 64 (volume is out of scope)
  }
  put_varint(track, 0);
  track.append("\xff\x2f\x00", 3);  // end of track

  std::string out;
  auto put_u16be = [&](std::uint16_t v) {
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xff));
  };
  auto put_u32be = [&](std::uint32_t v) {
    put_u16be(static_cast<std::uint16_t>(v >> 16));
    put_u16be(static_cast<std::uint16_t>(v & 0xffff));
  };
  out.append("MThd");
  put_u32be(6);
  put_u16be(0);  // format 0
  put_u16be(1);  // one track
  put_u16be(kTicksPerQuarter);
  out.append("MTrk");
  put_u32be(static_cast<std::uint32_t>(track.size()));
  out.append(track);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("write failed for " + path);
}

std::vector<NoteEvent> read_tsv_notes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<NoteEvent> notes;
  std::string line;
  int line_no = 0;
  std::size_t byte_offset = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t line_start = byte_offset;
    byte_offset += line.size() + 1;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    double start = 0, end = 0;
    int pitch = 0;
    if (!(fields >> start >> end >> pitch)) {
      throw std::runtime_error(path + ": malformed line " +
                               std::to_string(line_no) + " at byte offset " +
                               std::to_string(line_start) +
                               " (want start_sec end_sec midi_pitch)");
    }
    std::string trailing;
    if (fields >> trailing) {
      throw std::runtime_error(path + ": trailing fields on line " +
                               std::to_string(line_no) + " at byte offset " +
                               std::to_string(line_start));
    }
    if (pitch < kMidiPitchOfKey0 || pitch >= kMidiPitchOfKey0 + kNumKeys) {
      throw std::runtime_error(path + ": MIDI pitch " + std::to_string(pitch) +
                               " outside the 88-key range 21..108 on line " +
                               std::to_string(line_no));
    }
    NoteEvent note{start, end, pitch - kMidiPitchOfKey0};
    validate_note(note);
    notes.push_back(note);
  }
  sort_notes(notes);
  return notes;
}

void write_tsv_notes(const std::string& path,
                     const std::vector<NoteEvent>& notes) {
  validate_notes(notes);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  char buf[96];
  for (const NoteEvent& n : notes) {
    std::snprintf(buf, sizeof(buf), "%.6f\t%.6f\t%d\n", n.start, n.end,
                  n.key + kMidiPitchOfKey0);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

namespace {

std::string lower_extension(const std::string& path) {
  const std::size_t dot = path.rfind('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

}  // namespace

std::vector<NoteEvent> read_notes(const std::string& path) {
  const std::string ext = lower_extension(path);
  if (ext == "mid" || ext == "midi") return read_midi_notes(path);
  if (ext == "tsv" || ext == "txt") return read_tsv_notes(path);
  throw std::invalid_argument("unknown note-list extension ." + ext +
                              " for " + path + " (use .mid/.midi/.tsv/.txt)");
}

void write_notes(const std::string& path, const std::vector<NoteEvent>& notes) {
  const std::string ext = lower_extension(path);
  if (ext == "mid" || ext == "midi") return write_midi_notes(path, notes);
  if (ext == "tsv" || ext == "txt") return write_tsv_notes(path, notes);
  throw std::invalid_argument("unknown note-list extension ." + ext +
                              " for " + path + " (use .mid/.midi/.tsv/.txt)");
}

}  // namespace adsrnote
