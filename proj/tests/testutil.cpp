#include "testutil.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <map>

namespace adsrnote::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::uint64_t counter = 0;
  const fs::path base = fs::temp_directory_path();
  do {
    path_ = base / ("adsrnote_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
  } while (fs::exists(path_));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::vector<NoteEvent> random_notes(Rng& rng, int num_notes, int total_frames,
                                    double frame_rate, int min_frames,
                                    int gap_frames, int min_key,
                                    int num_keys_used) {
  std::map<int, std::vector<std::pair<int, int>>> occupied;  // key -> spans
  std::vector<NoteEvent> notes;
  int attempts = 0;
  while (static_cast<int>(notes.size()) < num_notes && attempts < num_notes * 200) {
    ++attempts;
    const int key = min_key + static_cast<int>(rng.uniform_int(num_keys_used));
    const int duration =
        min_frames + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(
                         std::max(1, total_frames / 4 - min_frames))));
    if (duration + 2 >= total_frames) continue;
    const int start = 1 + static_cast<int>(rng.uniform_int(
                              static_cast<std::uint64_t>(total_frames - duration - 2)));
    const int end = start + duration;
    bool clash = false;
    for (const auto& [s, e] : occupied[key]) {
      if (start < e + gap_frames && s < end + gap_frames) {
        clash = true;
        break;
      }
    }
    if (clash) continue;
    occupied[key].emplace_back(start, end);
    notes.push_back({start / frame_rate, end / frame_rate, key});
  }
  sort_notes(notes);
  return notes;
}

AudioBuffer render_tones(const std::vector<NoteEvent>& notes,
                         double total_seconds, int sample_rate) {
  AudioBuffer audio;
  audio.sample_rate = sample_rate;
  audio.samples.assign(
      static_cast<std::size_t>(std::ceil(total_seconds * sample_rate)), 0.0f);

  const double attack = 0.015, release = 0.030;
  for (const NoteEvent& note : notes) {
    const double freq =
        440.0 * std::pow(2.0, (note.key + kMidiPitchOfKey0 - 69) / 12.0);
    const auto first = static_cast<std::size_t>(note.start * sample_rate);
    const auto last = std::min(
        audio.samples.size(),
        static_cast<std::size_t>((note.end + release) * sample_rate));
    for (std::size_t i = first; i < last; ++i) {
      const double t = static_cast<double>(i) / sample_rate - note.start;
      double env = 1.0;
      if (t < attack) {
        env = t / attack;
      } else {
        env = 0.55 + 0.45 * std::exp(-1.5 * (t - attack));
      }
      const double after_end = static_cast<double>(i) / sample_rate - note.end;
      if (after_end > 0.0) env *= std::max(0.0, 1.0 - after_end / release);
      audio.samples[i] += static_cast<float>(
          0.22 * env * std::sin(2.0 * M_PI * freq * t));
    }
  }
  for (float& s : audio.samples) s = std::clamp(s, -1.0f, 1.0f);
  return audio;
}

std::vector<float> random_key_activations(Rng& rng, int frames) {
  std::vector<float> acts(static_cast<std::size_t>(frames) * 3);
  for (float& v : acts) {
    const double u = rng.uniform();
    if (u < 0.05) {
      v = 0.0f;
    } else if (u < 0.10) {
      v = 1.0f;
    } else {
      v = static_cast<float>(rng.uniform());
    }
  }
  return acts;
}

}  // namespace adsrnote::testing
