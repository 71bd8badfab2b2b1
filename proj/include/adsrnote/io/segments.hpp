#ifndef ADSRNOTE_IO_SEGMENTS_HPP
#define ADSRNOTE_IO_SEGMENTS_HPP

#include <string>
#include <vector>

#include "adsrnote/hmm.hpp"

namespace adsrnote {

// Decoded-segment list as JSON: frame rate, frame count, and per segment
// key, [start_frame, end_frame) and the state run.
void write_segments(const std::string& path,
                    const std::vector<NoteSegment>& segments, int frames,
                    double frame_rate);

struct SegmentFile {
  int frames = 0;
  double frame_rate = 50.0;
  std::vector<NoteSegment> segments;
};

SegmentFile read_segments(const std::string& path);

}  // namespace adsrnote

#endif  // ADSRNOTE_IO_SEGMENTS_HPP
