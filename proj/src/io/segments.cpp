#include "adsrnote/io/segments.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace adsrnote {

void write_segments(const std::string& path,
                    const std::vector<NoteSegment>& segments, int frames,
                    double frame_rate) {
  nlohmann::json j;
  j["frames"] = frames;
  j["frame_rate"] = frame_rate;
  j["segments"] = nlohmann::json::array();
  for (const NoteSegment& s : segments) {
    nlohmann::json seg;
    seg["key"] = s.key;
    seg["start_frame"] = s.start_frame;
    seg["end_frame"] = s.end_frame;
    seg["reached_s"] = s.reached_s;
    seg["states"] = nlohmann::json::array();
    for (AdsrState st : s.states) seg["states"].push_back(to_string(st));
    j["segments"].push_back(std::move(seg));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed for " + path);
}

SegmentFile read_segments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  SegmentFile file;
  file.frames = j.at("frames").get<int>();
  file.frame_rate = j.at("frame_rate").get<double>();
  for (const auto& seg : j.at("segments")) {
    NoteSegment s;
    s.key = seg.at("key").get<int>();
    s.start_frame = seg.at("start_frame").get<int>();
    s.end_frame = seg.at("end_frame").get<int>();
    s.reached_s = seg.at("reached_s").get<bool>();
    for (const auto& st : seg.at("states")) {
      s.states.push_back(adsr_state_from_string(st.get<std::string>()));
    }
    if (static_cast<int>(s.states.size()) != s.end_frame - s.start_frame) {
      throw std::runtime_error(path + ": segment state run does not span [" +
                               std::to_string(s.start_frame) + ", " +
                               std::to_string(s.end_frame) + ")");
    }
    file.segments.push_back(std::move(s));
  }
  return file;
}

}  // namespace adsrnote
