#include "adsrnote/pipeline_config.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace adsrnote {

namespace {

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string pipeline_config_to_json(const PipelineConfig& config) {
  nlohmann::json j;
  j["features"] = {{"sample_rate", config.features.sample_rate},
                   {"fft_size", config.features.fft_size},
                   {"frame_rate", config.features.frame_rate},
                   {"context_frames", config.features.context_frames},
                   {"num_bins", config.features.num_bins},
                   {"bins_per_semitone", config.features.bins_per_semitone},
                   {"fmin", config.features.fmin},
                   {"fmax", config.features.fmax}};
  j["hmm"] = nlohmann::json::parse(hmm_spec_to_json(config.hmm));
  j["filter"] = {{"theta", config.filter.theta}};
  j["matching"] = {{"onset_tolerance", config.matching.onset_tolerance},
                   {"offset_min_tolerance", config.matching.offset_min_tolerance},
                   {"offset_ratio", config.matching.offset_ratio}};
  j["noise"] = {{"multiplicative_rate", config.noise.multiplicative_rate},
                {"additive_sigma", config.noise.additive_sigma}};
  j["simulator"] = {{"onset_peak", config.simulator.onset_peak},
                    {"intermediate_peak", config.simulator.intermediate_peak},
                    {"offset_peak", config.simulator.offset_peak},
                    {"bump_width", config.simulator.bump_width},
                    {"noise_sigma", config.simulator.noise_sigma},
                    {"blip_prob", config.simulator.blip_prob},
                    {"dropout_prob", config.simulator.dropout_prob},
                    {"seed", config.simulator.seed}};
  return j.dump(2) + "\n";
}

PipelineConfig pipeline_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("pipeline config: ") + e.what());
  }
  PipelineConfig config;
  if (j.contains("features")) {
    const auto& f = j.at("features");
    maybe(f, "sample_rate", config.features.sample_rate);
    maybe(f, "fft_size", config.features.fft_size);
    maybe(f, "frame_rate", config.features.frame_rate);
    maybe(f, "context_frames", config.features.context_frames);
    maybe(f, "num_bins", config.features.num_bins);
    maybe(f, "bins_per_semitone", config.features.bins_per_semitone);
    maybe(f, "fmin", config.features.fmin);
    maybe(f, "fmax", config.features.fmax);
  }
  if (j.contains("hmm")) {
    config.hmm = hmm_spec_from_json(j.at("hmm").dump());
  }
  if (j.contains("filter")) maybe(j.at("filter"), "theta", config.filter.theta);
  if (j.contains("matching")) {
    const auto& m = j.at("matching");
    maybe(m, "onset_tolerance", config.matching.onset_tolerance);
    maybe(m, "offset_min_tolerance", config.matching.offset_min_tolerance);
    maybe(m, "offset_ratio", config.matching.offset_ratio);
  }
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    maybe(n, "multiplicative_rate", config.noise.multiplicative_rate);
    maybe(n, "additive_sigma", config.noise.additive_sigma);
  }
  if (j.contains("simulator")) {
    const auto& s = j.at("simulator");
    maybe(s, "onset_peak", config.simulator.onset_peak);
    maybe(s, "intermediate_peak", config.simulator.intermediate_peak);
    maybe(s, "offset_peak", config.simulator.offset_peak);
    maybe(s, "bump_width", config.simulator.bump_width);
    maybe(s, "noise_sigma", config.simulator.noise_sigma);
    maybe(s, "blip_prob", config.simulator.blip_prob);
    maybe(s, "dropout_prob", config.simulator.dropout_prob);
    maybe(s, "seed", config.simulator.seed);
  }
  return config;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return pipeline_config_from_json(text);
}

}  // namespace adsrnote
