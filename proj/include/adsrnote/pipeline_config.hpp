#ifndef ADSRNOTE_PIPELINE_CONFIG_HPP
#define ADSRNOTE_PIPELINE_CONFIG_HPP

#include <string>

#include "adsrnote/features.hpp"
#include "adsrnote/hmm.hpp"
#include "adsrnote/net.hpp"
#include "adsrnote/note_eval.hpp"
#include "adsrnote/segment_filter.hpp"
#include "adsrnote/simulator.hpp"

namespace adsrnote {

// Everything the pipeline takes from a single JSON document; CLI flags
// override individual fields. Serialization round-trips losslessly.
struct PipelineConfig {
  FeatureConfig features;
  AdsrHmmSpec hmm = default_hmm_spec();
  FilterRule filter;
  MatchingConfig matching;
  NoiseConfig noise;
  SimConfig simulator;
};

std::string pipeline_config_to_json(const PipelineConfig& config);
PipelineConfig pipeline_config_from_json(const std::string& text);
PipelineConfig load_pipeline_config(const std::string& path);

}  // namespace adsrnote

#endif  // ADSRNOTE_PIPELINE_CONFIG_HPP
