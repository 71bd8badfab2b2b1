// adsrnote: offline piano transcription pipeline driver.
//
// Subcommands compose as pure file -> file transforms:
//   features -> infer -> decode -> filter     (== transcribe in one step)
//   simulate -> decode -> filter -> eval      (network-free desk testing)

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adsrnote/hmm.hpp"
#include "adsrnote/io/container.hpp"
#include "adsrnote/io/note_io.hpp"
#include "adsrnote/io/segments.hpp"
#include "adsrnote/io/wav.hpp"
#include "adsrnote/net.hpp"
#include "adsrnote/note_eval.hpp"
#include "adsrnote/parallel.hpp"
#include "adsrnote/pipeline_config.hpp"
#include "adsrnote/segment_filter.hpp"
#include "adsrnote/simulator.hpp"
#include "adsrnote/toy_train.hpp"

namespace fs = std::filesystem;
using namespace adsrnote;

namespace {

bool file_has_magic(const std::string& path, const char* magic) {
  std::ifstream in(path, std::ios::binary);
  char buf[4] = {};
  in.read(buf, 4);
  return in.gcount() == 4 && std::string(buf, 4) == magic;
}

AdsrHmmSpec load_hmm(const std::string& path, const PipelineConfig& config) {
  if (path.empty()) return config.hmm;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return hmm_spec_from_json(text);
}

FilteredSpectrogram features_from_any(const std::string& path,
                                      const FeatureConfig& config) {
  if (file_has_magic(path, "ADSR")) {
    return read_spectrogram(path, config.frame_rate);
  }
  return compute_spectrogram(read_wav(path), config);
}

std::vector<NoteEvent> run_transcription(const NetworkParams& net,
                                         const FilteredSpectrogram& features,
                                         const AdsrHmmSpec& hmm,
                                         const FilterRule& rule, int threads) {
  const ActivationMatrix acts = infer_piece(net, features, threads);
  const std::vector<NoteSegment> segments = decode_all(hmm, acts, threads);
  return filter_all(rule, segments, acts);
}

int default_sim_frames(const std::vector<NoteEvent>& notes, double fps) {
  double max_end = 0.0;
  for (const NoteEvent& n : notes) max_end = std::max(max_end, n.end);
  return static_cast<int>(std::ceil(max_end * fps)) + 2;
}

std::map<std::string, fs::path> note_files_by_stem(const fs::path& dir) {
  std::map<std::string, fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string ext = entry.path().extension().string();
    if (ext == ".mid" || ext == ".midi" || ext == ".tsv" || ext == ".txt") {
      files[entry.path().stem().string()] = entry.path();
    }
  }
  return files;
}

EvalReport evaluate_paths(const std::string& ref_path,
                          const std::string& est_path,
                          const MatchingConfig& matching, double frame_rate,
                          int threads) {
  struct Pair {
    std::string stem;
    fs::path ref, est;
  };
  std::vector<Pair> pairs;
  if (fs::is_directory(ref_path)) {
    if (!fs::is_directory(est_path)) {
      throw std::runtime_error(
          "reference is a directory, so the estimate must be one too");
    }
    const auto refs = note_files_by_stem(ref_path);
    const auto ests = note_files_by_stem(est_path);
    if (refs.empty()) {
      throw std::runtime_error("no note lists found in " + ref_path);
    }
    for (const auto& [stem, ref_file] : refs) {
      const auto it = ests.find(stem);
      if (it == ests.end()) {
        throw std::runtime_error("no estimate for piece '" + stem + "' in " +
                                 est_path);
      }
      pairs.push_back({stem, ref_file, it->second});
    }
  } else {
    pairs.push_back({fs::path(ref_path).stem().string(), ref_path, est_path});
  }

  std::vector<PieceScores> pieces(pairs.size());
  std::exception_ptr failure;
  std::mutex failure_mutex;
  parallel_for(static_cast<int>(pairs.size()), threads, [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      try {
        pieces[i] = score_piece(pairs[i].stem, read_notes(pairs[i].ref.string()),
                                read_notes(pairs[i].est.string()), matching,
                                frame_rate);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  });
  if (failure) std::rethrow_exception(failure);
  return average_over_pieces(pieces);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"offline polyphonic piano transcription toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  int threads = 1;
  app.add_option("--config", config_path, "pipeline config JSON document");
  auto* seed_opt = app.add_option("--seed", seed, "seed for all randomness");
  app.add_option("--threads", threads, "worker threads for per-key/per-frame work")
      ->check(CLI::PositiveNumber);

  // features
  auto* cmd_features = app.add_subcommand("features", "WAV -> filtered log spectrogram");
  std::string features_audio, features_out;
  cmd_features->add_option("audio", features_audio, "input WAV (16-bit PCM)")->required();
  cmd_features->add_option("out", features_out, "output feature container")->required();

  // train-toy
  auto* cmd_train = app.add_subcommand("train-toy", "train on a desk-scale dataset");
  std::string train_dir, train_out;
  int train_epochs = 3, train_batch = 16, train_holdout = 1;
  double train_lr = 0.1, train_target_f = 0.0;
  cmd_train->add_option("dataset", train_dir, "directory of feature/notes pairs")->required();
  cmd_train->add_option("out", train_out, "output weight file")->required();
  cmd_train->add_option("--epochs", train_epochs)->check(CLI::PositiveNumber);
  cmd_train->add_option("--batch", train_batch)->check(CLI::PositiveNumber);
  cmd_train->add_option("--holdout", train_holdout)->check(CLI::PositiveNumber);
  cmd_train->add_option("--lr", train_lr, "SGD learning rate");
  cmd_train->add_option("--target-f", train_target_f,
                        "stop early once holdout framewise F reaches this");

  // infer
  auto* cmd_infer = app.add_subcommand("infer", "network activations for a piece");
  std::string infer_weights, infer_input, infer_out;
  cmd_infer->add_option("weights", infer_weights)->required();
  cmd_infer->add_option("audio", infer_input, "WAV or precomputed feature container")->required();
  cmd_infer->add_option("out", infer_out, "output activation container")->required();

  // decode
  auto* cmd_decode = app.add_subcommand("decode", "activations -> note segments");
  std::string decode_acts, decode_out, decode_hmm;
  cmd_decode->add_option("activations", decode_acts)->required();
  cmd_decode->add_option("out", decode_out, "output segments JSON")->required();
  cmd_decode->add_option("--hmm", decode_hmm, "HMM config JSON (default: built-in)");

  // filter
  auto* cmd_filter = app.add_subcommand("filter", "segments -> kept note events");
  std::string filter_segments, filter_acts, filter_out;
  double filter_theta = 0.0;
  cmd_filter->add_option("segments", filter_segments)->required();
  cmd_filter->add_option("activations", filter_acts)->required();
  cmd_filter->add_option("out", filter_out, "output notes (.mid or .tsv)")->required();
  auto* filter_theta_opt = cmd_filter->add_option("--theta", filter_theta,
                                                  "decision threshold in [0,1]");

  // simulate
  auto* cmd_simulate = app.add_subcommand("simulate", "notes -> synthetic activations");
  std::string sim_notes, sim_out;
  int sim_frames = 0;
  double sim_peak = -1.0, sim_sigma = -1.0, sim_blip = -1.0, sim_dropout = -1.0;
  cmd_simulate->add_option("notes", sim_notes)->required();
  cmd_simulate->add_option("out", sim_out, "output activation container")->required();
  cmd_simulate->add_option("--frames", sim_frames, "matrix length (default: from notes)");
  auto* sim_peak_opt = cmd_simulate->add_option("--peak", sim_peak, "peak level for all streams");
  auto* sim_sigma_opt = cmd_simulate->add_option("--sigma", sim_sigma, "additive noise stddev");
  auto* sim_blip_opt = cmd_simulate->add_option("--blip-prob", sim_blip);
  auto* sim_dropout_opt = cmd_simulate->add_option("--dropout-prob", sim_dropout);

  // eval
  auto* cmd_eval = app.add_subcommand("eval", "score estimated notes against a reference");
  std::string eval_ref, eval_est, eval_out;
  cmd_eval->add_option("reference", eval_ref, "note file or directory")->required();
  cmd_eval->add_option("estimate", eval_est, "note file or directory")->required();
  cmd_eval->add_option("out", eval_out, "output report JSON")->required();

  // transcribe
  auto* cmd_transcribe = app.add_subcommand("transcribe", "WAV -> MIDI, end to end");
  std::string trans_weights, trans_audio, trans_out, trans_hmm;
  double trans_theta = 0.0;
  cmd_transcribe->add_option("weights", trans_weights)->required();
  cmd_transcribe->add_option("audio", trans_audio)->required();
  cmd_transcribe->add_option("out", trans_out, "output MIDI file")->required();
  cmd_transcribe->add_option("--hmm", trans_hmm, "HMM config JSON");
  auto* trans_theta_opt = cmd_transcribe->add_option("--theta", trans_theta);

  // hmm-template
  auto* cmd_hmm_template =
      app.add_subcommand("hmm-template", "write the default HMM config for editing");
  std::string hmm_template_out;
  cmd_hmm_template->add_option("out", hmm_template_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    PipelineConfig config;
    if (!config_path.empty()) config = load_pipeline_config(config_path);
    if (seed_opt->count() > 0) config.simulator.seed = seed;

    if (app.got_subcommand(cmd_features)) {
      write_spectrogram(features_out,
                        compute_spectrogram(read_wav(features_audio), config.features));
    } else if (app.got_subcommand(cmd_train)) {
      ToyTrainConfig train_config;
      train_config.epochs = train_epochs;
      train_config.batch_size = train_batch;
      train_config.holdout_pieces = train_holdout;
      train_config.learning_rate = train_lr;
      train_config.target_f = train_target_f;
      train_config.noise = config.noise;
      train_config.seed = seed_opt->count() > 0 ? seed : config.simulator.seed + 1;
      const auto pieces = load_toy_dataset(train_dir, config.features);
      const ToyTrainResult result = train_toy(pieces, train_config, &std::cout);
      save_weights(result.params, train_out);
      std::cout << "holdout framewise F " << result.validation_f << ", weights -> "
                << train_out << "\n";
    } else if (app.got_subcommand(cmd_infer)) {
      const NetworkParams net = load_weights(infer_weights);
      write_activations(
          infer_out,
          infer_piece(net, features_from_any(infer_input, config.features), threads));
    } else if (app.got_subcommand(cmd_decode)) {
      const ActivationMatrix acts =
          read_activations(decode_acts, config.features.frame_rate);
      const AdsrHmmSpec hmm = load_hmm(decode_hmm, config);
      write_segments(decode_out, decode_all(hmm, acts, threads), acts.frames,
                     acts.frame_rate);
    } else if (app.got_subcommand(cmd_filter)) {
      const ActivationMatrix acts =
          read_activations(filter_acts, config.features.frame_rate);
      const SegmentFile segments = read_segments(filter_segments);
      if (segments.frames != acts.frames) {
        throw std::runtime_error(
            "segment file covers " + std::to_string(segments.frames) +
            " frames but the activation matrix has " + std::to_string(acts.frames));
      }
      FilterRule rule = config.filter;
      if (filter_theta_opt->count() > 0) rule.theta = filter_theta;
      write_notes(filter_out, filter_all(rule, segments.segments, acts));
    } else if (app.got_subcommand(cmd_simulate)) {
      const std::vector<NoteEvent> notes = read_notes(sim_notes);
      SimConfig sim = config.simulator;
      if (sim_peak_opt->count() > 0) {
        sim.onset_peak = sim.intermediate_peak = sim.offset_peak = sim_peak;
      }
      if (sim_sigma_opt->count() > 0) sim.noise_sigma = sim_sigma;
      if (sim_blip_opt->count() > 0) sim.blip_prob = sim_blip;
      if (sim_dropout_opt->count() > 0) sim.dropout_prob = sim_dropout;
      const int frames = sim_frames > 0
                             ? sim_frames
                             : default_sim_frames(notes, config.features.frame_rate);
      write_activations(sim_out,
                        simulate(notes, frames, config.features.frame_rate, sim));
    } else if (app.got_subcommand(cmd_eval)) {
      const EvalReport report = evaluate_paths(
          eval_ref, eval_est, config.matching, config.features.frame_rate, threads);
      write_text(eval_out, report_to_json(report));
      const PieceScores& avg = report.averages;
      std::cout << "pieces " << report.pieces.size() << "  frames F "
                << avg.frames.f_measure << "  note onsets F "
                << avg.note_onsets.f_measure << "  complete notes F "
                << avg.complete_notes.f_measure << "\n";
    } else if (app.got_subcommand(cmd_transcribe)) {
      const NetworkParams net = load_weights(trans_weights);
      const AdsrHmmSpec hmm = load_hmm(trans_hmm, config);
      FilterRule rule = config.filter;
      if (trans_theta_opt->count() > 0) rule.theta = trans_theta;
      const FilteredSpectrogram features =
          compute_spectrogram(read_wav(trans_audio), config.features);
      write_midi_notes(trans_out,
                       run_transcription(net, features, hmm, rule, threads));
    } else if (app.got_subcommand(cmd_hmm_template)) {
      write_text(hmm_template_out, hmm_spec_to_json(config.hmm));
    }
  } catch (const std::exception& e) {
    std::cerr << "adsrnote: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
