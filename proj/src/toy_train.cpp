#include "adsrnote/toy_train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <stdexcept>

#include "adsrnote/io/container.hpp"
#include "adsrnote/io/note_io.hpp"
#include "adsrnote/io/wav.hpp"
#include "adsrnote/note_eval.hpp"
#include "adsrnote/rng.hpp"
#include "adsrnote/targets.hpp"

namespace adsrnote {

namespace fs = std::filesystem;

std::vector<ToyPiece> load_toy_dataset(const std::string& dir,
                                       const FeatureConfig& config) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error(dir + " is not a directory");
  }
  std::vector<fs::path> note_files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string ext = entry.path().extension().string();
    if (ext == ".tsv" || ext == ".mid" || ext == ".midi") {
      note_files.push_back(entry.path());
    }
  }
  std::sort(note_files.begin(), note_files.end());
  if (note_files.empty()) {
    throw std::runtime_error("no note lists (*.tsv, *.mid) found in " + dir);
  }

  std::vector<ToyPiece> pieces;
  for (const fs::path& notes_path : note_files) {
    ToyPiece piece;
    piece.name = notes_path.stem().string();
    piece.notes = read_notes(notes_path.string());
    const fs::path features_path = fs::path(notes_path).replace_extension(".adsr");
    const fs::path wav_path = fs::path(notes_path).replace_extension(".wav");
    if (fs::exists(features_path)) {
      piece.features =
          read_spectrogram(features_path.string(), config.frame_rate);
    } else if (fs::exists(wav_path)) {
      piece.features = compute_spectrogram(read_wav(wav_path.string()), config);
    } else {
      throw std::runtime_error("no features (.adsr) or audio (.wav) next to " +
                               notes_path.string());
    }
    pieces.push_back(std::move(piece));
  }
  return pieces;
}

double validation_framewise_f(const NetworkParams& params,
                              std::span<const ToyPiece> pieces,
                              double threshold) {
  double f_sum = 0.0;
  for (const ToyPiece& piece : pieces) {
    const ActivationMatrix acts = infer_piece(params, piece.features);
    const TargetMatrix targets =
        derive_targets(piece.notes, acts.frames, acts.frame_rate);
    std::vector<std::uint8_t> ref(static_cast<std::size_t>(acts.frames) * kNumKeys);
    std::vector<std::uint8_t> est(ref.size());
    for (int t = 0; t < acts.frames; ++t) {
      for (int k = 0; k < kNumKeys; ++k) {
        ref[static_cast<std::size_t>(t) * kNumKeys + k] =
            targets.at(t, k, kIntermediateStream);
        est[static_cast<std::size_t>(t) * kNumKeys + k] =
            acts.at(t, k, kIntermediateStream) >= threshold;
      }
    }
    f_sum += framewise_metrics(ref, est, acts.frames).f_measure;
  }
  return pieces.empty() ? 0.0 : f_sum / static_cast<double>(pieces.size());
}

ToyTrainResult train_toy(const std::vector<ToyPiece>& pieces,
                         const ToyTrainConfig& config, std::ostream* log) {
  if (config.holdout_pieces < 1 ||
      config.holdout_pieces >= static_cast<int>(pieces.size())) {
    throw std::invalid_argument(
        "holdout must leave at least one training and one validation piece");
  }
  const int num_train =
      static_cast<int>(pieces.size()) - config.holdout_pieces;
  const std::span<const ToyPiece> holdout(pieces.data() + num_train,
                                          static_cast<std::size_t>(config.holdout_pieces));

  ToyTrainResult result;
  result.params = reference_architecture(config.seed);
  const int context = result.params.input_shape.time;

  struct WindowRef {
    int piece;
    int frame;
  };
  std::vector<WindowRef> windows;
  std::vector<TargetMatrix> targets(static_cast<std::size_t>(num_train));
  for (int p = 0; p < num_train; ++p) {
    if (pieces[p].features.bins != result.params.input_shape.freq) {
      throw std::invalid_argument(
          "piece " + pieces[p].name + " has " +
          std::to_string(pieces[p].features.bins) + " bins, network expects " +
          std::to_string(result.params.input_shape.freq));
    }
    targets[p] = derive_targets(pieces[p].notes, pieces[p].features.frames,
                                pieces[p].features.frame_rate);
    for (int t = 0; t < pieces[p].features.frames; ++t) {
      windows.push_back({p, t});
    }
  }
  if (windows.empty()) throw std::runtime_error("training split has no frames");

  Rng rng(config.seed);
  const std::size_t target_size = static_cast<std::size_t>(kNumKeys) * kNumStreams;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates shuffle of the window order.
    for (std::size_t i = windows.size() - 1; i > 0; --i) {
      std::swap(windows[i], windows[rng.uniform_int(i + 1)]);
    }
    double loss_sum = 0.0;
    int steps = 0;
    std::vector<TrainExample> batch;
    for (std::size_t start = 0; start < windows.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(windows.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) {
        const auto [p, t] = windows[i];
        TrainExample ex;
        ex.window = context_window(pieces[p].features, t, context);
        ex.targets.resize(target_size);
        std::copy_n(&targets[p].values[static_cast<std::size_t>(t) * target_size],
                    target_size, ex.targets.begin());
        batch.push_back(std::move(ex));
      }
      loss_sum += train_step(result.params, batch, config.learning_rate,
                             config.noise, rng.next_u64());
      ++steps;
    }
    result.epochs_run = epoch + 1;
    result.validation_f = validation_framewise_f(result.params, holdout);
    if (log != nullptr) {
      *log << "epoch " << epoch + 1 << "/" << config.epochs << "  loss "
           << loss_sum / std::max(1, steps) << "  holdout framewise F "
           << result.validation_f << "\n";
    }
    if (config.target_f > 0.0 && result.validation_f >= config.target_f) break;
  }
  return result;
}

}  // namespace adsrnote
