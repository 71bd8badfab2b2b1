#ifndef ADSRNOTE_TOY_TRAIN_HPP
#define ADSRNOTE_TOY_TRAIN_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "adsrnote/features.hpp"
#include "adsrnote/net.hpp"
#include "adsrnote/note_event.hpp"

namespace adsrnote {

// Desk-scale training driver behind the train-toy subcommand: datasets are
// (features, notes) pairs, the model is the reference architecture.
struct ToyPiece {
  std::string name;
  FilteredSpectrogram features;
  std::vector<NoteEvent> notes;
};

// Scans a directory for note lists (*.tsv, *.mid, *.midi) paired by stem
// with either a feature container (stem.adsr) or audio (stem.wav).
std::vector<ToyPiece> load_toy_dataset(const std::string& dir,
                                       const FeatureConfig& config);

struct ToyTrainConfig {
  int epochs = 3;
  double learning_rate = 0.1;
  int batch_size = 16;
  int holdout_pieces = 1;      // taken from the end of the sorted piece list
  double target_f = 0.0;       // early stop once validation F reaches this
  NoiseConfig noise;
  std::uint64_t seed = 1;
};

struct ToyTrainResult {
  NetworkParams params;
  double validation_f = 0.0;   // framewise F on the holdout, threshold 0.5
  int epochs_run = 0;
};

// Framewise F of thresholded intermediate-stream predictions against the
// note-derived intermediate targets, macro-averaged over pieces.
double validation_framewise_f(const NetworkParams& params,
                              std::span<const ToyPiece> pieces,
                              double threshold = 0.5);

// SGD over shuffled frame windows; logs one line per epoch to `log` when
// non-null. Throws if the split leaves no training or no holdout pieces.
ToyTrainResult train_toy(const std::vector<ToyPiece>& pieces,
                         const ToyTrainConfig& config, std::ostream* log);

}  // namespace adsrnote

#endif  // ADSRNOTE_TOY_TRAIN_HPP
