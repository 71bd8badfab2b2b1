#ifndef ADSRNOTE_NOTE_EVAL_HPP
#define ADSRNOTE_NOTE_EVAL_HPP

#include <string>
#include <utility>
#include <vector>

#include "adsrnote/note_event.hpp"

namespace adsrnote {

// Note matching tolerances. A (reference, estimate) pair is admissible iff
// both notes are on the same key, |onset difference| <= onset_tolerance,
// and — when require_offset — |offset difference| <=
// max(offset_min_tolerance, offset_ratio * reference duration).
struct MatchingConfig {
  double onset_tolerance = 0.05;       // seconds
  double offset_min_tolerance = 0.05;  // seconds
  double offset_ratio = 0.2;
  bool require_offset = false;
};

// Precision / recall / F-measure, with F = 2PR/(P+R) and F = 0 when both
// are 0. P := 0 when nothing was predicted, R := 0 when nothing is
// annotated.
struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
};

Prf make_prf(double true_positives, double num_estimates, double num_references);

// Maximum-cardinality one-to-one matching over admissible pairs, as
// (reference index, estimate index) pairs.
std::vector<std::pair<int, int>> match_notes(
    const std::vector<NoteEvent>& reference,
    const std::vector<NoteEvent>& estimate, const MatchingConfig& config);

Prf note_metrics(const std::vector<NoteEvent>& reference,
                 const std::vector<NoteEvent>& estimate,
                 const MatchingConfig& config);

// Micro-counted framewise P/R/F over all (frame, key) cells of one piece.
// Both rolls are frames x 88, row-major, nonzero = active.
Prf framewise_metrics(const std::vector<std::uint8_t>& reference_roll,
                      const std::vector<std::uint8_t>& estimate_roll,
                      int frames);

// The three metric families reported per piece.
struct PieceScores {
  std::string name;
  Prf frames;
  Prf note_onsets;
  Prf complete_notes;
};

struct EvalReport {
  std::vector<PieceScores> pieces;
  PieceScores averages;  // unweighted macro average across pieces
};

EvalReport average_over_pieces(const std::vector<PieceScores>& pieces);

// Scores one piece from note lists: framewise metrics on the intermediate
// stream at `frame_rate` (rolls derived via derive_targets over
// max(1, ceil(max end * fps)) frames), note-onset metrics
// (require_offset = false) and complete-note metrics (require_offset = true).
PieceScores score_piece(const std::string& name,
                        const std::vector<NoteEvent>& reference,
                        const std::vector<NoteEvent>& estimate,
                        const MatchingConfig& config, double frame_rate = 50.0);

std::string report_to_json(const EvalReport& report);

}  // namespace adsrnote

#endif  // ADSRNOTE_NOTE_EVAL_HPP
