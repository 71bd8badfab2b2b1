#include "adsrnote/note_eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "adsrnote/targets.hpp"

namespace adsrnote {

namespace {

bool admissible(const NoteEvent& ref, const NoteEvent& est,
                const MatchingConfig& cfg) {
  if (ref.key != est.key) return false;
  if (std::abs(est.start - ref.start) > cfg.onset_tolerance) return false;
  if (cfg.require_offset) {
    const double tol = std::max(cfg.offset_min_tolerance,
                                cfg.offset_ratio * (ref.end - ref.start));
    if (std::abs(est.end - ref.end) > tol) return false;
  }
  return true;
}

bool try_augment(int ref_idx, const std::vector<std::vector<int>>& adj,
                 std::vector<bool>& visited, std::vector<int>& est_match) {
  for (int est_idx : adj[ref_idx]) {
    if (visited[est_idx]) continue;
    visited[est_idx] = true;
    if (est_match[est_idx] < 0 ||
        try_augment(est_match[est_idx], adj, visited, est_match)) {
      est_match[est_idx] = ref_idx;
      return true;
    }
  }
  return false;
}

}  // namespace

Prf make_prf(double true_positives, double num_estimates,
             double num_references) {
  Prf prf;
  prf.precision = num_estimates > 0 ? true_positives / num_estimates : 0.0;
  prf.recall = num_references > 0 ? true_positives / num_references : 0.0;
  const double sum = prf.precision + prf.recall;
  prf.f_measure = sum > 0 ? 2.0 * prf.precision * prf.recall / sum : 0.0;
  return prf;
}

std::vector<std::pair<int, int>> match_notes(
    const std::vector<NoteEvent>& reference,
    const std::vector<NoteEvent>& estimate, const MatchingConfig& config) {
  // Kuhn's augmenting paths give the maximum-cardinality one-to-one
  // matching; a greedy pass would undercount crossing tolerance windows.
  std::vector<std::vector<int>> adj(reference.size());
  for (std::size_t r = 0; r < reference.size(); ++r) {
    for (std::size_t e = 0; e < estimate.size(); ++e) {
      if (admissible(reference[r], estimate[e], config)) {
        adj[r].push_back(static_cast<int>(e));
      }
    }
  }
  std::vector<int> est_match(estimate.size(), -1);
  for (std::size_t r = 0; r < reference.size(); ++r) {
    std::vector<bool> visited(estimate.size(), false);
    try_augment(static_cast<int>(r), adj, visited, est_match);
  }
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t e = 0; e < estimate.size(); ++e) {
    if (est_match[e] >= 0) pairs.emplace_back(est_match[e], static_cast<int>(e));
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

Prf note_metrics(const std::vector<NoteEvent>& reference,
                 const std::vector<NoteEvent>& estimate,
                 const MatchingConfig& config) {
  const auto matches = match_notes(reference, estimate, config);
  return make_prf(static_cast<double>(matches.size()),
                  static_cast<double>(estimate.size()),
                  static_cast<double>(reference.size()));
}

Prf framewise_metrics(const std::vector<std::uint8_t>& reference_roll,
                      const std::vector<std::uint8_t>& estimate_roll,
                      int frames) {
  const std::size_t expected = static_cast<std::size_t>(frames) * kNumKeys;
  if (reference_roll.size() != expected || estimate_roll.size() != expected) {
    throw std::invalid_argument("framewise rolls must both be frames x 88");
  }
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < expected; ++i) {
    const bool ref = reference_roll[i] != 0;
    const bool est = estimate_roll[i] != 0;
    tp += ref && est;
    fp += !ref && est;
    fn += ref && !est;
  }
  return make_prf(tp, tp + fp, tp + fn);
}

EvalReport average_over_pieces(const std::vector<PieceScores>& pieces) {
  EvalReport report;
  report.pieces = pieces;
  report.averages.name = "average";
  if (pieces.empty()) return report;
  auto add = [](Prf& acc, const Prf& x) {
    acc.precision += x.precision;
    acc.recall += x.recall;
    acc.f_measure += x.f_measure;
  };
  for (const PieceScores& p : pieces) {
    add(report.averages.frames, p.frames);
    add(report.averages.note_onsets, p.note_onsets);
    add(report.averages.complete_notes, p.complete_notes);
  }
  const double n = static_cast<double>(pieces.size());
  for (Prf* prf : {&report.averages.frames, &report.averages.note_onsets,
                   &report.averages.complete_notes}) {
    prf->precision /= n;
    prf->recall /= n;
    prf->f_measure /= n;
  }
  return report;
}

PieceScores score_piece(const std::string& name,
                        const std::vector<NoteEvent>& reference,
                        const std::vector<NoteEvent>& estimate,
                        const MatchingConfig& config, double frame_rate) {
  PieceScores scores;
  scores.name = name;

  MatchingConfig onset_cfg = config;
  onset_cfg.require_offset = false;
  scores.note_onsets = note_metrics(reference, estimate, onset_cfg);

  MatchingConfig complete_cfg = config;
  complete_cfg.require_offset = true;
  scores.complete_notes = note_metrics(reference, estimate, complete_cfg);

  double max_end = 0.0;
  for (const auto& n : reference) max_end = std::max(max_end, n.end);
  for (const auto& n : estimate) max_end = std::max(max_end, n.end);
  const int frames =
      std::max(1, static_cast<int>(std::ceil(max_end * frame_rate)));

  auto intermediate_roll = [&](const std::vector<NoteEvent>& notes) {
    const TargetMatrix targets = derive_targets(notes, frames, frame_rate);
    std::vector<std::uint8_t> roll(static_cast<std::size_t>(frames) * kNumKeys);
    for (int t = 0; t < frames; ++t) {
      for (int k = 0; k < kNumKeys; ++k) {
        roll[static_cast<std::size_t>(t) * kNumKeys + k] =
            targets.at(t, k, kIntermediateStream);
      }
    }
    return roll;
  };
  scores.frames = framewise_metrics(intermediate_roll(reference),
                                    intermediate_roll(estimate), frames);
  return scores;
}

namespace {

nlohmann::json prf_json(const Prf& prf) {
  return {{"precision", prf.precision},
          {"recall", prf.recall},
          {"f_measure", prf.f_measure}};
}

nlohmann::json piece_json(const PieceScores& p) {
  return {{"name", p.name},
          {"frames", prf_json(p.frames)},
          {"note_onsets", prf_json(p.note_onsets)},
          {"complete_notes", prf_json(p.complete_notes)}};
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["pieces"] = nlohmann::json::array();
  for (const PieceScores& p : report.pieces) j["pieces"].push_back(piece_json(p));
  j["averages"] = piece_json(report.averages);
  return j.dump(2) + "\n";
}

}  // namespace adsrnote
