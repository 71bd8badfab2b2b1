#include "oracles.hpp"

#include <cmath>
#include <limits>

namespace adsrnote::testing {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::vector<double> naive_dft_magnitude(std::span<const double> signal) {
  const std::size_t n = signal.size();
  std::vector<double> mags(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double phase = -2.0 * M_PI * static_cast<double>(k) *
                           static_cast<double>(i) / static_cast<double>(n);
      re += signal[i] * std::cos(phase);
      im += signal[i] * std::sin(phase);
    }
    mags[k] = std::hypot(re, im);
  }
  return mags;
}

namespace {

struct Search {
  const AdsrHmmSpec& spec;
  std::span<const float> acts;
  int frames;
  double best_score = kNegInf;
  std::vector<AdsrState> best_path;
  std::vector<AdsrState> current;

  void extend(int t, AdsrState state, double score_so_far) {
    // Same association order as the decoder: (score + trans) + emission.
    const double score =
        score_so_far +
        emission_logprob(spec, state, &acts[static_cast<std::size_t>(t) * 3]);
    current.push_back(state);
    if (t == frames - 1) {
      if (score > best_score) {
        best_score = score;
        best_path = current;
      }
    } else {
      for (int next = 0; next < kNumAdsrStates; ++next) {
        const double p = spec.transitions[static_cast<int>(state)][next];
        if (p > 0.0) {
          extend(t + 1, static_cast<AdsrState>(next), score + std::log(p));
        }
      }
    }
    current.pop_back();
  }
};

}  // namespace

BruteForceViterbi brute_force_viterbi(const AdsrHmmSpec& spec,
                                      std::span<const float> key_activations) {
  Search search{spec, key_activations,
                static_cast<int>(key_activations.size() / 3), kNegInf, {}, {}};
  for (int s = 0; s < kNumAdsrStates; ++s) {
    if (spec.initial[s] > 0.0) {
      search.extend(0, static_cast<AdsrState>(s), std::log(spec.initial[s]));
    }
  }
  return {search.best_score, search.best_path};
}

double path_log_score(const AdsrHmmSpec& spec,
                      const std::vector<AdsrState>& path,
                      std::span<const float> key_activations) {
  if (path.empty()) return kNegInf;
  const double init = spec.initial[static_cast<int>(path[0])];
  if (init <= 0.0) return kNegInf;
  double score = std::log(init) + emission_logprob(spec, path[0], &key_activations[0]);
  for (std::size_t t = 1; t < path.size(); ++t) {
    const double p =
        spec.transitions[static_cast<int>(path[t - 1])][static_cast<int>(path[t])];
    if (p <= 0.0) return kNegInf;
    score = score + std::log(p) +
            emission_logprob(spec, path[t], &key_activations[t * 3]);
  }
  return score;
}

namespace {

// Offset-aware admissibility, re-derived here rather than shared with the
// library so the oracle stays independent.
bool pair_ok(const NoteEvent& ref, const NoteEvent& est,
             const MatchingConfig& cfg) {
  if (ref.key != est.key) return false;
  if (std::abs(est.start - ref.start) > cfg.onset_tolerance) return false;
  if (!cfg.require_offset) return true;
  const double tol = std::max(cfg.offset_min_tolerance,
                              cfg.offset_ratio * (ref.end - ref.start));
  return std::abs(est.end - ref.end) <= tol;
}

int assign(std::size_t ref_idx, const std::vector<NoteEvent>& reference,
           const std::vector<NoteEvent>& estimate, const MatchingConfig& cfg,
           std::vector<bool>& used) {
  if (ref_idx == reference.size()) return 0;
  int best = assign(ref_idx + 1, reference, estimate, cfg, used);  // skip
  for (std::size_t e = 0; e < estimate.size(); ++e) {
    if (!used[e] && pair_ok(reference[ref_idx], estimate[e], cfg)) {
      used[e] = true;
      best = std::max(best, 1 + assign(ref_idx + 1, reference, estimate, cfg, used));
      used[e] = false;
    }
  }
  return best;
}

}  // namespace

int brute_force_matching_size(const std::vector<NoteEvent>& reference,
                              const std::vector<NoteEvent>& estimate,
                              const MatchingConfig& config) {
  std::vector<bool> used(estimate.size(), false);
  return assign(0, reference, estimate, config, used);
}

}  // namespace adsrnote::testing
