#include "adsrnote/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include <json.hpp>

#include "adsrnote/parallel.hpp"

namespace adsrnote {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

constexpr int kN = static_cast<int>(AdsrState::N);
constexpr int kA0 = static_cast<int>(AdsrState::A0);
constexpr int kA1 = static_cast<int>(AdsrState::A1);
constexpr int kD0 = static_cast<int>(AdsrState::D0);
constexpr int kD1 = static_cast<int>(AdsrState::D1);
constexpr int kS = static_cast<int>(AdsrState::S);
constexpr int kR = static_cast<int>(AdsrState::R);

// Structural support: the drawn edge set plus the N->N self loop (without
// it the no-note state could not persist).
constexpr bool kEdge[kNumAdsrStates][kNumAdsrStates] = {
    //           N      A0     A1     D0     D1     S      R
    /* N  */ {true, true, false, false, false, false, false},
    /* A0 */ {true, false, true, false, false, false, false},
    /* A1 */ {true, false, false, true, false, false, false},
    /* D0 */ {true, false, false, false, true, false, false},
    /* D1 */ {true, false, false, false, false, true, false},
    /* S  */ {false, true, false, false, false, true, true},
    /* R  */ {true, false, false, false, false, false, false},
};

const char* kStateNames[kNumAdsrStates] = {"N", "A0", "A1", "D0", "D1", "S", "R"};

bool is_sounding(AdsrState s) { return s != AdsrState::N && s != AdsrState::R; }

}  // namespace

const char* to_string(AdsrState s) { return kStateNames[static_cast<int>(s)]; }

AdsrState adsr_state_from_string(const std::string& name) {
  for (int i = 0; i < kNumAdsrStates; ++i) {
    if (name == kStateNames[i]) return static_cast<AdsrState>(i);
  }
  throw std::invalid_argument("unknown ADSR state name: " + name);
}

bool adsr_edge_allowed(AdsrState from, AdsrState to) {
  return kEdge[static_cast<int>(from)][static_cast<int>(to)];
}

void AdsrHmmSpec::validate() const {
  for (int i = 0; i < kNumAdsrStates; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < kNumAdsrStates; ++j) {
      const double p = transitions[i][j];
      if (!kEdge[i][j] && p != 0.0) {
        throw std::invalid_argument(std::string("transition ") + kStateNames[i] +
                                    "->" + kStateNames[j] +
                                    " is outside the structural edge set and must be 0");
      }
      if (p < 0.0 || p > 1.0) {
        throw std::invalid_argument(std::string("transition ") + kStateNames[i] +
                                    "->" + kStateNames[j] + " outside [0,1]");
      }
      row_sum += p;
    }
    if (std::abs(row_sum - 1.0) > 1e-9) {
      throw std::invalid_argument(std::string("transition row ") +
                                  kStateNames[i] + " sums to " +
                                  std::to_string(row_sum) + ", expected 1");
    }
  }
  double init_sum = 0.0;
  for (double p : initial) {
    if (p < 0.0 || p > 1.0) {
      throw std::invalid_argument("initial probabilities must lie in [0,1]");
    }
    init_sum += p;
  }
  if (std::abs(init_sum - 1.0) > 1e-9) {
    throw std::invalid_argument("initial distribution sums to " +
                                std::to_string(init_sum) + ", expected 1");
  }
  if (!(emission_floor > 0.0) || emission_floor >= 1.0) {
    throw std::invalid_argument("emission_floor must lie in (0,1)");
  }
}

AdsrHmmSpec default_hmm_spec() {
  // Hand-tuned (the published model ships no values) around three
  // constraints, assuming plateau emissions near p = 0.95:
  //   - sustaining beats idling per frame: log(S->S) + log(p) > log(N->N),
  //     otherwise long notes decode to silence (N watches only the onset
  //     stream, so it rides high-intermediate stretches for free);
  //   - early aborts (A*/D* -> N) are rarer than finishing through S -> R,
  //     otherwise the decoder harvests onset bumps and bails before S;
  //   - entry plus exit cost stays well below the onset-bump reward
  //     3|log(1 - p)|, leaving budget for a few floored frames inside a
  //     note before skipping it becomes cheaper.
  AdsrHmmSpec spec;
  spec.transitions[kN][kN] = 0.70;
  spec.transitions[kN][kA0] = 0.30;
  spec.transitions[kA0][kA1] = 0.998;
  spec.transitions[kA0][kN] = 0.002;
  spec.transitions[kA1][kD0] = 0.998;
  spec.transitions[kA1][kN] = 0.002;
  spec.transitions[kD0][kD1] = 0.998;
  spec.transitions[kD0][kN] = 0.002;
  spec.transitions[kD1][kS] = 0.998;
  spec.transitions[kD1][kN] = 0.002;
  spec.transitions[kS][kS] = 0.975;
  spec.transitions[kS][kR] = 0.02;
  spec.transitions[kS][kA0] = 0.005;
  spec.transitions[kR][kN] = 1.0;
  spec.initial[kN] = 1.0;
  spec.emissions[kN] = {kOnsetStream, true};
  spec.emissions[kA0] = {kOnsetStream, false};
  spec.emissions[kA1] = {kOnsetStream, false};
  spec.emissions[kD0] = {kIntermediateStream, false};
  spec.emissions[kD1] = {kIntermediateStream, false};
  spec.emissions[kS] = {kIntermediateStream, false};
  spec.emissions[kR] = {kOffsetStream, false};
  return spec;
}

double emission_logprob(const AdsrHmmSpec& spec, AdsrState state,
                        const float* activation_triple) {
  const EmissionSelector& sel = spec.emissions[static_cast<int>(state)];
  double v = activation_triple[sel.stream];
  if (sel.complement) v = 1.0 - v;
  return std::log(std::max(v, spec.emission_floor));
}

ViterbiResult viterbi(const AdsrHmmSpec& spec,
                      std::span<const float> key_activations) {
  if (key_activations.size() % kNumStreams != 0 || key_activations.empty()) {
    throw std::invalid_argument(
        "key activations must be a nonempty sequence of (on, int, off) triples");
  }
  const int frames = static_cast<int>(key_activations.size()) / kNumStreams;

  double log_trans[kNumAdsrStates][kNumAdsrStates];
  for (int i = 0; i < kNumAdsrStates; ++i) {
    for (int j = 0; j < kNumAdsrStates; ++j) {
      const double p = spec.transitions[i][j];
      log_trans[i][j] = (kEdge[i][j] && p > 0.0) ? std::log(p) : kNegInf;
    }
  }

  std::vector<std::int8_t> backptr(
      static_cast<std::size_t>(frames) * kNumAdsrStates, 0);
  std::array<double, kNumAdsrStates> delta, next;
  for (int s = 0; s < kNumAdsrStates; ++s) {
    delta[s] = spec.initial[s] > 0.0
                   ? std::log(spec.initial[s]) +
                         emission_logprob(spec, static_cast<AdsrState>(s),
                                          &key_activations[0])
                   : kNegInf;
  }

  for (int t = 1; t < frames; ++t) {
    const float* row = &key_activations[static_cast<std::size_t>(t) * kNumStreams];
    for (int s = 0; s < kNumAdsrStates; ++s) {
      double best = kNegInf;
      int best_prev = 0;
      for (int p = 0; p < kNumAdsrStates; ++p) {
        if (log_trans[p][s] == kNegInf || delta[p] == kNegInf) continue;
        const double cand = delta[p] + log_trans[p][s];
        if (cand > best) {
          best = cand;
          best_prev = p;
        }
      }
      next[s] = best == kNegInf
                    ? kNegInf
                    : best + emission_logprob(spec, static_cast<AdsrState>(s), row);
      backptr[static_cast<std::size_t>(t) * kNumAdsrStates + s] =
          static_cast<std::int8_t>(best_prev);
    }
    delta = next;
  }

  int best_state = 0;
  for (int s = 1; s < kNumAdsrStates; ++s) {
    if (delta[s] > delta[best_state]) best_state = s;
  }

  ViterbiResult result;
  result.log_score = delta[best_state];
  result.path.resize(frames);
  int s = best_state;
  for (int t = frames - 1; t >= 0; --t) {
    result.path[t] = static_cast<AdsrState>(s);
    if (t > 0) s = backptr[static_cast<std::size_t>(t) * kNumAdsrStates + s];
  }
  return result;
}

std::vector<NoteSegment> extract_segments(const std::vector<AdsrState>& path,
                                          int key) {
  std::vector<NoteSegment> segments;
  std::optional<NoteSegment> open;

  auto close_at = [&](int end_frame) {
    open->end_frame = end_frame;
    open->states.assign(path.begin() + open->start_frame,
                        path.begin() + end_frame);
    if (open->reached_s) segments.push_back(std::move(*open));
    open.reset();
  };

  const int frames = static_cast<int>(path.size());
  for (int t = 0; t < frames; ++t) {
    const AdsrState st = path[t];
    if (st == AdsrState::A0) {
      if (open) close_at(t);  // S -> A0 retrigger ends the previous note
      open = NoteSegment{key, t, t, false, {}};
    } else if (is_sounding(st)) {
      if (open && st == AdsrState::S) open->reached_s = true;
    } else {
      // N or R terminates any open run; only runs that reached S survive.
      if (open) close_at(t);
    }
  }
  if (open) close_at(frames);
  return segments;
}

std::vector<NoteSegment> decode_all(const AdsrHmmSpec& spec,
                                    const ActivationMatrix& activations,
                                    int threads) {
  spec.validate();
  activations.validate();
  if (activations.frames == 0) return {};

  std::array<std::vector<NoteSegment>, kNumKeys> per_key;
  parallel_for(kNumKeys, threads, [&](int begin, int end) {
    std::vector<float> column(static_cast<std::size_t>(activations.frames) *
                              kNumStreams);
    for (int key = begin; key < end; ++key) {
      for (int t = 0; t < activations.frames; ++t) {
        for (int s = 0; s < kNumStreams; ++s) {
          column[static_cast<std::size_t>(t) * kNumStreams + s] =
              activations.at(t, key, s);
        }
      }
      per_key[key] = extract_segments(viterbi(spec, column).path, key);
    }
  });

  std::vector<NoteSegment> all;
  for (auto& segs : per_key) {
    all.insert(all.end(), std::make_move_iterator(segs.begin()),
               std::make_move_iterator(segs.end()));
  }
  return all;
}

std::string hmm_spec_to_json(const AdsrHmmSpec& spec) {
  nlohmann::json j;
  j["states"] = std::vector<std::string>(kStateNames, kStateNames + kNumAdsrStates);
  for (int i = 0; i < kNumAdsrStates; ++i) {
    j["transitions"].push_back(spec.transitions[i]);
  }
  j["initial"] = spec.initial;
  j["emission_floor"] = spec.emission_floor;
  static const char* stream_names[kNumStreams] = {"onset", "intermediate",
                                                  "offset"};
  for (int s = 0; s < kNumAdsrStates; ++s) {
    const EmissionSelector& sel = spec.emissions[s];
    j["emissions"][kStateNames[s]] =
        std::string(sel.complement ? "1-" : "") + stream_names[sel.stream];
  }
  return j.dump(2) + "\n";
}

AdsrHmmSpec hmm_spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("HMM config: ") + e.what());
  }
  AdsrHmmSpec spec = default_hmm_spec();
  if (j.contains("transitions")) {
    const auto& rows = j.at("transitions");
    if (rows.size() != kNumAdsrStates) {
      throw std::invalid_argument("HMM config: transitions must be 7x7");
    }
    for (int i = 0; i < kNumAdsrStates; ++i) {
      if (rows[i].size() != kNumAdsrStates) {
        throw std::invalid_argument("HMM config: transitions must be 7x7");
      }
      for (int k = 0; k < kNumAdsrStates; ++k) {
        spec.transitions[i][k] = rows[i][k].get<double>();
      }
    }
  }
  if (j.contains("initial")) {
    const auto& init = j.at("initial");
    if (init.size() != kNumAdsrStates) {
      throw std::invalid_argument("HMM config: initial must have 7 entries");
    }
    for (int i = 0; i < kNumAdsrStates; ++i) {
      spec.initial[i] = init[i].get<double>();
    }
  }
  if (j.contains("emission_floor")) {
    spec.emission_floor = j.at("emission_floor").get<double>();
  }
  if (j.contains("emissions")) {
    for (const auto& [state_name, selector] : j.at("emissions").items()) {
      const int s = static_cast<int>(adsr_state_from_string(state_name));
      std::string sel = selector.get<std::string>();
      EmissionSelector& dst = spec.emissions[s];
      dst.complement = sel.rfind("1-", 0) == 0;
      if (dst.complement) sel = sel.substr(2);
      if (sel == "onset") {
        dst.stream = kOnsetStream;
      } else if (sel == "intermediate") {
        dst.stream = kIntermediateStream;
      } else if (sel == "offset") {
        dst.stream = kOffsetStream;
      } else {
        throw std::invalid_argument("HMM config: unknown stream selector " + sel);
      }
    }
  }
  spec.validate();
  return spec;
}

}  // namespace adsrnote
