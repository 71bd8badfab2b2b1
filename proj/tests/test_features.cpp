#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "adsrnote/features.hpp"
#include "adsrnote/rng.hpp"
#include "oracles.hpp"

using namespace adsrnote;

TEST_SUITE_BEGIN("features");

namespace {

FeatureConfig small_config() {
  // Non-reference config for cheap oracle runs: 8 kHz, 256-point FFT.
  FeatureConfig cfg;
  cfg.sample_rate = 8000;
  cfg.fft_size = 256;
  cfg.frame_rate = 50.0;
  cfg.fmin = 100.0;
  cfg.fmax = 3400.0;
  cfg.num_bins = count_realizable_filters(cfg);
  return cfg;
}

std::vector<float> random_audio(Rng& rng, int n) {
  std::vector<float> audio(n);
  for (float& s : audio) s = static_cast<float>(rng.uniform() * 2.0 - 1.0);
  return audio;
}

}  // namespace

TEST_CASE("reference configuration realizes exactly 144 filters") {
  const Filterbank fb = build_filterbank(FeatureConfig{});
  CHECK(fb.num_filters == 144);
  CHECK(fb.center_bins.size() == 144);
  for (int k = 1; k < fb.num_filters; ++k) {
    CHECK(fb.center_bins[k] > fb.center_bins[k - 1]);
  }
}

TEST_CASE("logarithmic region carries about two filters per semitone") {
  const Filterbank fb = build_filterbank(FeatureConfig{});
  // Count centers within one octave well above the linear region.
  int in_octave = 0;
  for (double f : fb.center_freqs) {
    if (f >= 1000.0 && f < 2000.0) ++in_octave;
  }
  CHECK(in_octave >= 22);
  CHECK(in_octave <= 26);

  // Halving the grid density roughly halves the realizable band count.
  FeatureConfig coarse;
  coarse.bins_per_semitone = 1.0;
  const int coarse_bands = count_realizable_filters(coarse);
  CHECK(coarse_bands < 100);
  CHECK(coarse_bands > 50);
}

TEST_CASE("no filter is entirely zero and peaks are unit") {
  const Filterbank fb = build_filterbank(FeatureConfig{});
  for (int k = 0; k < fb.num_filters; ++k) {
    double peak = 0.0;
    for (int j = 0; j < fb.spectrum_bins; ++j) {
      CHECK(fb.weight(k, j) >= 0.0);
      peak = std::max(peak, fb.weight(k, j));
    }
    CHECK(peak == doctest::Approx(1.0));
  }
}

TEST_CASE("filter nearest 440 Hz responds maximally to a 440 Hz sinusoid") {
  const FeatureConfig cfg;
  const Filterbank fb = build_filterbank(cfg);

  // Analytic route: windowed pure tone -> naive DFT -> filterbank.
  std::vector<double> frame(cfg.fft_size);
  for (int i = 0; i < cfg.fft_size; ++i) {
    const double window = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / (cfg.fft_size - 1));
    frame[i] = window * std::sin(2.0 * M_PI * 440.0 * i / cfg.sample_rate);
  }
  const std::vector<double> mags = testing::naive_dft_magnitude(frame);

  int best_filter = 0;
  double best_response = -1.0;
  for (int k = 0; k < fb.num_filters; ++k) {
    double acc = 0.0;
    for (int j = 0; j < fb.spectrum_bins; ++j) acc += fb.weight(k, j) * mags[j];
    if (acc > best_response) {
      best_response = acc;
      best_filter = k;
    }
  }

  int nearest = 0;
  for (int k = 1; k < fb.num_filters; ++k) {
    if (std::abs(fb.center_freqs[k] - 440.0) <
        std::abs(fb.center_freqs[nearest] - 440.0)) {
      nearest = k;
    }
  }
  CHECK(best_filter == nearest);
}

TEST_CASE("fft magnitudes agree with the naive DFT") {
  Rng rng(7);
  std::vector<double> signal(256);
  for (double& s : signal) s = rng.uniform() * 2.0 - 1.0;
  std::vector<double> fast;
  real_fft_magnitude(signal, fast);
  const std::vector<double> slow = testing::naive_dft_magnitude(signal);
  REQUIRE(fast.size() == slow.size());
  for (std::size_t k = 0; k < fast.size(); ++k) {
    CHECK(fast[k] == doctest::Approx(slow[k]).epsilon(1e-9));
  }
}

TEST_CASE("all-zero audio maps to an all-zero spectrogram") {
  const FeatureConfig cfg = small_config();
  const std::vector<float> audio(8000, 0.0f);
  const FilteredSpectrogram spec = compute_spectrogram(audio, cfg);
  CHECK(spec.frames == 50);
  for (float v : spec.values) CHECK(v == 0.0f);
}

TEST_CASE("one second at the reference rate yields 50 frames") {
  const std::vector<float> audio(44100, 0.1f);
  const FilteredSpectrogram spec = compute_spectrogram(audio, FeatureConfig{});
  CHECK(spec.frames == 50);
  CHECK(spec.bins == 144);
}

TEST_CASE("empty audio yields an empty spectrogram, not an error") {
  const FilteredSpectrogram spec =
      compute_spectrogram(std::vector<float>{}, small_config());
  CHECK(spec.frames == 0);
  CHECK(spec.values.empty());
}

TEST_CASE("sample-rate mismatch demands resampling") {
  AudioBuffer audio;
  audio.sample_rate = 22050;
  audio.samples.assign(1000, 0.0f);
  CHECK_THROWS_WITH_AS(compute_spectrogram(audio, small_config()),
                       doctest::Contains("resample"), std::invalid_argument);
}

TEST_CASE("doubling the amplitude moves every bin by at most log 2") {
  const FeatureConfig cfg = small_config();
  Rng rng(11);
  const std::vector<float> audio = random_audio(rng, 4000);
  std::vector<float> doubled(audio.size());
  for (std::size_t i = 0; i < audio.size(); ++i) doubled[i] = 2.0f * audio[i];

  const FilteredSpectrogram a = compute_spectrogram(audio, cfg);
  const FilteredSpectrogram b = compute_spectrogram(doubled, cfg);
  REQUIRE(a.values.size() == b.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double delta = static_cast<double>(b.values[i]) - a.values[i];
    CHECK(delta >= -1e-6);
    CHECK(delta <= std::log(2.0) + 1e-6);
  }
}

TEST_CASE("shifting audio by one hop shifts the spectrogram by one frame") {
  const FeatureConfig cfg = small_config();
  const int hop = cfg.hop_size();
  Rng rng(13);
  const std::vector<float> audio = random_audio(rng, 3200);
  std::vector<float> shifted(static_cast<std::size_t>(hop), 0.0f);
  shifted.insert(shifted.end(), audio.begin(), audio.end());

  const FilteredSpectrogram a = compute_spectrogram(audio, cfg);
  const FilteredSpectrogram b = compute_spectrogram(shifted, cfg);
  REQUIRE(b.frames == a.frames + 1);
  for (int t = 0; t < a.frames; ++t) {
    for (int c = 0; c < a.bins; ++c) {
      CHECK(b.at(t + 1, c) == doctest::Approx(a.at(t, c)).epsilon(1e-6));
    }
  }
}

TEST_CASE("identical input and config produce bit-identical output") {
  const FeatureConfig cfg = small_config();
  Rng rng(17);
  const std::vector<float> audio = random_audio(rng, 5000);
  const FilteredSpectrogram a = compute_spectrogram(audio, cfg);
  const FilteredSpectrogram b = compute_spectrogram(audio, cfg);
  CHECK(a.values == b.values);
}

TEST_CASE("context window replicates edges") {
  FilteredSpectrogram spec;
  spec.frames = 1;
  spec.bins = 3;
  spec.values = {1.0f, 2.0f, 3.0f};
  const ContextWindow win = context_window(spec, 0, 11);
  REQUIRE(win.rows == 11);
  for (int r = 0; r < 11; ++r) {
    CHECK(win.at(r, 0) == 1.0);
    CHECK(win.at(r, 2) == 3.0);
  }
}

TEST_CASE("context window copies interior rows verbatim") {
  FilteredSpectrogram spec;
  spec.frames = 12;
  spec.bins = 2;
  spec.values.resize(24);
  for (int t = 0; t < 12; ++t) {
    spec.values[2 * t] = static_cast<float>(t);
    spec.values[2 * t + 1] = static_cast<float>(10 * t);
  }
  const ContextWindow win = context_window(spec, 5, 11);
  for (int r = 0; r < 11; ++r) {
    CHECK(win.at(r, 0) == static_cast<double>(r));
    CHECK(win.at(r, 1) == static_cast<double>(10 * r));
  }

  const ContextWindow left = context_window(spec, 0, 11);
  const int expected[11] = {0, 0, 0, 0, 0, 0, 1, 2, 3, 4, 5};
  for (int r = 0; r < 11; ++r) CHECK(left.at(r, 0) == expected[r]);
}

TEST_CASE("context window rejects out-of-range centers") {
  FilteredSpectrogram spec;
  spec.frames = 4;
  spec.bins = 1;
  spec.values.assign(4, 0.0f);
  CHECK_THROWS_AS(context_window(spec, -1, 11), std::out_of_range);
  CHECK_THROWS_AS(context_window(spec, 4, 11), std::out_of_range);
}

TEST_CASE("configuration errors are rejected") {
  FeatureConfig bad;
  bad.frame_rate = 59.0;  // 44100 / 59 is not an integer hop
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  FeatureConfig too_few;
  too_few.fmax = 8000.0;  // realizes 138 < 144 bands
  CHECK_THROWS_WITH_AS(build_filterbank(too_few), doctest::Contains("138"),
                       std::invalid_argument);

  FeatureConfig not_pow2;
  not_pow2.fft_size = 4095;
  CHECK_THROWS_AS(not_pow2.validate(), std::invalid_argument);

  FeatureConfig even_context;
  even_context.context_frames = 10;
  CHECK_THROWS_AS(even_context.validate(), std::invalid_argument);
}

TEST_SUITE_END();
