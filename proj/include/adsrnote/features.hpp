#ifndef ADSRNOTE_FEATURES_HPP
#define ADSRNOTE_FEATURES_HPP

#include <span>
#include <vector>

namespace adsrnote {

// Frontend configuration. The reference configuration is the defaults below:
// 50 frames/s, 11 context frames, 144 semi-logarithmically spaced bands
// (about two per semitone in the logarithmic region).
struct FeatureConfig {
  int sample_rate = 44100;
  int fft_size = 4096;             // power of two
  double frame_rate = 50.0;        // frames per second
  int context_frames = 11;         // must be odd
  int num_bins = 144;
  double bins_per_semitone = 2.0;  // grid density in the logarithmic region
  double fmin = 27.5;              // A0 fundamental
  double fmax = 9500.0;  // chosen so the defaults realize exactly 144 bands

  // sample_rate / frame_rate; throws if not an exact integer.
  int hop_size() const;
  // Throws std::invalid_argument on violated invariants.
  void validate() const;
};

// Bank of triangular filters over the linear FFT bins. Centers sit on a
// quarter-tone grid where the FFT resolution permits; at low frequencies
// colliding centers are merged, which degrades gracefully to the linear
// bin spacing. Each filter is normalized to unit maximum.
struct Filterbank {
  int spectrum_bins = 0;            // fft_size / 2 + 1
  int num_filters = 0;
  std::vector<double> weights;      // num_filters x spectrum_bins, filter-major
  std::vector<int> center_bins;     // strictly increasing
  std::vector<double> center_freqs; // Hz, of the merged grid

  double weight(int filter, int bin) const {
    return weights[static_cast<std::size_t>(filter) * spectrum_bins + bin];
  }
};

// Number of distinct filter centers the (fmin, fmax, sample_rate, fft_size)
// grid realizes; build_filterbank fails unless this equals num_bins.
int count_realizable_filters(const FeatureConfig& config);

// Throws std::invalid_argument if the configuration cannot realize exactly
// config.num_bins filters.
Filterbank build_filterbank(const FeatureConfig& config);

// Log-magnitude filtered spectrogram, T x num_bins at frame_rate.
struct FilteredSpectrogram {
  int frames = 0;
  int bins = 0;
  double frame_rate = 50.0;
  std::vector<float> values;  // frames x bins, row-major

  float at(int t, int b) const {
    return values[static_cast<std::size_t>(t) * bins + b];
  }
};

// Mono audio with its sample rate (what the WAV reader produces).
struct AudioBuffer {
  int sample_rate = 0;
  std::vector<float> samples;
};

// STFT (Hann window, length fft_size, hop sample_rate/frame_rate) ->
// filterbank -> log(1 + m). The audio is padded with fft_size/2 zeros on
// both sides so frame t's analysis window is centered at t / frame_rate;
// T = ceil(len / hop), frame t covers [t, t+1) / frame_rate.
// Empty audio yields an empty spectrogram.
FilteredSpectrogram compute_spectrogram(std::span<const float> audio,
                                        const FeatureConfig& config);

// Same, but rejects audio whose sample rate differs from the config.
FilteredSpectrogram compute_spectrogram(const AudioBuffer& audio,
                                        const FeatureConfig& config);

// One network input: context_frames x bins around a center frame.
struct ContextWindow {
  int rows = 0;       // context frames
  int cols = 0;       // bins
  int center_frame = 0;
  std::vector<double> values;  // rows x cols

  double at(int r, int c) const {
    return values[static_cast<std::size_t>(r) * cols + c];
  }
};

// Rows t - c/2 .. t + c/2; out-of-range rows replicate the nearest valid
// frame. Throws std::out_of_range for t outside [0, frames).
ContextWindow context_window(const FilteredSpectrogram& spec, int t,
                             int context_frames);

// Magnitudes |X_k| of the real DFT, k = 0..n/2. n must be a power of two.
// Exposed for the frontend and its tests.
void real_fft_magnitude(std::span<const double> frame,
                        std::vector<double>& magnitudes);

}  // namespace adsrnote

#endif  // ADSRNOTE_FEATURES_HPP
