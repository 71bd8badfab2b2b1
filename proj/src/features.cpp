#include "adsrnote/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace adsrnote {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

double steps_per_octave(const FeatureConfig& config) {
  return 12.0 * config.bins_per_semitone;
}

}  // namespace

int FeatureConfig::hop_size() const {
  const double hop = static_cast<double>(sample_rate) / frame_rate;
  const int hop_int = static_cast<int>(hop);
  if (hop_int <= 0 || hop_int * frame_rate != static_cast<double>(sample_rate)) {
    throw std::invalid_argument(
        "sample_rate must be an integer multiple of frame_rate (got " +
        std::to_string(sample_rate) + " / " + std::to_string(frame_rate) + ")");
  }
  return hop_int;
}

void FeatureConfig::validate() const {
  if (!is_power_of_two(fft_size)) {
    throw std::invalid_argument("fft_size must be a power of two, got " +
                                std::to_string(fft_size));
  }
  (void)hop_size();
  if (context_frames < 1 || context_frames % 2 == 0) {
    throw std::invalid_argument("context_frames must be odd and positive, got " +
                                std::to_string(context_frames));
  }
  if (num_bins < 1) {
    throw std::invalid_argument("num_bins must be positive");
  }
  if (!(bins_per_semitone > 0.0)) {
    throw std::invalid_argument("bins_per_semitone must be positive");
  }
  if (!(fmin > 0.0) || !(fmin < fmax) || !(fmax <= sample_rate / 2.0)) {
    throw std::invalid_argument("need 0 < fmin < fmax <= sample_rate/2");
  }
}

void real_fft_magnitude(std::span<const double> frame,
                        std::vector<double>& magnitudes) {
  const std::size_t n = frame.size();
  if (!is_power_of_two(static_cast<int>(n))) {
    throw std::invalid_argument("FFT length must be a power of two, got " +
                                std::to_string(n));
  }
  static thread_local std::vector<double> re, im;
  re.assign(frame.begin(), frame.end());
  im.assign(n, 0.0);

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(re[i], re[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * M_PI / static_cast<double>(len);
    const double wr = std::cos(angle);
    const double wi = std::sin(angle);
    for (std::size_t start = 0; start < n; start += len) {
      double cr = 1.0, ci = 0.0;
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::size_t a = start + k;
        const std::size_t b = a + len / 2;
        const double tr = re[b] * cr - im[b] * ci;
        const double ti = re[b] * ci + im[b] * cr;
        re[b] = re[a] - tr;
        im[b] = im[a] - ti;
        re[a] += tr;
        im[a] += ti;
        const double next_cr = cr * wr - ci * wi;
        ci = cr * wi + ci * wr;
        cr = next_cr;
      }
    }
  }

  magnitudes.resize(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    magnitudes[k] = std::hypot(re[k], im[k]);
  }
}

namespace {

// Quarter-tone candidates, extended one step past each end so the edge
// filters get neighbors. Colliding centers merge onto the FFT bin grid.
void candidate_centers(const FeatureConfig& config, std::vector<int>& bins,
                       std::vector<bool>& interior) {
  const int spectrum_bins = config.fft_size / 2 + 1;
  const double bin_width =
      static_cast<double>(config.sample_rate) / config.fft_size;
  const double steps = steps_per_octave(config);
  const double step = std::pow(2.0, 1.0 / steps);
  for (int q = -1;; ++q) {
    const double f = config.fmin * std::pow(2.0, q / steps);
    if (f > config.fmax * step) break;
    const int bin = static_cast<int>(std::lround(f / bin_width));
    if (bin >= spectrum_bins) break;
    const bool in_range = f >= config.fmin && f <= config.fmax;
    if (!bins.empty() && bin == bins.back()) {
      interior.back() = interior.back() || in_range;
      continue;
    }
    bins.push_back(bin);
    interior.push_back(in_range);
  }
}

}  // namespace

int count_realizable_filters(const FeatureConfig& config) {
  config.validate();
  std::vector<int> bins;
  std::vector<bool> interior;
  candidate_centers(config, bins, interior);
  int count = 0;
  for (bool in : interior) count += in;
  return count;
}

Filterbank build_filterbank(const FeatureConfig& config) {
  config.validate();
  const int spectrum_bins = config.fft_size / 2 + 1;
  const double bin_width =
      static_cast<double>(config.sample_rate) / config.fft_size;

  std::vector<int> bins;
  std::vector<bool> interior;
  candidate_centers(config, bins, interior);

  std::vector<int> centers;
  std::vector<double> center_freqs;
  std::vector<int> lefts, rights;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (!interior[i]) continue;
    centers.push_back(bins[i]);
    center_freqs.push_back(bins[i] * bin_width);
    lefts.push_back(i > 0 ? bins[i - 1] : bins[i] - 1);
    rights.push_back(i + 1 < bins.size() ? bins[i + 1] : bins[i] + 1);
  }

  if (static_cast<int>(centers.size()) != config.num_bins) {
    throw std::invalid_argument(
        "configuration realizes " + std::to_string(centers.size()) +
        " filters, expected " + std::to_string(config.num_bins) +
        " (adjust fmin/fmax/fft_size)");
  }

  Filterbank fb;
  fb.spectrum_bins = spectrum_bins;
  fb.num_filters = config.num_bins;
  fb.center_bins = centers;
  fb.center_freqs = center_freqs;
  fb.weights.assign(
      static_cast<std::size_t>(fb.num_filters) * spectrum_bins, 0.0);
  for (int k = 0; k < fb.num_filters; ++k) {
    const int left = lefts[k], center = centers[k], right = rights[k];
    double* row = &fb.weights[static_cast<std::size_t>(k) * spectrum_bins];
    for (int j = std::max(left + 1, 0); j <= center; ++j) {
      row[j] = static_cast<double>(j - left) / (center - left);
    }
    for (int j = center; j < std::min(right, spectrum_bins); ++j) {
      row[j] = static_cast<double>(right - j) / (right - center);
    }
    row[center] = 1.0;
  }
  return fb;
}

FilteredSpectrogram compute_spectrogram(std::span<const float> audio,
                                        const FeatureConfig& config) {
  const Filterbank fb = build_filterbank(config);
  const int hop = config.hop_size();
  const int fft = config.fft_size;

  FilteredSpectrogram out;
  out.bins = fb.num_filters;
  out.frame_rate = config.frame_rate;
  if (audio.empty()) return out;

  const std::size_t n = audio.size();
  out.frames = static_cast<int>((n + hop - 1) / hop);
  out.values.assign(static_cast<std::size_t>(out.frames) * out.bins, 0.0f);

  // Zero-padding: fft/2 in front so frame t's window is centered at
  // t * hop, and enough at the back for the last frame.
  const std::size_t padded_len =
      std::max(static_cast<std::size_t>(out.frames - 1) * hop + fft,
               n + static_cast<std::size_t>(fft / 2));
  std::vector<double> padded(padded_len, 0.0);
  for (std::size_t i = 0; i < n; ++i) padded[i + fft / 2] = audio[i];

  std::vector<double> window(fft);
  for (int i = 0; i < fft; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / (fft - 1));
  }

  // Sparse filter supports for the per-frame dot products.
  std::vector<std::pair<int, int>> support(fb.num_filters);
  for (int k = 0; k < fb.num_filters; ++k) {
    const double* row = &fb.weights[static_cast<std::size_t>(k) * fb.spectrum_bins];
    int lo = 0;
    while (lo < fb.spectrum_bins && row[lo] == 0.0) ++lo;
    int hi = fb.spectrum_bins;
    while (hi > lo && row[hi - 1] == 0.0) --hi;
    support[k] = {lo, hi};
  }

  std::vector<double> frame(fft), mags;
  for (int t = 0; t < out.frames; ++t) {
    const double* src = &padded[static_cast<std::size_t>(t) * hop];
    for (int i = 0; i < fft; ++i) frame[i] = src[i] * window[i];
    real_fft_magnitude(frame, mags);
    float* dst = &out.values[static_cast<std::size_t>(t) * out.bins];
    for (int k = 0; k < fb.num_filters; ++k) {
      const double* row =
          &fb.weights[static_cast<std::size_t>(k) * fb.spectrum_bins];
      double acc = 0.0;
      for (int j = support[k].first; j < support[k].second; ++j) {
        acc += row[j] * mags[j];
      }
      dst[k] = static_cast<float>(std::log1p(acc));
    }
  }
  return out;
}

FilteredSpectrogram compute_spectrogram(const AudioBuffer& audio,
                                        const FeatureConfig& config) {
  if (audio.sample_rate != config.sample_rate) {
    throw std::invalid_argument(
        "audio sample rate " + std::to_string(audio.sample_rate) +
        " does not match the configured " + std::to_string(config.sample_rate) +
        " Hz; resample the input first (no resampler is built in)");
  }
  return compute_spectrogram(std::span<const float>(audio.samples), config);
}

ContextWindow context_window(const FilteredSpectrogram& spec, int t,
                             int context_frames) {
  if (t < 0 || t >= spec.frames) {
    throw std::out_of_range("context window center " + std::to_string(t) +
                            " outside [0, " + std::to_string(spec.frames) + ")");
  }
  if (context_frames < 1 || context_frames % 2 == 0) {
    throw std::invalid_argument("context_frames must be odd and positive");
  }
  ContextWindow win;
  win.rows = context_frames;
  win.cols = spec.bins;
  win.center_frame = t;
  win.values.resize(static_cast<std::size_t>(win.rows) * win.cols);
  const int half = context_frames / 2;
  for (int r = 0; r < context_frames; ++r) {
    const int src = std::clamp(t - half + r, 0, spec.frames - 1);
    for (int c = 0; c < spec.bins; ++c) {
      win.values[static_cast<std::size_t>(r) * win.cols + c] = spec.at(src, c);
    }
  }
  return win;
}

}  // namespace adsrnote
