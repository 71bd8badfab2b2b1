#ifndef ADSRNOTE_IO_CONTAINER_HPP
#define ADSRNOTE_IO_CONTAINER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "adsrnote/activation.hpp"
#include "adsrnote/features.hpp"

namespace adsrnote {

// Versioned binary matrix container, little-endian throughout:
//   bytes 0..3   magic "ADSR"
//   4..7         u32 format version (currently 1)
//   8..11        u32 dtype tag (1 = f32, 2 = f64)
//   12..15       u32 number of dimensions
//   then         u64 dims, then the payload, row-major, stream axis last.
// One format serves spectrograms (T x bins), activations and targets
// (T x 88 x 3). Parse errors name the byte offset.
inline constexpr std::uint32_t kContainerVersion = 1;
inline constexpr std::uint32_t kDtypeF32 = 1;
inline constexpr std::uint32_t kDtypeF64 = 2;

struct MatrixData {
  std::uint32_t dtype = kDtypeF32;
  std::vector<std::uint64_t> dims;
  std::vector<float> f32;
  std::vector<double> f64;

  std::uint64_t element_count() const;
};

void write_matrix(const std::string& path, const MatrixData& matrix);
MatrixData read_matrix(const std::string& path);

// Typed wrappers (all f32 payloads, frame rate is the caller's contract —
// containers carry shape, not rate; the pipeline is fixed at 50 frames/s).
void write_spectrogram(const std::string& path, const FilteredSpectrogram& spec);
FilteredSpectrogram read_spectrogram(const std::string& path,
                                     double frame_rate = 50.0);

void write_activations(const std::string& path, const ActivationMatrix& acts);
ActivationMatrix read_activations(const std::string& path,
                                  double frame_rate = 50.0);

void write_targets(const std::string& path, const TargetMatrix& targets);
TargetMatrix read_targets(const std::string& path, double frame_rate = 50.0);

}  // namespace adsrnote

#endif  // ADSRNOTE_IO_CONTAINER_HPP
