#include "adsrnote/io/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace adsrnote {

namespace {

constexpr char kMagic[4] = {'A', 'D', 'S', 'R'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  Reader(std::string bytes, std::string path)
      : bytes_(std::move(bytes)), path_(std::move(path)) {}

  std::size_t offset() const { return pos_; }

  void need(std::size_t n, const char* what) {
    if (pos_ + n > bytes_.size()) {
      throw std::runtime_error(path_ + ": truncated " + what + " at byte offset " +
                               std::to_string(pos_));
    }
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  const char* raw(std::size_t n, const char* what) {
    need(n, what);
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  void expect_end() {
    if (pos_ != bytes_.size()) {
      throw std::runtime_error(path_ + ": trailing bytes at offset " +
                               std::to_string(pos_));
    }
  }

  const std::string& path() const { return path_; }

 private:
  std::string bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return bytes;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path);
}

static_assert(std::endian::native == std::endian::little,
              "payload serialization assumes a little-endian host");

}  // namespace

std::uint64_t MatrixData::element_count() const {
  std::uint64_t n = 1;
  for (std::uint64_t d : dims) n *= d;
  return dims.empty() ? 0 : n;
}

void write_matrix(const std::string& path, const MatrixData& matrix) {
  const std::uint64_t count = matrix.element_count();
  const std::size_t have =
      matrix.dtype == kDtypeF32 ? matrix.f32.size() : matrix.f64.size();
  if (have != count) {
    throw std::invalid_argument("matrix payload has " + std::to_string(have) +
                                " elements, dims demand " + std::to_string(count));
  }
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kContainerVersion);
  put_u32(out, matrix.dtype);
  put_u32(out, static_cast<std::uint32_t>(matrix.dims.size()));
  for (std::uint64_t d : matrix.dims) put_u64(out, d);
  if (matrix.dtype == kDtypeF32) {
    out.append(reinterpret_cast<const char*>(matrix.f32.data()),
               matrix.f32.size() * sizeof(float));
  } else {
    out.append(reinterpret_cast<const char*>(matrix.f64.data()),
               matrix.f64.size() * sizeof(double));
  }
  write_file(path, out);
}

MatrixData read_matrix(const std::string& path) {
  Reader r(read_file(path), path);
  const char* magic = r.raw(4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error(path + ": bad magic at byte offset 0 (not an ADSR container)");
  }
  const std::uint32_t version = r.u32("version");
  if (version != kContainerVersion) {
    throw std::runtime_error(path + ": unsupported container version " +
                             std::to_string(version));
  }
  MatrixData m;
  m.dtype = r.u32("dtype");
  if (m.dtype != kDtypeF32 && m.dtype != kDtypeF64) {
    throw std::runtime_error(path + ": unknown dtype tag " +
                             std::to_string(m.dtype) + " at byte offset 8");
  }
  const std::uint32_t ndims = r.u32("ndims");
  if (ndims > 8) {
    throw std::runtime_error(path + ": implausible dimension count " +
                             std::to_string(ndims));
  }
  m.dims.resize(ndims);
  for (std::uint32_t i = 0; i < ndims; ++i) m.dims[i] = r.u64("dims");
  const std::uint64_t count = m.element_count();
  if (m.dtype == kDtypeF32) {
    const char* p = r.raw(count * sizeof(float), "payload");
    m.f32.resize(count);
    std::memcpy(m.f32.data(), p, count * sizeof(float));
  } else {
    const char* p = r.raw(count * sizeof(double), "payload");
    m.f64.resize(count);
    std::memcpy(m.f64.data(), p, count * sizeof(double));
  }
  r.expect_end();
  return m;
}

void write_spectrogram(const std::string& path, const FilteredSpectrogram& spec) {
  MatrixData m;
  m.dtype = kDtypeF32;
  m.dims = {static_cast<std::uint64_t>(spec.frames),
            static_cast<std::uint64_t>(spec.bins)};
  m.f32 = spec.values;
  write_matrix(path, m);
}

FilteredSpectrogram read_spectrogram(const std::string& path, double frame_rate) {
  MatrixData m = read_matrix(path);
  if (m.dims.size() != 2 || m.dtype != kDtypeF32) {
    throw std::runtime_error(path + ": expected a 2-D f32 spectrogram container");
  }
  FilteredSpectrogram spec;
  spec.frames = static_cast<int>(m.dims[0]);
  spec.bins = static_cast<int>(m.dims[1]);
  spec.frame_rate = frame_rate;
  spec.values = std::move(m.f32);
  return spec;
}

void write_activations(const std::string& path, const ActivationMatrix& acts) {
  MatrixData m;
  m.dtype = kDtypeF32;
  m.dims = {static_cast<std::uint64_t>(acts.frames), kNumKeys, kNumStreams};
  m.f32 = acts.values;
  write_matrix(path, m);
}

ActivationMatrix read_activations(const std::string& path, double frame_rate) {
  MatrixData m = read_matrix(path);
  if (m.dims.size() != 3 || m.dims[1] != kNumKeys || m.dims[2] != kNumStreams ||
      m.dtype != kDtypeF32) {
    throw std::runtime_error(path + ": expected a T x 88 x 3 f32 activation container");
  }
  ActivationMatrix acts(static_cast<int>(m.dims[0]), frame_rate);
  acts.values = std::move(m.f32);
  acts.validate();
  return acts;
}

void write_targets(const std::string& path, const TargetMatrix& targets) {
  MatrixData m;
  m.dtype = kDtypeF32;
  m.dims = {static_cast<std::uint64_t>(targets.frames), kNumKeys, kNumStreams};
  m.f32.assign(targets.values.begin(), targets.values.end());
  write_matrix(path, m);
}

TargetMatrix read_targets(const std::string& path, double frame_rate) {
  MatrixData m = read_matrix(path);
  if (m.dims.size() != 3 || m.dims[1] != kNumKeys || m.dims[2] != kNumStreams ||
      m.dtype != kDtypeF32) {
    throw std::runtime_error(path + ": expected a T x 88 x 3 f32 target container");
  }
  TargetMatrix targets(static_cast<int>(m.dims[0]), frame_rate);
  for (std::size_t i = 0; i < m.f32.size(); ++i) {
    const float v = m.f32[i];
    if (v != 0.0f && v != 1.0f) {
      throw std::runtime_error(path + ": target payload must be binary");
    }
    targets.values[i] = v != 0.0f;
  }
  return targets;
}

}  // namespace adsrnote
