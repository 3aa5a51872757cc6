#include "gotedit/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "gotedit/error.hpp"

namespace gotedit {
namespace {

constexpr std::uint8_t kMagic[4] = {'G', 'T', 'E', 'D'};
constexpr std::uint8_t kVersion = 0x01;
constexpr std::uint8_t kDtypeFloat32 = 0x01;

static_assert(std::numeric_limits<float>::is_iec559, "GTED requires IEEE-754 float32");

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

// Element count for dims; throws when the float payload size would overflow.
std::size_t checked_count(const std::vector<std::uint32_t>& dims) {
  constexpr std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / 4;
  std::uint64_t n = 1;
  for (auto d : dims) {
    if (d != 0 && n > limit / d) {
      throw ValidationError("tensor dims product overflows");
    }
    n *= d;
  }
  if (n > std::numeric_limits<std::size_t>::max() / sizeof(float)) {
    throw ValidationError("tensor dims product overflows");
  }
  return static_cast<std::size_t>(n);
}

void validate_dims(const std::vector<std::uint32_t>& dims) {
  if (dims.empty() || dims.size() > Tensor::kMaxRank) {
    throw ValidationError("tensor rank must be between 1 and 4, got " + std::to_string(dims.size()));
  }
  for (auto d : dims) {
    if (d == 0) throw ValidationError("tensor extents must be positive");
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::uint32_t> dims, std::vector<float> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  validate_dims(dims_);
  if (checked_count(dims_) != data_.size()) {
    throw ValidationError("tensor data length does not match dims");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw ValidationError("tensor element " + std::to_string(i) + " is not finite");
    }
  }
}

Tensor Tensor::zeros(std::vector<std::uint32_t> dims) {
  validate_dims(dims);
  auto n = checked_count(dims);
  return Tensor(std::move(dims), std::vector<float>(n, 0.0f));
}

std::size_t gted_header_size(std::size_t rank) { return 4 + 1 + 1 + 4 * rank + 1; }

std::vector<std::uint8_t> tensor_encode(const Tensor& t) {
  std::vector<std::uint8_t> out;
  out.reserve(gted_header_size(t.rank()) + 4 * t.size());
  for (auto b : kMagic) out.push_back(b);
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(t.rank()));
  for (auto d : t.dims()) put_u32(out, d);
  out.push_back(kDtypeFloat32);
  for (float v : t.data()) {
    if (!std::isfinite(v)) throw ValidationError("refusing to encode a non-finite element");
    put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

Tensor tensor_decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 6) throw FormatError("GTED header truncated");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad GTED magic");
  if (bytes[4] != kVersion) {
    throw FormatError("unsupported GTED version " + std::to_string(bytes[4]));
  }
  const std::size_t rank = bytes[5];
  if (rank == 0 || rank > Tensor::kMaxRank) {
    throw FormatError("GTED rank " + std::to_string(rank) + " out of range");
  }
  const std::size_t header = gted_header_size(rank);
  if (bytes.size() < header) throw FormatError("GTED header truncated");

  std::vector<std::uint32_t> dims(rank);
  for (std::size_t i = 0; i < rank; ++i) dims[i] = get_u32(bytes.data() + 6 + 4 * i);
  if (bytes[header - 1] != kDtypeFloat32) {
    throw FormatError("unsupported GTED dtype " + std::to_string(bytes[header - 1]));
  }
  validate_dims(dims);
  const std::size_t count = checked_count(dims);
  const std::size_t payload = bytes.size() - header;
  if (payload < 4 * count) throw FormatError("GTED payload truncated");
  if (payload > 4 * count) throw FormatError("GTED payload has trailing bytes");

  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = std::bit_cast<float>(get_u32(bytes.data() + header + 4 * i));
  }
  return Tensor(std::move(dims), std::move(data));
}

void tensor_write(const Tensor& t, const std::filesystem::path& path) {
  auto bytes = tensor_encode(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Tensor tensor_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return tensor_decode(bytes);
}

Tensor matrix_to_tensor(const Eigen::MatrixXd& m) {
  std::vector<float> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(static_cast<float>(m(i, j)));
  return Tensor({static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())}, std::move(data));
}

Tensor vector_to_tensor(const Eigen::VectorXd& v) {
  std::vector<float> data(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) data[static_cast<std::size_t>(i)] = static_cast<float>(v[i]);
  return Tensor({static_cast<std::uint32_t>(v.size())}, std::move(data));
}

Eigen::MatrixXd tensor_to_matrix(const Tensor& t) {
  if (t.rank() != 2) throw ValidationError("expected a 2-D tensor, got rank " + std::to_string(t.rank()));
  Eigen::MatrixXd out(t.dims()[0], t.dims()[1]);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = t[k++];
  return out;
}

Eigen::VectorXd tensor_to_vector(const Tensor& t) {
  if (t.rank() != 1) throw ValidationError("expected a 1-D tensor, got rank " + std::to_string(t.rank()));
  Eigen::VectorXd out(t.dims()[0]);
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = t[static_cast<std::size_t>(i)];
  return out;
}

const char* to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::semantic: return "semantic";
    case FeatureKind::geometric: return "geometric";
    case FeatureKind::fused: return "fused";
  }
  return "unknown";
}

FeatureMap::FeatureMap(FeatureKind kind, int channels, int height, int width)
    : FeatureMap(kind, height, width, Eigen::MatrixXd::Zero(channels, std::max(0, height * width))) {}

FeatureMap::FeatureMap(FeatureKind kind, int height, int width, Eigen::MatrixXd values)
    : kind_(kind), height_(height), width_(width), values_(std::move(values)) {
  if (values_.rows() < 1 || height_ < 1 || width_ < 1) {
    throw ValidationError("feature map extents must be positive");
  }
  if (values_.cols() != static_cast<Eigen::Index>(height_) * width_) {
    throw ValidationError("feature map column count must equal H*W");
  }
}

bool FeatureMap::same_shape(const FeatureMap& other) const {
  return channels() == other.channels() && height_ == other.height_ && width_ == other.width_;
}

Tensor FeatureMap::to_tensor() const {
  const int C = channels();
  std::vector<float> data(static_cast<std::size_t>(C) * cells());
  std::size_t k = 0;
  for (int c = 0; c < C; ++c) {
    for (int i = 0; i < cells(); ++i) data[k++] = static_cast<float>(values_(c, i));
  }
  return Tensor({static_cast<std::uint32_t>(C), static_cast<std::uint32_t>(height_),
                 static_cast<std::uint32_t>(width_)},
                std::move(data));
}

FeatureMap FeatureMap::from_tensor(const Tensor& t, FeatureKind kind) {
  if (t.rank() != 3) throw ValidationError("feature map tensor must have dims [C,H,W]");
  const int C = static_cast<int>(t.dims()[0]);
  const int H = static_cast<int>(t.dims()[1]);
  const int W = static_cast<int>(t.dims()[2]);
  Eigen::MatrixXd v(C, H * W);
  std::size_t k = 0;
  for (int c = 0; c < C; ++c) {
    for (int i = 0; i < H * W; ++i) v(c, i) = t[k++];
  }
  return FeatureMap(kind, H, W, std::move(v));
}

}  // namespace gotedit
