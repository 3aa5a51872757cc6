#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gotedit {

// Dense row-major float32 tensor with up to four axes. Immutable once built.
class Tensor {
 public:
  static constexpr std::size_t kMaxRank = 4;

  Tensor() = default;
  // Throws ValidationError if dims are empty, exceed kMaxRank, contain a zero
  // extent, disagree with data.size(), or if any element is not finite.
  Tensor(std::vector<std::uint32_t> dims, std::vector<float> data);

  static Tensor zeros(std::vector<std::uint32_t> dims);

  const std::vector<std::uint32_t>& dims() const { return dims_; }
  std::span<const float> data() const { return data_; }
  std::size_t size() const { return data_.size(); }
  std::size_t rank() const { return dims_.size(); }

  float operator[](std::size_t i) const { return data_[i]; }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::uint32_t> dims_;
  std::vector<float> data_;
};

// Bytes of the GTED header for a tensor of the given rank.
std::size_t gted_header_size(std::size_t rank);

// Serialize to the GTED wire format (see README for the byte layout).
std::vector<std::uint8_t> tensor_encode(const Tensor& t);
Tensor tensor_decode(std::span<const std::uint8_t> bytes);

// Conversions between 1-D/2-D tensors and Eigen objects (row-major order).
Tensor matrix_to_tensor(const Eigen::MatrixXd& m);
Tensor vector_to_tensor(const Eigen::VectorXd& v);
Eigen::MatrixXd tensor_to_matrix(const Tensor& t);
Eigen::VectorXd tensor_to_vector(const Tensor& t);

void tensor_write(const Tensor& t, const std::filesystem::path& path);
Tensor tensor_read(const std::filesystem::path& path);

enum class FeatureKind { semantic, geometric, fused };

const char* to_string(FeatureKind kind);

// C x H x W activation grid. Values are held in double precision as a
// C x (H*W) matrix whose column h*W + w is the channel vector at (h, w).
class FeatureMap {
 public:
  FeatureMap(FeatureKind kind, int channels, int height, int width);
  FeatureMap(FeatureKind kind, int height, int width, Eigen::MatrixXd values);

  FeatureKind kind() const { return kind_; }
  int channels() const { return static_cast<int>(values_.rows()); }
  int height() const { return height_; }
  int width() const { return width_; }
  int cells() const { return height_ * width_; }

  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }

  double operator()(int c, int h, int w) const { return values_(c, h * width_ + w); }
  double& operator()(int c, int h, int w) { return values_(c, h * width_ + w); }

  bool same_shape(const FeatureMap& other) const;

  // Narrowing conversion to float32 [C, H, W].
  Tensor to_tensor() const;
  static FeatureMap from_tensor(const Tensor& t, FeatureKind kind);

 private:
  FeatureKind kind_;
  int height_;
  int width_;
  Eigen::MatrixXd values_;
};

}  // namespace gotedit
