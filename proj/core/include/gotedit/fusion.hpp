#pragma once

#include <cstdint>
#include <filesystem>

#include <Eigen/Dense>

#include "gotedit/tensor.hpp"

namespace gotedit {

// Per-pixel C' -> C linear map applied after bilinear resampling to (H, W).
struct AlignParams {
  Eigen::MatrixXd projection;  // C x C'
  Eigen::VectorXd bias;        // C
  int out_height = 0;
  int out_width = 0;

  static AlignParams seeded(int C, int C_geo, int height, int width, std::uint64_t seed);
};

// 1x1 convolution over [v_s; aligned_g] followed by a sigmoid.
struct GateParams {
  Eigen::MatrixXd weights;  // C x 2C
  Eigen::VectorXd bias;     // C

  static GateParams seeded(int C, std::uint64_t seed);
  // All-zero weights with a constant bias: the mask is sigmoid(bias) everywhere.
  static GateParams constant(int C, double bias);
};

struct FusionParams {
  AlignParams align;
  GateParams gate;

  // Reads align_proj.gted, align_bias.gted, gate_w.gted and gate_b.gted from dir.
  static FusionParams load(const std::filesystem::path& dir, int out_height, int out_width);
  void save(const std::filesystem::path& dir) const;
};

struct GatingMask {
  Eigen::MatrixXd m;  // C x (H*W), every entry in [0, 1]
  int height = 0;
  int width = 0;
};

// Bilinear resampling with align-corners sampling; the identity when sizes match.
FeatureMap bilinear_resize(const FeatureMap& src, int height, int width);

FeatureMap align(const FeatureMap& v_g, const AlignParams& params);
GatingMask gate_mask(const FeatureMap& v_s, const FeatureMap& aligned_g, const GateParams& params);
FeatureMap fuse(const FeatureMap& v_s, const FeatureMap& aligned_g, const GatingMask& m);

// align -> gate_mask -> fuse in one call.
FeatureMap fuse_features(const FeatureMap& v_s, const FeatureMap& v_g, const FusionParams& params);

}  // namespace gotedit
