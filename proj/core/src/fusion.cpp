#include "gotedit/fusion.hpp"

#include <cmath>
#include <random>
#include <string>

#include "gotedit/error.hpp"
#include "gotedit/random.hpp"

namespace gotedit {

AlignParams AlignParams::seeded(int C, int C_geo, int height, int width, std::uint64_t seed) {
  Rng rng(seed);
  AlignParams p;
  p.projection = gaussian_matrix(C, C_geo, 1.0 / std::sqrt(static_cast<double>(C_geo)), rng);
  p.bias = gaussian_matrix(C, 1, 1.0 / std::sqrt(static_cast<double>(C_geo)), rng).col(0);
  p.out_height = height;
  p.out_width = width;
  return p;
}

GateParams GateParams::seeded(int C, std::uint64_t seed) {
  Rng rng(seed);
  GateParams p;
  p.weights = gaussian_matrix(C, 2 * C, 1.0 / std::sqrt(2.0 * C), rng);
  p.bias = gaussian_matrix(C, 1, 1.0 / std::sqrt(2.0 * C), rng).col(0);
  return p;
}

GateParams GateParams::constant(int C, double bias) {
  return GateParams{Eigen::MatrixXd::Zero(C, 2 * C), Eigen::VectorXd::Constant(C, bias)};
}

FusionParams FusionParams::load(const std::filesystem::path& dir, int out_height, int out_width) {
  FusionParams p;
  p.align.projection = tensor_to_matrix(tensor_read(dir / "align_proj.gted"));
  p.align.bias = tensor_to_vector(tensor_read(dir / "align_bias.gted"));
  p.align.out_height = out_height;
  p.align.out_width = out_width;
  p.gate.weights = tensor_to_matrix(tensor_read(dir / "gate_w.gted"));
  p.gate.bias = tensor_to_vector(tensor_read(dir / "gate_b.gted"));
  const auto C = p.align.projection.rows();
  if (p.align.bias.size() != C || p.gate.weights.rows() != C || p.gate.weights.cols() != 2 * C ||
      p.gate.bias.size() != C) {
    throw ValidationError("fusion parameter files have inconsistent shapes");
  }
  return p;
}

void FusionParams::save(const std::filesystem::path& dir) const {
  tensor_write(matrix_to_tensor(align.projection), dir / "align_proj.gted");
  tensor_write(vector_to_tensor(align.bias), dir / "align_bias.gted");
  tensor_write(matrix_to_tensor(gate.weights), dir / "gate_w.gted");
  tensor_write(vector_to_tensor(gate.bias), dir / "gate_b.gted");
}

FeatureMap bilinear_resize(const FeatureMap& src, int height, int width) {
  if (height < 1 || width < 1) throw ValidationError("resize target must be positive");
  if (height == src.height() && width == src.width()) {
    return FeatureMap(src.kind(), height, width, src.values());
  }
  const int Hs = src.height();
  const int Ws = src.width();
  auto coord = [](int i, int n_out, int n_in) {
    return n_out == 1 ? 0.0 : static_cast<double>(i) * (n_in - 1) / (n_out - 1);
  };
  FeatureMap out(src.kind(), src.channels(), height, width);
  for (int h = 0; h < height; ++h) {
    const double y = coord(h, height, Hs);
    const int y0 = std::min(static_cast<int>(std::floor(y)), Hs - 1);
    const int y1 = std::min(y0 + 1, Hs - 1);
    const double fy = y - y0;
    for (int w = 0; w < width; ++w) {
      const double x = coord(w, width, Ws);
      const int x0 = std::min(static_cast<int>(std::floor(x)), Ws - 1);
      const int x1 = std::min(x0 + 1, Ws - 1);
      const double fx = x - x0;
      const auto& v = src.values();
      out.values().col(h * width + w) =
          (1 - fy) * ((1 - fx) * v.col(y0 * Ws + x0) + fx * v.col(y0 * Ws + x1)) +
          fy * ((1 - fx) * v.col(y1 * Ws + x0) + fx * v.col(y1 * Ws + x1));
    }
  }
  return out;
}

FeatureMap align(const FeatureMap& v_g, const AlignParams& params) {
  if (params.projection.cols() != v_g.channels()) {
    throw ValidationError("align: projection expects " + std::to_string(params.projection.cols()) +
                          " input channels, got " + std::to_string(v_g.channels()));
  }
  if (params.bias.size() != params.projection.rows()) {
    throw ValidationError("align: bias length does not match projection rows");
  }
  const int H = params.out_height > 0 ? params.out_height : v_g.height();
  const int W = params.out_width > 0 ? params.out_width : v_g.width();
  const FeatureMap resized = bilinear_resize(v_g, H, W);
  Eigen::MatrixXd values = params.projection * resized.values();
  values.colwise() += params.bias;
  return FeatureMap(FeatureKind::geometric, H, W, std::move(values));
}

GatingMask gate_mask(const FeatureMap& v_s, const FeatureMap& aligned_g, const GateParams& params) {
  if (!v_s.same_shape(aligned_g)) throw ValidationError("gate_mask: feature shapes differ");
  const auto C = v_s.channels();
  if (params.weights.rows() != C || params.weights.cols() != 2 * C || params.bias.size() != C) {
    throw ValidationError("gate_mask: parameter shapes do not match C = " + std::to_string(C));
  }
  Eigen::MatrixXd logits = params.weights.leftCols(C) * v_s.values() + params.weights.rightCols(C) * aligned_g.values();
  logits.colwise() += params.bias;
  GatingMask mask;
  mask.m = logits.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  mask.height = v_s.height();
  mask.width = v_s.width();
  return mask;
}

FeatureMap fuse(const FeatureMap& v_s, const FeatureMap& aligned_g, const GatingMask& m) {
  if (!v_s.same_shape(aligned_g) || m.m.rows() != v_s.channels() || m.m.cols() != v_s.cells()) {
    throw ValidationError("fuse: shape mismatch");
  }
  Eigen::MatrixXd values = v_s.values() + m.m.cwiseProduct(aligned_g.values());
  return FeatureMap(FeatureKind::fused, v_s.height(), v_s.width(), std::move(values));
}

FeatureMap fuse_features(const FeatureMap& v_s, const FeatureMap& v_g, const FusionParams& params) {
  const FeatureMap g = align(v_g, params.align);
  return fuse(v_s, g, gate_mask(v_s, g, params.gate));
}

}  // namespace gotedit
