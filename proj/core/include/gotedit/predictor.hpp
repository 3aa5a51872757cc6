#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "gotedit/box.hpp"
#include "gotedit/random.hpp"
#include "gotedit/tensor.hpp"
#include "gotedit/weights.hpp"

namespace gotedit {

// Gaussian target label on an H x W grid with peak value 1.
struct LabelMap {
  Eigen::VectorXd L;  // H*W, row-major
  int height = 0;
  int width = 0;
  double peak_row = 0.0;
  double peak_col = 0.0;

  double operator()(int h, int w) const { return L[h * width + w]; }
};

// exp(-((r - r0)^2 + (c - c0)^2) / (2 sigma^2)) around the box centre.
LabelMap make_label_map(const BoxLTRB& box, int height, int width, double sigma);

// A quarter of the box's shorter side.
double default_label_sigma(const BoxLTRB& box);

// F'[c, h, w] = F[c, h, w] + L[h, w] * e[c].
FeatureMap encode_reference(const FeatureMap& F, const LabelMap& L, const Eigen::VectorXd& e_fg);

// Single-head attention maps, each C x C.
struct AttentionParams {
  Eigen::MatrixXd Wq, Wk, Wv, Wo;

  static AttentionParams seeded(int C, Rng& rng);
  static AttentionParams zeros(int C);
};

struct HeadParams {
  Eigen::MatrixXd W;  // C x C
  Eigen::VectorXd b;  // C
};

enum class Head { semantic, geometry };

struct PredictorParams {
  AttentionParams encoder;
  AttentionParams decoder;
  // Trunk used by the geometry pass when shared_trunk is false.
  AttentionParams encoder_geo;
  AttentionParams decoder_geo;
  HeadParams head_sem;
  HeadParams head_geo;
  bool shared_trunk = true;
  // Multiplier on the positional and frame-slot encodings added to tokens.
  double pe_scale = 1.0;

  int channels() const { return static_cast<int>(head_sem.W.rows()); }
  const AttentionParams& encoder_for(Head h) const { return shared_trunk || h == Head::semantic ? encoder : encoder_geo; }
  const AttentionParams& decoder_for(Head h) const { return shared_trunk || h == Head::semantic ? decoder : decoder_geo; }
  const HeadParams& head(Head h) const { return h == Head::semantic ? head_sem : head_geo; }

  // Gaussian initialization with std 1/sqrt(C).
  static PredictorParams seeded(int C, std::uint64_t seed, bool shared_trunk = true);

  // Tensor files enc_{wq,wk,wv,wo}, dec_{wq,wk,wv,wo}, head_{sem,geo}_{w,b},
  // optional geo_enc_* / geo_dec_* (unshared trunk) and pe_scale.
  static PredictorParams load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir) const;
};

// 2-D sinusoidal positional encoding, C x (H*W). The first C/2 channels encode
// the row index and the remainder the column index, as sin/cos pairs.
Eigen::MatrixXd positional_encoding(int C, int height, int width);

// Per-slot frame offset: sinusoid of (slot + 1) at the channel frequencies.
Eigen::VectorXd frame_offset(int C, int slot);

// Self-attention block with residual: x_i + Wo * sum_j softmax_j(q_i.k_j / sqrt(C)) v_j.
Eigen::MatrixXd self_attention(const Eigen::MatrixXd& X, const AttentionParams& p);

// Cross-attention with the single query e: e + Wo * sum_j softmax_j(q.k_j / sqrt(C)) v_j.
Eigen::VectorXd query_attention(const Eigen::VectorXd& e, const Eigen::MatrixXd& X, const AttentionParams& p);

// Concatenated tokens [ref_0 | ... | ref_{K-1} | cur] with positional and slot encodings.
Eigen::MatrixXd build_tokens(const std::vector<FeatureMap>& refs, const FeatureMap& cur, double pe_scale);

WeightVector predict_weights(const std::vector<FeatureMap>& refs, const FeatureMap& cur, const Eigen::VectorXd& e_fg,
                             const PredictorParams& params, Head head);

}  // namespace gotedit
