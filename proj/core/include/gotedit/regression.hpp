#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "gotedit/box.hpp"
#include "gotedit/editing.hpp"
#include "gotedit/predictor.hpp"
#include "gotedit/tensor.hpp"

namespace gotedit {

// Four per-pixel linear maps (rows: left, top, right, bottom) over the
// score-modulated features, followed by exp.
struct RegDecParams {
  Eigen::MatrixXd W;  // 4 x C
  Eigen::VectorXd b;  // 4

  static RegDecParams seeded(int C, std::uint64_t seed);
  // Zero weights; every cell predicts the given edge distances.
  static RegDecParams constant(int C, double left, double top, double right, double bottom);
};

struct RegressionMaps {
  Eigen::MatrixXd d;  // 4 x (H*W), non-negative
  int height = 0;
  int width = 0;
};

struct Regression {
  RegressionMaps maps;
  BoxLTRB box;
};

// d = exp(W (p . z) + b); the box is read out at the score argmax (h0, w0) as
// (w0 - d_l, h0 - d_t, w0 + d_r, h0 + d_b).
Regression regress_box(const ScoreMap& p, const FeatureMap& z_cur, const RegDecParams& params);

double iou(const BoxLTRB& a, const BoxLTRB& b);
// IoU minus the empty fraction of the smallest enclosing box.
double giou(const BoxLTRB& a, const BoxLTRB& b);

// Mean over cells of (pred - target)^2 where target > tau and max(0, pred)^2
// elsewhere.
double hinge_cls_loss(const ScoreMap& pred, const LabelMap& target, double tau = 0.25);

struct LossConfig {
  double lambda_cls = 100.0;
  double lambda_giou = 1.0;
};

double total_loss(double cls, double giou_term, const LossConfig& cfg);

}  // namespace gotedit
