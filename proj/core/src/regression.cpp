#include "gotedit/regression.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gotedit/error.hpp"
#include "gotedit/random.hpp"

namespace gotedit {
namespace {

void require_box(const BoxLTRB& b) {
  if (!b.valid()) throw ValidationError("degenerate box: right must exceed left and bottom must exceed top");
}

}  // namespace

RegDecParams RegDecParams::seeded(int C, std::uint64_t seed) {
  Rng rng(seed);
  const double sd = 1.0 / std::sqrt(static_cast<double>(C));
  return RegDecParams{gaussian_matrix(4, C, sd, rng), gaussian_vector(4, sd, rng)};
}

RegDecParams RegDecParams::constant(int C, double left, double top, double right, double bottom) {
  if (!(left > 0 && top > 0 && right > 0 && bottom > 0)) {
    throw ValidationError("constant regression distances must be positive");
  }
  Eigen::VectorXd b(4);
  b << std::log(left), std::log(top), std::log(right), std::log(bottom);
  return RegDecParams{Eigen::MatrixXd::Zero(4, C), b};
}

Regression regress_box(const ScoreMap& p, const FeatureMap& z_cur, const RegDecParams& params) {
  if (p.height != z_cur.height() || p.width != z_cur.width()) throw ValidationError("regress_box: grid mismatch");
  if (params.W.rows() != 4 || params.W.cols() != z_cur.channels() || params.b.size() != 4) {
    throw ValidationError("regress_box: parameters must be 4 x C with C = " + std::to_string(z_cur.channels()));
  }
  const Eigen::MatrixXd modulated = z_cur.values() * p.p.asDiagonal();
  Eigen::MatrixXd logits = params.W * modulated;
  logits.colwise() += params.b;

  Regression out;
  out.maps.d = logits.array().exp().matrix();
  out.maps.height = p.height;
  out.maps.width = p.width;
  const double h0 = p.argmax_row();
  const double w0 = p.argmax_col();
  const auto d = out.maps.d.col(p.argmax);
  out.box = BoxLTRB{w0 - d[0], h0 - d[1], w0 + d[2], h0 + d[3]};
  return out;
}

double iou(const BoxLTRB& a, const BoxLTRB& b) {
  require_box(a);
  require_box(b);
  const double iw = std::max(0.0, std::min(a.right, b.right) - std::max(a.left, b.left));
  const double ih = std::max(0.0, std::min(a.bottom, b.bottom) - std::max(a.top, b.top));
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

double giou(const BoxLTRB& a, const BoxLTRB& b) {
  require_box(a);
  require_box(b);
  const double iw = std::max(0.0, std::min(a.right, b.right) - std::max(a.left, b.left));
  const double ih = std::max(0.0, std::min(a.bottom, b.bottom) - std::max(a.top, b.top));
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  const double hull = (std::max(a.right, b.right) - std::min(a.left, b.left)) *
                      (std::max(a.bottom, b.bottom) - std::min(a.top, b.top));
  return inter / uni - (hull - uni) / hull;
}

double hinge_cls_loss(const ScoreMap& pred, const LabelMap& target, double tau) {
  if (pred.height != target.height || pred.width != target.width) {
    throw ValidationError("hinge_cls_loss: grid mismatch");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < pred.p.size(); ++i) {
    const double y = target.L[i];
    const double x = pred.p[i];
    sum += y > tau ? (x - y) * (x - y) : std::max(0.0, x) * std::max(0.0, x);
  }
  return sum / static_cast<double>(pred.p.size());
}

double total_loss(double cls, double giou_term, const LossConfig& cfg) {
  return cfg.lambda_cls * cls + cfg.lambda_giou * giou_term;
}

}  // namespace gotedit
