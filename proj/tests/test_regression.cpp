#include <cmath>
#include <random>

#include "doctest.h"
#include "gotedit/error.hpp"
#include "gotedit/random.hpp"
#include "gotedit/regression.hpp"
#include "oracles.hpp"

using namespace gotedit;

namespace {

LabelMap label_of(std::initializer_list<double> values, int H, int W) {
  LabelMap m;
  m.L = Eigen::Map<const Eigen::VectorXd>(values.begin(), static_cast<Eigen::Index>(values.size()));
  m.height = H;
  m.width = W;
  return m;
}

Eigen::VectorXd uniform_vector(int n, double lo, double hi, Rng& rng) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi, rng);
  return v;
}

BoxLTRB random_box(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> pos(-20.0, 20.0);
  std::uniform_real_distribution<double> ext(0.1, 15.0);
  const double l = pos(gen), t = pos(gen);
  return BoxLTRB{l, t, l + ext(gen), t + ext(gen)};
}

}  // namespace

TEST_SUITE("regress_box") {
  TEST_CASE("zero modulation with zero bias gives a unit box at the origin") {
    Rng rng(1);
    const FeatureMap z(FeatureKind::fused, 3, 3, gaussian_matrix(4, 9, 1.0, rng));
    const auto p = make_score_map(Eigen::VectorXd::Zero(9), 3, 3);
    RegDecParams params{gaussian_matrix(4, 4, 1.0, rng), Eigen::VectorXd::Zero(4)};
    const auto r = regress_box(p, z, params);
    CHECK(r.maps.d.isOnes(0));
    CHECK(r.box == BoxLTRB{-1, -1, 1, 1});
  }

  TEST_CASE("hand computation on a C=2 2x2 grid") {
    Eigen::MatrixXd values(2, 4);
    values << 0.5, -1.0, 2.0, 0.25,
              1.5, 0.75, -0.5, 1.0;
    const FeatureMap z(FeatureKind::fused, 2, 2, values);
    const auto p = make_score_map((Eigen::VectorXd(4) << 0.1, 0.2, 0.9, 0.4).finished(), 2, 2);
    Eigen::MatrixXd W(4, 2);
    W << 0.3, -0.2,
         0.1, 0.4,
         -0.5, 0.6,
         0.2, 0.2;
    Eigen::VectorXd b(4);
    b << 0.1, -0.1, 0.2, 0.0;
    const auto r = regress_box(p, z, RegDecParams{W, b});

    // argmax is cell 2 = (row 1, col 0); features there are (2.0, -0.5), score 0.9.
    const double m0 = 0.9 * 2.0, m1 = 0.9 * -0.5;
    const double dl = std::exp(0.3 * m0 - 0.2 * m1 + 0.1);
    const double dt = std::exp(0.1 * m0 + 0.4 * m1 - 0.1);
    const double dr = std::exp(-0.5 * m0 + 0.6 * m1 + 0.2);
    const double db = std::exp(0.2 * m0 + 0.2 * m1 + 0.0);
    CHECK(std::abs(r.maps.d(0, 2) - dl) <= 1e-6);
    CHECK(std::abs(r.maps.d(1, 2) - dt) <= 1e-6);
    CHECK(std::abs(r.maps.d(2, 2) - dr) <= 1e-6);
    CHECK(std::abs(r.maps.d(3, 2) - db) <= 1e-6);
    CHECK(std::abs(r.box.left - (0.0 - dl)) <= 1e-6);
    CHECK(std::abs(r.box.top - (1.0 - dt)) <= 1e-6);
    CHECK(std::abs(r.box.right - (0.0 + dr)) <= 1e-6);
    CHECK(std::abs(r.box.bottom - (1.0 + db)) <= 1e-6);
  }

  TEST_CASE("shifting features and scores by one cell shifts the box by one cell") {
    Rng rng(2);
    const int C = 5, H = 6, W = 7;
    const RegDecParams params = RegDecParams::seeded(C, 3);
    const Eigen::MatrixXd base = gaussian_matrix(C, H * W, 1.0, rng);
    Eigen::VectorXd scores = uniform_vector(H * W, 0.0, 0.5, rng);
    scores[2 * W + 3] = 1.0;

    Eigen::MatrixXd shifted = Eigen::MatrixXd::Zero(C, H * W);
    Eigen::VectorXd shifted_scores = Eigen::VectorXd::Zero(H * W);
    for (int h = 0; h + 1 < H; ++h)
      for (int w = 0; w + 1 < W; ++w) {
        shifted.col((h + 1) * W + (w + 1)) = base.col(h * W + w);
        shifted_scores[(h + 1) * W + (w + 1)] = scores[h * W + w];
      }

    const auto a = regress_box(make_score_map(scores, H, W), FeatureMap(FeatureKind::fused, H, W, base), params);
    const auto b = regress_box(make_score_map(shifted_scores, H, W), FeatureMap(FeatureKind::fused, H, W, shifted),
                               params);
    CHECK(b.box.left == a.box.left + 1.0);
    CHECK(b.box.top == a.box.top + 1.0);
    CHECK(b.box.right == a.box.right + 1.0);
    CHECK(b.box.bottom == a.box.bottom + 1.0);

    const auto again = regress_box(make_score_map(scores, H, W), FeatureMap(FeatureKind::fused, H, W, base), params);
    CHECK(again.box == a.box);
    CHECK((a.maps.d.array() >= 0.0).all());
  }

  TEST_CASE("constant parameters predict the given distances everywhere") {
    Rng rng(4);
    const FeatureMap z(FeatureKind::fused, 2, 3, gaussian_matrix(3, 6, 1.0, rng));
    const auto r = regress_box(make_score_map(uniform_vector(6, 0, 1, rng), 2, 3), z, RegDecParams::constant(3, 1, 2, 3, 4));
    CHECK(r.maps.d.row(0).isConstant(1.0, 1e-12));
    CHECK(r.maps.d.row(3).isConstant(4.0, 1e-12));
    CHECK_THROWS_AS(RegDecParams::constant(3, 0, 1, 1, 1), ValidationError);
  }

  TEST_CASE("shape mismatches are rejected") {
    const FeatureMap z(FeatureKind::fused, 3, 2, 2);
    CHECK_THROWS_AS(regress_box(make_score_map(Eigen::VectorXd::Zero(6), 2, 3), z, RegDecParams::seeded(3, 1)),
                    ValidationError);
    CHECK_THROWS_AS(regress_box(make_score_map(Eigen::VectorXd::Zero(4), 2, 2), z, RegDecParams::seeded(4, 1)),
                    ValidationError);
  }
}

TEST_SUITE("giou") {
  TEST_CASE("overlapping squares") {
    const BoxLTRB a{0, 0, 2, 2}, b{1, 1, 3, 3};
    CHECK(std::abs(iou(a, b) - 1.0 / 7.0) <= 1e-12);
    CHECK(std::abs(giou(a, b) - (1.0 / 7.0 - 2.0 / 9.0)) <= 1e-9);
  }

  TEST_CASE("identity and far-apart boxes") {
    const BoxLTRB a{0, 0, 1, 1};
    CHECK(giou(a, a) == 1.0);
    CHECK(giou(a, BoxLTRB{100, 0, 101, 1}) <= -0.96);
    CHECK(giou(a, BoxLTRB{100, 100, 101, 101}) > -1.0);
  }

  TEST_CASE("degenerate boxes are rejected") {
    CHECK_THROWS_AS(giou(BoxLTRB{0, 0, 0, 1}, BoxLTRB{0, 0, 1, 1}), ValidationError);
    CHECK_THROWS_AS(iou(BoxLTRB{0, 0, 1, 1}, BoxLTRB{0, 2, 1, 1}), ValidationError);
  }

  TEST_CASE("agrees with the independent oracle, symmetric, bounded by IoU, scale invariant") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    for (int i = 0; i < 10000; ++i) {
      const BoxLTRB a = random_box(gen), b = random_box(gen);
      const double g = giou(a, b);
      const double want = oracle::giou({a.left, a.top, a.right, a.bottom}, {b.left, b.top, b.right, b.bottom});
      REQUIRE(std::abs(g - want) <= 1e-9);
      REQUIRE(g == giou(b, a));
      REQUIRE(g <= iou(a, b) + 1e-15);
      REQUIRE(g > -1.0);
      const double s = scale(gen);
      const BoxLTRB as{a.left * s, a.top * s, a.right * s, a.bottom * s};
      const BoxLTRB bs{b.left * s, b.top * s, b.right * s, b.bottom * s};
      REQUIRE(std::abs(giou(as, bs) - g) <= 1e-9);
    }
  }

  TEST_CASE("equality with IoU exactly when the hull is the union") {
    const BoxLTRB outer{0, 0, 4, 4}, inner{1, 1, 2, 2};
    CHECK(giou(outer, inner) == iou(outer, inner));
    const BoxLTRB side{4, 0, 6, 4};
    CHECK(giou(outer, side) == iou(outer, side));
    CHECK(giou(outer, BoxLTRB{3, 3, 5, 5}) < iou(outer, BoxLTRB{3, 3, 5, 5}));
  }
}

TEST_SUITE("losses") {
  TEST_CASE("single background cell with positive score") {
    CHECK(std::abs(hinge_cls_loss(make_score_map((Eigen::VectorXd(1) << 0.3).finished(), 1, 1), label_of({0.0}, 1, 1)) -
                   0.09) <= 1e-12);
  }

  TEST_CASE("perfect foreground and inactive background cost nothing") {
    const auto target = label_of({0.9, 0.5, 0.3, 1.0}, 2, 2);
    CHECK(hinge_cls_loss(make_score_map(target.L, 2, 2), target) == 0.0);
    const auto bg = label_of({0.0, 0.1, 0.2, 0.25}, 2, 2);
    CHECK(hinge_cls_loss(make_score_map((Eigen::VectorXd(4) << -1, 0, -0.5, -2).finished(), 2, 2), bg) == 0.0);
  }

  TEST_CASE("mixed regimes average over cells") {
    const auto target = label_of({1.0, 0.1}, 1, 2);
    const auto pred = make_score_map((Eigen::VectorXd(2) << 0.5, 0.2).finished(), 1, 2);
    CHECK(std::abs(hinge_cls_loss(pred, target) - (0.25 + 0.04) / 2.0) <= 1e-12);
    CHECK_THROWS_AS(hinge_cls_loss(pred, label_of({1, 0, 0}, 1, 3)), ValidationError);
  }

  TEST_CASE("weighted total") {
    CHECK(total_loss(0.3, 0.7, LossConfig{0, 0}) == 0.0);
    CHECK(total_loss(0.5, 0.9, LossConfig{1, 0}) == 0.5);
    CHECK(std::abs(total_loss(0.1, 0.2, LossConfig{2, 3}) - 0.8) <= 1e-12);
    CHECK(LossConfig{}.lambda_cls == 100.0);
  }
}
