#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gotedit/linalg.hpp"
#include "gotedit/tensor.hpp"
#include "gotedit/weights.hpp"

namespace gotedit {

// H x W classification response with its argmax (ties go to the lowest
// row-major index).
struct ScoreMap {
  Eigen::VectorXd p;  // H*W, row-major
  int height = 0;
  int width = 0;
  int argmax = 0;
  double peak = 0.0;

  int argmax_row() const { return argmax / width; }
  int argmax_col() const { return argmax % width; }
  double operator()(int h, int w) const { return p[h * width + w]; }
};

// Wraps a raw score vector and locates its argmax.
ScoreMap make_score_map(Eigen::VectorXd p, int height, int width);

// p[h, w] = sum_c W[c] * z[c, h, w].
ScoreMap localize(const WeightVector& W, const FeatureMap& z);

enum class ProjectorSource { refs_and_current, refs_only };

const char* to_string(ProjectorSource source);

struct EditContext {
  WeightVector W_sem;
  WeightVector delta;
  Projector P;
  ProjectorSource source = ProjectorSource::refs_and_current;
  double lambda = 0.0;

  // W_sem + P * delta.
  WeightVector combined() const;
};

// Concatenates the spatial columns of sem_feats, whitens the batch, forms the
// ridge-regularized correlation (lambda defaults to default_ridge) and builds
// the symmetrized low-energy projector.
EditContext build_edit_context(const std::vector<FeatureMap>& sem_feats, WeightVector W_sem, WeightVector delta,
                               std::optional<double> lambda, const ThresholdPolicy& policy,
                               ProjectorSource source = ProjectorSource::refs_and_current);

ScoreMap edit_and_localize(const EditContext& ctx, const FeatureMap& z_cur);

// Writes W_sem.gted, delta.gted and P.gted.
void save_edit_context(const EditContext& ctx, const std::filesystem::path& dir);

}  // namespace gotedit
