#include "gotedit/editing.hpp"

#include <string>

#include "gotedit/error.hpp"

namespace gotedit {

ScoreMap make_score_map(Eigen::VectorXd p, int height, int width) {
  if (p.size() != static_cast<Eigen::Index>(height) * width || p.size() == 0) {
    throw ValidationError("score map size does not match its grid");
  }
  ScoreMap s;
  s.height = height;
  s.width = width;
  s.argmax = 0;
  s.peak = p[0];
  for (Eigen::Index i = 1; i < p.size(); ++i) {
    if (p[i] > s.peak) {
      s.peak = p[i];
      s.argmax = static_cast<int>(i);
    }
  }
  s.p = std::move(p);
  return s;
}

ScoreMap localize(const WeightVector& W, const FeatureMap& z) {
  if (W.size() != z.channels()) {
    throw ValidationError("localize: weight length " + std::to_string(W.size()) + " does not match C = " +
                          std::to_string(z.channels()));
  }
  return make_score_map(z.values().transpose() * W.w, z.height(), z.width());
}

const char* to_string(ProjectorSource source) {
  return source == ProjectorSource::refs_only ? "refs_only" : "refs_and_current";
}

WeightVector EditContext::combined() const {
  return WeightVector{W_sem.w + project(P, delta).w, WeightRole::combined};
}

EditContext build_edit_context(const std::vector<FeatureMap>& sem_feats, WeightVector W_sem, WeightVector delta,
                               std::optional<double> lambda, const ThresholdPolicy& policy, ProjectorSource source) {
  if (sem_feats.empty()) throw ValidationError("build_edit_context: no semantic features given");
  const int C = sem_feats.front().channels();
  Eigen::Index N = 0;
  for (const auto& f : sem_feats) {
    if (f.channels() != C) throw ValidationError("build_edit_context: channel counts differ");
    N += f.cells();
  }
  if (W_sem.size() != C || delta.size() != C) {
    throw ValidationError("build_edit_context: weight lengths do not match C = " + std::to_string(C));
  }
  Eigen::MatrixXd X(C, N);
  Eigen::Index at = 0;
  for (const auto& f : sem_feats) {
    X.middleCols(at, f.cells()) = f.values();
    at += f.cells();
  }
  const WhitenedMatrix Z = whiten(X);
  const double ridge = lambda.value_or(default_ridge(Z));
  const SymmetricMatrix M = regularized_correlation(Z, ridge);
  return EditContext{std::move(W_sem), std::move(delta), nullspace_projector(M, policy), source, ridge};
}

ScoreMap edit_and_localize(const EditContext& ctx, const FeatureMap& z_cur) { return localize(ctx.combined(), z_cur); }

void save_edit_context(const EditContext& ctx, const std::filesystem::path& dir) {
  tensor_write(vector_to_tensor(ctx.W_sem.w), dir / "W_sem.gted");
  tensor_write(vector_to_tensor(ctx.delta.w), dir / "delta.gted");
  tensor_write(matrix_to_tensor(ctx.P.P), dir / "P.gted");
}

}  // namespace gotedit
