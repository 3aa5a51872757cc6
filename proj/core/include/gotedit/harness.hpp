#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "gotedit/scene.hpp"
#include "gotedit/tracker.hpp"

namespace gotedit {

struct AttributeStats {
  double mean_iou = 0.0;
  double suc_auc = 0.0;
  int frames = 0;
};

struct Metrics {
  double mean_iou = 0.0;
  double suc_auc = 0.0;
  double argmax_preservation = 0.0;
  int frames = 0;
  std::array<AttributeStats, 3> by_attribute{};  // indexed by Attribute

  const AttributeStats& at(Attribute a) const { return by_attribute[static_cast<std::size_t>(a)]; }
};

// Mean over thresholds 0.05, 0.10, ..., 0.95 of the fraction of IoUs above
// the threshold. Returns 0 for an empty list.
double suc_auc(const std::vector<double>& ious);

// Pools all frames of all runs. IoUs are recomputed against gts.
Metrics evaluate(const std::vector<TrackRun>& runs, const std::vector<GroundTruth>& gts);

// Mean IoU over the frames of one run carrying the attribute; NaN when none do.
double attribute_mean_iou(const TrackRun& run, const GroundTruth& gt, Attribute a);

struct SignTest {
  int successes = 0;
  int trials = 0;
  double p_value = 1.0;  // one-sided binomial tail P(X >= successes | trials, 1/2)
};

// Pairs where a > b count as successes and ties are dropped.
SignTest sign_test_greater(const std::vector<double>& a, const std::vector<double>& b);
// Pairs where a >= b count as successes out of all pairs.
SignTest sign_test_at_least(const std::vector<double>& a, const std::vector<double>& b);

struct StudyConfig {
  SceneConfig scene;
  TemplateConfig model;
  TrackerConfig tracker;
  std::vector<Mode> modes{Mode::semantic_only, Mode::naive_fusion, Mode::nullspace_edit};
  int sequences = 100;
  std::uint64_t seed = 1;
  int jobs = 1;
  // When set, every sequence is tracked with this model instead of a
  // template built for it.
  std::shared_ptr<const TrackerModel> fixed_model;
};

struct SequenceResult {
  std::uint64_t seed = 0;
  GroundTruth truth;
  std::vector<TrackRun> runs;  // parallel to StudyConfig::modes
};

struct StudyResult {
  std::vector<Mode> modes;
  std::vector<SequenceResult> sequences;

  // Per-sequence attribute mean IoU for one mode (sequences lacking the
  // attribute are skipped consistently across modes).
  std::vector<double> attribute_series(Mode m, Attribute a) const;
  Metrics metrics(Mode m) const;
};

// Sequence i uses seed cfg.seed + i. Results do not depend on cfg.jobs.
StudyResult run_study(const StudyConfig& cfg);

}  // namespace gotedit
