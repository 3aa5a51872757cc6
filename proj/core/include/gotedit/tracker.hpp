#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gotedit/editing.hpp"
#include "gotedit/fusion.hpp"
#include "gotedit/linalg.hpp"
#include "gotedit/predictor.hpp"
#include "gotedit/regression.hpp"
#include "gotedit/scene.hpp"

namespace gotedit {

enum class Mode { semantic_only, naive_fusion, nullspace_edit };

const char* to_string(Mode m);
// Accepts the names produced by to_string; throws ValidationError otherwise.
Mode parse_mode(const std::string& name);

struct TrackerModel {
  FusionParams fusion;
  PredictorParams predictor;
  Eigen::VectorXd e_fg;
  // When empty the tracker predicts a constant box shaped like the frame-0 box.
  std::optional<RegDecParams> regdec;

  // Files: the fusion and predictor sets, e_fg.gted, and regdec_w/regdec_b
  // when a regression head is present.
  static TrackerModel load(const std::filesystem::path& dir, int out_height, int out_width);
  void save(const std::filesystem::path& dir) const;
};

struct TrackerConfig {
  std::optional<double> lambda;  // ridge; default_ridge when empty
  ThresholdPolicy policy;
  ProjectorSource source = ProjectorSource::refs_and_current;
  int refresh_stride = 1;        // rebuild the projector every n frames
  double theta = 0.5;            // slot-B update gate relative to the frame-0 peak
  double label_sigma = 0.0;      // <= 0 selects default_label_sigma of the frame-0 box
  bool force_identity_projector = false;
};

void validate(const TrackerConfig& cfg);

struct StageTimes {
  double fuse_us = 0, predict_us = 0, project_us = 0, localize_us = 0, regress_us = 0;
};

struct FrameRecord {
  BoxLTRB box;
  double iou = 0.0;
  bool argmax_agree = true;  // combined-weight argmax equals the W_sem argmax
  int argmax = 0;
  double peak = 0.0;
  int retained_rank = 0;
  double cls_loss = 0.0;  // hinge loss of the score map against a label at the true box
  StageTimes times;
};

struct TrackRun {
  Mode mode = Mode::semantic_only;
  std::vector<FrameRecord> frames;
};

// Online track-by-detection loop with two reference slots: slot A holds frame 0
// and slot B the latest frame whose peak reached theta times the frame-0 peak.
TrackRun run_tracker(const Scene& scene, Mode mode, const TrackerModel& model, const TrackerConfig& cfg);

// Hand-structured parameters for the synthetic backbone, standing in for a
// trained model: the encoder block is inert, the decoder attends with e_fg and
// the heads remove the e_fg direction.
struct TemplateConfig {
  double align_in_span = 0.7;    // share of aligned geometric energy inside the semantic subspace
  double align_gain = 1.0;
  double gate_bias = 0.0;        // constant gate sigmoid(gate_bias)
  double embedding_norm = 6.0;
  double attention_gain = 1.0;   // scales decoder query and key maps
  double geo_head_gain = 1.0;
  double pe_scale = 0.05;
};

void validate(const TemplateConfig& cfg, const Appearance& look, int c_sem);

TrackerModel make_template_model(const SequenceSpec& spec, const TemplateConfig& cfg, std::uint64_t seed);

}  // namespace gotedit
