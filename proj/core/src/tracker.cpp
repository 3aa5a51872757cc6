#include "gotedit/tracker.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "gotedit/error.hpp"
#include "gotedit/random.hpp"

namespace gotedit {
namespace {

using Clock = std::chrono::steady_clock;

double micros_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

struct Reference {
  const FeatureMap* v_s;
  FeatureMap fused;
  LabelMap label;
};

// Shift the box so its centre lies on the grid; the label map requires it.
BoxLTRB clamp_centre(BoxLTRB b, int H, int W) {
  const double dy = std::clamp(b.center_y(), 0.0, H - 1.0) - b.center_y();
  const double dx = std::clamp(b.center_x(), 0.0, W - 1.0) - b.center_x();
  return BoxLTRB{b.left + dx, b.top + dy, b.right + dx, b.bottom + dy};
}

}  // namespace

const char* to_string(Mode m) {
  switch (m) {
    case Mode::semantic_only: return "semantic_only";
    case Mode::naive_fusion: return "naive_fusion";
    case Mode::nullspace_edit: return "nullspace_edit";
  }
  return "unknown";
}

Mode parse_mode(const std::string& name) {
  for (Mode m : {Mode::semantic_only, Mode::naive_fusion, Mode::nullspace_edit}) {
    if (name == to_string(m)) return m;
  }
  throw ValidationError("unknown mode '" + name + "'");
}

TrackerModel TrackerModel::load(const std::filesystem::path& dir, int out_height, int out_width) {
  TrackerModel m;
  m.fusion = FusionParams::load(dir, out_height, out_width);
  m.predictor = PredictorParams::load(dir);
  m.e_fg = tensor_to_vector(tensor_read(dir / "e_fg.gted"));
  if (std::filesystem::exists(dir / "regdec_w.gted")) {
    m.regdec = RegDecParams{tensor_to_matrix(tensor_read(dir / "regdec_w.gted")),
                            tensor_to_vector(tensor_read(dir / "regdec_b.gted"))};
  }
  const auto C = m.e_fg.size();
  if (m.fusion.gate.weights.rows() != C || m.predictor.head_sem.W.rows() != C) {
    throw ValidationError("model files in " + dir.string() + " disagree on the channel count");
  }
  return m;
}

void TrackerModel::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  fusion.save(dir);
  predictor.save(dir);
  tensor_write(vector_to_tensor(e_fg), dir / "e_fg.gted");
  if (regdec) {
    tensor_write(matrix_to_tensor(regdec->W), dir / "regdec_w.gted");
    tensor_write(vector_to_tensor(regdec->b), dir / "regdec_b.gted");
  }
}

void validate(const TrackerConfig& cfg) {
  if (cfg.lambda && !(*cfg.lambda >= 0.0)) throw ValidationError("editing.lambda must be non-negative");
  if (!(cfg.policy.eps_rel >= 0.0)) throw ValidationError("editing.eps_rel must be non-negative");
  if (!(cfg.policy.eps_abs >= 0.0)) throw ValidationError("editing.eps_abs must be non-negative");
  if (cfg.refresh_stride < 1) throw ValidationError("editing.refresh_stride must be at least 1");
  if (std::isnan(cfg.theta)) throw ValidationError("tracker.theta must be a number");
}

TrackRun run_tracker(const Scene& scene, Mode mode, const TrackerModel& model, const TrackerConfig& cfg) {
  if (scene.frames.empty()) throw ValidationError("run_tracker: empty sequence");
  validate(cfg);
  const Frame& first = scene.frames.front();
  const int H = first.v_s.height(), W = first.v_s.width(), C = first.v_s.channels();
  const BoxLTRB box0 = first.truth.box;
  const double sigma = cfg.label_sigma > 0 ? cfg.label_sigma : default_label_sigma(box0);
  const RegDecParams regdec = model.regdec.value_or(RegDecParams::constant(
      C, box0.center_x() - box0.left, box0.center_y() - box0.top, box0.right - box0.center_x(),
      box0.bottom - box0.center_y()));
  const bool geometric = mode != Mode::semantic_only;

  auto make_ref = [&](const Frame& f, const BoxLTRB& box) {
    FeatureMap fused = geometric ? fuse_features(f.v_s, f.v_g, model.fusion) : f.v_s;
    return Reference{&f.v_s, std::move(fused), make_label_map(clamp_centre(box, H, W), H, W, sigma)};
  };
  const Reference slot_a = make_ref(first, box0);
  Reference slot_b = slot_a;

  TrackRun run;
  run.mode = mode;
  run.frames.reserve(scene.frames.size());
  Projector P = Projector::zero(C);
  double peak0 = 0.0;

  for (std::size_t t = 0; t < scene.frames.size(); ++t) {
    const Frame& f = scene.frames[t];
    FrameRecord rec;

    auto t0 = Clock::now();
    const FeatureMap z_cur = fuse_features(f.v_s, f.v_g, model.fusion);
    rec.times.fuse_us = micros_since(t0);

    t0 = Clock::now();
    const std::vector<FeatureMap> sem_refs{encode_reference(*slot_a.v_s, slot_a.label, model.e_fg),
                                           encode_reference(*slot_b.v_s, slot_b.label, model.e_fg)};
    const WeightVector W_sem = predict_weights(sem_refs, f.v_s, model.e_fg, model.predictor, Head::semantic);
    WeightVector delta{Eigen::VectorXd::Zero(C), WeightRole::perturbation};
    if (geometric) {
      const std::vector<FeatureMap> geo_refs{encode_reference(slot_a.fused, slot_a.label, model.e_fg),
                                             encode_reference(slot_b.fused, slot_b.label, model.e_fg)};
      delta = predict_weights(geo_refs, z_cur, model.e_fg, model.predictor, Head::geometry);
    }
    rec.times.predict_us = micros_since(t0);

    t0 = Clock::now();
    WeightVector W{W_sem.w, WeightRole::combined};
    if (mode == Mode::naive_fusion) {
      W.w = W_sem.w + delta.w;
    } else if (mode == Mode::nullspace_edit) {
      if (cfg.force_identity_projector) {
        P = Projector::identity(C);
      } else if (t % static_cast<std::size_t>(cfg.refresh_stride) == 0) {
        std::vector<FeatureMap> sources{*slot_a.v_s, *slot_b.v_s};
        if (cfg.source == ProjectorSource::refs_and_current) sources.push_back(f.v_s);
        P = build_edit_context(sources, W_sem, delta, cfg.lambda, cfg.policy, cfg.source).P;
      }
      const EditContext ctx{W_sem, delta, P, cfg.source, 0.0};
      W = ctx.combined();
      rec.retained_rank = P.retained_rank;
    }
    rec.times.project_us = micros_since(t0);

    t0 = Clock::now();
    const ScoreMap score = localize(W, z_cur);
    const ScoreMap sem_score = localize(W_sem, z_cur);
    rec.times.localize_us = micros_since(t0);

    t0 = Clock::now();
    rec.box = regress_box(score, z_cur, regdec).box;
    rec.times.regress_us = micros_since(t0);

    rec.iou = iou(rec.box, f.truth.box);
    rec.argmax = score.argmax;
    rec.peak = score.peak;
    rec.argmax_agree = score.argmax == sem_score.argmax;
    rec.cls_loss = hinge_cls_loss(score, make_label_map(clamp_centre(f.truth.box, H, score.width), H, score.width, sigma));

    if (t == 0) peak0 = score.peak;
    const bool frozen = cfg.theta == std::numeric_limits<double>::infinity();
    if (!frozen && score.peak >= cfg.theta * peak0) slot_b = make_ref(f, rec.box);
    run.frames.push_back(rec);
  }
  return run;
}

void validate(const TemplateConfig& cfg, const Appearance& look, int c_sem) {
  if (!(cfg.align_in_span >= 0.0 && cfg.align_in_span <= 1.0)) {
    throw ValidationError("model.align_in_span must lie in [0, 1]");
  }
  if (look.geo_rank > look.sem_rank || look.geo_rank > c_sem - look.sem_rank) {
    throw ValidationError("model: geo_rank must not exceed sem_rank or c_sem - sem_rank");
  }
  if (!(cfg.embedding_norm > 0.0)) throw ValidationError("model.embedding_norm must be positive");
  if (!std::isfinite(cfg.align_gain) || !std::isfinite(cfg.gate_bias) || !std::isfinite(cfg.attention_gain) ||
      !std::isfinite(cfg.geo_head_gain) || !std::isfinite(cfg.pe_scale)) {
    throw ValidationError("model parameters must be finite");
  }
}

TrackerModel make_template_model(const SequenceSpec& spec, const TemplateConfig& cfg, std::uint64_t seed) {
  validate(cfg, spec.look, spec.c_sem);
  const int C = spec.c_sem;
  const int r = spec.look.geo_rank;
  const Backbone bb = make_backbone(C, spec.c_geo, spec.look.sem_rank, r, spec.look.backbone_seed);

  TrackerModel m;
  const Eigen::MatrixXd mix = std::sqrt(cfg.align_in_span) * bb.sem_basis.leftCols(r) +
                              std::sqrt(1.0 - cfg.align_in_span) * bb.sem_complement.leftCols(r);
  m.fusion.align.projection = cfg.align_gain * mix * bb.geo_basis.transpose();
  m.fusion.align.bias = Eigen::VectorXd::Zero(C);
  m.fusion.align.out_height = spec.height;
  m.fusion.align.out_width = spec.width;
  m.fusion.gate = GateParams::constant(C, cfg.gate_bias);

  Rng rng(seed);
  const Eigen::VectorXd dir = gaussian_vector(C, 1.0, rng).normalized();
  m.e_fg = cfg.embedding_norm * dir;

  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(C, C);
  const Eigen::MatrixXd reject = I - dir * dir.transpose();
  PredictorParams& p = m.predictor;
  p.encoder = AttentionParams{I, I, I, Eigen::MatrixXd::Zero(C, C)};
  p.decoder = AttentionParams{cfg.attention_gain * I, cfg.attention_gain * I, I, I};
  p.encoder_geo = p.encoder;
  p.decoder_geo = p.decoder;
  p.head_sem = HeadParams{reject, Eigen::VectorXd::Zero(C)};
  p.head_geo = HeadParams{cfg.geo_head_gain * reject, Eigen::VectorXd::Zero(C)};
  p.shared_trunk = true;
  p.pe_scale = cfg.pe_scale;
  return m;
}

}  // namespace gotedit
