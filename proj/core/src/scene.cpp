#include "gotedit/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gotedit/error.hpp"
#include "gotedit/random.hpp"

namespace gotedit {
namespace {

constexpr double kTwoPi = 6.283185307179586;

Eigen::VectorXd unit(const Eigen::VectorXd& v) { return v / v.norm(); }

// Row-major H*W Gaussian bump with unit peak.
Eigen::VectorXd blob(const Point& c, double sigma, int H, int W) {
  Eigen::VectorXd out(H * W);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int h = 0; h < H; ++h)
    for (int w = 0; w < W; ++w) {
      const double d2 = (h - c.row) * (h - c.row) + (w - c.col) * (w - c.col);
      out[h * W + w] = std::exp(-d2 * inv);
    }
  return out;
}

void add_noise(Eigen::MatrixXd& m, double sd, Rng& rng) {
  if (sd <= 0.0) return;
  std::normal_distribution<double> dist(0.0, sd);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) += dist(rng);
}

bool inside(const Point& p, int H, int W) { return p.row >= 0 && p.row <= H - 1 && p.col >= 0 && p.col <= W - 1; }

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

void validate_look(const Appearance& a, int c_sem, int c_geo) {
  require(a.sem_rank >= 1 && a.sem_rank <= c_sem, "look.sem_rank must lie in [1, c_sem]");
  require(a.geo_rank >= 1 && a.geo_rank <= c_geo, "look.geo_rank must lie in [1, c_geo]");
  require(a.sem_sigma > 0 && a.geo_sigma > 0, "look blob sigmas must be positive");
  require(a.sem_noise >= 0 && a.geo_noise >= 0, "look noise std must be non-negative");
  require(a.clutter >= 0, "look.clutter must be non-negative");
  require(std::isfinite(a.sem_amplitude) && std::isfinite(a.geo_amplitude) && std::isfinite(a.distractor_geo_gain) &&
              std::isfinite(a.clutter_amplitude) && std::isfinite(a.background_amplitude),
          "look amplitudes must be finite");
}

Point clamp_point(Point p, double margin, int H, int W) {
  p.row = std::clamp(p.row, margin, H - 1 - margin);
  p.col = std::clamp(p.col, margin, W - 1 - margin);
  return p;
}

}  // namespace

Backbone make_backbone(int c_sem, int c_geo, int sem_rank, int geo_rank, std::uint64_t seed) {
  if (sem_rank < 1 || sem_rank > c_sem || geo_rank < 1 || geo_rank > c_geo) {
    throw ValidationError("backbone ranks must lie within the channel counts");
  }
  Rng rng(seed);
  const Eigen::MatrixXd Qs = random_orthonormal(c_sem, rng);
  const Eigen::MatrixXd Qg = random_orthonormal(c_geo, rng);
  return Backbone{Qs.leftCols(sem_rank), Qs.rightCols(c_sem - sem_rank), Qg.leftCols(geo_rank)};
}

void validate(const SequenceSpec& s) {
  require(s.frames >= 1, "frames must be at least 1");
  require(s.height >= 2 && s.width >= 2, "grid must be at least 2x2");
  require(s.c_sem >= 1 && s.c_geo >= 1, "channel counts must be positive");
  require(static_cast<int>(s.target.size()) == s.frames, "target trajectory must have one box per frame");
  for (const auto& b : s.target) {
    require(b.valid(), "target boxes must have positive extent");
    require(inside({b.center_y(), b.center_x()}, s.height, s.width), "target trajectory leaves the grid");
  }
  for (const auto& d : s.distractors) {
    require(d.alpha >= 0 && d.alpha <= 1 && d.beta >= 0 && d.beta <= 1, "distractor alpha and beta must lie in [0, 1]");
    require(d.start >= 0 && d.end() <= s.frames, "distractor span exceeds the sequence");
    for (const auto& p : d.path) require(inside(p, s.height, s.width), "distractor trajectory leaves the grid");
  }
  for (const auto& o : s.occlusions) {
    require(o.rho >= 0 && o.rho <= 1, "occlusion rho must lie in [0, 1]");
    require(o.start >= 0 && o.end() <= s.frames, "occlusion span exceeds the sequence");
    for (const auto& r : o.region) {
      require(r.row0 >= 0 && r.col0 >= 0 && r.row1 <= s.height && r.col1 <= s.width && r.row0 < r.row1 &&
                  r.col0 < r.col1,
              "occlusion region must be a non-empty rectangle inside the grid");
    }
  }
  validate_look(s.look, s.c_sem, s.c_geo);
}

const char* to_string(Attribute a) {
  switch (a) {
    case Attribute::clean: return "clean";
    case Attribute::distractor: return "distractor";
    case Attribute::occlusion: return "occlusion";
  }
  return "unknown";
}

GroundTruth Scene::truth() const {
  GroundTruth gt;
  gt.reserve(frames.size());
  for (const auto& f : frames) gt.push_back(f.truth);
  return gt;
}

Scene gen_scene(const SequenceSpec& spec) {
  validate(spec);
  const Appearance& look = spec.look;
  const int C = spec.c_sem, CG = spec.c_geo, H = spec.height, W = spec.width;
  const Backbone bb = make_backbone(C, CG, look.sem_rank, look.geo_rank, look.backbone_seed);
  Rng rng(spec.seed);

  auto sem_signature = [&] { return Eigen::VectorXd(bb.sem_basis * unit(gaussian_vector(look.sem_rank, 1.0, rng))); };
  auto geo_signature = [&] { return Eigen::VectorXd(bb.geo_basis * unit(gaussian_vector(look.geo_rank, 1.0, rng))); };

  const Eigen::VectorXd s_t = sem_signature();
  const Eigen::VectorXd g_t = geo_signature();

  struct Emitter {
    Eigen::VectorXd s, g;
  };
  std::vector<Emitter> distractors;
  for (const auto& d : spec.distractors) {
    const Eigen::VectorXd s_d = sem_signature();
    const Eigen::VectorXd g_d = geo_signature();
    distractors.push_back({unit(d.alpha * s_t + (1 - d.alpha) * s_d),
                           look.distractor_geo_gain * unit(d.beta * g_t + (1 - d.beta) * g_d)});
  }

  std::vector<std::vector<int>> occluded_channels;
  for (const auto& o : spec.occlusions) {
    std::vector<int> ch(C);
    std::iota(ch.begin(), ch.end(), 0);
    std::shuffle(ch.begin(), ch.end(), rng);
    ch.resize(static_cast<std::size_t>(std::lround(o.rho * C)));
    occluded_channels.push_back(std::move(ch));
  }

  // Smooth background, one field per semantic basis direction.
  Eigen::MatrixXd background = Eigen::MatrixXd::Zero(C, H * W);
  for (int i = 0; i < look.sem_rank; ++i) {
    const double fy = uniform(0.1, 0.5, rng), fx = uniform(0.1, 0.5, rng);
    const double py = uniform(0.0, kTwoPi, rng), px = uniform(0.0, kTwoPi, rng);
    Eigen::VectorXd field(H * W);
    for (int h = 0; h < H; ++h)
      for (int w = 0; w < W; ++w) field[h * W + w] = std::sin(fy * h + py) * std::cos(fx * w + px);
    background += look.background_amplitude * bb.sem_basis.col(i) * field.transpose();
  }
  for (int k = 0; k < look.clutter; ++k) {
    const Eigen::VectorXd s = sem_signature();
    const Point p{uniform(2.0, H - 2.0, rng), uniform(2.0, W - 2.0, rng)};
    background += look.sem_amplitude * look.clutter_amplitude * s * blob(p, look.sem_sigma, H, W).transpose();
  }

  Scene scene;
  scene.frames.reserve(static_cast<std::size_t>(spec.frames));
  for (int t = 0; t < spec.frames; ++t) {
    Eigen::MatrixXd vs = background;
    Eigen::MatrixXd vg = Eigen::MatrixXd::Zero(CG, H * W);
    const BoxLTRB& box = spec.target[static_cast<std::size_t>(t)];
    const Point c{box.center_y(), box.center_x()};
    vs += look.sem_amplitude * s_t * blob(c, look.sem_sigma, H, W).transpose();
    vg += look.geo_amplitude * g_t * blob(c, look.geo_sigma, H, W).transpose();

    Attribute attr = Attribute::clean;
    for (std::size_t k = 0; k < spec.distractors.size(); ++k) {
      const auto& d = spec.distractors[k];
      if (t < d.start || t >= d.end()) continue;
      const Point& p = d.path[static_cast<std::size_t>(t - d.start)];
      vs += look.sem_amplitude * distractors[k].s * blob(p, look.sem_sigma, H, W).transpose();
      vg += look.geo_amplitude * distractors[k].g * blob(p, look.geo_sigma, H, W).transpose();
      attr = Attribute::distractor;
    }
    for (std::size_t k = 0; k < spec.occlusions.size(); ++k) {
      const auto& o = spec.occlusions[k];
      if (t < o.start || t >= o.end()) continue;
      const CellRect& r = o.region[static_cast<std::size_t>(t - o.start)];
      for (int ch : occluded_channels[k])
        for (int h = r.row0; h < r.row1; ++h)
          for (int w = r.col0; w < r.col1; ++w) vs(ch, h * W + w) = 0.0;
      attr = Attribute::occlusion;
    }
    add_noise(vs, look.sem_noise, rng);
    add_noise(vg, look.geo_noise, rng);
    scene.frames.push_back(Frame{FeatureMap(FeatureKind::semantic, H, W, std::move(vs)),
                                 FeatureMap(FeatureKind::geometric, H, W, std::move(vg)), FrameTruth{box, attr}});
  }
  return scene;
}

void validate(const SceneConfig& c) {
  require(c.frames >= 1, "scene.frames must be at least 1");
  require(c.height >= 2 && c.width >= 2, "scene.height and scene.width must be at least 2");
  require(c.c_sem >= 1 && c.c_geo >= 1, "scene channel counts must be positive");
  require(c.distractors >= 0 && c.occlusions >= 0, "event counts must be non-negative");
  require(c.alpha >= 0 && c.alpha <= 1, "scene.alpha must lie in [0, 1]");
  require(c.beta >= 0 && c.beta <= 1, "scene.beta must lie in [0, 1]");
  require(c.rho >= 0 && c.rho <= 1, "scene.rho must lie in [0, 1]");
  require(c.box_half > 0 && 2 * c.box_half < std::min(c.height, c.width) - 1, "scene.box_half does not fit the grid");
  require(c.speed >= 0 && c.wobble >= 0 && c.distractor_offset >= 0, "motion parameters must be non-negative");
  require(c.event_start >= 0 && c.event_length >= 1 && c.event_spacing >= c.event_length,
          "event windows must be non-empty and disjoint");
  require(c.occlusion_half >= 0, "scene.occlusion_half must be non-negative");
  const int windows = c.distractors + c.occlusions;
  require(windows == 0 || c.event_start + (windows - 1) * c.event_spacing + c.event_length <= c.frames,
          "event windows do not fit in the sequence");
  validate_look(c.look, c.c_sem, c.c_geo);
}

SequenceSpec make_sequence_spec(const SceneConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  SequenceSpec spec;
  spec.frames = cfg.frames;
  spec.height = cfg.height;
  spec.width = cfg.width;
  spec.c_sem = cfg.c_sem;
  spec.c_geo = cfg.c_geo;
  spec.look = cfg.look;
  spec.seed = seed;

  const int H = cfg.height, W = cfg.width;
  const double m = cfg.box_half;
  const Point start{uniform(std::min(4.0, H / 2.0), std::max(H - 4.0, H / 2.0), rng),
                    uniform(std::min(4.0, W / 2.0), std::max(W - 4.0, W / 2.0), rng)};
  const Point vel{uniform(-cfg.speed, cfg.speed, rng), uniform(-cfg.speed, cfg.speed, rng)};
  const double phase = uniform(0.0, kTwoPi, rng);
  std::vector<Point> centres;
  for (int t = 0; t < cfg.frames; ++t) {
    const double wob = cfg.wobble * std::sin(0.1 * t + phase);
    const Point p = clamp_point({start.row + vel.row * t + wob, start.col + vel.col * t + wob}, m, H, W);
    centres.push_back(p);
    spec.target.push_back(BoxLTRB{p.col - m, p.row - m, p.col + m, p.row + m});
  }

  const int windows = cfg.distractors + cfg.occlusions;
  std::vector<int> slots(static_cast<std::size_t>(windows));
  std::iota(slots.begin(), slots.end(), 0);
  std::shuffle(slots.begin(), slots.end(), rng);
  std::size_t next = 0;

  for (int d = 0; d < cfg.distractors; ++d) {
    DistractorTrack track;
    track.alpha = cfg.alpha;
    track.beta = cfg.beta;
    track.start = cfg.event_start + slots[next++] * cfg.event_spacing;
    const double ang = uniform(0.0, kTwoPi, rng);
    const Point off{std::cos(ang) * cfg.distractor_offset, std::sin(ang) * cfg.distractor_offset};
    for (int t = track.start; t < track.start + cfg.event_length; ++t) {
      const Point& c = centres[static_cast<std::size_t>(t)];
      track.path.push_back(clamp_point({c.row + off.row, c.col + off.col}, m, H, W));
    }
    spec.distractors.push_back(std::move(track));
  }
  for (int o = 0; o < cfg.occlusions; ++o) {
    OcclusionEvent ev;
    ev.rho = cfg.rho;
    ev.start = cfg.event_start + slots[next++] * cfg.event_spacing;
    for (int t = ev.start; t < ev.start + cfg.event_length; ++t) {
      const Point& c = centres[static_cast<std::size_t>(t)];
      const int r = static_cast<int>(std::floor(c.row)), q = static_cast<int>(std::floor(c.col));
      ev.region.push_back(CellRect{std::max(0, r - cfg.occlusion_half), std::max(0, q - cfg.occlusion_half),
                                   std::min(H, r + cfg.occlusion_half + 1), std::min(W, q + cfg.occlusion_half + 1)});
    }
    spec.occlusions.push_back(std::move(ev));
  }
  return spec;
}

}  // namespace gotedit
