#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gotedit/box.hpp"
#include "gotedit/tensor.hpp"

namespace gotedit {

// Fixed channel geometry of the synthetic backbone. Semantic signatures live in
// a sem_rank-dimensional subspace of R^C (columns of sem_basis); its orthogonal
// complement is sem_complement. Geometric signatures live in geo_basis.
struct Backbone {
  Eigen::MatrixXd sem_basis;       // C x sem_rank
  Eigen::MatrixXd sem_complement;  // C x (C - sem_rank)
  Eigen::MatrixXd geo_basis;       // C_geo x geo_rank
};

Backbone make_backbone(int c_sem, int c_geo, int sem_rank, int geo_rank, std::uint64_t seed);

struct Point {
  double row = 0.0;
  double col = 0.0;
};

// Half-open rectangle of grid cells.
struct CellRect {
  int row0 = 0, col0 = 0, row1 = 0, col1 = 0;
};

struct DistractorTrack {
  int start = 0;             // first frame present
  std::vector<Point> path;   // one centre per frame from start
  double alpha = 0.5;        // semantic similarity to the target
  double beta = 0.9;         // geometric similarity to the target

  int end() const { return start + static_cast<int>(path.size()); }
};

struct OcclusionEvent {
  int start = 0;
  std::vector<CellRect> region;  // one rectangle per frame from start
  double rho = 0.75;             // fraction of semantic channels zeroed

  int end() const { return start + static_cast<int>(region.size()); }
};

// Signal strengths shared by every object in a scene.
struct Appearance {
  double sem_amplitude = 2.0;
  double geo_amplitude = 12.0;
  double sem_sigma = 1.2;
  double geo_sigma = 1.2;
  double distractor_geo_gain = 1.1;  // distractor geometric blob relative to the target's
  int clutter = 3;                   // static semantic blobs
  double clutter_amplitude = 0.7;    // relative to sem_amplitude
  double background_amplitude = 0.3;
  double sem_noise = 0.01;
  double geo_noise = 0.05;
  int sem_rank = 10;
  int geo_rank = 4;
  std::uint64_t backbone_seed = 424242;
};

struct SequenceSpec {
  int frames = 60;
  int height = 18;
  int width = 18;
  int c_sem = 16;
  int c_geo = 16;
  std::vector<BoxLTRB> target;  // ground-truth box per frame
  std::vector<DistractorTrack> distractors;
  std::vector<OcclusionEvent> occlusions;
  Appearance look;
  std::uint64_t seed = 0;
};

// Throws ValidationError describing the first violated constraint.
void validate(const SequenceSpec& spec);

enum class Attribute { clean, distractor, occlusion };

const char* to_string(Attribute a);

struct FrameTruth {
  BoxLTRB box;
  Attribute attr = Attribute::clean;
};

using GroundTruth = std::vector<FrameTruth>;

struct Frame {
  FeatureMap v_s;
  FeatureMap v_g;
  FrameTruth truth;
};

struct Scene {
  std::vector<Frame> frames;

  GroundTruth truth() const;
};

// Renders the sequence. Identical SequenceSpec values give bit-identical scenes.
Scene gen_scene(const SequenceSpec& spec);

// Parameters from which randomized sequence specs are drawn.
struct SceneConfig {
  int frames = 60;
  int height = 18;
  int width = 18;
  int c_sem = 16;
  int c_geo = 16;
  int distractors = 2;
  int occlusions = 2;
  double alpha = 0.5;
  double beta = 0.9;
  double rho = 0.75;
  double distractor_offset = 3.5;  // cells between target and distractor centres
  double box_half = 2.0;           // target box half-extent in cells
  double speed = 0.2;              // max drift per frame along each axis
  double wobble = 1.5;             // sinusoidal excursion amplitude
  int event_start = 8;
  int event_spacing = 12;
  int event_length = 10;
  int occlusion_half = 3;          // occluded square extends this many cells from the target centre
  Appearance look;
};

void validate(const SceneConfig& cfg);

// Draws trajectories and event windows; events occupy disjoint windows.
SequenceSpec make_sequence_spec(const SceneConfig& cfg, std::uint64_t seed);

}  // namespace gotedit
