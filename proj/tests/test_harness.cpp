#include <cmath>
#include <limits>

#include "doctest.h"
#include "gotedit/bench.hpp"
#include "gotedit/editing.hpp"
#include "gotedit/error.hpp"
#include "gotedit/harness.hpp"

using namespace gotedit;

namespace {

SceneConfig quiet_scene() {
  SceneConfig c;
  c.frames = 12;
  c.distractors = 0;
  c.occlusions = 0;
  c.look.clutter = 0;
  c.look.background_amplitude = 0.0;
  c.look.sem_noise = 0.0;
  c.look.geo_noise = 0.0;
  return c;
}

int nearest_cell(const BoxLTRB& b, int W) {
  return static_cast<int>(std::lround(b.center_y())) * W + static_cast<int>(std::lround(b.center_x()));
}

// P(X >= k) for X ~ Binomial(n, 1/2), summed term by term.
double binomial_tail(int k, int n) {
  double total = 0.0;
  for (int i = k; i <= n; ++i) {
    total += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) - n * std::log(2.0));
  }
  return total;
}

bool same_trajectory(const TrackRun& a, const TrackRun& b) {
  if (a.frames.size() != b.frames.size()) return false;
  for (std::size_t t = 0; t < a.frames.size(); ++t) {
    if (!(a.frames[t].box == b.frames[t].box) || a.frames[t].argmax != b.frames[t].argmax ||
        a.frames[t].peak != b.frames[t].peak) {
      return false;
    }
  }
  return true;
}

TrackRun run_with_boxes(const std::vector<BoxLTRB>& boxes) {
  TrackRun run;
  for (const auto& b : boxes) {
    FrameRecord rec;
    rec.box = b;
    run.frames.push_back(rec);
  }
  return run;
}

GroundTruth truth_of(const std::vector<BoxLTRB>& boxes, Attribute attr = Attribute::clean) {
  GroundTruth gt;
  for (const auto& b : boxes) gt.push_back(FrameTruth{b, attr});
  return gt;
}

}  // namespace

TEST_SUITE("scene generation") {
  TEST_CASE("same seed gives bit-identical frames") {
    const auto spec = make_sequence_spec(SceneConfig{}, 17);
    const Scene a = gen_scene(spec), b = gen_scene(make_sequence_spec(SceneConfig{}, 17));
    REQUIRE(a.frames.size() == b.frames.size());
    for (std::size_t t = 0; t < a.frames.size(); ++t) {
      CHECK(a.frames[t].v_s.values() == b.frames[t].v_s.values());
      CHECK(a.frames[t].v_g.values() == b.frames[t].v_g.values());
      CHECK(a.frames[t].truth.box == b.frames[t].truth.box);
    }
    CHECK(gen_scene(make_sequence_spec(SceneConfig{}, 18)).frames[0].v_s.values() != a.frames[0].v_s.values());
  }

  TEST_CASE("full occlusion zeroes every semantic channel in its region and leaves geometry") {
    SceneConfig cfg;
    cfg.rho = 1.0;
    cfg.distractors = 0;
    cfg.look.sem_noise = 0.0;
    const auto spec = make_sequence_spec(cfg, 3);
    const Scene scene = gen_scene(spec);
    REQUIRE_FALSE(spec.occlusions.empty());
    for (const auto& ev : spec.occlusions) {
      for (int t = ev.start; t < ev.end(); ++t) {
        const auto& r = ev.region[static_cast<std::size_t>(t - ev.start)];
        const auto& f = scene.frames[static_cast<std::size_t>(t)];
        CHECK(f.truth.attr == Attribute::occlusion);
        for (int h = r.row0; h < r.row1; ++h)
          for (int w = r.col0; w < r.col1; ++w) CHECK(f.v_s.values().col(h * spec.width + w).isZero(0));
        CHECK(f.v_g.values().norm() > 0.0);
      }
    }
  }

  TEST_CASE("template-matched semantic weights find the target on a clean scene") {
    const auto spec = make_sequence_spec(quiet_scene(), 5);
    const Scene scene = gen_scene(spec);
    const auto& f0 = scene.frames.front();
    const WeightVector W{f0.v_s.values().col(nearest_cell(f0.truth.box, spec.width)), WeightRole::semantic};
    for (const auto& f : scene.frames) {
      CHECK(localize(W, f.v_s).argmax == nearest_cell(f.truth.box, spec.width));
    }
  }

  TEST_CASE("invalid specs are rejected") {
    SceneConfig cfg;
    cfg.alpha = 1.5;
    CHECK_THROWS_AS(make_sequence_spec(cfg, 1), ValidationError);
    auto spec = make_sequence_spec(SceneConfig{}, 1);
    spec.target.pop_back();
    CHECK_THROWS_AS(gen_scene(spec), ValidationError);
    spec = make_sequence_spec(SceneConfig{}, 1);
    spec.occlusions.front().rho = -0.1;
    CHECK_THROWS_AS(gen_scene(spec), ValidationError);
  }
}

TEST_SUITE("tracker") {
  TEST_CASE("single clean frame is tracked with IoU at least one half") {
    auto cfg = quiet_scene();
    cfg.frames = 1;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto spec = make_sequence_spec(cfg, seed);
      const auto model = make_template_model(spec, TemplateConfig{}, seed);
      for (Mode m : {Mode::semantic_only, Mode::naive_fusion, Mode::nullspace_edit}) {
        const auto run = run_tracker(gen_scene(spec), m, model, TrackerConfig{});
        REQUIRE(run.frames.size() == 1);
        CHECK(run.frames[0].iou >= 0.5);
      }
    }
  }

  TEST_CASE("semantic-only tracking follows a clean target") {
    const auto spec = make_sequence_spec(quiet_scene(), 9);
    const auto run = run_tracker(gen_scene(spec), Mode::semantic_only, make_template_model(spec, {}, 9), {});
    for (const auto& rec : run.frames) CHECK(rec.iou >= 0.5);
  }

  TEST_CASE("edit with nothing retained reproduces semantic-only") {
    auto cfg = quiet_scene();
    cfg.distractors = 1;
    cfg.event_start = 2;
    cfg.look.sem_noise = 0.01;
    cfg.look.background_amplitude = 0.3;
    const auto spec = make_sequence_spec(cfg, 21);
    const auto model = make_template_model(spec, {}, 21);
    // Features spanning every semantic channel keep the whitened correlation full rank.
    auto full = spec;
    full.look.sem_rank = full.c_sem;
    const Scene scene = gen_scene(full);
    TrackerConfig tc;
    tc.lambda = 0.0;
    tc.policy.eps_rel = 1e-9;
    tc.policy.eps_abs = 0.0;
    const auto edit = run_tracker(scene, Mode::nullspace_edit, model, tc);
    const auto sem = run_tracker(scene, Mode::semantic_only, model, tc);
    for (const auto& rec : edit.frames) CHECK(rec.retained_rank == 0);
    CHECK(same_trajectory(edit, sem));
  }

  TEST_CASE("identity projector reproduces naive fusion") {
    SceneConfig cfg;
    cfg.frames = 30;
    cfg.event_start = 2;
    cfg.event_spacing = 7;
    cfg.event_length = 6;
    const auto spec = make_sequence_spec(cfg, 4);
    const Scene scene = gen_scene(spec);
    const auto model = make_template_model(spec, {}, 4);
    TrackerConfig tc;
    tc.force_identity_projector = true;
    CHECK(same_trajectory(run_tracker(scene, Mode::nullspace_edit, model, tc),
                          run_tracker(scene, Mode::naive_fusion, model, tc)));
  }

  TEST_CASE("frozen second slot depends only on frame zero") {
    SceneConfig cfg;
    cfg.frames = 30;
    cfg.event_start = 2;
    cfg.event_spacing = 7;
    cfg.event_length = 6;
    const auto spec = make_sequence_spec(cfg, 6);
    const Scene scene = gen_scene(spec);
    const auto model = make_template_model(spec, {}, 6);
    TrackerConfig frozen;
    frozen.theta = std::numeric_limits<double>::infinity();
    const auto a = run_tracker(scene, Mode::nullspace_edit, model, frozen);
    CHECK(same_trajectory(a, run_tracker(scene, Mode::nullspace_edit, model, frozen)));

    // A frozen run on a prefix matches the full run frame for frame.
    Scene prefix;
    prefix.frames.assign(scene.frames.begin(), scene.frames.begin() + 10);
    const auto b = run_tracker(prefix, Mode::nullspace_edit, model, frozen);
    for (std::size_t t = 0; t < b.frames.size(); ++t) CHECK(b.frames[t].box == a.frames[t].box);

    TrackerConfig live;
    live.theta = 0.0;
    CHECK_FALSE(same_trajectory(a, run_tracker(scene, Mode::nullspace_edit, model, live)));
  }

  TEST_CASE("records are complete and bounded") {
    const auto spec = make_sequence_spec(SceneConfig{}, 2);
    const auto run = run_tracker(gen_scene(spec), Mode::nullspace_edit, make_template_model(spec, {}, 2), {});
    CHECK(run.frames.size() == static_cast<std::size_t>(spec.frames));
    for (const auto& rec : run.frames) {
      CHECK(rec.iou >= 0.0);
      CHECK(rec.iou <= 1.0);
      CHECK(rec.retained_rank >= 0);
    }
  }

  TEST_CASE("empty scenes and bad configs are rejected") {
    const auto spec = make_sequence_spec(quiet_scene(), 1);
    const auto model = make_template_model(spec, {}, 1);
    CHECK_THROWS_AS(run_tracker(Scene{}, Mode::semantic_only, model, {}), ValidationError);
    TrackerConfig bad;
    bad.refresh_stride = 0;
    CHECK_THROWS_AS(run_tracker(gen_scene(spec), Mode::nullspace_edit, model, bad), ValidationError);
    CHECK_THROWS_AS(parse_mode("semantic"), ValidationError);
    CHECK(parse_mode("naive_fusion") == Mode::naive_fusion);
  }
}

TEST_SUITE("metrics") {
  const std::vector<BoxLTRB> gt_boxes{{0, 0, 2, 2}, {1, 1, 3, 3}, {2, 2, 4, 4}, {5, 5, 8, 7}};

  TEST_CASE("perfect run") {
    const auto m = evaluate({run_with_boxes(gt_boxes)}, {truth_of(gt_boxes)});
    CHECK(m.mean_iou == 1.0);
    CHECK(m.suc_auc == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.frames == 4);
    CHECK(m.at(Attribute::clean).frames == 4);
    CHECK(m.at(Attribute::occlusion).frames == 0);
  }

  TEST_CASE("all-miss run") {
    std::vector<BoxLTRB> far;
    for (const auto& b : gt_boxes) far.push_back(BoxLTRB{b.left + 50, b.top, b.right + 50, b.bottom});
    const auto m = evaluate({run_with_boxes(far)}, {truth_of(gt_boxes)});
    CHECK(m.mean_iou == 0.0);
    CHECK(m.suc_auc == 0.0);
  }

  TEST_CASE("half hits half misses") {
    std::vector<BoxLTRB> pred = gt_boxes;
    pred[1] = BoxLTRB{40, 40, 41, 41};
    pred[3] = BoxLTRB{40, 40, 41, 41};
    const auto m = evaluate({run_with_boxes(pred)}, {truth_of(gt_boxes, Attribute::distractor)});
    CHECK(m.mean_iou == 0.5);
    CHECK(std::abs(m.suc_auc - 0.5) <= 1e-12);
    CHECK(m.at(Attribute::distractor).mean_iou == 0.5);
  }

  TEST_CASE("threshold sweep on a single IoU") {
    // IoU 0.5 clears thresholds 0.05 .. 0.45, nine of nineteen.
    CHECK(std::abs(suc_auc({0.5}) - 9.0 / 19.0) <= 1e-12);
    CHECK(suc_auc({}) == 0.0);
  }

  TEST_CASE("length mismatches are rejected") {
    CHECK_THROWS_AS(evaluate({run_with_boxes(gt_boxes)}, {}), ValidationError);
    CHECK_THROWS_AS(evaluate({run_with_boxes({gt_boxes[0]})}, {truth_of(gt_boxes)}), ValidationError);
  }

  TEST_CASE("attribute mean skips absent attributes") {
    CHECK(std::isnan(attribute_mean_iou(run_with_boxes(gt_boxes), truth_of(gt_boxes), Attribute::occlusion)));
    CHECK(attribute_mean_iou(run_with_boxes(gt_boxes), truth_of(gt_boxes), Attribute::clean) == 1.0);
  }
}

TEST_SUITE("sign tests") {
  TEST_CASE("strict comparison drops ties") {
    const auto s = sign_test_greater({1, 2, 3, 4}, {0, 2, 1, 5});
    CHECK(s.successes == 2);
    CHECK(s.trials == 3);
    CHECK(std::abs(s.p_value - binomial_tail(2, 3)) <= 1e-12);
  }

  TEST_CASE("at-least comparison counts ties as successes") {
    const auto s = sign_test_at_least({1, 2, 3, 4}, {0, 2, 1, 5});
    CHECK(s.successes == 3);
    CHECK(s.trials == 4);
    CHECK(std::abs(s.p_value - 5.0 / 16.0) <= 1e-12);
  }

  TEST_CASE("tail probabilities match direct summation") {
    for (int n : {1, 10, 37, 100}) {
      std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n), 0.0);
      for (int k = 0; k <= n; k += 3) {
        for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = i < k ? 1.0 : -1.0;
        const auto s = sign_test_greater(a, b);
        CHECK(s.successes == k);
        CHECK(std::abs(s.p_value - binomial_tail(k, n)) <= 1e-12 * std::max(1.0, binomial_tail(k, n)));
      }
    }
  }

  TEST_CASE("no informative pairs gives p = 1") {
    CHECK(sign_test_greater({1, 1}, {1, 1}).p_value == 1.0);
    CHECK_THROWS_AS(sign_test_greater({1}, {1, 2}), ValidationError);
  }
}

TEST_SUITE("study") {
  TEST_CASE("results do not depend on the worker count") {
    StudyConfig cfg;
    cfg.scene.frames = 24;
    cfg.scene.event_start = 2;
    cfg.scene.event_spacing = 5;
    cfg.scene.event_length = 5;
    cfg.sequences = 4;
    cfg.seed = 31;
    const auto one = run_study(cfg);
    cfg.jobs = 3;
    const auto three = run_study(cfg);
    REQUIRE(one.sequences.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(one.sequences[i].seed == 31 + i);
      for (std::size_t k = 0; k < cfg.modes.size(); ++k) {
        CHECK(same_trajectory(one.sequences[i].runs[k], three.sequences[i].runs[k]));
      }
    }
    const auto m = one.metrics(Mode::nullspace_edit);
    CHECK(m.frames == 96);
    CHECK(m.argmax_preservation >= 0.0);
    CHECK(m.argmax_preservation <= 1.0);
    CHECK(one.attribute_series(Mode::semantic_only, Attribute::occlusion).size() == 4);
  }
}

TEST_CASE("projector benchmark sanity") {
  const auto s = bench_projector(8, 64, 10);
  CHECK(s.mean_ms > 0.0);
  CHECK(s.p50_ms <= s.p95_ms);
  CHECK(s.reps == 10);
  CHECK_THROWS_AS(bench_projector(2048, 64, 10), ValidationError);
  CHECK_THROWS_AS(bench_projector(8, 64, 5), ValidationError);
}
