#include "gotedit/harness.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "gotedit/error.hpp"

namespace gotedit {
namespace {

std::uint64_t model_seed(std::uint64_t sequence_seed) { return sequence_seed * 0x2545f4914f6cdd1dULL + 10000; }

SequenceResult run_sequence(const StudyConfig& cfg, std::uint64_t seed) {
  const SequenceSpec spec = make_sequence_spec(cfg.scene, seed);
  const Scene scene = gen_scene(spec);
  const TrackerModel model = cfg.fixed_model ? *cfg.fixed_model : make_template_model(spec, cfg.model, model_seed(seed));
  SequenceResult out;
  out.seed = seed;
  out.truth = scene.truth();
  for (Mode m : cfg.modes) out.runs.push_back(run_tracker(scene, m, model, cfg.tracker));
  return out;
}

}  // namespace

std::vector<double> StudyResult::attribute_series(Mode m, Attribute a) const {
  std::size_t k = 0;
  while (k < modes.size() && modes[k] != m) ++k;
  if (k == modes.size()) throw ValidationError(std::string("mode ") + to_string(m) + " was not run");
  std::vector<double> out;
  for (const auto& s : sequences) {
    const double v = attribute_mean_iou(s.runs[k], s.truth, a);
    if (!std::isnan(v)) out.push_back(v);
  }
  return out;
}

Metrics StudyResult::metrics(Mode m) const {
  std::size_t k = 0;
  while (k < modes.size() && modes[k] != m) ++k;
  if (k == modes.size()) throw ValidationError(std::string("mode ") + to_string(m) + " was not run");
  std::vector<TrackRun> runs;
  std::vector<GroundTruth> gts;
  for (const auto& s : sequences) {
    runs.push_back(s.runs[k]);
    gts.push_back(s.truth);
  }
  return evaluate(runs, gts);
}

StudyResult run_study(const StudyConfig& cfg) {
  if (cfg.sequences < 1) throw ValidationError("study.sequences must be at least 1");
  if (cfg.modes.empty()) throw ValidationError("at least one mode is required");
  validate(cfg.scene);
  validate(cfg.tracker);
  validate(cfg.model, cfg.scene.look, cfg.scene.c_sem);

  StudyResult result;
  result.modes = cfg.modes;
  result.sequences.resize(static_cast<std::size_t>(cfg.sequences));

  const int jobs = std::max(1, std::min(cfg.jobs, cfg.sequences));
  if (jobs == 1) {
    for (int i = 0; i < cfg.sequences; ++i) result.sequences[i] = run_sequence(cfg, cfg.seed + i);
    return result;
  }

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (int i = next++; i < cfg.sequences; i = next++) {
        try {
          result.sequences[static_cast<std::size_t>(i)] = run_sequence(cfg, cfg.seed + static_cast<std::uint64_t>(i));
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
  return result;
}

}  // namespace gotedit
