#include <benchmark/benchmark.h>

#include "gotedit/tracker.hpp"

namespace {

using namespace gotedit;

void BM_TrackSequence(benchmark::State& state) {
  const auto mode = static_cast<Mode>(state.range(0));
  const SequenceSpec spec = make_sequence_spec(SceneConfig{}, 3);
  const Scene scene = gen_scene(spec);
  const TrackerModel model = make_template_model(spec, {}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(run_tracker(scene, mode, model, {}));
  state.SetLabel(to_string(mode));
  state.SetItemsProcessed(state.iterations() * spec.frames);
}
BENCHMARK(BM_TrackSequence)
    ->Arg(static_cast<int>(Mode::semantic_only))
    ->Arg(static_cast<int>(Mode::naive_fusion))
    ->Arg(static_cast<int>(Mode::nullspace_edit))
    ->Unit(benchmark::kMillisecond);

void BM_GenScene(benchmark::State& state) {
  const SequenceSpec spec = make_sequence_spec(SceneConfig{}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(gen_scene(spec));
}
BENCHMARK(BM_GenScene)->Unit(benchmark::kMillisecond);

}  // namespace
