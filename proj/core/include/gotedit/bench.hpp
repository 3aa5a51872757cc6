#pragma once

#include <cstdint>

#include "gotedit/linalg.hpp"

namespace gotedit {

struct BenchStats {
  int channels = 0;
  int samples = 0;
  int reps = 0;
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
};

// Times whiten + regularized_correlation + eigendecomposition + projector on
// seeded Gaussian features. Requires C <= 1024 and reps >= 10.
BenchStats bench_projector(int C, int N, int reps, EigenSolver solver = EigenSolver::automatic,
                           std::uint64_t seed = 7);

}  // namespace gotedit
