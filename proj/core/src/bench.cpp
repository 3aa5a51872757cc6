#include "gotedit/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "gotedit/error.hpp"
#include "gotedit/random.hpp"

namespace gotedit {

BenchStats bench_projector(int C, int N, int reps, EigenSolver solver, std::uint64_t seed) {
  if (C < 1 || C > 1024) throw ValidationError("bench_projector: C must lie in [1, 1024]");
  if (N < 2) throw ValidationError("bench_projector: N must be at least 2");
  if (reps < 10) throw ValidationError("bench_projector: reps must be at least 10");

  Rng rng(seed);
  const Eigen::MatrixXd X = gaussian_matrix(C, N, 1.0, rng);
  ThresholdPolicy policy;
  policy.solver = solver;

  std::vector<double> ms;
  ms.reserve(static_cast<std::size_t>(reps));
  int sink = 0;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const WhitenedMatrix Z = whiten(X);
    const SymmetricMatrix M = regularized_correlation(Z, default_ridge(Z));
    const Projector P = nullspace_projector(M, policy);
    const auto t1 = std::chrono::steady_clock::now();
    sink += P.retained_rank;
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  (void)sink;

  BenchStats s;
  s.channels = C;
  s.samples = N;
  s.reps = reps;
  double sum = 0.0;
  for (double v : ms) sum += v;
  s.mean_ms = sum / reps;
  std::sort(ms.begin(), ms.end());
  auto quantile = [&](double q) {
    const double pos = q * (reps - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, ms.size() - 1);
    return ms[lo] + (pos - lo) * (ms[hi] - ms[lo]);
  };
  s.p50_ms = quantile(0.5);
  s.p95_ms = quantile(0.95);
  return s;
}

}  // namespace gotedit
