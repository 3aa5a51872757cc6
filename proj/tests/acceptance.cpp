// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "gotedit/bench.hpp"
#include "gotedit/harness.hpp"
#include "gotedit/random.hpp"
#include "oracles.hpp"

using namespace gotedit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

oracle::Mat to_oracle(const Eigen::MatrixXd& M) {
  oracle::Mat out(M.rows(), oracle::Vec(M.cols()));
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) out[i][j] = M(i, j);
  return out;
}

oracle::Vec to_oracle(const Eigen::VectorXd& v) { return oracle::Vec(v.data(), v.data() + v.size()); }

oracle::Attn to_oracle(const AttentionParams& p) {
  return {to_oracle(p.Wq), to_oracle(p.Wk), to_oracle(p.Wv), to_oracle(p.Wo)};
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Eigen::MatrixXd random_symmetric(int n, Rng& rng) {
  const Eigen::MatrixXd A = gaussian_matrix(n, n, 1.0, rng);
  return (A + A.transpose()) / 2.0;
}

bool same_records(const TrackRun& a, const TrackRun& b) {
  if (a.frames.size() != b.frames.size()) return false;
  for (std::size_t t = 0; t < a.frames.size(); ++t) {
    const auto &x = a.frames[t], &y = b.frames[t];
    if (!(x.box == y.box) || x.iou != y.iou || x.argmax != y.argmax || x.peak != y.peak || x.cls_loss != y.cls_loss) {
      return false;
    }
  }
  return true;
}

// Projector invariants over seeded random feature sets of mixed rank.
Outcome projector_suite() {
  Rng rng(101);
  double worst_idem = 0.0, worst_trace = 0.0;
  int asymmetric = 0, cases = 0;
  for (int C : {4, 8, 16, 32, 64}) {
    for (int k = 0; k < 40; ++k, ++cases) {
      const int N = 2 + static_cast<int>(uniform(0.0, 3.0 * C, rng));
      const int r = 1 + static_cast<int>(uniform(0.0, C, rng));
      const Eigen::MatrixXd X = gaussian_matrix(C, r, 1.0, rng) * gaussian_matrix(r, N, 1.0, rng);
      const WhitenedMatrix Z = whiten(X);
      const double lambda = k % 3 == 0 ? 0.0 : default_ridge(Z);
      ThresholdPolicy policy;
      policy.eps_rel = std::pow(10.0, uniform(-6.0, -0.5, rng));
      const Projector P = nullspace_projector(regularized_correlation(Z, lambda), policy);
      if (P.P != P.P.transpose()) ++asymmetric;
      worst_idem = std::max(worst_idem, (P.P * P.P - P.P).norm());
      worst_trace = std::max(worst_trace, std::abs(P.P.trace() - P.retained_rank));
    }
  }
  return {asymmetric == 0 && worst_idem <= 1e-6 && worst_trace <= 1e-6,
          std::to_string(cases) + " sets, asymmetric " + std::to_string(asymmetric) + ", max |P^2-P| " +
              fmt("%.2e", worst_idem) + ", max |tr P - rank| " + fmt("%.2e", worst_trace)};
}

// Exact annihilation of rank-deficient features and the preserved-score identity.
Outcome nullspace_identity() {
  Rng rng(202);
  double worst_null = 0.0, worst_keep = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int C = 4 + static_cast<int>(uniform(0.0, 44.0, rng));
    const int r = 1 + static_cast<int>(uniform(0.0, C - 1.0, rng));
    const int N = C + static_cast<int>(uniform(0.0, 3.0 * C, rng));
    const Eigen::MatrixXd X = gaussian_matrix(C, r, 1.0, rng) * gaussian_matrix(r, N, 1.0, rng);
    const WhitenedMatrix Z = whiten(X);
    // Only the exact null directions: the cut sits far below any genuine eigenvalue.
    ThresholdPolicy exact;
    exact.eps_rel = 1e-10;
    const Projector P = nullspace_projector(regularized_correlation(Z, 0.0), exact);
    worst_null = std::max(worst_null, (P.P * Z.Z).norm() / Z.Z.norm());
    const Eigen::VectorXd W = gaussian_vector(C, 1.0, rng), D = gaussian_vector(C, 3.0, rng);
    const Eigen::VectorXd kept = W.transpose() * Z.Z;
    const Eigen::VectorXd now = (W + P.P * D).transpose() * Z.Z;
    worst_keep = std::max(worst_keep, (now - kept).norm() / kept.norm());
  }
  return {worst_null <= 1e-8 && worst_keep <= 1e-6,
          "100 sets, max |PZ|/|Z| " + fmt("%.2e", worst_null) + ", max score drift " + fmt("%.2e", worst_keep)};
}

Outcome eigensolver_oracle() {
  Rng rng(303);
  double worst_root = 0.0, worst_recon = 0.0;
  int missing = 0;
  for (int k = 0; k < 1000; ++k) {
    const int n = k % 2 == 0 ? 2 : 3;
    const Eigen::MatrixXd M = random_symmetric(n, rng);
    const EigenBasis e = sym_eig(M);
    const auto ref = oracle::char_poly_eigenvalues(to_oracle(M));
    if (static_cast<int>(ref.size()) != n) {
      ++missing;
      continue;
    }
    for (int i = 0; i < n; ++i) worst_root = std::max(worst_root, std::abs(e.values[i] - ref[i]));
  }
  for (int n = 1; n <= 64; ++n) {
    const Eigen::MatrixXd M = random_symmetric(n, rng);
    const EigenBasis e = sym_eig(M);
    const Eigen::MatrixXd R = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    worst_recon = std::max(worst_recon, (R - M).norm() / M.norm());
  }
  return {missing == 0 && worst_root <= 1e-9 && worst_recon <= 1e-7,
          "1000 small matrices, max root error " + fmt("%.2e", worst_root) + ", sizes 1..64 max reconstruction " +
              fmt("%.2e", worst_recon)};
}

Outcome giou_oracle() {
  const double hand = giou(BoxLTRB{0, 0, 2, 2}, BoxLTRB{1, 1, 3, 3});
  bool ok = std::abs(hand - (1.0 / 7.0 - 2.0 / 9.0)) <= 1e-9;
  ok = ok && giou(BoxLTRB{1, 2, 4, 7}, BoxLTRB{1, 2, 4, 7}) == 1.0;
  std::mt19937_64 gen(404);
  std::uniform_real_distribution<double> pos(-50, 50), ext(0.05, 30), scale(1e-3, 1e3);
  int bad_sym = 0;
  double worst_scale = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double l1 = pos(gen), t1 = pos(gen), l2 = pos(gen), t2 = pos(gen);
    const BoxLTRB a{l1, t1, l1 + ext(gen), t1 + ext(gen)}, b{l2, t2, l2 + ext(gen), t2 + ext(gen)};
    const double g = giou(a, b);
    if (g != giou(b, a)) ++bad_sym;
    const double s = scale(gen);
    const double gs = giou(BoxLTRB{a.left * s, a.top * s, a.right * s, a.bottom * s},
                           BoxLTRB{b.left * s, b.top * s, b.right * s, b.bottom * s});
    worst_scale = std::max(worst_scale, std::abs(gs - g));
  }
  ok = ok && bad_sym == 0 && worst_scale <= 1e-9;
  return {ok, "hand case " + fmt("%.12f", hand) + ", 10000 pairs: asymmetric " + std::to_string(bad_sym) +
                  ", max scale drift " + fmt("%.2e", worst_scale)};
}

Outcome mode_collapse() {
  int rank_zero_ok = 0, identity_ok = 0, rank_nonzero = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const SequenceSpec spec = make_sequence_spec(SceneConfig{}, seed);
    const TrackerModel model = make_template_model(spec, {}, seed * 7 + 1);

    // Semantic features spanning all channels leave nothing below a tight threshold.
    SequenceSpec full = spec;
    full.look.sem_rank = full.c_sem;
    const Scene full_scene = gen_scene(full);
    TrackerConfig tight;
    tight.lambda = 0.0;
    tight.policy.eps_rel = 1e-9;
    tight.policy.eps_abs = 0.0;
    const TrackRun edit = run_tracker(full_scene, Mode::nullspace_edit, model, tight);
    for (const auto& rec : edit.frames) rank_nonzero += rec.retained_rank != 0 ? 1 : 0;
    rank_zero_ok += same_records(edit, run_tracker(full_scene, Mode::semantic_only, model, tight)) ? 1 : 0;

    const Scene scene = gen_scene(spec);
    TrackerConfig identity;
    identity.force_identity_projector = true;
    identity_ok += same_records(run_tracker(scene, Mode::nullspace_edit, model, identity),
                                run_tracker(scene, Mode::naive_fusion, model, identity))
                       ? 1
                       : 0;
  }
  return {rank_zero_ok == 20 && identity_ok == 20 && rank_nonzero == 0,
          "rank 0 = semantic_only " + std::to_string(rank_zero_ok) + "/20 (frames with rank > 0: " +
              std::to_string(rank_nonzero) + "), P = I = naive_fusion " + std::to_string(identity_ok) + "/20"};
}

Outcome directional_pattern() {
  StudyConfig cfg;  // default scene scale, 100 sequences, one worker
  const auto t0 = std::chrono::steady_clock::now();
  const StudyResult r = run_study(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const Mode S = Mode::semantic_only, N = Mode::naive_fusion, E = Mode::nullspace_edit;
  auto occ = [&](Mode m) { return r.attribute_series(m, Attribute::occlusion); };
  auto dis = [&](Mode m) { return r.attribute_series(m, Attribute::distractor); };
  const SignTest tests[] = {sign_test_greater(occ(N), occ(S)), sign_test_at_least(occ(E), occ(N)),
                            sign_test_greater(dis(S), dis(N)), sign_test_greater(dis(E), dis(N))};
  const char* names[] = {"occ N>S", "occ E>=N", "dis S>N", "dis E>N"};
  bool ok = secs < 180.0;
  std::string detail;
  for (int i = 0; i < 4; ++i) {
    ok = ok && tests[i].p_value < 0.05;
    detail += std::string(names[i]) + " " + std::to_string(tests[i].successes) + "/" +
              std::to_string(tests[i].trials) + " p=" + fmt("%.2g", tests[i].p_value) + ", ";
  }
  return {ok, detail + fmt("%.1f s", secs)};
}

Outcome forward_oracle() {
  Rng rng(707);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto p = PredictorParams::seeded(4, 5000 + k, k % 2 == 0);
    const Head h = k % 3 == 0 ? Head::geometry : Head::semantic;
    const std::vector<FeatureMap> refs{FeatureMap(FeatureKind::fused, 2, 2, gaussian_matrix(4, 4, 1.0, rng)),
                                       FeatureMap(FeatureKind::fused, 2, 2, gaussian_matrix(4, 4, 1.0, rng))};
    const FeatureMap cur(FeatureKind::fused, 2, 2, gaussian_matrix(4, 4, 1.0, rng));
    const Eigen::VectorXd e = gaussian_vector(4, 1.0, rng);
    const WeightVector got = predict_weights(refs, cur, e, p, h);
    oracle::PredictorInputs in;
    in.C = 4;
    in.H = in.W = 2;
    in.refs = {to_oracle(refs[0].values()), to_oracle(refs[1].values())};
    in.cur = to_oracle(cur.values());
    in.e = to_oracle(e);
    in.enc = to_oracle(p.encoder_for(h));
    in.dec = to_oracle(p.decoder_for(h));
    in.head_W = to_oracle(p.head(h).W);
    in.head_b = to_oracle(p.head(h).b);
    in.pe_scale = p.pe_scale;
    const auto want = oracle::predictor_forward(in);
    for (int c = 0; c < 4; ++c) worst = std::max(worst, std::abs(got.w[c] - want[c]));
  }
  return {worst <= 1e-6, "50 instances, max deviation " + fmt("%.2e", worst)};
}

Outcome projector_budget() {
  const BenchStats s64 = bench_projector(64, 1024, 20);
  const BenchStats s128 = bench_projector(128, 1024, 20);
  const BenchStats s256 = bench_projector(256, 1024, 20);
  const bool ok = s256.mean_ms <= 50.0 && s64.mean_ms < s128.mean_ms && s128.mean_ms < s256.mean_ms;
  return {ok, "mean ms at C=64/128/256, N=1024: " + fmt("%.2f", s64.mean_ms) + " / " + fmt("%.2f", s128.mean_ms) +
                  " / " + fmt("%.2f", s256.mean_ms) + " (budget 50)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "gotedit_acceptance_determinism";
  fs::remove_all(root);
  std::vector<std::string> outs;
  for (const char* run : {"first", "second"}) {
    const std::string dir = (root / run).string();
    const char* argv[] = {"gotedit", "track", "--config", GOTEDIT_EXAMPLE_CONFIG, "--seed", "11",
                          "--sequences", "10", "--out", dir.c_str()};
    std::ostringstream out, err;
    if (gotedit::cli::run_cli(10, argv, out, err) != 0) return {false, "track failed: " + err.str()};
  }
  int identical = 0;
  for (const char* name : {"runs.csv", "aggregate.csv"}) {
    const std::string a = slurp(root / "first" / name), b = slurp(root / "second" / name);
    identical += !a.empty() && a == b ? 1 : 0;
  }
  return {identical == 2, std::to_string(identical) + "/2 CSV files byte-identical across two runs"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
    double limit_s;  // 0: no runtime bound
  };
  const std::vector<Criterion> criteria{
      {1, "projector symmetry, idempotence and trace", projector_suite, 30},
      {2, "null-space annihilation and preserved scores", nullspace_identity, 30},
      {3, "eigensolver against characteristic-polynomial roots", eigensolver_oracle, 60},
      {4, "GIoU hand case, symmetry and scale invariance", giou_oracle, 0},
      {5, "mode-collapse identities", mode_collapse, 0},
      {6, "directional attribute pattern over 100 sequences", directional_pattern, 180},
      {7, "predictor forward pass against straight-line recomputation", forward_oracle, 0},
      {8, "projector budget at C=256, N=1024 and monotone cost", projector_budget, 0},
      {9, "byte-identical CSVs for identical config and seed", determinism, 0},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0 && secs >= c.limit_s) {
      o.pass = false;
      o.detail += ", over the " + fmt("%.0f s", c.limit_s) + " limit";
    }
    std::printf("%s [%d] %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
