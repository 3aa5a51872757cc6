#include "commands.hpp"

#include <glob.h>

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "CLI11.hpp"
#include "config.hpp"
#include "gotedit/bench.hpp"
#include "gotedit/error.hpp"
#include "gotedit/random.hpp"
#include "report.hpp"

namespace gotedit::cli {
namespace {

namespace fs = std::filesystem;

struct Overrides {
  std::string config;
  std::string seed;
  std::string out;
  std::string modes;
  std::string jobs;
  std::string sequences;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Experiment config file (key = value with [section] headers)");
  cmd->add_option("--seed", o.seed, "Seed of the first sequence");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--jobs", o.jobs, "Worker threads");
  cmd->add_option("--sequences", o.sequences, "Number of sequences");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (!o.seed.empty()) set_field(cfg, "study.seed", o.seed);
  if (!o.modes.empty()) set_field(cfg, "study.modes", o.modes);
  if (!o.jobs.empty()) set_field(cfg, "study.jobs", o.jobs);
  if (!o.sequences.empty()) set_field(cfg, "study.sequences", o.sequences);
  if (!o.out.empty()) cfg.out_dir = o.out;
  validate(cfg);
  return cfg;
}

std::string frame_name(int idx, const char* kind) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "frame_%06d_%s.gted", idx, kind);
  return buf;
}

std::string seq_name(int idx) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "seq_%04d", idx);
  return buf;
}

int cmd_track(const Overrides& o, bool timings, std::ostream& out) {
  ExperimentConfig cfg = resolve(o);
  if (timings) cfg.timings = true;
  if (!cfg.params_dir.empty()) {
    cfg.study.fixed_model = std::make_shared<const TrackerModel>(
        TrackerModel::load(cfg.params_dir, cfg.study.scene.height, cfg.study.scene.width));
  }
  const StudyResult result = run_study(cfg.study);
  write_atomic(cfg.out_dir / "runs.csv", runs_csv(cfg, result));
  write_atomic(cfg.out_dir / "aggregate.csv", aggregate_csv(cfg, result));
  const std::string summary = summary_text(cfg, result);
  write_atomic(cfg.out_dir / "summary.txt", summary);
  write_atomic(cfg.out_dir / "config.conf", metadata_line(cfg) + canonical_config(cfg));
  if (cfg.timings) write_atomic(cfg.out_dir / "timings.csv", timings_csv(cfg, result));
  out << summary;
  return 0;
}

int cmd_simulate(const Overrides& o, std::ostream& out) {
  const ExperimentConfig cfg = resolve(o);
  for (int i = 0; i < cfg.study.sequences; ++i) {
    const std::uint64_t seed = cfg.study.seed + static_cast<std::uint64_t>(i);
    const Scene scene = gen_scene(make_sequence_spec(cfg.study.scene, seed));
    const fs::path dir = cfg.out_dir / seq_name(i);
    fs::create_directories(dir);
    std::ostringstream truth;
    truth << metadata_line(cfg) << "frame,attribute,left,top,right,bottom\n";
    for (std::size_t t = 0; t < scene.frames.size(); ++t) {
      const Frame& f = scene.frames[t];
      tensor_write(f.v_s.to_tensor(), dir / frame_name(static_cast<int>(t), "sem"));
      tensor_write(f.v_g.to_tensor(), dir / frame_name(static_cast<int>(t), "geo"));
      truth << t << ',' << to_string(f.truth.attr) << ',' << csv_number(f.truth.box.left) << ','
            << csv_number(f.truth.box.top) << ',' << csv_number(f.truth.box.right) << ','
            << csv_number(f.truth.box.bottom) << '\n';
    }
    write_atomic(dir / "truth.csv", truth.str());
  }
  out << "wrote " << cfg.study.sequences << " sequences to " << cfg.out_dir.string() << '\n';
  return 0;
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t g{};
  const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
  std::vector<std::string> paths;
  if (rc == 0) paths.assign(g.gl_pathv, g.gl_pathv + g.gl_pathc);
  globfree(&g);
  std::sort(paths.begin(), paths.end());
  return paths;
}

struct ProjectArgs {
  std::string features;
  std::string lambda = "auto";
  double eps_rel = ThresholdPolicy{}.eps_rel;
  double eps_abs = ThresholdPolicy{}.eps_abs;
  std::string solver = "auto";
  std::string out;
};

int cmd_project(const ProjectArgs& a, std::ostream& out) {
  if (!(a.eps_rel >= 0.0)) throw ConfigError("eps-rel", 0, "--eps-rel must be non-negative");
  if (!(a.eps_abs >= 0.0)) throw ConfigError("eps-abs", 0, "--eps-abs must be non-negative");
  ThresholdPolicy policy;
  policy.eps_rel = a.eps_rel;
  policy.eps_abs = a.eps_abs;
  if (a.solver == "jacobi") policy.solver = EigenSolver::jacobi;
  else if (a.solver == "tridiagonal") policy.solver = EigenSolver::tridiagonal;
  else if (a.solver != "auto") throw ConfigError("solver", 0, "--solver must be auto, jacobi or tridiagonal");
  std::optional<double> lambda;
  if (a.lambda != "auto") {
    ExperimentConfig scratch;
    set_field(scratch, "editing.lambda", a.lambda);
    lambda = scratch.study.tracker.lambda;
  }

  const auto paths = expand_glob(a.features);
  if (paths.empty()) throw ConfigError("features", 0, "--features matched no files: " + a.features);
  std::vector<Eigen::MatrixXd> blocks;
  Eigen::Index C = -1, N = 0;
  for (const auto& p : paths) {
    const Tensor t = tensor_read(p);
    Eigen::MatrixXd block;
    if (t.rank() == 3) block = FeatureMap::from_tensor(t, FeatureKind::semantic).values();
    else if (t.rank() == 2) block = tensor_to_matrix(t);
    else throw ValidationError(p + ": expected a [C,H,W] or [C,N] tensor");
    if (C >= 0 && block.rows() != C) throw ValidationError(p + ": channel count differs from earlier files");
    C = block.rows();
    N += block.cols();
    blocks.push_back(std::move(block));
  }
  Eigen::MatrixXd X(C, N);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    X.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  const WhitenedMatrix Z = whiten(X);
  const double ridge = lambda.value_or(default_ridge(Z));
  const Projector P = nullspace_projector(regularized_correlation(Z, ridge), policy);
  tensor_write(matrix_to_tensor(P.P), a.out);
  out << "files " << paths.size() << "  channels " << C << "  samples " << N << "  lambda " << csv_number(ridge)
      << "  retained_rank " << P.retained_rank << "  wrote " << a.out << '\n';
  return 0;
}

struct BenchArgs {
  std::string channels = "64,128,256";
  int samples = 1024;
  int reps = 20;
  std::string solver = "auto";
  std::string out;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  EigenSolver solver = EigenSolver::automatic;
  if (a.solver == "jacobi") solver = EigenSolver::jacobi;
  else if (a.solver == "tridiagonal") solver = EigenSolver::tridiagonal;
  else if (a.solver != "auto") throw ConfigError("solver", 0, "--solver must be auto, jacobi or tridiagonal");
  std::vector<int> channels;
  std::stringstream ss(a.channels);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int c = std::stoi(item, &used);
      if (used != item.size() || c < 1 || c > 1024) throw std::invalid_argument(item);
      channels.push_back(c);
    } catch (const std::exception&) {
      throw ConfigError("channels", 0, "--channels entries must be integers in [1, 1024], got '" + item + "'");
    }
  }
  if (channels.empty()) throw ConfigError("channels", 0, "--channels is empty");
  if (a.samples < 2) throw ConfigError("samples", 0, "--samples must be at least 2");
  if (a.reps < 10) throw ConfigError("reps", 0, "--reps must be at least 10");

  const std::string params =
      "channels=" + a.channels + " samples=" + std::to_string(a.samples) + " reps=" + std::to_string(a.reps) +
      " solver=" + a.solver;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(params)));
  std::ostringstream csv;
  csv << "# config_hash=" << hash << " tool_version=" << kToolVersion << '\n';
  csv << "channels,samples,reps,mean_ms,p50_ms,p95_ms\n";
  for (int c : channels) {
    const BenchStats s = bench_projector(c, a.samples, a.reps, solver);
    csv << s.channels << ',' << s.samples << ',' << s.reps << ',' << csv_number(s.mean_ms) << ','
        << csv_number(s.p50_ms) << ',' << csv_number(s.p95_ms) << '\n';
  }
  if (!a.out.empty()) write_atomic(a.out, csv.str());
  out << csv.str();
  return 0;
}

// Quick checks of the core invariants on small seeded problems.
int cmd_selftest(std::ostream& out) {
  int failures = 0;
  auto report = [&](const char* name, bool ok, const std::string& detail = {}) {
    out << (ok ? "PASS " : "FAIL ") << name << (ok || detail.empty() ? "" : ": " + detail) << '\n';
    if (!ok) ++failures;
  };

  Rng rng(2024);
  {
    const Eigen::MatrixXd m = gaussian_matrix(3, 5, 1.0, rng);
    const Tensor t = matrix_to_tensor(m);
    report("gted round trip", tensor_decode(tensor_encode(t)) == t);
  }
  {
    const Eigen::MatrixXd X = gaussian_matrix(12, 4, 1.0, rng) * gaussian_matrix(4, 60, 1.0, rng);
    const WhitenedMatrix Z = whiten(X);
    const Projector P = nullspace_projector(regularized_correlation(Z, 0.0));
    const double sym = (P.P - P.P.transpose()).cwiseAbs().maxCoeff();
    const double idem = (P.P * P.P - P.P).norm();
    const double annihilation = (P.P * Z.Z).norm() / Z.Z.norm();
    report("projector symmetric", sym == 0.0);
    report("projector idempotent", idem <= 1e-6, "residual " + csv_number(idem));
    report("projector annihilates the feature span", annihilation <= 1e-8, "ratio " + csv_number(annihilation));
    const Eigen::VectorXd W = gaussian_vector(12, 1.0, rng), D = gaussian_vector(12, 1.0, rng);
    const Eigen::VectorXd kept = W.transpose() * Z.Z;
    const Eigen::VectorXd now = (W + P.P * D).transpose() * Z.Z;
    report("in-span scores preserved", (now - kept).norm() <= 1e-6 * kept.norm());
  }
  {
    const double g = giou(BoxLTRB{0, 0, 2, 2}, BoxLTRB{1, 1, 3, 3});
    report("giou hand case", std::abs(g - (1.0 / 7.0 - 2.0 / 9.0)) <= 1e-9);
  }
  {
    SceneConfig sc;
    sc.frames = 24;
    sc.event_start = 2;
    sc.event_spacing = 5;
    sc.event_length = 5;
    const auto spec = make_sequence_spec(sc, 3);
    const Scene scene = gen_scene(spec);
    const TrackerModel model = make_template_model(spec, {}, 3);
    TrackerConfig identity;
    identity.force_identity_projector = true;
    const auto a = run_tracker(scene, Mode::nullspace_edit, model, identity);
    const auto b = run_tracker(scene, Mode::naive_fusion, model, identity);
    bool same = a.frames.size() == b.frames.size();
    for (std::size_t t = 0; same && t < a.frames.size(); ++t) same = a.frames[t].box == b.frames[t].box;
    report("identity projector matches naive fusion", same);
  }
  out << (failures == 0 ? "all checks passed\n" : std::to_string(failures) + " checks failed\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Null-space model editing for online tracking on synthetic scenes", "gotedit"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  Overrides track_o, sim_o;
  bool timings = false;
  auto* track = app.add_subcommand("track", "Run the mode comparison study and write CSV reports");
  add_common(track, track_o);
  track->add_option("--modes", track_o.modes, "Comma-separated modes");
  track->add_flag("--timings", timings, "Also write per-stage timings to timings.csv");

  auto* simulate = app.add_subcommand("simulate", "Generate scenes and dump their feature tensors");
  add_common(simulate, sim_o);

  ProjectArgs proj;
  auto* project = app.add_subcommand("project", "Build a null-space projector from GTED feature files");
  project->add_option("--features", proj.features, "Glob of GTED files, [C,H,W] or [C,N]")->required();
  project->add_option("--lambda", proj.lambda, "Ridge, or 'auto'");
  project->add_option("--eps-rel", proj.eps_rel, "Relative eigenvalue threshold");
  project->add_option("--eps-abs", proj.eps_abs, "Absolute eigenvalue floor");
  project->add_option("--solver", proj.solver, "auto, jacobi or tridiagonal");
  project->add_option("--out", proj.out, "Output GTED path for P")->required();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time projector construction");
  bench_cmd->add_option("--channels", bench.channels, "Comma-separated channel counts");
  bench_cmd->add_option("--samples", bench.samples, "Feature columns per call");
  bench_cmd->add_option("--reps", bench.reps, "Timed repetitions per size");
  bench_cmd->add_option("--solver", bench.solver, "auto, jacobi or tridiagonal");
  bench_cmd->add_option("--out", bench.out, "Optional CSV output path");

  auto* selftest = app.add_subcommand("selftest", "Check core invariants on small problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (*track) return cmd_track(track_o, timings, out);
    if (*simulate) return cmd_simulate(sim_o, out);
    if (*project) return cmd_project(proj, out);
    if (*bench_cmd) return cmd_bench(bench, out);
    if (*selftest) return cmd_selftest(out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace gotedit::cli
