#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gotedit/error.hpp"
#include "gotedit/regression.hpp"

namespace gotedit::cli {
namespace {

constexpr Attribute kAttributes[] = {Attribute::clean, Attribute::distractor, Attribute::occlusion};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pvalue(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", p);
  return buf;
}

bool has_mode(const StudyResult& r, Mode m) {
  for (Mode x : r.modes) {
    if (x == m) return true;
  }
  return false;
}

double giou_loss(const BoxLTRB& pred, const BoxLTRB& truth) { return 1.0 - giou(pred, truth); }

}  // namespace

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out.flush()) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string metadata_line(const ExperimentConfig& cfg) {
  return "# config_hash=" + config_hash(cfg) + " tool_version=" + kToolVersion + "\n";
}

std::string runs_csv(const ExperimentConfig& cfg, const StudyResult& result) {
  std::ostringstream out;
  out << metadata_line(cfg);
  out << "sequence,seed,frame,mode,attribute,iou,argmax_agree,retained_rank,peak,cls_loss,giou_loss,"
         "left,top,right,bottom\n";
  for (std::size_t i = 0; i < result.sequences.size(); ++i) {
    const auto& seq = result.sequences[i];
    for (std::size_t k = 0; k < result.modes.size(); ++k) {
      const auto& run = seq.runs[k];
      for (std::size_t t = 0; t < run.frames.size(); ++t) {
        const auto& rec = run.frames[t];
        const auto& truth = seq.truth[t];
        out << i << ',' << seq.seed << ',' << t << ',' << to_string(run.mode) << ',' << to_string(truth.attr) << ','
            << csv_number(rec.iou) << ',' << (rec.argmax_agree ? 1 : 0) << ',' << rec.retained_rank << ','
            << csv_number(rec.peak) << ',' << csv_number(rec.cls_loss) << ','
            << csv_number(giou_loss(rec.box, truth.box)) << ',' << csv_number(rec.box.left) << ','
            << csv_number(rec.box.top) << ',' << csv_number(rec.box.right) << ',' << csv_number(rec.box.bottom)
            << '\n';
      }
    }
  }
  return out.str();
}

std::string timings_csv(const ExperimentConfig& cfg, const StudyResult& result) {
  std::ostringstream out;
  out << metadata_line(cfg);
  out << "sequence,frame,mode,fuse_us,predict_us,project_us,localize_us,regress_us\n";
  for (std::size_t i = 0; i < result.sequences.size(); ++i) {
    for (const auto& run : result.sequences[i].runs) {
      for (std::size_t t = 0; t < run.frames.size(); ++t) {
        const auto& s = run.frames[t].times;
        out << i << ',' << t << ',' << to_string(run.mode) << ',' << fixed(s.fuse_us, 2) << ','
            << fixed(s.predict_us, 2) << ',' << fixed(s.project_us, 2) << ',' << fixed(s.localize_us, 2) << ','
            << fixed(s.regress_us, 2) << '\n';
      }
    }
  }
  return out.str();
}

std::string aggregate_csv(const ExperimentConfig& cfg, const StudyResult& result) {
  std::ostringstream out;
  out << metadata_line(cfg);
  out << "mode,attribute,mean_iou,suc_auc,n\n";
  for (Mode m : result.modes) {
    const Metrics metrics = result.metrics(m);
    out << to_string(m) << ",all," << csv_number(metrics.mean_iou) << ',' << csv_number(metrics.suc_auc) << ','
        << metrics.frames << '\n';
    for (Attribute a : kAttributes) {
      const auto& s = metrics.at(a);
      out << to_string(m) << ',' << to_string(a) << ',' << csv_number(s.mean_iou) << ',' << csv_number(s.suc_auc)
          << ',' << s.frames << '\n';
    }
  }
  return out.str();
}

std::string summary_text(const ExperimentConfig& cfg, const StudyResult& result) {
  std::ostringstream out;
  out << "gotedit " << kToolVersion << "  config_hash " << config_hash(cfg) << '\n';
  out << result.sequences.size() << " sequences from seed " << cfg.study.seed << ", loss weights cls "
      << csv_number(cfg.loss.lambda_cls) << " giou " << csv_number(cfg.loss.lambda_giou) << "\n\n";

  out << "mode              mean_iou  suc_auc  clean  distr  occl   argmax_kept  loss\n";
  for (std::size_t k = 0; k < result.modes.size(); ++k) {
    const Mode m = result.modes[k];
    const Metrics metrics = result.metrics(m);
    double loss = 0.0;
    int frames = 0;
    for (const auto& seq : result.sequences) {
      for (std::size_t t = 0; t < seq.truth.size(); ++t) {
        const auto& rec = seq.runs[k].frames[t];
        loss += total_loss(rec.cls_loss, giou_loss(rec.box, seq.truth[t].box), cfg.loss);
        ++frames;
      }
    }
    char line[160];
    std::snprintf(line, sizeof line, "%-16s  %8.4f  %7.4f  %5.3f  %5.3f  %5.3f  %11.4f  %.4f\n", to_string(m),
                  metrics.mean_iou, metrics.suc_auc, metrics.at(Attribute::clean).mean_iou,
                  metrics.at(Attribute::distractor).mean_iou, metrics.at(Attribute::occlusion).mean_iou,
                  metrics.argmax_preservation, frames ? loss / frames : 0.0);
    out << line;
  }

  const Mode S = Mode::semantic_only, N = Mode::naive_fusion, E = Mode::nullspace_edit;
  if (has_mode(result, S) && has_mode(result, N) && has_mode(result, E)) {
    out << "\npaired sign tests over sequences (one-sided)\n";
    auto row = [&](const char* label, const SignTest& s) {
      out << "  " << label << "  " << s.successes << '/' << s.trials << "  p=" << pvalue(s.p_value)
          << (s.p_value < 0.05 ? "  holds\n" : "  not shown\n");
    };
    const auto occ = [&](Mode m) { return result.attribute_series(m, Attribute::occlusion); };
    const auto dis = [&](Mode m) { return result.attribute_series(m, Attribute::distractor); };
    row("occlusion   naive_fusion > semantic_only ", sign_test_greater(occ(N), occ(S)));
    row("occlusion   nullspace_edit >= naive_fusion", sign_test_at_least(occ(E), occ(N)));
    row("distractor  semantic_only > naive_fusion ", sign_test_greater(dis(S), dis(N)));
    row("distractor  nullspace_edit > naive_fusion", sign_test_greater(dis(E), dis(N)));
  }
  return out.str();
}

}  // namespace gotedit::cli
