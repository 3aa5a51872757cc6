#include "gotedit/harness.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/distributions/binomial.hpp>

#include "gotedit/error.hpp"
#include "gotedit/regression.hpp"

namespace gotedit {
namespace {

double upper_tail(int successes, int trials) {
  if (trials == 0 || successes == 0) return 1.0;
  boost::math::binomial_distribution<double> dist(trials, 0.5);
  return boost::math::cdf(boost::math::complement(dist, successes - 1));
}

void require_paired(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ValidationError("sign test needs paired samples of equal length");
}

}  // namespace

double suc_auc(const std::vector<double>& ious) {
  if (ious.empty()) return 0.0;
  double total = 0.0;
  for (int k = 1; k <= 19; ++k) {
    const double thr = 0.05 * k;
    int hits = 0;
    for (double v : ious) hits += v > thr ? 1 : 0;
    total += static_cast<double>(hits) / static_cast<double>(ious.size());
  }
  return total / 19.0;
}

Metrics evaluate(const std::vector<TrackRun>& runs, const std::vector<GroundTruth>& gts) {
  if (runs.size() != gts.size()) throw ValidationError("evaluate: runs and ground truth differ in count");
  std::vector<double> all;
  std::array<std::vector<double>, 3> per_attr;
  int agree = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (runs[r].frames.size() != gts[r].size()) {
      throw ValidationError("evaluate: run " + std::to_string(r) + " has " + std::to_string(runs[r].frames.size()) +
                            " frames but ground truth has " + std::to_string(gts[r].size()));
    }
    for (std::size_t t = 0; t < gts[r].size(); ++t) {
      const double v = iou(runs[r].frames[t].box, gts[r][t].box);
      all.push_back(v);
      per_attr[static_cast<std::size_t>(gts[r][t].attr)].push_back(v);
      agree += runs[r].frames[t].argmax_agree ? 1 : 0;
    }
  }
  Metrics m;
  m.frames = static_cast<int>(all.size());
  if (all.empty()) return m;
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  m.mean_iou = mean(all);
  m.suc_auc = suc_auc(all);
  m.argmax_preservation = static_cast<double>(agree) / static_cast<double>(all.size());
  for (std::size_t a = 0; a < 3; ++a) {
    m.by_attribute[a] = AttributeStats{mean(per_attr[a]), suc_auc(per_attr[a]), static_cast<int>(per_attr[a].size())};
  }
  return m;
}

double attribute_mean_iou(const TrackRun& run, const GroundTruth& gt, Attribute a) {
  if (run.frames.size() != gt.size()) throw ValidationError("attribute_mean_iou: length mismatch");
  double sum = 0.0;
  int n = 0;
  for (std::size_t t = 0; t < gt.size(); ++t) {
    if (gt[t].attr != a) continue;
    sum += iou(run.frames[t].box, gt[t].box);
    ++n;
  }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / n;
}

SignTest sign_test_greater(const std::vector<double>& a, const std::vector<double>& b) {
  require_paired(a, b);
  SignTest s;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) {
      ++s.successes;
      ++s.trials;
    } else if (a[i] < b[i]) {
      ++s.trials;
    }
  }
  s.p_value = upper_tail(s.successes, s.trials);
  return s;
}

SignTest sign_test_at_least(const std::vector<double>& a, const std::vector<double>& b) {
  require_paired(a, b);
  SignTest s;
  s.trials = static_cast<int>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) s.successes += a[i] >= b[i] ? 1 : 0;
  s.p_value = upper_tail(s.successes, s.trials);
  return s;
}

}  // namespace gotedit
