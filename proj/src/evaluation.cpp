#include "taskpls/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "taskpls/errors.hpp"
#include "taskpls/parallel.hpp"

namespace taskpls {

RocResult roc_curve(const ScoreSet& scores) {
  const std::size_t n0 = scores.absent_scores.size();
  const std::size_t n1 = scores.present_scores.size();
  if (n0 == 0 || n1 == 0) {
    throw InsufficientData("ROC analysis needs at least one score per class");
  }

  struct Scored {
    double score;
    bool present;
  };
  std::vector<Scored> all;
  all.reserve(n0 + n1);
  for (double s : scores.absent_scores) all.push_back({s, false});
  for (double s : scores.present_scores) all.push_back({s, true});
  for (const auto& s : all) {
    if (!std::isfinite(s.score)) throw InvalidParameter("ROC scores must be finite");
  }
  std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) {
    return a.score > b.score;
  });

  RocResult roc;
  roc.n_absent = n0;
  roc.n_present = n1;
  roc.operating_points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});

  // Walk tie groups from the highest score down. Each absent score in a group
  // is outranked by every present score above the group and ties the group's
  // present scores: the Mann-Whitney count with 1/2 ties.
  double tp = 0.0, fp = 0.0, u = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    double group_tp = 0.0, group_fp = 0.0;
    while (j < all.size() && all[j].score == all[i].score) {
      (all[j].present ? group_tp : group_fp) += 1.0;
      ++j;
    }
    u += group_fp * (tp + 0.5 * group_tp);
    tp += group_tp;
    fp += group_fp;
    roc.operating_points.push_back(
        {all[i].score, fp / static_cast<double>(n0), tp / static_cast<double>(n1)});
    i = j;
  }

  const double a0 = static_cast<double>(n0);
  const double a1 = static_cast<double>(n1);
  const double auc = u / (a0 * a1);
  roc.auc = auc;

  const double q1 = auc / (2.0 - auc);
  const double q2 = 2.0 * auc * auc / (1.0 + auc);
  const double var =
      (auc * (1.0 - auc) + (a1 - 1.0) * (q1 - auc * auc) + (a0 - 1.0) * (q2 - auc * auc)) /
      (a0 * a1);
  roc.auc_std_err = std::sqrt(std::max(0.0, var));
  return roc;
}

double trapezoid_auc(const std::vector<RocPoint>& points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * 0.5 * (points[i].tpr + points[i - 1].tpr);
  }
  return area;
}

double rmse(const ImageGrid& a, const ImageGrid& b) {
  require_same_shape(a, b, "rmse");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(a.size()));
}

ImageGrid difference_map(const ImageGrid& f_task, const ImageGrid& f_plain) {
  require_same_shape(f_task, f_plain, "difference_map");
  return f_task - f_plain;
}

RocResult evaluate_pipeline(const LabeledEnsemble& ensemble, const ObserverTemplate& tmpl,
                            const std::optional<DenoiseConfig>& denoise_config,
                            const PipelineOptions& options) {
  if (denoise_config) denoise_config->validate();
  std::vector<double> scores(ensemble.items.size());
  parallel_for(scores.size(), options.jobs, [&](std::size_t i) {
    const ImageGrid& g = ensemble.items[i].noisy;
    if (!denoise_config) {
      scores[i] = test_statistic(tmpl, g);
      return;
    }
    try {
      scores[i] = test_statistic(tmpl, denoise(g, tmpl, *denoise_config).estimate);
    } catch (const DivergenceError& e) {
      throw DivergenceError(e.iteration(), "item " + std::to_string(i) + ": " + e.what());
    }
  });

  ScoreSet set;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (ensemble.items[i].label == Label::present ? set.present_scores : set.absent_scores)
        .push_back(scores[i]);
  }
  return roc_curve(set);
}

std::string roc_to_csv(const RocResult& roc) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "threshold,fpr,tpr\n";
  for (const auto& p : roc.operating_points) {
    out << p.threshold << ',' << p.fpr << ',' << p.tpr << '\n';
  }
  return out.str();
}

std::string roc_summary_json(const RocResult& roc) {
  nlohmann::ordered_json j;
  j["auc"] = roc.auc;
  j["auc_std_err"] = roc.auc_std_err;
  j["n_absent"] = roc.n_absent;
  j["n_present"] = roc.n_present;
  return j.dump(2) + "\n";
}

}  // namespace taskpls
