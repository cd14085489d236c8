#include "oodgen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace oodgen {

namespace {

struct ClassCounts {
  std::size_t n_ood = 0;
  std::size_t n_ind = 0;
};

ClassCounts count_classes(const DetectionScores& scores, const char* caller) {
  ClassCounts c;
  for (const auto& r : scores) (r.is_ood ? c.n_ood : c.n_ind)++;
  if (c.n_ood == 0 || c.n_ind == 0)
    throw std::invalid_argument(std::string(caller) + ": need both OOD and IND records");
  return c;
}

// records sorted ascending by score (most OOD-looking first)
std::vector<DetectionRecord> sorted_by_score(const DetectionScores& scores) {
  std::vector<DetectionRecord> s(scores.begin(), scores.end());
  std::stable_sort(s.begin(), s.end(),
                   [](const DetectionRecord& a, const DetectionRecord& b) {
                     return a.score < b.score;
                   });
  return s;
}

}  // namespace

double auroc(const DetectionScores& scores) {
  const auto counts = count_classes(scores, "auroc");
  const auto s = sorted_by_score(scores);
  double u = 0.0;
  std::size_t ind_before = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = i;
    std::size_t ood_g = 0, ind_g = 0;
    while (j < s.size() && s[j].score == s[i].score) {
      (s[j].is_ood ? ood_g : ind_g)++;
      ++j;
    }
    const std::size_t ind_after = counts.n_ind - ind_before - ind_g;
    u += static_cast<double>(ood_g) * static_cast<double>(ind_after) +
         0.5 * static_cast<double>(ood_g) * static_cast<double>(ind_g);
    ind_before += ind_g;
    i = j;
  }
  return u / (static_cast<double>(counts.n_ood) * static_cast<double>(counts.n_ind));
}

double aupr(const DetectionScores& scores) {
  const auto counts = count_classes(scores, "aupr");
  const auto s = sorted_by_score(scores);
  double area = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0, flagged = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = i;
    while (j < s.size() && s[j].score == s[i].score) {
      if (s[j].is_ood) ++tp;
      ++flagged;
      ++j;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(counts.n_ood);
    const double precision = static_cast<double>(tp) / static_cast<double>(flagged);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return area;
}

double fpr_at_tpr(const DetectionScores& scores, double target_tpr) {
  if (!(target_tpr > 0.0 && target_tpr <= 1.0))
    throw std::invalid_argument("fpr_at_tpr: target must be in (0, 1]");
  const auto counts = count_classes(scores, "fpr_at_tpr");
  const auto s = sorted_by_score(scores);
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = i;
    while (j < s.size() && s[j].score == s[i].score) {
      (s[j].is_ood ? tp : fp)++;
      ++j;
    }
    const double tpr = static_cast<double>(tp) / static_cast<double>(counts.n_ood);
    if (tpr >= target_tpr)
      return static_cast<double>(fp) / static_cast<double>(counts.n_ind);
    i = j;
  }
  return 1.0;  // unreachable: the loosest threshold always reaches TPR 1
}

double ind_accuracy(const DetectionScores& scores) {
  std::size_t n_ind = 0, correct = 0;
  for (const auto& r : scores) {
    if (r.is_ood) continue;
    ++n_ind;
    if (r.pred_label == r.true_label) ++correct;
  }
  if (n_ind == 0) throw std::invalid_argument("ind_accuracy: no IND records");
  return static_cast<double>(correct) / static_cast<double>(n_ind);
}

std::vector<std::pair<double, double>> joint_accuracy_curve(
    const DetectionScores& scores, const std::vector<double>& thresholds) {
  std::vector<std::pair<double, double>> curve;
  curve.reserve(thresholds.size());
  for (double t : thresholds) {
    std::size_t correct = 0;
    for (const auto& r : scores) {
      if (r.is_ood) {
        if (r.score < t) ++correct;
      } else if (r.score >= t && r.pred_label == r.true_label) {
        ++correct;
      }
    }
    curve.emplace_back(t, static_cast<double>(correct) / static_cast<double>(scores.size()));
  }
  return curve;
}

MetricReport compute_metric_report(const DetectionScores& scores) {
  MetricReport r;
  r.auroc = auroc(scores);
  r.aupr = aupr(scores);
  r.fpr95 = fpr_at_tpr(scores, 0.95);
  r.fpr90 = fpr_at_tpr(scores, 0.90);
  r.ind_acc = ind_accuracy(scores);
  return r;
}

void write_metric_report(const std::string& path, const MetricReport& report,
                         const std::string& config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("metrics: cannot write " + path);
  out.precision(10);
  out << "auroc\t" << report.auroc << "\n"
      << "aupr\t" << report.aupr << "\n"
      << "fpr95\t" << report.fpr95 << "\n"
      << "fpr90\t" << report.fpr90 << "\n"
      << "ind_acc\t" << report.ind_acc << "\n"
      << "config_hash\t" << config_hash << "\n";

  nlohmann::json j{{"auroc", report.auroc},   {"aupr", report.aupr},
                   {"fpr95", report.fpr95},   {"fpr90", report.fpr90},
                   {"ind_acc", report.ind_acc}, {"config_hash", config_hash}};
  std::ofstream jout(path + ".json", std::ios::binary);
  if (!jout) throw std::runtime_error("metrics: cannot write " + path + ".json");
  jout << j.dump(2) << "\n";
}

void save_detection_scores(const std::string& path, const DetectionScores& scores,
                           const std::string& config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("scores: cannot write " + path);
  out.precision(17);
  if (!config_hash.empty()) out << "# config " << config_hash << "\n";
  for (const auto& r : scores)
    out << r.score << '\t' << (r.is_ood ? 1 : 0) << '\t' << r.pred_label << '\t'
        << r.true_label << '\n';
}

DetectionScores load_detection_scores(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("scores: cannot read " + path);
  DetectionScores scores;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    DetectionRecord r;
    int ood_flag = 0;
    if (std::sscanf(line.c_str(), "%lf\t%d\t%d\t%d", &r.score, &ood_flag, &r.pred_label,
                    &r.true_label) != 4)
      throw std::runtime_error("scores: " + path + ":" + std::to_string(line_no) +
                               ": malformed record");
    r.is_ood = ood_flag != 0;
    scores.push_back(r);
  }
  if (scores.empty()) throw std::runtime_error("scores: " + path + " is empty");
  return scores;
}

}  // namespace oodgen
