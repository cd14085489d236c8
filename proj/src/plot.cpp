#include "oodgen/plot.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "oodgen/detector.hpp"
#include "oodgen/metrics.hpp"

namespace oodgen {

namespace {

// Fixed canvas so output bytes are stable across runs.
constexpr double kWidth = 640, kHeight = 440;
constexpr double kLeft = 60, kRight = 610, kTop = 30, kBottom = 390;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

double x_at(double frac) { return kLeft + frac * (kRight - kLeft); }
double y_at(double frac) { return kBottom - frac * (kBottom - kTop); }

void open_svg(std::ofstream& out, const std::string& path, const std::string& title,
              const std::string& config_hash) {
  out.open(path, std::ios::binary);
  if (!out) throw std::runtime_error("plot: cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  if (!config_hash.empty()) out << "<!-- config " << config_hash << " -->\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << (kWidth / 2) << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"15\""
      << " text-anchor=\"middle\">" << title << "</text>\n";
}

void draw_axes(std::ofstream& out, const std::string& x_label, const std::string& y_label,
               double y_max) {
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight << "\" y2=\""
      << kBottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 10; i += 2) {
    const double fx = i / 10.0;
    out << "<text x=\"" << num(x_at(fx)) << "\" y=\"" << (kBottom + 18)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << num(fx)
        << "</text>\n";
    out << "<text x=\"" << (kLeft - 8) << "\" y=\"" << num(y_at(fx) + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
        << num(fx * y_max) << "</text>\n";
  }
  out << "<text x=\"" << ((kLeft + kRight) / 2) << "\" y=\"" << (kBottom + 38)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" << x_label
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << ((kTop + kBottom) / 2)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\""
      << " transform=\"rotate(-90 16 " << ((kTop + kBottom) / 2) << ")\">" << y_label
      << "</text>\n";
}

}  // namespace

void plot_score_histogram(const std::string& path, const DetectionScores& scores,
                          const std::string& config_hash) {
  if (scores.empty()) throw std::invalid_argument("plot: empty score set");
  constexpr int kBins = 20;
  std::array<int, kBins> ind{}, ood{};
  for (const auto& r : scores) {
    int bin = static_cast<int>(r.score * kBins);
    bin = std::clamp(bin, 0, kBins - 1);
    (r.is_ood ? ood : ind)[static_cast<std::size_t>(bin)]++;
  }
  int max_count = 1;
  for (int i = 0; i < kBins; ++i) max_count = std::max({max_count, ind[i], ood[i]});

  std::ofstream out;
  open_svg(out, path, "Detection score distribution (IND vs OOD)", config_hash);
  draw_axes(out, "max intent probability", "count", max_count);
  const double bar_w = (kRight - kLeft) / kBins;
  for (int i = 0; i < kBins; ++i) {
    const double x = kLeft + i * bar_w;
    const double h_ind = (kBottom - kTop) * ind[i] / max_count;
    const double h_ood = (kBottom - kTop) * ood[i] / max_count;
    if (ind[i] > 0)
      out << "<rect x=\"" << num(x) << "\" y=\"" << num(kBottom - h_ind) << "\" width=\""
          << num(bar_w) << "\" height=\"" << num(h_ind)
          << "\" fill=\"#4878cf\" fill-opacity=\"0.55\"/>\n";
    if (ood[i] > 0)
      out << "<rect x=\"" << num(x) << "\" y=\"" << num(kBottom - h_ood) << "\" width=\""
          << num(bar_w) << "\" height=\"" << num(h_ood)
          << "\" fill=\"#d65f5f\" fill-opacity=\"0.55\"/>\n";
  }
  out << "<rect x=\"480\" y=\"40\" width=\"12\" height=\"12\" fill=\"#4878cf\""
      << " fill-opacity=\"0.55\"/><text x=\"498\" y=\"51\" font-family=\"sans-serif\""
      << " font-size=\"12\">IND</text>\n";
  out << "<rect x=\"480\" y=\"60\" width=\"12\" height=\"12\" fill=\"#d65f5f\""
      << " fill-opacity=\"0.55\"/><text x=\"498\" y=\"71\" font-family=\"sans-serif\""
      << " font-size=\"12\">OOD</text>\n";
  out << "</svg>\n";
}

void plot_threshold_curve(const std::string& path, const DetectionScores& scores,
                          const std::string& config_hash) {
  if (scores.empty()) throw std::invalid_argument("plot: empty score set");
  std::vector<double> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(i / 200.0);
  const auto curve = joint_accuracy_curve(scores, grid);
  const ThresholdChoice best = select_threshold(scores);

  std::ofstream out;
  open_svg(out, path, "Joint accuracy across thresholds", config_hash);
  draw_axes(out, "threshold", "joint accuracy", 1.0);
  out << "<polyline fill=\"none\" stroke=\"#4878cf\" stroke-width=\"1.5\" points=\"";
  for (const auto& [t, ja] : curve) out << num(x_at(t)) << "," << num(y_at(ja)) << " ";
  out << "\"/>\n";
  out << "<circle cx=\"" << num(x_at(best.threshold)) << "\" cy=\""
      << num(y_at(best.joint_accuracy)) << "\" r=\"4\" fill=\"#d65f5f\"/>\n";
  out << "<text x=\"" << num(x_at(best.threshold) + 8) << "\" y=\""
      << num(y_at(best.joint_accuracy) - 8) << "\" font-family=\"sans-serif\""
      << " font-size=\"12\">t=" << num(best.threshold) << ", acc=" << num(best.joint_accuracy)
      << "</text>\n";
  out << "</svg>\n";
}

}  // namespace oodgen
