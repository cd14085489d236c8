#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "oodgen/config.hpp"
#include "oodgen/pipeline.hpp"
#include "oodgen/plot.hpp"

namespace {

void console(const std::string& msg) { std::cout << msg << std::endl; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial pseudo-OOD utterance generation and threshold-based OOD detection"};
  app.require_subcommand(1);

  std::string config_path, ood_path, out_path, scores_path, report_path, kind = "histogram";
  std::string out_dir_override;
  std::uint64_t seed_override = 0;
  bool have_seed_override = false;
  int count = 0;

  const auto add_config_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config JSON file")->required();
    cmd->add_option("--out-dir", out_dir_override, "override out_dir from the config");
    cmd->add_option("--seed", seed_override, "override the config seed")
        ->each([&](const std::string&) { have_seed_override = true; });
  };

  auto* train = app.add_subcommand("train", "run the full training procedure");
  add_config_options(train);

  auto* generate = app.add_subcommand("generate", "generate filtered pseudo-OOD utterances");
  add_config_options(generate);
  generate->add_option("--count", count, "target count (default: IND train size)");
  generate->add_option("--out", out_path, "output TSV (default: <out_dir>/generated_ood.tsv)");

  auto* evaluate = app.add_subcommand("evaluate", "train the detector and report OOD metrics");
  add_config_options(evaluate);
  evaluate->add_option("--ood", ood_path, "generated OOD TSV (omit only when lambda == 0)");
  evaluate->add_option("--report", report_path, "report path (default: <out_dir>/report.txt)");
  evaluate->add_option("--scores", scores_path, "scores path (default: <out_dir>/scores.tsv)");

  auto* plot = app.add_subcommand("plot", "render a figure from a scores file");
  plot->add_option("--scores", scores_path, "detection scores TSV")->required();
  plot->add_option("--kind", kind, "histogram or threshold_curve")
      ->check(CLI::IsMember({"histogram", "threshold_curve"}));
  plot->add_option("--out", out_path, "output SVG")->required();

  CLI11_PARSE(app, argc, argv);

  const auto load_config = [&] {
    auto cfg = oodgen::TrainConfig::from_json_file(config_path);
    if (!out_dir_override.empty()) cfg.out_dir = out_dir_override;
    if (have_seed_override) cfg.seed = seed_override;
    return cfg;
  };

  try {
    if (train->parsed()) {
      oodgen::run_train(load_config(), console);
    } else if (generate->parsed()) {
      const auto cfg = load_config();
      if (out_path.empty())
        out_path = (std::filesystem::path(cfg.out_dir) / "generated_ood.tsv").string();
      oodgen::run_generate(cfg, count, out_path, console);
    } else if (evaluate->parsed()) {
      const auto cfg = load_config();
      if (report_path.empty())
        report_path = (std::filesystem::path(cfg.out_dir) / "report.txt").string();
      if (scores_path.empty())
        scores_path = (std::filesystem::path(cfg.out_dir) / "scores.tsv").string();
      oodgen::run_evaluate(cfg, ood_path, report_path, scores_path, console);
    } else if (plot->parsed()) {
      const auto scores = oodgen::load_detection_scores(scores_path);
      if (kind == "histogram") {
        oodgen::plot_score_histogram(out_path, scores, "");
      } else {
        oodgen::plot_threshold_curve(out_path, scores, "");
      }
      std::cout << "plot: wrote " << out_path << std::endl;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
