// wsqaoa command-line harness.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wsqaoa/experiment.hpp"
#include "wsqaoa/instance_lab.hpp"
#include "wsqaoa/io.hpp"
#include "wsqaoa/verify.hpp"

namespace fs = std::filesystem;
using namespace wsqaoa;

namespace {

constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int generate_ensemble_cmd(std::size_t count, std::uint64_t seed, const std::string& out,
                          const std::string& config, int threads, bool annotate) {
  GeneratorOptions opts;
  if (!config.empty()) {
    if (!fs::exists(config)) throw UsageError("config file not found: " + config);
    const Json j = read_json(config);
    opts.n_assets = j.value("n_assets", opts.n_assets);
    opts.budget = j.value("budget", opts.n_assets / 2);
    opts.q = j.value("q", opts.q);
    opts.t_samples = j.value("t_samples", opts.t_samples);
    if (j.contains("penalty")) opts.penalty = j["penalty"].get<double>();
  }
  InstanceEnsemble ens = generate_ensemble(count, seed, opts);
  if (annotate) annotate_ensemble(ens, threads);
  save_ensemble(out, ens);
  std::printf("wrote %zu instances to %s\n", ens.size(), out.c_str());
  return 0;
}

int classify_cmd(const std::string& dir, std::size_t k, std::string out, int threads) {
  if (!fs::exists(fs::path(dir) / "manifest.json")) throw UsageError("no manifest.json in " + dir);
  InstanceEnsemble ens = load_ensemble(dir);
  if (!ens.annotated()) {
    annotate_ensemble(ens, threads);
    save_ensemble(dir, ens);
  }
  if (out.empty()) out = dir;
  const auto rows = ensemble_scatter(ens, k);
  write_text(fs::path(out) / "scatter_fig2.csv", scatter_csv(rows));

  Json subsets;
  for (DeviationMeasure m : {DeviationMeasure::epsilon, DeviationMeasure::sigma}) {
    const HotColdSplit split = classify_hot_cold(ens, m, k);
    const std::string prefix = m == DeviationMeasure::epsilon ? "eps" : "sigma";
    Json hot = Json::array(), cold = Json::array();
    for (auto i : split.hot) hot.push_back(ens.seeds[i]);
    for (auto i : split.cold) cold.push_back(ens.seeds[i]);
    subsets[prefix + "-hot"] = hot;
    subsets[prefix + "-cold"] = cold;
    const auto& worst_hot = *ens.annotations[split.hot.back()];
    const auto& best_cold = *ens.annotations[split.cold.back()];
    const double hot_max = m == DeviationMeasure::epsilon ? worst_hot.epsilon : worst_hot.sigma;
    const double cold_min = m == DeviationMeasure::epsilon ? best_cold.epsilon : best_cold.sigma;
    std::printf("%s: hot max %.4f, cold min %.4f\n", prefix.c_str(), hot_max, cold_min);
  }
  write_json(fs::path(out) / "subsets.json", subsets);
  std::printf("wrote %s\n", (fs::path(out) / "scatter_fig2.csv").c_str());
  return 0;
}

int export_all(const ExperimentRecord& rec, const fs::path& out, const std::string& figure, bool exact) {
  std::vector<Figure> figures;
  if (figure == "all")
    figures = {Figure::fig1, Figure::scatter_fig2, Figure::fig3, Figure::fig4, Figure::fig5};
  else
    figures = {parse_figure(figure)};
  for (Figure f : figures) {
    const ExportReport rep = export_tables(rec, f, out, exact ? MetricSource::exact : MetricSource::shots);
    for (const auto& p : rep.written) std::printf("wrote %s\n", p.c_str());
    for (const auto& m : rep.missing) std::fprintf(stderr, "%s: missing %s\n", figure_name(f).c_str(), m.c_str());
  }
  return 0;
}

int run_cmd(const std::string& config, const std::string& out, std::optional<int> threads,
            std::optional<std::uint64_t> seed) {
  if (!fs::exists(config)) throw UsageError("config file not found: " + config);
  ExperimentConfig cfg = load_config(config);
  if (!out.empty()) cfg.output_dir = out;
  if (cfg.output_dir.empty()) cfg.output_dir = "wsqaoa-out";
  if (threads) cfg.threads = *threads;
  if (seed) cfg.optimizer.seed = *seed;
  const ExperimentRecord rec = run_experiment(cfg);
  export_all(rec, fs::path(cfg.output_dir) / "tables", "all", false);

  std::size_t failed = 0;
  for (const auto& c : rec.cells) failed += c.ok ? 0 : 1;
  for (const auto& a : rec.aggregates)
    std::printf("%-12s %-16s p=%d  r=%.4f +- %.4f  P=%.4f +- %.4f\n", a.set.c_str(), a.variant.c_str(), a.p,
                a.r_mean, a.r_std, a.P_mean, a.P_std);
  if (failed) {
    std::fprintf(stderr, "%zu cells failed; see %s\n", failed,
                 (fs::path(cfg.output_dir) / "record.json").c_str());
    return 1;
  }
  return 0;
}

int verify_cmd(const std::string& fixture, std::uint64_t seed) {
  if (!fs::exists(fixture)) throw UsageError("fixture not found: " + fixture);
  const auto checks = verify_instance(load_instance(fixture), seed);
  bool all = true;
  for (const auto& c : checks) {
    std::printf("%s %-26s %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    all = all && c.passed;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Standard, warm-start and preprocessed QAOA on portfolio QUBOs"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::size_t count = 1000;
  std::uint64_t seed = 1;
  std::string out, config, dir, figure = "all", fixture = "fixtures/appendix_dax10.json";
  int threads = 1;
  std::size_t k = 20;
  bool no_annotate = false, exact = false;

  auto* gen = app.add_subcommand("generate-ensemble", "Generate (and annotate) a random instance ensemble");
  gen->add_option("--count", count, "Number of instances")->capture_default_str();
  gen->add_option("--seed", seed, "Base seed")->capture_default_str();
  gen->add_option("--out", out, "Ensemble directory")->required();
  gen->add_option("--config", config, "Generator options (JSON)");
  gen->add_option("--threads", threads, "Worker threads")->capture_default_str();
  gen->add_flag("--no-annotate", no_annotate, "Skip relaxation and brute force");

  auto* cls = app.add_subcommand("classify", "Annotate an ensemble and pick hot/cold subsets");
  cls->add_option("--ensemble", dir, "Ensemble directory")->required();
  cls->add_option("--k", k, "Subset size")->capture_default_str();
  cls->add_option("--out", out, "Output directory (defaults to the ensemble)");
  cls->add_option("--threads", threads, "Worker threads")->capture_default_str();

  std::optional<int> run_threads;
  std::optional<std::uint64_t> run_seed;
  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  run->add_option("--config", config, "Experiment config (JSON)")->required();
  run->add_option("--out", out, "Output directory (overrides WSQAOA_OUT and the config)");
  run->add_option("--threads", run_threads, "Worker threads");
  run->add_option("--seed", run_seed, "Optimizer seed");

  auto* exp = app.add_subcommand("export", "Write figure tables from a record");
  exp->add_option("--record", config, "record.json")->required();
  exp->add_option("--figure", figure, "fig1, scatter_fig2, fig3, fig4, fig5 or all")->capture_default_str();
  exp->add_option("--out", out, "Output directory")->required();
  exp->add_flag("--exact", exact, "Use exact-distribution metrics instead of shots");

  auto* ver = app.add_subcommand("verify", "Run the invariant checks on an instance file");
  ver->add_option("--fixture", fixture, "Instance file")->capture_default_str();
  ver->add_option("--seed", seed, "Seed for random probes")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*gen) return generate_ensemble_cmd(count, seed, out, config, threads, !no_annotate);
    if (*cls) return classify_cmd(dir, k, out, threads);
    if (*run) return run_cmd(config, out, run_threads, run_seed);
    if (*exp) {
      if (!fs::exists(config)) throw UsageError("record not found: " + config);
      return export_all(load_record(config), out, figure, exact);
    }
    if (*ver) return verify_cmd(fixture, seed);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
