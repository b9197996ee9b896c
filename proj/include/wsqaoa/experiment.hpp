#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wsqaoa/instance_lab.hpp"
#include "wsqaoa/io.hpp"
#include "wsqaoa/preprocessing.hpp"
#include "wsqaoa/qaoa.hpp"

namespace wsqaoa {

/// standard | warmstart | preprocessed standard QAOA with rounding bounds.
struct Variant {
  enum class Kind { standard, warmstart, preprocessed };
  Kind kind = Kind::standard;
  RoundingBounds bounds;

  /// "standard", "warmstart" or "pre(d0,d1)", e.g. "pre(0.1,0.25)".
  std::string name() const;
  static Variant parse(const std::string& text);
  static Variant preprocessed(double delta0, double delta1);
};

/// Where one labelled instance set comes from.
struct InstanceSource {
  enum class Kind { generate, fixture, ensemble };
  Kind kind = Kind::generate;
  std::string label;  // defaults: "random", the fixture stem, "eps-hot", ...

  // generate
  std::size_t count = 20;
  std::uint64_t seed = 1;
  GeneratorOptions generator;

  // fixture file or ensemble directory
  std::string path;
  std::uint64_t fixture_seed = 0;  // key of the fixture instance in the record

  // ensemble: "all", "hot" or "cold"
  std::string subset = "all";
  DeviationMeasure measure = DeviationMeasure::epsilon;
  std::size_t k = 20;

  std::string resolved_label() const;
};

struct ExperimentInstance {
  std::string set;
  std::uint64_t seed = 0;
  PortfolioInstance instance;
};

struct ExperimentConfig {
  std::vector<InstanceSource> sets;
  std::vector<Variant> variants;
  std::vector<int> depths{0, 1, 2, 3, 4, 5, 6, 7};
  std::uint64_t shots = 1000;
  std::uint64_t shot_seed = 7;
  OptimizerConfig optimizer;
  int threads = 1;
  std::string output_dir;  // empty: nothing is written
  bool resume = true;
  bool verbose = false;

  /// Depths ascending and unique, shots >= 1, at least one set and variant.
  void validate() const;
};

ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& config);
/// Reads a config file; WSQAOA_OUT, when set, replaces the output directory.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Generates, loads and classifies the configured sets, in config order.
std::vector<ExperimentInstance> resolve_instances(const ExperimentConfig& config);

struct OptimizerMeta {
  int evaluations = 0;
  int restarts_used = 0;
  std::vector<double> gammas;
  std::vector<double> betas;
  double objective = 0.0;  // best <F> seen by the optimizer
};

/// One (instance, variant, depth) cell. r and P come from `shots`
/// measurements, the *_exact fields from the exact output distribution.
/// Both are scored on the original N-variable problem.
struct CellResult {
  std::uint64_t seed = 0;
  std::string variant;
  int p = 0;
  bool ok = true;
  std::string error;
  double r = 0.0;
  double P = 0.0;
  double r_exact = 0.0;
  double P_exact = 0.0;
  double expectation = 0.0;  // exact <F> of the penalized QUBO
  int qubits = 0;            // simulated register size (free variables when preprocessed)
  std::optional<OptimizerMeta> optimizer;  // absent at p = 0 and for a fully fixed problem
  double wall_seconds = 0.0;
};

struct InstanceSummary {
  std::uint64_t seed = 0;
  std::vector<std::string> sets;
  bool ok = true;
  std::string error;
  double epsilon = 0.0;
  double sigma = 0.0;
  bool relaxation_converged = false;
  std::vector<double> x_star;
  double fc_min = 0.0;
  double fc_max = 0.0;
  BasisIndex argmin = 0;
  std::size_t optimal_ties = 1;
  double baseline_r = 0.0;
  double baseline_P = 0.0;
};

/// Mean and sample standard deviation over the instances of a set.
struct AggregateRow {
  std::string set;
  std::string variant;
  int p = 0;
  std::size_t count = 0;
  std::size_t failed = 0;
  double r_mean = 0.0, r_std = 0.0;
  double P_mean = 0.0, P_std = 0.0;
  double r_exact_mean = 0.0, r_exact_std = 0.0;
  double P_exact_mean = 0.0, P_exact_std = 0.0;
};

struct ExperimentRecord {
  Json config;
  std::vector<std::string> sets;      // config order
  std::vector<std::string> variants;  // config order
  std::vector<int> depths;
  std::vector<InstanceSummary> instances;  // sorted by seed
  std::vector<CellResult> cells;           // sorted by (seed, variant, p)
  std::vector<AggregateRow> aggregates;    // (set, variant, p) in config order

  const CellResult* find(std::uint64_t seed, const std::string& variant, int p) const;
  const AggregateRow* aggregate(const std::string& set, const std::string& variant, int p) const;
  std::vector<std::uint64_t> seeds_in(const std::string& set) const;
};

std::vector<AggregateRow> compute_aggregates(const ExperimentRecord& record);

ExperimentRecord run_experiment(const ExperimentConfig& config);
ExperimentRecord run_experiment(const ExperimentConfig& config,
                                const std::vector<ExperimentInstance>& instances);

Json record_to_json(const ExperimentRecord& record);
/// Throws when the stored aggregates differ from those recomputed from the cells.
ExperimentRecord record_from_json(const Json& j);
void save_record(const std::filesystem::path& path, const ExperimentRecord& record);
ExperimentRecord load_record(const std::filesystem::path& path);

enum class Figure { fig1, fig3, fig4, fig5, scatter_fig2 };
enum class MetricSource { shots, exact };

Figure parse_figure(const std::string& name);
std::string figure_name(Figure figure);

struct ExportReport {
  std::vector<std::filesystem::path> written;
  std::vector<std::string> missing;
};

/// One CSV per panel, columns p,variant,mean,stddev (seed,epsilon,sigma,subset
/// for the scatter). Files are written even when cells are missing; the gaps
/// are listed in the report.
ExportReport export_tables(const ExperimentRecord& record, Figure figure,
                           const std::filesystem::path& out_dir,
                           MetricSource source = MetricSource::shots);

struct ScatterRow {
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  double sigma = 0.0;
  std::string label;
};

std::string scatter_csv(const std::vector<ScatterRow>& rows);

/// Scatter rows for a classified ensemble: every instance, labelled with the
/// hot/cold subsets it falls in for both measures ("" when none).
std::vector<ScatterRow> ensemble_scatter(const InstanceEnsemble& ensemble, std::size_t k);

}  // namespace wsqaoa
