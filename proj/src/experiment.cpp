#include "wsqaoa/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "wsqaoa/metrics.hpp"
#include "wsqaoa/rng.hpp"

namespace wsqaoa {

namespace fs = std::filesystem;

namespace {

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::size_t>(count, 1))));
  if (n == 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (int w = 0; w < n; ++w) pool.emplace_back(worker);
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw InputError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw InputError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw InputError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::string measure_prefix(DeviationMeasure m) { return m == DeviationMeasure::epsilon ? "eps" : "sigma"; }

DeviationMeasure parse_measure(const std::string& s) {
  if (s == "epsilon" || s == "eps") return DeviationMeasure::epsilon;
  if (s == "sigma" || s == "rmse") return DeviationMeasure::sigma;
  throw InputError("unknown deviation measure '" + s + "'");
}

bool same_instance(const PortfolioInstance& a, const PortfolioInstance& b) {
  return a.n_assets() == b.n_assets() && a.mu == b.mu && a.sigma == b.sigma && a.q == b.q &&
         a.budget == b.budget && a.penalty == b.penalty;
}

// ---- per-instance preparation -------------------------------------------

struct Context {
  std::uint64_t seed = 0;
  PortfolioInstance instance;
  QuboProblem qubo;
  FeasibleSpectrum spectrum;
  std::vector<double> cost;
  std::vector<double> x_star;
  InstanceSummary summary;
};

void prepare(Context& ctx) {
  InstanceSummary& s = ctx.summary;
  try {
    ctx.qubo = to_qubo(ctx.instance);
    ctx.spectrum = brute_force_spectrum(ctx.instance);
    ctx.cost = cost_table(ctx.qubo);
    const InstanceAnnotation ann = annotate_instance(ctx.instance);
    ctx.x_star.assign(ann.x_star.data(), ann.x_star.data() + ann.x_star.size());
    // guard against round-off just outside the box
    for (double& x : ctx.x_star) x = std::clamp(x, 0.0, 1.0);
    s.epsilon = ann.epsilon;
    s.sigma = ann.sigma;
    s.relaxation_converged = ann.relaxation_converged;
    s.x_star = ctx.x_star;
    s.fc_min = ctx.spectrum.fc_min;
    s.fc_max = ctx.spectrum.fc_max;
    s.argmin = ctx.spectrum.argmin;
    s.optimal_ties = ctx.spectrum.optimal_set.size();
    const BaselineResult base = classical_baseline(ctx.instance, ctx.x_star, ctx.spectrum);
    s.baseline_r = base.r;
    s.baseline_P = base.P;
  } catch (const std::exception& e) {
    s.ok = false;
    s.error = e.what();
  }
}

// ---- cells --------------------------------------------------------------

using CellKey = std::tuple<std::uint64_t, std::string, int>;

void score(CellResult& cell, const Context& ctx, const std::vector<double>& probs,
           const ShotHistogram& hist) {
  cell.r_exact = mean_approx_ratio(probs, ctx.instance, ctx.spectrum);
  cell.P_exact = ground_state_probability(probs, ctx.spectrum);
  cell.r = mean_approx_ratio(hist, ctx.instance, ctx.spectrum);
  cell.P = ground_state_probability(hist, ctx.spectrum);
  double e = 0.0;
  for (std::size_t z = 0; z < probs.size(); ++z) e += probs[z] * ctx.cost[z];
  cell.expectation = e;
}

OptimizerMeta meta_of(const OptimizationResult& res) {
  return {res.evaluations, res.restarts_used, res.best_gammas, res.best_betas, res.best_expectation};
}

std::vector<CellResult> run_chain(const Context& ctx, const Variant& variant,
                                  const ExperimentConfig& cfg,
                                  const std::map<CellKey, CellResult>& resumed) {
  const std::string vname = variant.name();
  const std::uint64_t job_seed = derive_seed(derive_seed(cfg.optimizer.seed, ctx.seed), fnv1a(vname));
  const std::uint64_t shot_base = derive_seed(derive_seed(cfg.shot_seed, ctx.seed), fnv1a(vname));
  std::vector<CellResult> out;

  std::optional<ReducedProblem> reduced;
  std::string setup_error;
  if (!ctx.summary.ok) {
    setup_error = "instance preparation failed: " + ctx.summary.error;
  } else if (variant.kind == Variant::Kind::preprocessed) {
    try {
      const RoundingResult rr = round_relaxed(ctx.x_star, variant.bounds);
      reduced = eliminate(ctx.qubo, rr.fixed);
    } catch (const std::exception& e) {
      setup_error = e.what();
    }
  }

  std::optional<ParameterSeed> chain;
  int prev_p = -2;
  for (int p : cfg.depths) {
    CellResult cell;
    cell.seed = ctx.seed;
    cell.variant = vname;
    cell.p = p;
    if (prev_p != p - 1) chain.reset();
    prev_p = p;

    if (auto it = resumed.find({ctx.seed, vname, p}); it != resumed.end() && it->second.ok) {
      cell = it->second;
      if (cell.optimizer)
        chain = ParameterSeed{cell.optimizer->gammas, cell.optimizer->betas};
      else
        chain = ParameterSeed{};
      out.push_back(cell);
      continue;
    }

    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (!setup_error.empty()) throw std::runtime_error(setup_error);
      OptimizerConfig oc = cfg.optimizer;
      oc.seed = derive_seed(job_seed, static_cast<std::uint64_t>(p));
      const std::uint64_t shot_seed = derive_seed(shot_base, static_cast<std::uint64_t>(p));
      std::optional<ParameterSeed> start;
      if (p > 0 && chain) start = zero_padded(*chain);

      if (reduced && reduced->n_free() == 0) {
        // nothing left to optimize: the rounded string itself
        cell.qubits = 0;
        std::vector<double> probs(ctx.cost.size(), 0.0);
        const BasisIndex z = lift(*reduced, BasisIndex{0});
        probs[z] = 1.0;
        score(cell, ctx, probs, ShotHistogram{{z, cfg.shots}});
        chain = ParameterSeed{};
      } else {
        AnsatzSpec spec;
        if (variant.kind == Variant::Kind::standard)
          spec = AnsatzSpec::standard(ctx.qubo, p);
        else if (variant.kind == Variant::Kind::warmstart)
          spec = AnsatzSpec::warmstart(ctx.qubo, warmstart_angles(ctx.x_star), p);
        else
          spec = AnsatzSpec::standard(reduced->qubo, p);
        cell.qubits = spec.n_qubits();

        Statevector state;
        if (p == 0) {
          state = initial_state(spec);
          chain = ParameterSeed{};
        } else {
          OptimizationResult res = optimize(spec, oc, start);
          cell.optimizer = meta_of(res);
          chain = ParameterSeed{res.best_gammas, res.best_betas};
          state = std::move(res.final_state);
        }
        const auto probs = measure_probabilities(state);
        const auto hist = sample_shots(probs, cfg.shots, shot_seed);
        if (reduced)
          score(cell, ctx, lift_distribution(*reduced, probs), lift_histogram(*reduced, hist));
        else
          score(cell, ctx, probs, hist);
      }
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
      cell.optimizer.reset();
      chain.reset();
      std::fprintf(stderr, "cell seed=%llu variant=%s p=%d failed: %s\n",
                   static_cast<unsigned long long>(ctx.seed), vname.c_str(), p, e.what());
    }
    cell.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(cell));
  }
  return out;
}

// ---- JSON ---------------------------------------------------------------

Json meta_to_json(const OptimizerMeta& m) {
  return Json{{"evaluations", m.evaluations},
              {"restarts_used", m.restarts_used},
              {"gammas", m.gammas},
              {"betas", m.betas},
              {"objective", m.objective}};
}

OptimizerMeta meta_from_json(const Json& j) {
  OptimizerMeta m;
  m.evaluations = j.at("evaluations").get<int>();
  m.restarts_used = j.at("restarts_used").get<int>();
  m.gammas = j.at("gammas").get<std::vector<double>>();
  m.betas = j.at("betas").get<std::vector<double>>();
  m.objective = j.at("objective").get<double>();
  return m;
}

Json cell_to_json(const CellResult& c) {
  Json j{{"seed", c.seed},
         {"variant", c.variant},
         {"p", c.p},
         {"ok", c.ok},
         {"r", c.r},
         {"P", c.P},
         {"r_exact", c.r_exact},
         {"P_exact", c.P_exact},
         {"expectation", c.expectation},
         {"qubits", c.qubits},
         {"wall_seconds", c.wall_seconds}};
  if (!c.ok) j["error"] = c.error;
  if (c.optimizer) j["optimizer"] = meta_to_json(*c.optimizer);
  return j;
}

CellResult cell_from_json(const Json& j) {
  CellResult c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.variant = j.at("variant").get<std::string>();
  c.p = j.at("p").get<int>();
  c.ok = j.at("ok").get<bool>();
  c.error = j.value("error", "");
  c.r = j.at("r").get<double>();
  c.P = j.at("P").get<double>();
  c.r_exact = j.at("r_exact").get<double>();
  c.P_exact = j.at("P_exact").get<double>();
  c.expectation = j.at("expectation").get<double>();
  c.qubits = j.value("qubits", 0);
  c.wall_seconds = j.value("wall_seconds", 0.0);
  if (j.contains("optimizer")) c.optimizer = meta_from_json(j["optimizer"]);
  return c;
}

Json summary_to_json(const InstanceSummary& s) {
  Json j{{"seed", s.seed},
         {"sets", s.sets},
         {"ok", s.ok},
         {"epsilon", s.epsilon},
         {"sigma", s.sigma},
         {"relaxation_converged", s.relaxation_converged},
         {"x_star", s.x_star},
         {"fc_min", s.fc_min},
         {"fc_max", s.fc_max},
         {"argmin", s.argmin},
         {"optimal_ties", s.optimal_ties},
         {"baseline_r", s.baseline_r},
         {"baseline_P", s.baseline_P}};
  if (!s.ok) j["error"] = s.error;
  return j;
}

InstanceSummary summary_from_json(const Json& j) {
  InstanceSummary s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.sets = j.at("sets").get<std::vector<std::string>>();
  s.ok = j.at("ok").get<bool>();
  s.error = j.value("error", "");
  s.epsilon = j.at("epsilon").get<double>();
  s.sigma = j.at("sigma").get<double>();
  s.relaxation_converged = j.value("relaxation_converged", false);
  s.x_star = j.value("x_star", std::vector<double>{});
  s.fc_min = j.at("fc_min").get<double>();
  s.fc_max = j.at("fc_max").get<double>();
  s.argmin = j.at("argmin").get<BasisIndex>();
  s.optimal_ties = j.value("optimal_ties", std::size_t{1});
  s.baseline_r = j.at("baseline_r").get<double>();
  s.baseline_P = j.at("baseline_P").get<double>();
  return s;
}

Json aggregate_to_json(const AggregateRow& a) {
  return Json{{"set", a.set},
              {"variant", a.variant},
              {"p", a.p},
              {"count", a.count},
              {"failed", a.failed},
              {"r_mean", a.r_mean},
              {"r_std", a.r_std},
              {"P_mean", a.P_mean},
              {"P_std", a.P_std},
              {"r_exact_mean", a.r_exact_mean},
              {"r_exact_std", a.r_exact_std},
              {"P_exact_mean", a.P_exact_mean},
              {"P_exact_std", a.P_exact_std}};
}

Json resume_key(const ExperimentConfig& cfg) {
  Json j = config_to_json(cfg);
  j.erase("threads");
  j.erase("output");
  j.erase("resume");
  j.erase("verbose");
  return j;
}

std::map<CellKey, CellResult> load_resumable(const ExperimentConfig& cfg) {
  std::map<CellKey, CellResult> cells;
  if (cfg.output_dir.empty() || !cfg.resume) return cells;
  const fs::path dir(cfg.output_dir);
  if (!fs::exists(dir / "cells.jsonl") || !fs::exists(dir / "run_key.json")) return cells;
  if (read_json(dir / "run_key.json") != resume_key(cfg)) return cells;
  std::ifstream in(dir / "cells.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      CellResult c = cell_from_json(Json::parse(line));
      if (c.ok) cells[{c.seed, c.variant, c.p}] = std::move(c);
    } catch (const std::exception&) {
      // a torn final line from an interrupted run
    }
  }
  return cells;
}

// ---- CSV ----------------------------------------------------------------

constexpr const char* kPanelHeader = "p,variant,mean,stddev\n";

struct Panel {
  std::string file;
  std::vector<std::string> sets;
  std::vector<std::string> variants;
  bool r_metric = true;
};

}  // namespace

// ---- Variant / InstanceSource -------------------------------------------

std::string Variant::name() const {
  switch (kind) {
    case Kind::standard:
      return "standard";
    case Kind::warmstart:
      return "warmstart";
    case Kind::preprocessed:
      break;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "pre(%g,%g)", bounds.delta0, bounds.delta1);
  return buf;
}

Variant Variant::preprocessed(double delta0, double delta1) {
  Variant v;
  v.kind = Kind::preprocessed;
  v.bounds = {delta0, delta1};
  v.bounds.validate();
  return v;
}

Variant Variant::parse(const std::string& text) {
  if (text == "standard") return {};
  if (text == "warmstart" || text == "warm-start") return {Kind::warmstart, {}};
  for (const char* prefix : {"pre(", "preprocessed("}) {
    const std::string pre(prefix);
    if (text.rfind(pre, 0) == 0 && text.back() == ')') {
      double d0 = 0.0, d1 = 0.0;
      char tail = 0;
      const std::string inner = text.substr(pre.size(), text.size() - pre.size() - 1);
      if (std::sscanf(inner.c_str(), "%lf,%lf%c", &d0, &d1, &tail) == 2) return preprocessed(d0, d1);
    }
  }
  throw InputError("unknown variant '" + text + "'");
}

std::string InstanceSource::resolved_label() const {
  if (!label.empty()) return label;
  switch (kind) {
    case Kind::generate:
      return "random";
    case Kind::fixture:
      return fs::path(path).stem().string();
    case Kind::ensemble:
      break;
  }
  if (subset == "all") return "ensemble";
  return measure_prefix(measure) + "-" + subset;
}

// ---- config -------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (sets.empty()) throw InputError("config needs at least one instance set");
  if (variants.empty()) throw InputError("config needs at least one variant");
  if (depths.empty()) throw InputError("config needs at least one depth");
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (depths[i] < 0) throw InputError("depths must be nonnegative");
    if (i > 0 && depths[i] <= depths[i - 1]) throw InputError("depths must be ascending and unique");
  }
  if (shots < 1) throw InputError("shots must be at least 1");
  if (optimizer.restarts < 1) throw InputError("optimizer.restarts must be at least 1");
  if (optimizer.max_evals_per_layer < 1) throw InputError("optimizer.max_evals_per_layer must be positive");
  std::set<std::string> labels, names;
  for (const auto& s : sets) {
    if (!labels.insert(s.resolved_label()).second)
      throw InputError("duplicate set label '" + s.resolved_label() + "'");
    if (s.kind == InstanceSource::Kind::ensemble && s.subset != "all" && s.subset != "hot" &&
        s.subset != "cold")
      throw InputError("ensemble subset must be all, hot or cold");
    if (s.kind != InstanceSource::Kind::generate && s.path.empty())
      throw InputError("instance set '" + s.resolved_label() + "' needs a path");
  }
  for (const auto& v : variants) {
    if (v.kind == Variant::Kind::preprocessed) v.bounds.validate();
    if (!names.insert(v.name()).second) throw InputError("duplicate variant '" + v.name() + "'");
  }
}

ExperimentConfig config_from_json(const Json& j) {
  check_keys(j, {"sets", "variants", "depths", "shots", "shot_seed", "optimizer", "threads", "output",
                 "resume", "verbose"},
             "config");
  ExperimentConfig cfg;
  if (!j.contains("sets") || !j["sets"].is_array()) throw InputError("config needs a 'sets' array");
  for (const Json& s : j["sets"]) {
    check_keys(s, {"source", "label", "count", "seed", "n_assets", "budget", "q", "t_samples", "penalty",
                   "path", "subset", "measure", "k"},
               "instance set");
    InstanceSource src;
    const std::string kind = get_or<std::string>(s, "source", "generate");
    if (kind == "generate")
      src.kind = InstanceSource::Kind::generate;
    else if (kind == "fixture")
      src.kind = InstanceSource::Kind::fixture;
    else if (kind == "ensemble")
      src.kind = InstanceSource::Kind::ensemble;
    else
      throw InputError("unknown instance source '" + kind + "'");
    src.label = get_or<std::string>(s, "label", "");
    src.count = get_or<std::size_t>(s, "count", src.count);
    src.seed = get_or<std::uint64_t>(s, "seed", src.seed);
    src.fixture_seed = get_or<std::uint64_t>(s, "seed", 0);
    src.generator.n_assets = get_or<int>(s, "n_assets", src.generator.n_assets);
    src.generator.budget = get_or<int>(s, "budget", src.generator.n_assets / 2);
    src.generator.q = get_or<double>(s, "q", src.generator.q);
    src.generator.t_samples = get_or<int>(s, "t_samples", src.generator.t_samples);
    if (s.contains("penalty") && !s["penalty"].is_null()) src.generator.penalty = s["penalty"].get<double>();
    src.path = get_or<std::string>(s, "path", "");
    src.subset = get_or<std::string>(s, "subset", "all");
    src.measure = parse_measure(get_or<std::string>(s, "measure", "epsilon"));
    src.k = get_or<std::size_t>(s, "k", src.k);
    cfg.sets.push_back(src);
  }
  if (!j.contains("variants") || !j["variants"].is_array())
    throw InputError("config needs a 'variants' array");
  for (const Json& v : j["variants"]) {
    if (v.is_string()) {
      cfg.variants.push_back(Variant::parse(v.get<std::string>()));
    } else {
      check_keys(v, {"delta0", "delta1"}, "variant");
      cfg.variants.push_back(Variant::preprocessed(v.at("delta0").get<double>(), v.at("delta1").get<double>()));
    }
  }
  cfg.depths = get_or<std::vector<int>>(j, "depths", cfg.depths);
  cfg.shots = get_or<std::uint64_t>(j, "shots", cfg.shots);
  cfg.shot_seed = get_or<std::uint64_t>(j, "shot_seed", cfg.shot_seed);
  if (j.contains("optimizer")) {
    const Json& o = j["optimizer"];
    check_keys(o, {"restarts", "max_evals_per_layer", "simplex_tol", "initial_step", "gamma_range",
                   "beta_range", "seed", "expectation", "expectation_shots", "expectation_seed"},
               "optimizer");
    OptimizerConfig& oc = cfg.optimizer;
    oc.restarts = get_or<int>(o, "restarts", oc.restarts);
    oc.max_evals_per_layer = get_or<int>(o, "max_evals_per_layer", oc.max_evals_per_layer);
    oc.simplex_tol = get_or<double>(o, "simplex_tol", oc.simplex_tol);
    oc.initial_step = get_or<double>(o, "initial_step", oc.initial_step);
    oc.gamma_range = get_or<double>(o, "gamma_range", oc.gamma_range);
    oc.beta_range = get_or<double>(o, "beta_range", oc.beta_range);
    oc.seed = get_or<std::uint64_t>(o, "seed", oc.seed);
    const std::string mode = get_or<std::string>(o, "expectation", "exact");
    if (mode == "exact")
      oc.mode = ExpectationMode::exact();
    else if (mode == "shots")
      oc.mode = ExpectationMode::sampled(get_or<std::uint64_t>(o, "expectation_shots", 1000),
                                         get_or<std::uint64_t>(o, "expectation_seed", 0));
    else
      throw InputError("optimizer.expectation must be exact or shots");
  }
  cfg.threads = get_or<int>(j, "threads", cfg.threads);
  cfg.output_dir = get_or<std::string>(j, "output", "");
  cfg.resume = get_or<bool>(j, "resume", cfg.resume);
  cfg.verbose = get_or<bool>(j, "verbose", cfg.verbose);
  cfg.validate();
  return cfg;
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json sets = Json::array();
  for (const auto& s : cfg.sets) {
    Json j{{"label", s.resolved_label()}};
    switch (s.kind) {
      case InstanceSource::Kind::generate:
        j["source"] = "generate";
        j["count"] = s.count;
        j["seed"] = s.seed;
        j["n_assets"] = s.generator.n_assets;
        j["budget"] = s.generator.budget;
        j["q"] = s.generator.q;
        j["t_samples"] = s.generator.t_samples;
        if (s.generator.penalty) j["penalty"] = *s.generator.penalty;
        break;
      case InstanceSource::Kind::fixture:
        j["source"] = "fixture";
        j["path"] = s.path;
        j["seed"] = s.fixture_seed;
        break;
      case InstanceSource::Kind::ensemble:
        j["source"] = "ensemble";
        j["path"] = s.path;
        j["subset"] = s.subset;
        j["measure"] = s.measure == DeviationMeasure::epsilon ? "epsilon" : "sigma";
        j["k"] = s.k;
        break;
    }
    sets.push_back(j);
  }
  Json variants = Json::array();
  for (const auto& v : cfg.variants) variants.push_back(v.name());
  const OptimizerConfig& oc = cfg.optimizer;
  Json opt{{"restarts", oc.restarts},
           {"max_evals_per_layer", oc.max_evals_per_layer},
           {"simplex_tol", oc.simplex_tol},
           {"initial_step", oc.initial_step},
           {"gamma_range", oc.gamma_range},
           {"beta_range", oc.beta_range},
           {"seed", oc.seed},
           {"expectation", oc.mode.is_exact() ? "exact" : "shots"}};
  if (!oc.mode.is_exact()) {
    opt["expectation_shots"] = oc.mode.shots;
    opt["expectation_seed"] = oc.mode.seed;
  }
  return Json{{"sets", sets},         {"variants", variants},   {"depths", cfg.depths},
              {"shots", cfg.shots},   {"shot_seed", cfg.shot_seed}, {"optimizer", opt},
              {"threads", cfg.threads}, {"output", cfg.output_dir}, {"resume", cfg.resume},
              {"verbose", cfg.verbose}};
}

ExperimentConfig load_config(const fs::path& path) {
  ExperimentConfig cfg = config_from_json(read_json(path));
  // relative instance paths are taken from the config file's directory
  const fs::path base = path.parent_path();
  for (auto& s : cfg.sets)
    if (!s.path.empty() && fs::path(s.path).is_relative()) s.path = (base / s.path).lexically_normal().string();
  if (const char* env = std::getenv("WSQAOA_OUT"); env && *env) cfg.output_dir = env;
  return cfg;
}

std::vector<ExperimentInstance> resolve_instances(const ExperimentConfig& config) {
  config.validate();
  std::vector<ExperimentInstance> out;
  for (const auto& src : config.sets) {
    const std::string label = src.resolved_label();
    switch (src.kind) {
      case InstanceSource::Kind::generate: {
        const InstanceEnsemble ens = generate_ensemble(src.count, src.seed, src.generator);
        for (std::size_t i = 0; i < ens.size(); ++i) out.push_back({label, ens.seeds[i], ens.instances[i]});
        break;
      }
      case InstanceSource::Kind::fixture:
        out.push_back({label, src.fixture_seed, load_instance(src.path)});
        break;
      case InstanceSource::Kind::ensemble: {
        InstanceEnsemble ens = load_ensemble(src.path);
        std::vector<std::size_t> members;
        if (src.subset == "all") {
          members.resize(ens.size());
          std::iota(members.begin(), members.end(), std::size_t{0});
        } else {
          if (!ens.annotated()) annotate_ensemble(ens, config.threads);
          const HotColdSplit split = classify_hot_cold(ens, src.measure, src.k);
          members = src.subset == "hot" ? split.hot : split.cold;
        }
        for (std::size_t i : members) out.push_back({label, ens.seeds[i], ens.instances[i]});
        break;
      }
    }
  }
  return out;
}

// ---- record -------------------------------------------------------------

const CellResult* ExperimentRecord::find(std::uint64_t seed, const std::string& variant, int p) const {
  auto it = std::lower_bound(cells.begin(), cells.end(), std::make_tuple(seed, variant, p),
                             [](const CellResult& c, const CellKey& k) {
                               return std::tie(c.seed, c.variant, c.p) < k;
                             });
  if (it == cells.end() || it->seed != seed || it->variant != variant || it->p != p) return nullptr;
  return &*it;
}

const AggregateRow* ExperimentRecord::aggregate(const std::string& set, const std::string& variant,
                                                int p) const {
  for (const auto& a : aggregates)
    if (a.set == set && a.variant == variant && a.p == p) return &a;
  return nullptr;
}

std::vector<std::uint64_t> ExperimentRecord::seeds_in(const std::string& set) const {
  std::vector<std::uint64_t> seeds;
  for (const auto& s : instances)
    if (std::find(s.sets.begin(), s.sets.end(), set) != s.sets.end()) seeds.push_back(s.seed);
  return seeds;
}

std::vector<AggregateRow> compute_aggregates(const ExperimentRecord& record) {
  auto mean_std = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = sd = 0.0;
    if (v.empty()) return;
    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() < 2) return;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  };

  std::vector<AggregateRow> rows;
  for (const auto& set : record.sets) {
    const auto seeds = record.seeds_in(set);
    for (const auto& variant : record.variants) {
      for (int p : record.depths) {
        AggregateRow row;
        row.set = set;
        row.variant = variant;
        row.p = p;
        std::vector<double> r, P, re, Pe;
        for (auto seed : seeds) {
          const CellResult* c = record.find(seed, variant, p);
          if (!c || !c->ok) {
            ++row.failed;
            continue;
          }
          r.push_back(c->r);
          P.push_back(c->P);
          re.push_back(c->r_exact);
          Pe.push_back(c->P_exact);
        }
        row.count = r.size();
        mean_std(r, row.r_mean, row.r_std);
        mean_std(P, row.P_mean, row.P_std);
        mean_std(re, row.r_exact_mean, row.r_exact_std);
        mean_std(Pe, row.P_exact_mean, row.P_exact_std);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

ExperimentRecord run_experiment(const ExperimentConfig& config) {
  return run_experiment(config, resolve_instances(config));
}

ExperimentRecord run_experiment(const ExperimentConfig& config,
                                const std::vector<ExperimentInstance>& instances) {
  config.validate();

  // One context per distinct seed; an instance may sit in several sets.
  std::map<std::uint64_t, Context> by_seed;
  std::vector<std::string> set_order;
  for (const auto& s : config.sets) set_order.push_back(s.resolved_label());
  for (const auto& ei : instances) {
    if (std::find(set_order.begin(), set_order.end(), ei.set) == set_order.end())
      set_order.push_back(ei.set);
    auto [it, inserted] = by_seed.try_emplace(ei.seed);
    Context& ctx = it->second;
    if (inserted) {
      ctx.seed = ei.seed;
      ctx.instance = ei.instance;
      ctx.summary.seed = ei.seed;
    } else if (!same_instance(ctx.instance, ei.instance)) {
      throw InputError("two different instances share seed " + std::to_string(ei.seed));
    }
    if (std::find(ctx.summary.sets.begin(), ctx.summary.sets.end(), ei.set) == ctx.summary.sets.end())
      ctx.summary.sets.push_back(ei.set);
  }
  std::vector<Context*> contexts;
  for (auto& [seed, ctx] : by_seed) contexts.push_back(&ctx);

  parallel_for(contexts.size(), config.threads, [&](std::size_t i) { prepare(*contexts[i]); });

  const auto resumed = load_resumable(config);
  std::unique_ptr<std::ofstream> journal;
  if (!config.output_dir.empty()) {
    const fs::path dir(config.output_dir);
    fs::create_directories(dir);
    const bool keep = !resumed.empty();
    write_json(dir / "run_key.json", resume_key(config));
    journal = std::make_unique<std::ofstream>(dir / "cells.jsonl", keep ? std::ios::app : std::ios::trunc);
    if (keep && config.verbose)
      std::fprintf(stderr, "resuming with %zu finished cells\n", resumed.size());
  }
  std::mutex journal_mutex;

  const std::size_t n_jobs = contexts.size() * config.variants.size();
  std::vector<std::vector<CellResult>> job_cells(n_jobs);
  std::atomic<std::size_t> done{0};
  parallel_for(n_jobs, config.threads, [&](std::size_t job) {
    const Context& ctx = *contexts[job / config.variants.size()];
    const Variant& variant = config.variants[job % config.variants.size()];
    job_cells[job] = run_chain(ctx, variant, config, resumed);
    std::lock_guard lock(journal_mutex);
    if (journal) {
      for (const auto& c : job_cells[job])
        if (!resumed.contains({c.seed, c.variant, c.p})) *journal << cell_to_json(c).dump() << '\n';
      journal->flush();
    }
    const std::size_t finished = ++done;
    if (config.verbose)
      std::fprintf(stderr, "[%zu/%zu] seed=%llu %s\n", finished, n_jobs,
                   static_cast<unsigned long long>(ctx.seed), variant.name().c_str());
  });

  ExperimentRecord rec;
  rec.config = config_to_json(config);
  rec.sets = set_order;
  for (const auto& v : config.variants) rec.variants.push_back(v.name());
  rec.depths = config.depths;
  for (const Context* ctx : contexts) rec.instances.push_back(ctx->summary);
  for (auto& cells : job_cells)
    for (auto& c : cells) rec.cells.push_back(std::move(c));
  std::sort(rec.cells.begin(), rec.cells.end(), [](const CellResult& a, const CellResult& b) {
    return std::tie(a.seed, a.variant, a.p) < std::tie(b.seed, b.variant, b.p);
  });
  rec.aggregates = compute_aggregates(rec);

  if (!config.output_dir.empty()) save_record(fs::path(config.output_dir) / "record.json", rec);
  return rec;
}

Json record_to_json(const ExperimentRecord& record) {
  Json instances = Json::array(), cells = Json::array(), aggregates = Json::array();
  for (const auto& s : record.instances) instances.push_back(summary_to_json(s));
  for (const auto& c : record.cells) cells.push_back(cell_to_json(c));
  for (const auto& a : record.aggregates) aggregates.push_back(aggregate_to_json(a));
  return Json{{"format", "wsqaoa-record-1"},
              {"config", record.config},
              {"sets", record.sets},
              {"variants", record.variants},
              {"depths", record.depths},
              {"dispersion", "sample standard deviation over instances"},
              {"instances", instances},
              {"cells", cells},
              {"aggregates", aggregates}};
}

ExperimentRecord record_from_json(const Json& j) {
  ExperimentRecord rec;
  try {
    rec.config = j.value("config", Json::object());
    rec.sets = j.at("sets").get<std::vector<std::string>>();
    rec.variants = j.at("variants").get<std::vector<std::string>>();
    rec.depths = j.at("depths").get<std::vector<int>>();
    for (const Json& s : j.at("instances")) rec.instances.push_back(summary_from_json(s));
    for (const Json& c : j.at("cells")) rec.cells.push_back(cell_from_json(c));
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed record: ") + e.what());
  }
  std::sort(rec.cells.begin(), rec.cells.end(), [](const CellResult& a, const CellResult& b) {
    return std::tie(a.seed, a.variant, a.p) < std::tie(b.seed, b.variant, b.p);
  });
  rec.aggregates = compute_aggregates(rec);

  const Json stored = j.value("aggregates", Json::array());
  bool match = stored.size() == rec.aggregates.size();
  for (std::size_t i = 0; match && i < stored.size(); ++i) {
    const Json& s = stored[i];
    const AggregateRow& a = rec.aggregates[i];
    auto close = [&](const char* key, double v) { return std::abs(s.at(key).get<double>() - v) <= 1e-12; };
    match = s.at("set") == a.set && s.at("variant") == a.variant && s.at("p") == a.p &&
            s.at("count") == a.count && close("r_mean", a.r_mean) && close("r_std", a.r_std) &&
            close("P_mean", a.P_mean) && close("P_std", a.P_std) &&
            close("r_exact_mean", a.r_exact_mean) && close("P_exact_mean", a.P_exact_mean);
  }
  if (!match) throw InputError("record aggregates do not match its cells");
  return rec;
}

void save_record(const fs::path& path, const ExperimentRecord& record) {
  write_json(path, record_to_json(record));
}

ExperimentRecord load_record(const fs::path& path) { return record_from_json(read_json(path)); }

// ---- export -------------------------------------------------------------

Figure parse_figure(const std::string& name) {
  if (name == "fig1") return Figure::fig1;
  if (name == "fig3") return Figure::fig3;
  if (name == "fig4") return Figure::fig4;
  if (name == "fig5") return Figure::fig5;
  if (name == "scatter_fig2" || name == "fig2") return Figure::scatter_fig2;
  throw InputError("unknown figure '" + name + "'");
}

std::string figure_name(Figure figure) {
  switch (figure) {
    case Figure::fig1:
      return "fig1";
    case Figure::fig3:
      return "fig3";
    case Figure::fig4:
      return "fig4";
    case Figure::fig5:
      return "fig5";
    case Figure::scatter_fig2:
      break;
  }
  return "scatter_fig2";
}

std::string scatter_csv(const std::vector<ScatterRow>& rows) {
  std::string out = "seed,epsilon,sigma,subset\n";
  for (const auto& r : rows)
    out += std::to_string(r.seed) + "," + fmt_num(r.epsilon) + "," + fmt_num(r.sigma) + "," + r.label + "\n";
  return out;
}

std::vector<ScatterRow> ensemble_scatter(const InstanceEnsemble& ensemble, std::size_t k) {
  std::vector<std::vector<std::string>> labels(ensemble.size());
  for (DeviationMeasure m : {DeviationMeasure::epsilon, DeviationMeasure::sigma}) {
    const HotColdSplit split = classify_hot_cold(ensemble, m, k);
    for (auto i : split.hot) labels[i].push_back(measure_prefix(m) + "-hot");
    for (auto i : split.cold) labels[i].push_back(measure_prefix(m) + "-cold");
  }
  std::vector<ScatterRow> rows;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto& a = *ensemble.annotations[i];
    std::string label;
    for (const auto& l : labels[i]) label += (label.empty() ? "" : ";") + l;
    rows.push_back({ensemble.seeds[i], a.epsilon, a.sigma, label});
  }
  return rows;
}

ExportReport export_tables(const ExperimentRecord& record, Figure figure, const fs::path& out_dir,
                           MetricSource source) {
  ExportReport report;
  const std::string fig = figure_name(figure);

  if (figure == Figure::scatter_fig2) {
    std::vector<ScatterRow> rows;
    for (const auto& s : record.instances) {
      if (!s.ok) continue;
      std::string label;
      for (const auto& l : s.sets) label += (label.empty() ? "" : ";") + l;
      rows.push_back({s.seed, s.epsilon, s.sigma, label});
    }
    const fs::path path = out_dir / "scatter_fig2.csv";
    write_text(path, scatter_csv(rows));
    report.written.push_back(path);
    return report;
  }

  auto has_set = [&](const std::string& s) {
    return std::find(record.sets.begin(), record.sets.end(), s) != record.sets.end();
  };
  const std::string random_set = has_set("random") || record.sets.empty() ? "random" : record.sets.front();
  const std::vector<std::string> two{"standard", "warmstart"};
  std::vector<std::string> all = record.variants;
  if (all.empty()) all = two;

  std::vector<Panel> panels;
  auto add = [&](const std::string& stem, std::vector<std::string> sets, std::vector<std::string> variants) {
    panels.push_back({fig + stem + "_r.csv", sets, variants, true});
    panels.push_back({fig + stem + "_P.csv", sets, variants, false});
  };
  switch (figure) {
    case Figure::fig1:
      add("", {random_set}, two);
      break;
    case Figure::fig3: {
      for (const char* m : {"sigma", "eps"}) {
        std::vector<std::string> sets;
        if (has_set(random_set)) sets.push_back(random_set);
        sets.push_back(std::string(m) + "-hot");
        sets.push_back(std::string(m) + "-cold");
        add(std::string("_") + m, sets, two);
      }
      break;
    }
    case Figure::fig4:
      add("", {random_set}, all);
      break;
    case Figure::fig5:
      add("_eps", {"eps-cold"}, all);
      add("_sigma", {"sigma-cold"}, all);
      break;
    case Figure::scatter_fig2:
      break;
  }

  const bool exact = source == MetricSource::exact;
  std::set<std::string> missing;
  for (const auto& panel : panels) {
    std::string csv = kPanelHeader;
    for (const auto& set : panel.sets) {
      if (!has_set(set)) {
        missing.insert("set " + set);
        continue;
      }
      for (const auto& variant : panel.variants) {
        const std::string label = panel.sets.size() > 1 ? variant + ":" + set : variant;
        for (int p : record.depths) {
          const AggregateRow* a = record.aggregate(set, variant, p);
          if (!a || a->count == 0) {
            missing.insert(set + "/" + variant + "/p=" + std::to_string(p));
            continue;
          }
          const double mean = panel.r_metric ? (exact ? a->r_exact_mean : a->r_mean)
                                             : (exact ? a->P_exact_mean : a->P_mean);
          const double sd = panel.r_metric ? (exact ? a->r_exact_std : a->r_std)
                                           : (exact ? a->P_exact_std : a->P_std);
          csv += std::to_string(p) + "," + label + "," + fmt_num(mean) + "," + fmt_num(sd) + "\n";
        }
      }
    }
    const fs::path path = out_dir / panel.file;
    write_text(path, csv);
    report.written.push_back(path);
  }
  report.missing.assign(missing.begin(), missing.end());
  return report;
}

}  // namespace wsqaoa
