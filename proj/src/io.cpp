#include "wsqaoa/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace wsqaoa {

namespace fs = std::filesystem;

namespace {

template <typename T>
T required(const Json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw InputError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::string member_file(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "instance_%04zu.json", i);
  return buf;
}

Json annotation_to_json(const InstanceAnnotation& a) {
  return Json{{"x_star", std::vector<double>(a.x_star.data(), a.x_star.data() + a.x_star.size())},
              {"x_opt", std::vector<int>(a.x_opt.begin(), a.x_opt.end())},
              {"epsilon", a.epsilon},
              {"sigma", a.sigma},
              {"relaxation_converged", a.relaxation_converged}};
}

InstanceAnnotation annotation_from_json(const Json& j) {
  InstanceAnnotation a;
  const auto xs = required<std::vector<double>>(j, "x_star");
  a.x_star = Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  for (int b : required<std::vector<int>>(j, "x_opt")) {
    if (b != 0 && b != 1) throw InputError("x_opt entries must be 0 or 1");
    a.x_opt.push_back(static_cast<std::uint8_t>(b));
  }
  a.epsilon = required<double>(j, "epsilon");
  a.sigma = required<double>(j, "sigma");
  a.relaxation_converged = j.value("relaxation_converged", false);
  return a;
}

}  // namespace

PortfolioInstance instance_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("instance must be a JSON object");
  PortfolioInstance inst;
  const auto mu = required<std::vector<double>>(j, "mu");
  const auto sigma = required<std::vector<std::vector<double>>>(j, "sigma");
  const int n = static_cast<int>(mu.size());
  if (j.contains("n_assets") && required<int>(j, "n_assets") != n)
    throw InputError("n_assets does not match the length of mu");
  if (static_cast<int>(sigma.size()) != n) throw InputError("sigma must be n_assets x n_assets");
  inst.mu = Eigen::Map<const Eigen::VectorXd>(mu.data(), n);
  inst.sigma.resize(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(sigma[i].size()) != n) throw InputError("sigma must be n_assets x n_assets");
    for (int k = 0; k < n; ++k) inst.sigma(i, k) = sigma[i][k];
  }
  if (j.contains("labels")) inst.labels = required<std::vector<std::string>>(j, "labels");
  inst.q = required<double>(j, "q");
  inst.budget = required<int>(j, "budget");
  if (j.contains("penalty") && !j.at("penalty").is_null())
    inst.penalty = required<double>(j, "penalty");
  else
    inst.penalty = choose_penalty(inst);
  inst.validate();
  return inst;
}

Json instance_to_json(const PortfolioInstance& instance) {
  const int n = instance.n_assets();
  Json sigma = Json::array();
  for (int i = 0; i < n; ++i) {
    std::vector<double> row(n);
    for (int k = 0; k < n; ++k) row[k] = instance.sigma(i, k);
    sigma.push_back(row);
  }
  Json j;
  j["n_assets"] = n;
  if (!instance.labels.empty()) j["labels"] = instance.labels;
  j["mu"] = std::vector<double>(instance.mu.data(), instance.mu.data() + n);
  j["sigma"] = sigma;
  j["q"] = instance.q;
  j["budget"] = instance.budget;
  j["penalty"] = instance.penalty;
  return j;
}

PortfolioInstance load_instance(const fs::path& path) { return instance_from_json(read_json(path)); }

void save_instance(const fs::path& path, const PortfolioInstance& instance) {
  write_json(path, instance_to_json(instance));
}

void save_ensemble(const fs::path& dir, const InstanceEnsemble& ensemble) {
  fs::create_directories(dir);
  Json members = Json::array();
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const std::string file = member_file(i);
    save_instance(dir / file, ensemble.instances[i]);
    Json m{{"file", file}, {"seed", ensemble.seeds[i]}};
    if (i < ensemble.annotations.size() && ensemble.annotations[i])
      m["annotation"] = annotation_to_json(*ensemble.annotations[i]);
    members.push_back(m);
  }
  const auto& o = ensemble.options;
  Json manifest{{"generator_version", ensemble.generator_version},
                {"generator", {{"n_assets", o.n_assets},
                               {"budget", o.budget},
                               {"q", o.q},
                               {"t_samples", o.t_samples}}},
                {"count", ensemble.size()},
                {"instances", members}};
  if (o.penalty) manifest["generator"]["penalty"] = *o.penalty;
  write_json(dir / "manifest.json", manifest);
}

InstanceEnsemble load_ensemble(const fs::path& dir) {
  const Json manifest = read_json(dir / "manifest.json");
  InstanceEnsemble ens;
  ens.generator_version = required<std::string>(manifest, "generator_version");
  if (manifest.contains("generator")) {
    const Json& g = manifest["generator"];
    ens.options.n_assets = g.value("n_assets", ens.options.n_assets);
    ens.options.budget = g.value("budget", ens.options.budget);
    ens.options.q = g.value("q", ens.options.q);
    ens.options.t_samples = g.value("t_samples", ens.options.t_samples);
    if (g.contains("penalty")) ens.options.penalty = g["penalty"].get<double>();
  }
  const Json members = required<Json>(manifest, "instances");
  for (const Json& m : members) {
    ens.instances.push_back(load_instance(dir / required<std::string>(m, "file")));
    ens.seeds.push_back(required<std::uint64_t>(m, "seed"));
    if (m.contains("annotation"))
      ens.annotations.emplace_back(annotation_from_json(m["annotation"]));
    else
      ens.annotations.emplace_back(std::nullopt);
  }
  if (manifest.contains("count") && manifest["count"].get<std::size_t>() != ens.size())
    throw InputError("manifest count does not match its instance list");
  return ens;
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace wsqaoa
