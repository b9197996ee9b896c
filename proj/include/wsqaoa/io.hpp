#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "wsqaoa/instance_lab.hpp"
#include "wsqaoa/portfolio.hpp"

namespace wsqaoa {

using Json = nlohmann::json;

/// Keys: n_assets, labels (optional), mu, sigma, q, budget, penalty
/// (optional; choose_penalty when absent).
PortfolioInstance instance_from_json(const Json& j);
Json instance_to_json(const PortfolioInstance& instance);

PortfolioInstance load_instance(const std::filesystem::path& path);
void save_instance(const std::filesystem::path& path, const PortfolioInstance& instance);

/// Directory layout: manifest.json plus one instance_NNNN.json per member.
/// The manifest carries seeds, generator version and options, and the
/// annotations when present.
void save_ensemble(const std::filesystem::path& dir, const InstanceEnsemble& ensemble);
InstanceEnsemble load_ensemble(const std::filesystem::path& dir);

Json read_json(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline; parent directories are created.
void write_json(const std::filesystem::path& path, const Json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace wsqaoa
