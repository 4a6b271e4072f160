#pragma once

// JSONL persistence of benchmark results, one object per line:
//   {"dataset", "head", "ways", "shots", "queries", "episodes", "seed",
//    "params", "mean_acc", "ci95", "per_episode", "wall_s", "version"}

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsk/error.hpp"
#include "fsk/eval_runner.hpp"

namespace fsk {

using ordered_json = nlohmann::ordered_json;

inline ordered_json params_to_json(const HeadParams& p) {
  ordered_json j;
  j["lambda"] = p.lambda;
  j["knn"] = p.knn;
  j["max_iters"] = p.max_iters;
  j["tol"] = p.tol;
  j["tau"] = p.tau;
  j["transform"] = std::string(transform_name(p.transform));
  return j;
}

inline ordered_json to_json(const BenchmarkResult& r) {
  ordered_json j;
  j["dataset"] = r.dataset;
  j["head"] = std::string(head_name(r.head));
  j["ways"] = r.spec.ways;
  j["shots"] = r.spec.shots;
  j["queries"] = r.spec.queries_per_class;
  j["episodes"] = r.episodes;
  j["seed"] = r.seed;
  j["params"] = params_to_json(r.params);
  j["mean_acc"] = r.mean_accuracy;
  j["ci95"] = r.ci95_halfwidth;
  j["per_episode"] = r.per_episode_accuracy;
  j["wall_s"] = r.wall_time_seconds;
  j["version"] = r.version;
  return j;
}

/// Parses one result object; throws DataError (or nlohmann exceptions on
/// type mismatches, which callers translate).
inline BenchmarkResult result_from_json(const ordered_json& j) {
  BenchmarkResult r;
  if (!j.is_object()) throw DataError("expected a JSON object");
  r.dataset = j.at("dataset").get<std::string>();
  const auto head = parse_head(j.at("head").get<std::string>());
  if (!head) throw DataError("unknown head '" + j.at("head").get<std::string>() + "'");
  r.head = *head;
  r.spec.ways = j.at("ways").get<std::uint32_t>();
  r.spec.shots = j.at("shots").get<std::uint32_t>();
  r.spec.queries_per_class = j.at("queries").get<std::uint32_t>();
  r.episodes = j.at("episodes").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  const auto& p = j.at("params");
  if (!p.is_object()) throw DataError("params must be an object");
  r.params.lambda = p.value("lambda", r.params.lambda);
  r.params.knn = p.value("knn", r.params.knn);
  r.params.max_iters = p.value("max_iters", r.params.max_iters);
  r.params.tol = p.value("tol", r.params.tol);
  r.params.tau = p.value("tau", r.params.tau);
  const auto transform = parse_transform(p.value("transform", std::string("none")));
  if (!transform) throw DataError("unknown transform in params");
  r.params.transform = *transform;
  r.mean_accuracy = j.at("mean_acc").get<double>();
  r.ci95_halfwidth = j.at("ci95").get<double>();
  r.per_episode_accuracy = j.at("per_episode").get<std::vector<double>>();
  r.wall_time_seconds = j.at("wall_s").get<double>();
  r.version = j.at("version").get<std::string>();
  return r;
}

/// Appends `result` as one JSON line.
inline void persist_result(const BenchmarkResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw DataError("cannot open " + path.string() + " for appending");
  out << to_json(result).dump() << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

/// Reads every result in a JSONL file. Blank lines are skipped; a malformed
/// line raises DataError naming its 1-based line number.
inline std::vector<BenchmarkResult> load_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<BenchmarkResult> out;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(result_from_json(ordered_json::parse(line)));
    } catch (const std::exception& e) {
      throw DataError("malformed result at line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace fsk
