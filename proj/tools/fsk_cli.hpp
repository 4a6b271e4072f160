#pragma once

// `fsk` command-line surface: ingest | eval | report | selftest.
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "fsk/fsk.hpp"
#include "fsk/selftest.hpp"

namespace fsk::cli {

inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kDataError = 2;

/// FSK_WORKERS if set to a positive integer, else the hardware thread count.
inline std::size_t default_workers() {
  if (const char* env = std::getenv("FSK_WORKERS")) {
    std::size_t n = 0;
    std::istringstream in(env);
    if (in >> n && n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct IngestArgs {
  std::string input, format = "csv", output;
};

struct EvalArgs {
  std::string data, data_format = "binary", head, transform = "none", out;
  std::vector<std::string> train_classes;
  RunConfig config;
};

struct ReportArgs {
  std::string in, format = "text";
};

inline int cmd_ingest(const IngestArgs& a, std::ostream& out) {
  const auto ds = load_dataset(a.input, parse_format(a.format));
  save_dataset(ds, a.output);
  out << "wrote " << a.output << ": " << ds.items.size() << " records, " << ds.num_classes() << " classes, shape "
      << (ds.shape.kind == ShapeKind::pooled ? "pooled " : "grid ") << ds.shape.height << "x" << ds.shape.width << "x"
      << ds.shape.dim << "\n";
  return kOk;
}

inline int cmd_eval(EvalArgs a, std::ostream& out, std::ostream& err) {
  const auto head = parse_head(a.head);
  if (!head) {
    err << "error: unknown head '" << a.head << "' (protonet, simpleshot, laplacianshot, deepemd, deepbdc)\n";
    return kUsageError;
  }
  const auto transform = parse_transform(a.transform);
  if (!transform) {
    err << "error: unknown transform '" << a.transform << "' (none, center, l2, center_then_l2)\n";
    return kUsageError;
  }
  a.config.head = *head;
  a.config.params.transform = *transform;
  try {
    a.config.validate();
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  const auto ds = load_dataset(a.data, parse_format(a.data_format));
  if (is_grid_head(*head) && ds.shape.kind == ShapeKind::pooled)
    err << "warning: " << a.head << " on pooled embeddings treats each one as a 1x1 grid\n";
  if (!is_grid_head(*head) && ds.shape.kind == ShapeKind::grid)
    err << "warning: " << a.head << " average-pools the " << ds.shape.height << "x" << ds.shape.width
        << " grid embeddings\n";

  if (!a.train_classes.empty()) {
    const std::set<std::string> train(a.train_classes.begin(), a.train_classes.end());
    const std::set<std::string> test(ds.class_names.begin(), ds.class_names.end());
    if (!check_disjoint_classes(train, test)) {
      std::string shared;
      for (const auto& name : test)
        if (train.contains(name)) shared += (shared.empty() ? "" : ", ") + name;
      err << "warning: evaluation classes overlap the training classes: " << shared << "\n";
    }
  }

  const auto result = run_benchmark(ds, a.config);
  if (!a.out.empty()) persist_result(result, a.out);
  out << std::fixed << std::setprecision(2) << ds.name << " " << a.head << " " << a.config.spec.ways << "-way "
      << a.config.spec.shots << "-shot " << a.config.spec.queries_per_class << "-query, " << a.config.episodes
      << " episodes, seed " << a.config.base_seed << ": accuracy " << 100.0 * result.mean_accuracy << " ± "
      << 100.0 * result.ci95_halfwidth << " %\n";
  out << "wall time " << std::setprecision(3) << result.wall_time_seconds << " s\n";
  return kOk;
}

inline int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  const auto format = parse_report_format(a.format);
  if (!format) {
    err << "error: unknown report format '" << a.format << "' (text, markdown, json)\n";
    return kUsageError;
  }
  const auto results = load_results(a.in);
  if (results.empty()) {
    err << "error: " << a.in << " contains no results\n";
    return kDataError;
  }
  out << emit_report(results, *format);
  return kOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"fsk: few-shot classification benchmarking over precomputed embeddings"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "TOML file pre-filling flags; command-line flags take precedence");
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate an embedding file and write it as FSEB");
  ingest_cmd->add_option("--input", ingest.input, "Input embedding file")->required();
  ingest_cmd->add_option("--format", ingest.format, "Input format")->check(CLI::IsMember({"csv", "binary"}));
  ingest_cmd->add_option("--output", ingest.output, "Output FSEB path")->required();

  EvalArgs eval;
  eval.config.workers = default_workers();
  auto* eval_cmd = app.add_subcommand("eval", "Run a few-shot head over sampled episodes");
  eval_cmd->add_option("--data", eval.data, "FSEB dataset")->required();
  eval_cmd->add_option("--data-format", eval.data_format, "Dataset format")->check(CLI::IsMember({"csv", "binary"}));
  eval_cmd->add_option("--head", eval.head, "protonet | simpleshot | laplacianshot | deepemd | deepbdc")->required();
  eval_cmd->add_option("--ways", eval.config.spec.ways, "Classes per episode (K)");
  eval_cmd->add_option("--shots", eval.config.spec.shots, "Support examples per class (N)");
  eval_cmd->add_option("--queries", eval.config.spec.queries_per_class, "Query examples per class (Q)");
  eval_cmd->add_option("--episodes", eval.config.episodes, "Number of episodes (E)");
  eval_cmd->add_option("--seed", eval.config.base_seed, "Base seed");
  eval_cmd->add_option("--lambda", eval.config.params.lambda, "LaplacianShot regularization weight");
  eval_cmd->add_option("--knn", eval.config.params.knn, "LaplacianShot affinity neighbours");
  eval_cmd->add_option("--max-iters", eval.config.params.max_iters, "LaplacianShot sweep limit");
  eval_cmd->add_option("--tau", eval.config.params.tau, "DeepBDC softmax temperature");
  eval_cmd->add_option("--transform", eval.transform, "SimpleShot feature transform");
  eval_cmd->add_option("--workers", eval.config.workers, "Worker threads (default: FSK_WORKERS or core count)");
  eval_cmd->add_option("--out", eval.out, "Append the result to this JSONL file");
  eval_cmd->add_option("--train-classes", eval.train_classes, "Backbone training class names, checked for overlap")
      ->delimiter(',');

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Render accuracy tables from a results file");
  report_cmd->add_option("--in", report.in, "Results JSONL file")->required();
  report_cmd->add_option("--format", report.format, "text | markdown | json");

  auto* selftest_cmd = app.add_subcommand("selftest", "Run the oracle-backed solver checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (ingest_cmd->parsed()) return cmd_ingest(ingest, out);
    if (eval_cmd->parsed()) return cmd_eval(eval, out, err);
    if (report_cmd->parsed()) return cmd_report(report, out, err);
    if (selftest_cmd->parsed()) return run_selftest(out) ? kOk : kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}

}  // namespace fsk::cli
