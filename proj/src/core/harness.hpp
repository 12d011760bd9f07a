#pragma once

#include <string>
#include <vector>

#include "core/instance.hpp"
#include "core/runner.hpp"

namespace dsk {

struct Metrics {
  struct Row {
    std::string task;
    int episodes = 0;
    double success_rate = 0;  // percent
    double ar = 0;            // mean cumulative episode reward
    double rs = 0;            // ar / mean episode length
    double mean_length = 0;
  };
  Row overall;
  std::vector<Row> per_task;
};

struct EvalOptions {
  std::vector<std::string> tasks;
  uint64_t seed_lo = 0;
  uint64_t seed_hi = 19;
  Split split = Split::train;
  int workers = 1;
  std::string record_dir;  // optional: write episode directories
  int max_steps = 0;
};

// policy spec: "oracle" | "random" | "zero" | "cmd:<command line>"
Metrics evaluate(const std::string& policy_spec, const EvalOptions& opts);

std::string metrics_to_json(const Metrics& m);
std::string metrics_to_table(const Metrics& m);

struct GenReport {
  int attempted = 0;
  int written = 0;
  int discarded = 0;
  std::vector<std::string> failures;  // "task/seed: reason"
};

GenReport generate(const std::vector<std::string>& tasks, uint64_t seed_lo, uint64_t seed_hi,
                   Split split, const std::string& out_dir, int workers);
std::string report_to_json(const GenReport& r);

// Dataset-wide action ranges and episode length stats.
std::string stats_json(const std::string& dataset_dir);

// Integrity scan; returns a report and throws nothing (errors are listed).
struct InspectReport {
  int episodes = 0;
  int ok = 0;
  std::vector<std::string> errors;
};
InspectReport inspect_dataset(const std::string& dir);
std::string inspect_to_json(const InspectReport& r);

// Expands "all"/"L0"/"L1"/"L2" or a comma list into task names.
std::vector<std::string> expand_task_selector(const std::string& selector);

// stdio protocol server for external-policy evaluation ("oracle", "random",
// "zero"); blocks until the peer closes the stream.
void serve_policy(const std::string& kind);

}  // namespace dsk
