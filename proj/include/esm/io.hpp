#pragma once

#include <map>
#include <string>
#include <vector>

#include "esm/scenarios.hpp"

namespace esm {

// Where the CLI gets its market instance from.
enum class InstanceSource { builtin, file, random };

struct RunConfig {
  std::string command;  // solve | bid | experiment

  InstanceSource source = InstanceSource::builtin;
  std::string instance_file;
  int I = 3;
  std::uint64_t instance_seed = 0;
  bool profitable = false;
  double a = 100.0;

  BiddingConfig bidding;

  std::string experiment;  // misreport | poa_vs_size | diversity | delay | sensitivity
  int misreport_target = 0;
  std::vector<int> sizes = {2, 5, 10, 20, 50};
  int n_seeds = 5;
  std::vector<int> type_counts = {1, 2, 5, 10, 20, 50, 100};
  int n_draws = 50;
  std::vector<int> delays = {1, 3, 6, 9};
  std::vector<double> a_values = {25, 50, 75, 100, 125};

  std::string out_dir = ".";
};

// Parses `key = value` lines; '#' starts a comment, blank lines are ignored.
// Unknown keys raise ParameterError. Keys mirror the CLI flags plus the
// experiment parameters (lists are comma-separated).
std::map<std::string, std::string> parse_key_values(const std::string& text);

void apply_config(RunConfig& config, const std::map<std::string, std::string>& kv);

// Instance files: one prosumer per line,
//   id a1 a2 b1 b2 p_min p_max d_min d_max
// separated by whitespace; '#' comments allowed.
std::vector<Prosumer> read_instance_rows(const std::string& path);
void write_instance_rows(const std::string& path, const MarketInstance& instance);

// Shortest round-trippable numeric format used in every CSV (printf %.9g).
std::string format_number(double x);

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

void write_report_csv(const std::string& path, const ScenarioReport& report);

}  // namespace esm
