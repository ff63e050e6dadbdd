// Copyright 2026 The geoobf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Command-line front end: synth, partition, evaluate, sweep, wtd.
//
// Exit codes: 0 success, 1 usage, 2 infeasible parameters, 3 I/O.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "geoobf.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitIo = 3;

geoobf::LocationDomain read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw geoobf::IoError("cannot open dataset " + path);
  return geoobf::load_domain(in);
}

// Writes `text` to `path`, or stdout when path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out || !(out << text)) throw geoobf::IoError("cannot write " + path);
}

struct CommonFlags {
  std::uint64_t seed = 0;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& flags, const std::string& out_help) {
  cmd->add_option("--seed", flags.seed, "Master RNG seed");
  cmd->add_option("--out", flags.out, out_help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regionalized location obfuscation: partition, release and attack."};
  app.require_subcommand(1);

  // synth
  CommonFlags synth_flags;
  geoobf::SynthOptions synth;
  std::optional<double> eps_low;
  std::optional<double> eps_high;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset CSV");
  add_common(synth_cmd, synth_flags, "Output CSV (default stdout)");
  synth_cmd->add_option("--n", synth.n, "Number of locations")->capture_default_str();
  synth_cmd->add_option("--cell-km", synth.cell_km, "Grid cell size in km")
      ->capture_default_str();
  synth_cmd->add_option("--prior-low", synth.prior_low)->capture_default_str();
  synth_cmd->add_option("--prior-high", synth.prior_high)->capture_default_str();
  synth_cmd->add_option("--grid-side", synth.grid_side,
                        "Cells per grid side (0: ceil(2*sqrt(n)))");
  synth_cmd->add_option("--eps-low", eps_low, "Lower bound of personal budgets");
  synth_cmd->add_option("--eps-high", eps_high, "Upper bound of personal budgets");

  // partition
  CommonFlags part_flags;
  std::string part_dataset;
  geoobf::PrivacyParams part_params;
  std::string part_algorithm = "hilbert";
  std::optional<unsigned> part_order;
  CLI::App* part_cmd = app.add_subcommand("partition", "Partition a dataset into protection sets");
  add_common(part_cmd, part_flags, "Partition CSV (default stdout)");
  part_cmd->add_option("--dataset", part_dataset, "Dataset CSV")->required();
  part_cmd->add_option("--eps", part_params.eps, "Global privacy budget")->required();
  part_cmd->add_option("--em", part_params.em, "Minimum inference error, km")->required();
  part_cmd->add_option("--lambda", part_params.lambda, "Personalization weight offset")
      ->capture_default_str();
  part_cmd
      ->add_option("--algorithm", part_algorithm,
                   "hilbert | hilbert-personalized | qk | qk-personalized")
      ->capture_default_str();
  part_cmd->add_option("--order", part_order, "Hilbert curve order");

  // evaluate
  CommonFlags eval_flags;
  std::string eval_dataset;
  std::string eval_partition;
  std::vector<std::string> eval_metrics;
  std::optional<double> eval_constant;
  std::string eval_matrix_out;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "Build the release matrix and attack it");
  add_common(eval_cmd, eval_flags, "Metrics CSV (default stdout)");
  eval_cmd->add_option("--dataset", eval_dataset, "Dataset CSV")->required();
  eval_cmd->add_option("--partition", eval_partition, "Partition CSV")->required();
  eval_cmd->add_option("--metrics", eval_metrics, "Subset of " + geoobf::metric_names_list())
      ->delimiter(',');
  eval_cmd->add_option("--constant-diameter", eval_constant,
                       "Use one sensitivity (km) for every row instead of the set diameters");
  eval_cmd->add_option("--matrix-out", eval_matrix_out, "Also write the release matrix CSV");

  // sweep
  CommonFlags sweep_flags;
  std::string sweep_config;
  unsigned sweep_threads = 0;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep");
  add_common(sweep_cmd, sweep_flags, "Output directory (overrides output_dir)");
  sweep_cmd->add_option("--config", sweep_config, "Sweep config file")->required();
  sweep_cmd->add_option("--threads", sweep_threads, "Worker threads (0: all cores)");

  // wtd
  CommonFlags wtd_flags;
  std::string wtd_dataset;
  std::string wtd_partition;
  std::size_t wtd_workers = 10;
  std::size_t wtd_tasks = 20;
  std::size_t wtd_trials = 100;
  CLI::App* wtd_cmd = app.add_subcommand("wtd", "Spatial crowdsourcing worker travel distance");
  add_common(wtd_cmd, wtd_flags, "Summary CSV (default stdout)");
  wtd_cmd->add_option("--dataset", wtd_dataset, "Dataset CSV")->required();
  wtd_cmd->add_option("--partition", wtd_partition, "Partition CSV")->required();
  wtd_cmd->add_option("--workers", wtd_workers, "Idle workers per trial")->capture_default_str();
  wtd_cmd->add_option("--tasks", wtd_tasks, "Tasks per trial")->capture_default_str();
  wtd_cmd->add_option("--trials", wtd_trials, "Number of trials")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*synth_cmd) {
      synth.seed = synth_flags.seed;
      if (eps_low.has_value() != eps_high.has_value()) {
        throw geoobf::InvalidArgument("--eps-low and --eps-high go together");
      }
      if (eps_low) synth.eps_range = std::make_pair(*eps_low, *eps_high);
      std::ostringstream out;
      geoobf::write_domain(out, geoobf::synth_domain(synth));
      emit(synth_flags.out, out.str());
    } else if (*part_cmd) {
      const geoobf::Algorithm algorithm = geoobf::parse_algorithm(part_algorithm);
      if (algorithm == geoobf::Algorithm::kEmBaseline) {
        throw geoobf::InvalidArgument("em-baseline has no partition of its own");
      }
      const geoobf::LocationDomain domain = read_dataset(part_dataset);
      const geoobf::Partition partition =
          geoobf::run_partition(domain, part_params, algorithm, part_flags.seed, part_order);
      std::ostringstream out;
      geoobf::write_partition(out, partition);
      emit(part_flags.out, out.str());
      std::size_t min_size = domain.size();
      std::size_t max_size = 0;
      for (const geoobf::Pls& p : partition.plss) {
        min_size = std::min(min_size, p.members.size());
        max_size = std::max(max_size, p.members.size());
      }
      std::fprintf(part_flags.out.empty() || part_flags.out == "-" ? stderr : stdout,
                   "algorithm=%s k=%zu weighted_avg_diameter=%.6g min_size=%zu max_size=%zu\n",
                   partition.provenance.algorithm.c_str(), partition.plss.size(),
                   geoobf::weighted_avg_diameter(partition), min_size, max_size);
    } else if (*eval_cmd) {
      for (const std::string& m : eval_metrics) {
        if (!geoobf::is_metric_name(m)) {
          throw geoobf::InvalidArgument("unknown metric '" + m +
                                        "'; valid: " + geoobf::metric_names_list());
        }
      }
      const geoobf::LocationDomain domain = read_dataset(eval_dataset);
      std::ifstream pin(eval_partition);
      if (!pin) throw geoobf::IoError("cannot open partition " + eval_partition);
      const geoobf::Partition partition = geoobf::read_partition(pin, domain);
      geoobf::ObfuscationMatrix matrix;
      if (eval_constant) {
        const double eps = partition.plss.front().eps_region;
        matrix = geoobf::build_matrix_constant(domain, *eval_constant, eps);
      } else {
        matrix = geoobf::build_matrix(domain, partition);
      }
      if (!eval_matrix_out.empty()) {
        std::ostringstream m;
        geoobf::write_matrix(m, matrix);
        emit(eval_matrix_out, m.str());
      }
      std::ostringstream out;
      geoobf::write_metrics(out, geoobf::evaluate(domain, matrix), eval_metrics);
      emit(eval_flags.out, out.str());
    } else if (*sweep_cmd) {
      std::ifstream in(sweep_config);
      if (!in) throw geoobf::IoError("cannot open config " + sweep_config);
      geoobf::SweepConfig config = geoobf::parse_sweep_config(in);
      if (!sweep_flags.out.empty()) config.output_dir = sweep_flags.out;
      if (sweep_cmd->count("--seed") > 0) config.seeds = {sweep_flags.seed};
      const auto rows = geoobf::run_sweep(
          config, sweep_threads == 0 ? std::thread::hardware_concurrency() : sweep_threads);
      geoobf::write_sweep_outputs(config.output_dir, rows);
      std::fprintf(stderr, "wrote %zu rows to %s\n", rows.size(), config.output_dir.c_str());
    } else if (*wtd_cmd) {
      const geoobf::LocationDomain domain = read_dataset(wtd_dataset);
      std::ifstream pin(wtd_partition);
      if (!pin) throw geoobf::IoError("cannot open partition " + wtd_partition);
      const geoobf::Partition partition = geoobf::read_partition(pin, domain);
      const geoobf::ObfuscationMatrix matrix = geoobf::build_matrix(domain, partition);
      const geoobf::WtdSummary s = geoobf::wtd_trials(domain, matrix, wtd_workers, wtd_tasks,
                                                      wtd_trials, wtd_flags.seed);
      std::ostringstream out;
      out << "metric,value\n"
          << "wtd," << geoobf::detail::format_double(s.private_wtd) << '\n'
          << "wtd_non_private," << geoobf::detail::format_double(s.non_private_wtd) << '\n';
      emit(wtd_flags.out, out.str());
    }
  } catch (const geoobf::InfeasibleError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInfeasible;
  } catch (const geoobf::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const geoobf::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const geoobf::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return 0;
}
