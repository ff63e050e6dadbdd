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

#ifndef GEOOBF_HARNESS_HPP_
#define GEOOBF_HARNESS_HPP_

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "geoobf/adversary.hpp"
#include "geoobf/domain.hpp"
#include "geoobf/errors.hpp"
#include "geoobf/hilbert.hpp"
#include "geoobf/mechanism.hpp"
#include "geoobf/partition.hpp"
#include "geoobf/partition_hilbert.hpp"
#include "geoobf/qkmeans.hpp"
#include "geoobf/rng.hpp"

namespace geoobf {

enum class Algorithm {
  kHilbert,
  kHilbertPersonalized,
  kQk,
  kQkPersonalized,
  kEmBaseline,
};

inline constexpr std::array<std::pair<Algorithm, std::string_view>, 5> kAlgorithmNames = {{
    {Algorithm::kHilbert, "hilbert"},
    {Algorithm::kHilbertPersonalized, "hilbert-personalized"},
    {Algorithm::kQk, "qk"},
    {Algorithm::kQkPersonalized, "qk-personalized"},
    {Algorithm::kEmBaseline, "em-baseline"},
}};

inline std::string_view algorithm_name(Algorithm a) {
  for (const auto& [alg, name] : kAlgorithmNames) {
    if (alg == a) return name;
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view name) {
  for (const auto& [alg, n] : kAlgorithmNames) {
    if (n == name) return alg;
  }
  std::string valid;
  for (const auto& [alg, n] : kAlgorithmNames) {
    if (!valid.empty()) valid += ", ";
    valid += n;
  }
  throw InvalidArgument("unknown algorithm '" + std::string(name) + "'; valid: " + valid);
}

inline bool is_personalized(Algorithm a) {
  return a == Algorithm::kHilbertPersonalized || a == Algorithm::kQkPersonalized;
}

// Partition used by `algorithm`. The EM baseline has none of its own; it
// reuses the Hilbert partition to pick its constant diameter.
inline Partition run_partition(const LocationDomain& domain, const PrivacyParams& params,
                               Algorithm algorithm, std::uint64_t seed,
                               std::optional<unsigned> order = std::nullopt) {
  const unsigned m = order.value_or(default_order(domain));
  switch (algorithm) {
    case Algorithm::kHilbert:
    case Algorithm::kEmBaseline:
      return best_partition_hilbert(domain, params, m, false);
    case Algorithm::kHilbertPersonalized:
      return best_partition_hilbert(domain, params, m, true);
    case Algorithm::kQk:
    case Algorithm::kQkPersonalized: {
      QkConfig config;
      config.seed = seed;
      return qk_partition(domain, params, config, algorithm == Algorithm::kQkPersonalized);
    }
  }
  throw InvalidArgument("bad algorithm");
}

// Release matrix of `algorithm` given its partition. The EM baseline uses
// the largest protection-set diameter for every row.
inline ObfuscationMatrix run_mechanism(const LocationDomain& domain,
                                       const Partition& partition, Algorithm algorithm) {
  if (algorithm == Algorithm::kEmBaseline) {
    return build_matrix_constant(domain, partition.max_diameter(), partition.params.eps);
  }
  return build_matrix(domain, partition);
}

// ---------------------------------------------------------------------------
// Worker travel distance in spatial crowdsourcing.

// Each worker reports one pseudo-location drawn from `matrix`; every task goes
// to the three workers whose reports are nearest (ties by worker index). The
// result is the mean over tasks of the mean true travel distance of those
// three workers.
inline double wtd_sim(const LocationDomain& domain, const ObfuscationMatrix& matrix,
                      std::span<const LocationId> workers, std::span<const Point> tasks,
                      Rng& rng) {
  constexpr std::size_t kPerTask = 3;
  if (workers.size() < kPerTask) {
    throw InvalidArgument("need at least 3 idle workers, got " +
                          std::to_string(workers.size()));
  }
  if (tasks.empty()) throw InvalidArgument("no tasks");
  if (matrix.size() != domain.size()) throw InvalidArgument("matrix/domain mismatch");
  std::vector<LocationId> reported(workers.size());
  for (std::size_t w = 0; w < workers.size(); ++w) {
    reported[w] = sample_pseudo(matrix, workers[w], rng);
  }
  std::vector<std::size_t> idx(workers.size());
  double total = 0.0;
  for (const Point& task : tasks) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::partial_sort(idx.begin(), idx.begin() + kPerTask, idx.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double da = distance(domain.pos(reported[a]), task);
                        const double db = distance(domain.pos(reported[b]), task);
                        return da < db || (da == db && a < b);
                      });
    double travel = 0.0;
    for (std::size_t i = 0; i < kPerTask; ++i) {
      travel += distance(domain.pos(workers[idx[i]]), task);
    }
    total += travel / kPerTask;
  }
  return total / static_cast<double>(tasks.size());
}

// Worker true locations drawn from the prior.
inline std::vector<LocationId> draw_workers(const LocationDomain& domain, std::size_t count,
                                            Rng& rng) {
  std::vector<LocationId> out(count);
  for (std::size_t w = 0; w < count; ++w) {
    const double u = uniform01(rng);
    double acc = 0.0;
    LocationId pick = domain.size() - 1;
    for (LocationId id = 0; id < domain.size(); ++id) {
      acc += domain.prior(id);
      if (u < acc) {
        pick = id;
        break;
      }
    }
    out[w] = pick;
  }
  return out;
}

// Tasks uniform over the domain's bounding box.
inline std::vector<Point> draw_tasks(const LocationDomain& domain, std::size_t count,
                                     Rng& rng) {
  double min_x = domain.pos(0).x, max_x = min_x;
  double min_y = domain.pos(0).y, max_y = min_y;
  for (const Location& loc : domain.locations()) {
    min_x = std::min(min_x, loc.pos.x);
    max_x = std::max(max_x, loc.pos.x);
    min_y = std::min(min_y, loc.pos.y);
    max_y = std::max(max_y, loc.pos.y);
  }
  std::vector<Point> out(count);
  for (Point& p : out) {
    p.x = uniform_real(rng, min_x, max_x);
    p.y = uniform_real(rng, min_y, max_y);
  }
  return out;
}

struct WtdSummary {
  double private_wtd = 0.0;      // mean over trials, obfuscated reports
  double non_private_wtd = 0.0;  // same workers and tasks, true reports
};

// Mean WTD over `trials`. Trial t draws its workers and tasks from substream
// (seed, t) so matrices compared under one seed see identical scenes.
inline WtdSummary wtd_trials(const LocationDomain& domain, const ObfuscationMatrix& matrix,
                             std::size_t workers, std::size_t tasks, std::size_t trials,
                             std::uint64_t seed) {
  if (trials == 0) throw InvalidArgument("trials must be positive");
  const ObfuscationMatrix exact = ObfuscationMatrix::identity(domain.size());
  WtdSummary s;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng scene = make_rng(seed, {kWtdStream, t, 0});
    const std::vector<LocationId> w = draw_workers(domain, workers, scene);
    const std::vector<Point> k = draw_tasks(domain, tasks, scene);
    Rng reports = make_rng(seed, {kWtdStream, t, 1});
    s.private_wtd += wtd_sim(domain, matrix, w, k, reports);
    Rng exact_reports = make_rng(seed, {kWtdStream, t, 1});
    s.non_private_wtd += wtd_sim(domain, exact, w, k, exact_reports);
  }
  s.private_wtd /= static_cast<double>(trials);
  s.non_private_wtd /= static_cast<double>(trials);
  return s;
}

// ---------------------------------------------------------------------------
// Parameter sweeps.

struct SweepConfig {
  // Path to a dataset CSV, or `synth:key=value,...` with keys n, cell_km,
  // prior_low, prior_high, grid_side, eps_low, eps_high. Synthetic datasets
  // are regenerated per seed.
  std::string dataset;
  std::vector<double> eps_values;
  std::vector<double> em_values;
  std::vector<Algorithm> algorithms;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;

  void validate() const {
    if (dataset.empty()) throw InvalidArgument("sweep config: dataset missing");
    if (eps_values.empty()) throw InvalidArgument("sweep config: eps_values empty");
    if (em_values.empty()) throw InvalidArgument("sweep config: em_values empty");
    if (algorithms.empty()) throw InvalidArgument("sweep config: algorithms empty");
    if (seeds.empty()) throw InvalidArgument("sweep config: seeds empty");
    if (output_dir.empty()) throw InvalidArgument("sweep config: output_dir missing");
  }
};

namespace detail {

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view text, std::size_t line_no, Parse&& parse) {
  std::vector<T> out;
  for (std::string_view item : split_csv(text)) {
    if (item.empty()) continue;
    const std::optional<T> v = parse(item);
    if (!v) throw ParseError(line_no, "bad list item '" + std::string(item) + "'");
    out.push_back(*v);
  }
  return out;
}

}  // namespace detail

// Flat `key = value` text, `#` starts a comment, lists are comma-separated.
// Missing keys are left empty; SweepConfig::validate() reports them.
inline SweepConfig parse_sweep_config(std::istream& in) {
  SweepConfig c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    const std::string_view key = detail::trim(view.substr(0, eq));
    const std::string_view value = detail::trim(view.substr(eq + 1));
    if (key == "dataset") {
      c.dataset = value;
    } else if (key == "eps_values") {
      c.eps_values = detail::parse_list<double>(value, line_no, detail::parse_double);
    } else if (key == "em_values") {
      c.em_values = detail::parse_list<double>(value, line_no, detail::parse_double);
    } else if (key == "seeds") {
      c.seeds = detail::parse_list<std::uint64_t>(value, line_no, detail::parse_uint);
    } else if (key == "algorithms") {
      c.algorithms.clear();
      for (std::string_view item : detail::split_csv(value)) {
        if (item.empty()) continue;
        try {
          c.algorithms.push_back(parse_algorithm(item));
        } catch (const InvalidArgument& e) {
          throw ParseError(line_no, e.what());
        }
      }
    } else if (key == "output_dir") {
      c.output_dir = value;
    } else {
      throw ParseError(line_no, "unknown key '" + std::string(key) + "'");
    }
  }
  return c;
}

// Parses `synth:n=50,cell_km=1,...`; the seed is supplied separately.
inline SynthOptions parse_synth_spec(std::string_view spec) {
  constexpr std::string_view kPrefix = "synth:";
  if (spec.substr(0, kPrefix.size()) != kPrefix) {
    throw InvalidArgument("not a synthetic dataset spec: " + std::string(spec));
  }
  SynthOptions opt;
  std::optional<double> eps_low;
  std::optional<double> eps_high;
  for (std::string_view item : detail::split_csv(spec.substr(kPrefix.size()))) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidArgument("bad synthetic option '" + std::string(item) + "'");
    }
    const std::string_view key = detail::trim(item.substr(0, eq));
    const auto value = detail::parse_double(detail::trim(item.substr(eq + 1)));
    if (!value) throw InvalidArgument("bad value for synthetic option " + std::string(key));
    if (key == "n") {
      opt.n = static_cast<std::size_t>(*value);
    } else if (key == "cell_km") {
      opt.cell_km = *value;
    } else if (key == "prior_low") {
      opt.prior_low = *value;
    } else if (key == "prior_high") {
      opt.prior_high = *value;
    } else if (key == "grid_side") {
      opt.grid_side = static_cast<std::size_t>(*value);
    } else if (key == "eps_low") {
      eps_low = *value;
    } else if (key == "eps_high") {
      eps_high = *value;
    } else {
      throw InvalidArgument("unknown synthetic option '" + std::string(key) + "'");
    }
  }
  if (eps_low.has_value() != eps_high.has_value()) {
    throw InvalidArgument("eps_low and eps_high go together");
  }
  if (eps_low) opt.eps_range = std::make_pair(*eps_low, *eps_high);
  return opt;
}

inline bool is_synth_spec(std::string_view dataset) {
  return dataset.substr(0, 6) == "synth:";
}

// One long-format record; `value` is empty for infeasible cells.
struct SweepRow {
  std::string algorithm;
  double eps = 0.0;
  double em = 0.0;
  std::uint64_t seed = 0;
  std::string metric;
  std::optional<double> value;
};

inline constexpr std::array<std::string_view, 7> kSweepMetrics = {
    "exp_err", "qloss", "avg_diameter", "num_pls", "min_cond_err", "mean_avg_err",
    "mean_success"};

// All metrics of one (algorithm, eps, em, seed) cell.
inline std::vector<SweepRow> run_sweep_cell(const LocationDomain& domain,
                                            Algorithm algorithm, double eps, double em,
                                            std::uint64_t seed) {
  std::vector<SweepRow> rows;
  const auto emit = [&](std::string_view metric, std::optional<double> v) {
    rows.push_back({std::string(algorithm_name(algorithm)), eps, em, seed,
                    std::string(metric), v});
  };
  PrivacyParams params;
  params.eps = eps;
  params.em = em;
  try {
    const Partition partition = run_partition(domain, params, algorithm, seed);
    const ObfuscationMatrix matrix = run_mechanism(domain, partition, algorithm);
    const MetricsReport report = evaluate(domain, matrix);
    const double n = static_cast<double>(domain.size());
    emit("exp_err", report.exp_err);
    emit("qloss", report.qloss);
    emit("avg_diameter", algorithm == Algorithm::kEmBaseline
                             ? partition.max_diameter()
                             : weighted_avg_diameter(partition));
    emit("num_pls", static_cast<double>(partition.plss.size()));
    emit("min_cond_err", *std::min_element(report.cond_err.begin(), report.cond_err.end()));
    emit("mean_avg_err",
         std::accumulate(report.avg_err.begin(), report.avg_err.end(), 0.0) / n);
    emit("mean_success",
         std::accumulate(report.success.begin(), report.success.end(), 0.0) / n);
  } catch (const InfeasibleError&) {
    for (std::string_view m : kSweepMetrics) emit(m, std::nullopt);
  }
  return rows;
}

// Runs every cell of the grid on `threads` workers. Row order depends only
// on the config: algorithm, then eps, em, seed as listed.
inline std::vector<SweepRow> run_sweep(const SweepConfig& config,
                                       unsigned threads = std::thread::hardware_concurrency()) {
  config.validate();
  std::map<std::uint64_t, LocationDomain> domains;
  if (is_synth_spec(config.dataset)) {
    const SynthOptions base = parse_synth_spec(config.dataset);
    for (std::uint64_t seed : config.seeds) {
      SynthOptions opt = base;
      opt.seed = seed;
      domains.emplace(seed, synth_domain(opt));
    }
  } else {
    std::ifstream in(config.dataset);
    if (!in) throw IoError("cannot open dataset " + config.dataset);
    const LocationDomain d = load_domain(in);
    for (std::uint64_t seed : config.seeds) domains.emplace(seed, d);
  }

  struct Cell {
    Algorithm algorithm;
    double eps;
    double em;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (Algorithm a : config.algorithms) {
    for (double eps : config.eps_values) {
      for (double em : config.em_values) {
        for (std::uint64_t seed : config.seeds) cells.push_back({a, eps, em, seed});
      }
    }
  }
  std::vector<std::vector<SweepRow>> results(cells.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      results[i] = run_sweep_cell(domains.at(c.seed), c.algorithm, c.eps, c.em, c.seed);
    }
  };
  const unsigned count = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cells.size())));
  if (count == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(work);
  }
  std::vector<SweepRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

inline void write_sweep(std::ostream& out, std::span<const SweepRow> rows) {
  out << "algorithm,eps,em,seed,metric,value\n";
  for (const SweepRow& r : rows) {
    out << r.algorithm << ',' << detail::format_double(r.eps) << ','
        << detail::format_double(r.em) << ',' << r.seed << ',' << r.metric << ','
        << (r.value ? detail::format_double(*r.value) : std::string("NA")) << '\n';
  }
}

inline std::vector<SweepRow> read_sweep(std::istream& in) {
  std::vector<SweepRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    const auto f = detail::split_csv(view);
    if (!header_seen) {
      if (f.size() != 6 || f[0] != "algorithm") throw ParseError(line_no, "expected header");
      header_seen = true;
      continue;
    }
    if (f.size() != 6) throw ParseError(line_no, "expected 6 fields");
    SweepRow r;
    r.algorithm = f[0];
    const auto eps = detail::parse_double(f[1]);
    const auto em = detail::parse_double(f[2]);
    const auto seed = detail::parse_uint(f[3]);
    if (!eps || !em || !seed) throw ParseError(line_no, "malformed row");
    r.eps = *eps;
    r.em = *em;
    r.seed = *seed;
    r.metric = f[4];
    if (f[5] != "NA") {
      r.value = detail::parse_double(f[5]);
      if (!r.value) throw ParseError(line_no, "bad value");
    }
    rows.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError(0, "empty sweep file");
  return rows;
}

// Splits long-format rows into one `eps,em,seed,value` table per
// (algorithm, metric), keyed by file name `<algorithm>__<metric>.csv`.
inline std::map<std::string, std::string> aggregate_sweep(std::span<const SweepRow> rows) {
  std::map<std::string, std::ostringstream> tables;
  for (const SweepRow& r : rows) {
    const std::string name = r.algorithm + "__" + r.metric + ".csv";
    auto [it, inserted] = tables.try_emplace(name);
    if (inserted) it->second << "eps,em,seed,value\n";
    it->second << detail::format_double(r.eps) << ',' << detail::format_double(r.em) << ','
               << r.seed << ','
               << (r.value ? detail::format_double(*r.value) : std::string("NA")) << '\n';
  }
  std::map<std::string, std::string> out;
  for (auto& [name, s] : tables) out.emplace(name, s.str());
  return out;
}

// Writes sweep.csv plus the per-(algorithm, metric) tables into `dir`.
inline void write_sweep_outputs(const std::filesystem::path& dir,
                                std::span<const SweepRow> rows) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "sweep.csv");
    if (!out) throw IoError("cannot write " + (dir / "sweep.csv").string());
    write_sweep(out, rows);
  }
  for (const auto& [name, text] : aggregate_sweep(rows)) {
    std::ofstream out(dir / name);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    out << text;
  }
}

}  // namespace geoobf

#endif  // GEOOBF_HARNESS_HPP_
