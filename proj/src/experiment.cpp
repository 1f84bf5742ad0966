// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "gflowlab/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "gflowlab/parallel.hpp"

namespace gflowlab {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Config parsing

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(fmt::format("invalid value '{}' for key '{}'", value, key));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(fmt::format("invalid boolean '{}' for key '{}'", value, key));
}

std::vector<std::uint64_t> parse_seeds(std::string_view value) {
  std::vector<std::uint64_t> seeds;
  for (auto item : split(value, ',')) {
    const auto dash = item.find('-');
    if (dash != std::string_view::npos && dash > 0) {
      const auto lo = parse_number<std::uint64_t>("seeds", trim(item.substr(0, dash)));
      const auto hi = parse_number<std::uint64_t>("seeds", trim(item.substr(dash + 1)));
      if (hi < lo) throw ConfigError(fmt::format("empty seed range '{}'", item));
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      seeds.push_back(parse_number<std::uint64_t>("seeds", item));
    }
  }
  if (seeds.empty()) throw ConfigError("seed list is empty");
  return seeds;
}

}  // namespace

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  auto& t = train;
  try {
    if (key == "grid_side") t.grid.side = parse_number<int>(key, value);
    else if (key == "modes") modes = std::string(value);
    else if (key == "losses") {
      losses.clear();
      for (auto item : split(value, ',')) losses.push_back(parse_parametrization(item));
    } else if (key == "comparison") {
      if (value == "both") comparison = MaskComparison::kBoth;
      else if (value == "masked") comparison = MaskComparison::kMaskedOnly;
      else if (value == "unmasked") comparison = MaskComparison::kUnmaskedOnly;
      else throw ConfigError(fmt::format("comparison must be both, masked or unmasked, got '{}'", value));
    } else if (key == "hidden_count") hidden_count = parse_number<int>(key, value);
    else if (key == "mask_seed") mask_seed = parse_number<std::uint64_t>(key, value);
    else if (key == "mask_mode") {
      if (value == "skip-trajectory") mask_mode = HidingMode::kSkipTrajectory;
      else if (value == "forbid-terminate") mask_mode = HidingMode::kForbidTerminate;
      else throw ConfigError(fmt::format("mask_mode must be skip-trajectory or forbid-terminate, got '{}'", value));
    } else if (key == "mask_exclude_modes") mask_exclude_modes = parse_bool(key, value);
    else if (key == "length_threshold") {
      if (value == "none") length_threshold.reset();
      else length_threshold = parse_number<int>(key, value);
    } else if (key == "optimizer") {
      if (value == "adam") t.optimizer.kind = OptimizerKind::kAdam;
      else if (value == "sgd") t.optimizer.kind = OptimizerKind::kSgd;
      else throw ConfigError(fmt::format("optimizer must be adam or sgd, got '{}'", value));
    } else if (key == "learning_rate") t.optimizer.learning_rate = parse_number<double>(key, value);
    else if (key == "log_z_learning_rate") t.optimizer.log_z_learning_rate = parse_number<double>(key, value);
    else if (key == "adam_beta1") t.optimizer.beta1 = parse_number<double>(key, value);
    else if (key == "adam_beta2") t.optimizer.beta2 = parse_number<double>(key, value);
    else if (key == "adam_epsilon") t.optimizer.epsilon = parse_number<double>(key, value);
    else if (key == "iterations") t.iterations = parse_number<int>(key, value);
    else if (key == "batch_size") t.batch_size = parse_number<int>(key, value);
    else if (key == "seeds") t.seeds = parse_seeds(value);
    else if (key == "eval_every") t.eval_every = parse_number<int>(key, value);
    else if (key == "epsilon_uniform") t.epsilon_uniform = parse_number<double>(key, value);
    else if (key == "hidden_width") t.hidden_width = parse_number<int>(key, value);
    else if (key == "encoding") t.encoding = parse_encoding(value);
    else if (key == "learned_backward") t.learned_backward = parse_bool(key, value);
    else if (key == "jobs") t.jobs = parse_number<int>(key, value);
    else if (key == "output_dir") output_dir = std::string(value);
    else throw ConfigError(fmt::format("unknown config key '{}'", key));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("key '{}': {}", key, e.what()));
  }
}

void ExperimentConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError(fmt::format("expected key=value, got '{}'", assignment));
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

GridSpec ExperimentConfig::grid() const {
  GridSpec g{train.grid.side, {}};
  try {
    if (modes == "nine") g.modes = default_nine_modes(g.side);
    else g.modes = parse_modes(modes);
    g.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return g;
}

fs::path ExperimentConfig::output_path() const {
  if (!output_dir.empty()) return output_dir;
  if (const char* env = std::getenv("GFLOW_LAB_OUT"); env && *env) return env;
  return "gflow-lab-out";
}

HidingMask ExperimentConfig::mask() const {
  const GridSpec g = grid();
  try {
    if (length_threshold) return length_mask(g, *length_threshold);
    return sample_hidden_states(g, hidden_count, mask_seed, mask_exclude_modes, mask_mode);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    if (view.find('=') == std::string_view::npos) {
      throw ConfigError(fmt::format("line {}: expected 'key = value'", number));
    }
    try {
      cfg.apply_override(view);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("line {}: {}", number, e.what()));
    }
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
  return parse_config(in);
}

// ---------------------------------------------------------------------------
// Sweep

double SweepCell::final_mean_jsd() const {
  double total = 0.0;
  for (const auto& t : traces) total += t.records.back().jsd;
  return total / static_cast<double>(traces.size());
}

const SweepCell& SweepResult::cell(Parametrization loss, bool masked) const {
  for (const auto& c : cells) {
    if (c.loss == loss && c.masked == masked) return c;
  }
  throw std::out_of_range(fmt::format("sweep has no {} {} cell", to_string(loss), masked ? "masked" : "unmasked"));
}

bool SweepResult::any_aborted() const {
  return std::any_of(cells.begin(), cells.end(), [](const SweepCell& c) {
    return std::any_of(c.traces.begin(), c.traces.end(), [](const TrainingTrace& t) { return t.abort_reason.has_value(); });
  });
}

namespace {

TrainConfig cell_config(const ExperimentConfig& config, Parametrization loss, const HidingMask* mask) {
  TrainConfig t = config.train;
  t.grid = config.grid();
  t.loss = loss;
  t.mask = mask ? *mask : HidingMask::none(t.grid.num_grid_states() + 1);
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return t;
}

// Trains every (cell, seed) pair, spreading pairs over the worker threads.
std::vector<std::vector<TrainingTrace>> train_cells(const std::vector<TrainConfig>& cells, int jobs) {
  std::vector<std::pair<std::size_t, std::size_t>> work;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t s = 0; s < cells[c].seeds.size(); ++s) work.emplace_back(c, s);
  }
  std::vector<std::vector<std::optional<TrainingTrace>>> slots(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) slots[c].resize(cells[c].seeds.size());
  parallel_for(work.size(), static_cast<std::size_t>(std::max(1, jobs)), [&](std::size_t i) {
    const auto [c, s] = work[i];
    slots[c][s] = train_seed(cells[c], cells[c].seeds[s]);
  });
  std::vector<std::vector<TrainingTrace>> out(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (auto& t : slots[c]) out[c].push_back(std::move(*t));
  }
  return out;
}

std::string fmt17(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

SweepResult run_sweep(const ExperimentConfig& config) {
  SweepResult result;
  result.mask = config.mask();
  std::vector<bool> mask_flags;
  if (config.comparison != MaskComparison::kMaskedOnly) mask_flags.push_back(false);
  if (config.comparison != MaskComparison::kUnmaskedOnly) mask_flags.push_back(true);

  std::vector<TrainConfig> configs;
  for (auto loss : config.losses) {
    for (bool masked : mask_flags) {
      configs.push_back(cell_config(config, loss, masked ? &result.mask : nullptr));
      result.cells.push_back(SweepCell{loss, masked, {}});
    }
  }
  auto traces = train_cells(configs, config.train.jobs);
  for (std::size_t c = 0; c < result.cells.size(); ++c) result.cells[c].traces = std::move(traces[c]);
  return result;
}

void write_curves_csv(std::ostream& out, const SweepResult& result) {
  out << "loss,masked,seed,iteration,jsd,train_loss\n";
  for (const auto& cell : result.cells) {
    for (const auto& trace : cell.traces) {
      for (const auto& r : trace.records) {
        out << to_string(cell.loss) << ',' << (cell.masked ? 1 : 0) << ',' << trace.seed << ',' << r.iteration << ','
            << fmt17(r.jsd) << ',' << fmt17(r.train_loss) << '\n';
      }
    }
  }
}

void write_summary_csv(std::ostream& out, const SweepResult& result) {
  out << "loss,masked,iteration,mean_jsd,mean_train_loss,seeds\n";
  for (const auto& cell : result.cells) {
    // Seeds share the eval cadence, so records align by position unless a run aborted.
    std::size_t points = std::numeric_limits<std::size_t>::max();
    for (const auto& t : cell.traces) points = std::min(points, t.records.size());
    for (std::size_t i = 0; i < points; ++i) {
      double jsd_sum = 0.0;
      double loss_sum = 0.0;
      int loss_count = 0;
      for (const auto& t : cell.traces) {
        jsd_sum += t.records[i].jsd;
        if (std::isfinite(t.records[i].train_loss)) {
          loss_sum += t.records[i].train_loss;
          ++loss_count;
        }
      }
      const double n = static_cast<double>(cell.traces.size());
      const double mean_loss = loss_count ? loss_sum / loss_count : std::numeric_limits<double>::quiet_NaN();
      out << to_string(cell.loss) << ',' << (cell.masked ? 1 : 0) << ',' << cell.traces.front().records[i].iteration
          << ',' << fmt17(jsd_sum / n) << ',' << fmt17(mean_loss) << ',' << cell.traces.size() << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Length generalization

LengthResult run_length(const ExperimentConfig& config) {
  if (!config.length_threshold) throw ConfigError("the length command needs length_threshold");
  LengthResult result;
  const GridSpec grid = config.grid();
  const PointedDag dag = build_grid(grid);
  const RewardTable rewards = RewardTable::for_grid(grid);
  result.mask = config.mask();
  result.target = normalized_reward(dag, rewards);

  std::vector<TrainConfig> configs;
  for (auto loss : config.losses) configs.push_back(cell_config(config, loss, &result.mask));
  auto traces = train_cells(configs, config.train.jobs);

  for (std::size_t c = 0; c < configs.size(); ++c) {
    LengthRun run;
    run.loss = configs[c].loss;
    run.traces = std::move(traces[c]);
    run.mean_distribution = result.target;
    std::fill(run.mean_distribution.probs.begin(), run.mean_distribution.probs.end(), 0.0);
    for (const auto& t : run.traces) {
      const auto d = exact_terminal_distribution(dag, tabulate_forward(t.final_params));
      for (std::size_t i = 0; i < d.probs.size(); ++i) {
        run.mean_distribution.probs[i] += d.probs[i] / static_cast<double>(run.traces.size());
      }
    }
    for (std::size_t i = 0; i < result.target.states.size(); ++i) {
      const StateId x = result.target.states[i];
      if (!result.mask.is_hidden(x)) continue;
      run.hidden_mass += run.mean_distribution.probs[i];
      run.ideal_hidden_mass += result.target.probs[i];
      if (reward(grid, x) > 1.0) {
        ++run.hidden_mode_cells;
        if (run.mean_distribution.probs[i] >= 0.5 * result.target.probs[i]) ++run.reconstructed_mode_cells;
      }
    }
    result.runs.push_back(std::move(run));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Certification

std::pair<PointedDag, RewardTable> parse_dag_file(std::istream& in) {
  std::size_t states = 0;
  std::vector<Edge> edges;
  std::vector<std::pair<StateId, double>> rewards;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string key;
    if (!(fields >> key)) continue;
    bool ok = true;
    if (key == "states") {
      ok = static_cast<bool>(fields >> states);
    } else if (key == "edge") {
      StateId from = 0, to = 0;
      ok = static_cast<bool>(fields >> from >> to);
      edges.emplace_back(from, to);
    } else if (key == "reward") {
      StateId s = 0;
      double r = 0.0;
      ok = static_cast<bool>(fields >> s >> r);
      rewards.emplace_back(s, r);
    } else {
      throw ConfigError(fmt::format("dag file line {}: unknown directive '{}'", number, key));
    }
    if (!ok || !(fields >> std::ws).eof()) throw ConfigError(fmt::format("dag file line {}: malformed", number));
  }
  try {
    PointedDag dag(states, std::move(edges));
    std::vector<double> values(states, 0.0);
    for (const auto& [s, r] : rewards) {
      if (s >= states) throw std::invalid_argument(fmt::format("reward for unknown state {}", s));
      values[s] = r;
    }
    RewardTable table(dag, std::move(values));
    return {std::move(dag), std::move(table)};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("dag file: {}", e.what()));
  }
}

void write_certification_table(std::ostream& out, const std::vector<SuiteResult>& suites) {
  out << fmt::format("{:<12} {:>7} {:>8} {:>14} {:>14} {:>14}  {:<6} {}\n", "check", "trials", "failures",
                     "worst lhs", "worst rhs", "worst slack", "result", "witness");
  for (const auto& s : suites) {
    const auto& w = s.worst;
    out << fmt::format("{:<12} {:>7} {:>8} {:>14.6e} {:>14.6e} {:>14.6e}  {:<6} {}\n", s.name, s.trials, s.failures,
                       w ? w->lhs : 0.0, w ? w->rhs : 0.0, w ? w->slack() : 0.0, s.passed() ? "PASS" : "FAIL",
                       w ? w->witness : "");
  }
  for (const auto& s : suites) {
    for (const auto& note : s.notes) out << "  " << s.name << ": " << note << '\n';
  }
}

void write_certification_csv(std::ostream& out, const std::vector<SuiteResult>& suites) {
  out << "check,lhs,rhs,slack,witness,pass\n";
  for (const auto& s : suites) {
    for (const auto& r : s.reports) {
      out << r.check << ',' << fmt17(r.lhs) << ',' << fmt17(r.rhs) << ',' << fmt17(r.slack()) << ",\"" << r.witness
          << "\"," << (r.passed() ? 1 : 0) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Commands

namespace {

void write_file(const fs::path& path, const auto& writer) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  writer(out);
}

std::string cell_name(Parametrization loss, bool masked) {
  return fmt::format("{}_{}", to_string(loss), masked ? "masked" : "unmasked");
}

void write_mask_pgm(std::ostream& out, const GridSpec& grid, const HidingMask& mask) {
  out << "P2\n" << grid.side << ' ' << grid.side << "\n255\n";
  for (int a = 0; a < grid.side; ++a) {
    for (int b = 0; b < grid.side; ++b) out << (b ? " " : "") << (mask.is_hidden(grid_state(grid, a, b)) ? 255 : 0);
    out << '\n';
  }
}

void report_aborts(const std::vector<TrainingTrace>& traces, std::string_view label, std::ostream& log) {
  for (const auto& t : traces) {
    if (t.abort_reason) {
      log << fmt::format("error: {} seed {} aborted at iteration {}: {}\n", label, t.seed, *t.abort_iteration,
                         *t.abort_reason);
    }
  }
}

template <class Fn>
int guarded(std::ostream& log, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
}

}  // namespace

int cmd_sweep(const ExperimentConfig& config, std::ostream& log) {
  return guarded(log, [&] {
    const GridSpec grid = config.grid();
    const fs::path dir = config.output_path();
    const SweepResult result = run_sweep(config);
    fs::create_directories(dir / "checkpoints");
    write_file(dir / "curves.csv", [&](std::ostream& o) { write_curves_csv(o, result); });
    write_file(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, result); });
    write_file(dir / "mask.pgm", [&](std::ostream& o) { write_mask_pgm(o, grid, result.mask); });
    for (const auto& cell : result.cells) {
      for (const auto& t : cell.traces) {
        write_file(dir / "checkpoints" / fmt::format("{}_seed{}.ckpt", cell_name(cell.loss, cell.masked), t.seed),
                   [&](std::ostream& o) { save_checkpoint(o, grid, t.final_params); });
      }
    }
    log << fmt::format("{:<16} {:>16}\n", "curve", "final mean JSD");
    for (const auto& cell : result.cells) {
      log << fmt::format("{:<16} {:>16.6e}\n", cell_name(cell.loss, cell.masked), cell.final_mean_jsd());
      report_aborts(cell.traces, cell_name(cell.loss, cell.masked), log);
    }
    log << "wrote " << (dir / "curves.csv").string() << '\n';
    return result.any_aborted() ? kExitRuntimeError : kExitOk;
  });
}

int cmd_length(const ExperimentConfig& config, std::ostream& log) {
  return guarded(log, [&] {
    const GridSpec grid = config.grid();
    const fs::path dir = config.output_path();
    const LengthResult result = run_length(config);
    fs::create_directories(dir / "checkpoints");
    write_file(dir / "target.csv", [&](std::ostream& o) { write_csv_matrix(o, grid, result.target); });
    write_file(dir / "target.pgm", [&](std::ostream& o) { write_pgm(o, grid, result.target); });
    write_file(dir / "mask.pgm", [&](std::ostream& o) { write_mask_pgm(o, grid, result.mask); });
    bool aborted = false;
    for (const auto& run : result.runs) {
      const auto name = std::string(to_string(run.loss));
      write_file(dir / fmt::format("learned_{}.csv", name),
                 [&](std::ostream& o) { write_csv_matrix(o, grid, run.mean_distribution); });
      write_file(dir / fmt::format("learned_{}.pgm", name),
                 [&](std::ostream& o) { write_pgm(o, grid, run.mean_distribution); });
      const PointedDag dag = build_grid(grid);
      for (const auto& t : run.traces) {
        const auto d = exact_terminal_distribution(dag, tabulate_forward(t.final_params));
        write_file(dir / fmt::format("learned_{}_seed{}.csv", name, t.seed),
                   [&](std::ostream& o) { write_csv_matrix(o, grid, d); });
        write_file(dir / "checkpoints" / fmt::format("{}_seed{}.ckpt", name, t.seed),
                   [&](std::ostream& o) { save_checkpoint(o, grid, t.final_params); });
        aborted = aborted || t.abort_reason.has_value();
      }
      report_aborts(run.traces, name, log);
      log << fmt::format("{}: hidden mass {:.6f} (ideal {:.6f}); hidden mode cells at >= 50% of ideal: {}/{}\n", name,
                         run.hidden_mass, run.ideal_hidden_mass, run.reconstructed_mode_cells, run.hidden_mode_cells);
    }
    return aborted ? kExitRuntimeError : kExitOk;
  });
}

int cmd_certify(const CertifyOptions& options, std::ostream& log) {
  return guarded(log, [&] {
    std::vector<SuiteResult> suites;
    if (options.dag_file) {
      std::ifstream in(*options.dag_file);
      if (!in) throw ConfigError(fmt::format("cannot open dag file {}", options.dag_file->string()));
      auto [dag, reward] = parse_dag_file(in);
      suites = run_certification(options.config, dag, reward);
    } else {
      if (options.config.grid_side < 2 || options.config.grid_side > 5) {
        throw ConfigError("certify needs a grid side between 2 and 5");
      }
      suites = run_certification(options.config);
    }
    write_certification_table(log, suites);
    if (options.output_dir) {
      fs::create_directories(*options.output_dir);
      write_file(*options.output_dir / "certify.csv", [&](std::ostream& o) { write_certification_csv(o, suites); });
    }
    bool ok = true;
    for (const auto& s : suites) {
      if (s.passed()) continue;
      ok = false;
      int shown = 0;
      for (const auto& r : s.reports) {
        if (r.passed()) continue;
        log << fmt::format("FAILED {}: lhs {:.17g} > rhs {:.17g} ({})\n", r.check, r.lhs, r.rhs, r.witness);
        if (++shown == 5) break;
      }
    }
    return ok ? kExitOk : kExitCertificationFailure;
  });
}

int cmd_eval(const fs::path& checkpoint, const std::optional<fs::path>& output_dir, std::ostream& log) {
  return guarded(log, [&] {
    std::ifstream in(checkpoint);
    if (!in) throw ConfigError(fmt::format("cannot open checkpoint {}", checkpoint.string()));
    const Checkpoint ckpt = load_checkpoint(in);
    const PointedDag dag = build_grid(ckpt.grid);
    const auto learned = exact_terminal_distribution(dag, tabulate_forward(ckpt.params));
    const auto target = normalized_reward(dag, RewardTable::for_grid(ckpt.grid));
    log << fmt::format("jsd {:.17g}\nkl(learned||target) {:.17g}\ntv {:.17g}\n", jsd(learned, target),
                       kl(learned, target), tv(learned, target));
    if (output_dir) {
      fs::create_directories(*output_dir);
      const auto stem = checkpoint.stem().string();
      write_file(*output_dir / (stem + ".csv"), [&](std::ostream& o) { write_csv_matrix(o, ckpt.grid, learned); });
      write_file(*output_dir / (stem + ".pgm"), [&](std::ostream& o) { write_pgm(o, ckpt.grid, learned); });
    }
    return kExitOk;
  });
}

}  // namespace gflowlab
