// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Training criteria use the shipped configs.

#include <fmt/core.h>

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "gflowlab/autodiff.hpp"
#include "gflowlab/exact_eval.hpp"
#include "gflowlab/experiment.hpp"
#include "gflowlab/objectives.hpp"
#include "gflowlab/policy.hpp"
#include "gflowlab/random.hpp"
#include "gflowlab/theory.hpp"
#include "gflowlab/trainer.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace gflowlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const Outcome& o) {
  if (!o.pass) ++failures;
  fmt::print("{} {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

oracle::GridPolicy table_policy(const GridSpec& g, const PointedDag& dag, const PolicyTable& table) {
  return [&g, &dag, &table](oracle::Coord c) {
    const StateId s = grid_state(g, c.a, c.b);
    oracle::ActionProbs out{0.0, 0.0, 0.0};
    const auto& kids = dag.children(s);
    for (std::size_t k = 0; k < kids.size(); ++k) {
      if (kids[k] == dag.sink()) out[2] = table[s][k];
      else if (grid_coords(g, kids[k]).a > c.a) out[0] = table[s][k];
      else out[1] = table[s][k];
    }
    return out;
  };
}

RewardTable random_grid_reward(const PointedDag& dag, const GridSpec& g, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(dag.num_states(), 0.0);
  for (StateId s = 0; s < g.num_grid_states(); ++s) v[s] = rng.uniform(0.1, 2.0);
  return RewardTable(dag, v);
}

Outcome oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int n = 2; n <= 5; ++n) {
    const GridSpec g{n, {}};
    const auto dag = build_grid(g);
    for (std::uint64_t draw = 0; draw < 50; ++draw) {
      PolicyParams params(PolicyConfig{n, 16, Encoding::kOneHot, Parametrization::kTB, false}, draw);
      for (double& v : params.values()) v *= 1.0 + static_cast<double>(draw % 5);
      const auto table = tabulate_forward(params);
      const auto d = exact_terminal_distribution(dag, table);
      for (const auto& [c, p] : oracle::terminal_by_enumeration(n, table_policy(g, dag, table))) {
        worst = std::max(worst, std::abs(d.at(grid_state(g, c.a, c.b)) - p));
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-10 && secs < 10.0,
          fmt::format("N=2..5 x 50 draws, max abs error {:.3e} (< 1e-10), {:.2f} s (< 10 s)", worst, secs)};
}

template <typename Loss>
double gradient_error(const PolicyParams& params, Loss&& loss) {
  ad::Tape tape(params.values());
  TapedPolicy model(params, tape);
  tape.backward(loss(model));
  const auto fd = oracle::finite_difference(
      [&](const std::vector<double>& theta) {
        const PolicyParams probe(params.config(), theta);
        EvaluatedPolicy m(probe);
        return loss(m);
      },
      std::vector<double>(params.values().begin(), params.values().end()), 1e-4);
  double worst = 0.0;
  for (std::size_t i = 0; i < fd.size(); ++i) worst = std::max(worst, oracle::relative_error(tape.gradient()[i], fd[i]));
  return worst;
}

Outcome gradient_correctness() {
  const GridSpec g{4, {{1, 2, 2, 3}}};
  const auto dag = build_grid(g);
  const auto reward = RewardTable::for_grid(g);
  auto r = [&](StateId s) { return reward.at(s); };
  const auto mask = HidingMask::none(dag.num_states());
  double worst_tb = 0.0;
  double worst_db = 0.0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    PolicyParams tb(PolicyConfig{4, 16, Encoding::kOneHot, Parametrization::kTB, k % 4 == 3}, 1000 + k);
    tb.set_log_z(0.05 * static_cast<double>(k % 20));
    Rng rng(k, 11);
    const Trajectory t1 = sample_trajectory(tb, dag, rng, 0.5);
    worst_tb = std::max(worst_tb, gradient_error(tb, [&](auto& m) { return tb_loss(dag, t1, m, r); }));

    PolicyParams db(PolicyConfig{4, 16, Encoding::kOneHot, Parametrization::kDB, k % 4 == 1}, 2000 + k);
    const Trajectory t2 = sample_trajectory(db, dag, rng, 0.5);
    worst_db = std::max(worst_db, gradient_error(db, [&](auto& m) {
                          return *trajectory_db_loss(dag, t2, m, r, mask).total;
                        }));
  }
  return {worst_tb < 1e-4 && worst_db < 1e-4,
          fmt::format("4x4, 100 TB + 100 DB checks, max relative error TB {:.3e}, DB {:.3e} (< 1e-4)", worst_tb,
                      worst_db)};
}

Outcome minimizer_certificate() {
  const GridSpec g{4, {}};
  const auto dag = build_grid(g);
  const auto reward = random_grid_reward(dag, g, 17);
  const auto m = exact_minimizer(dag, reward);
  auto model = minimizer_policy(dag, m);
  auto r = [&](StateId s) { return reward.at(s); };
  double worst = 0.0;
  for (const auto& t : m.trajectories) worst = std::max(worst, tb_loss(dag, t, model, r));
  const double d = jsd(exact_terminal_distribution(dag, m.forward), normalized_reward(dag, reward));
  return {worst < 1e-18 && d < 1e-12,
          fmt::format("4x4, {} trajectories, max TB loss {:.3e} (< 1e-18), JSD to R/Z {:.3e} (< 1e-12)",
                      m.trajectories.size(), worst, d)};
}

Outcome stability_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const GridSpec g{4, {}};
  const auto dag = build_grid(g);
  const auto result = stability_check(dag, random_grid_reward(dag, g, 23), 0.01, 100, 0);
  int violations = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  for (const auto& rep : result.reports) {
    if (rep.slack() < -1e-12) ++violations;
    worst_slack = std::min(worst_slack, rep.slack());
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && result.reports.size() == 100 && secs < 30.0,
          fmt::format("4x4, {} perturbations, {} violations, worst slack {:.3e} (>= -1e-12), C/Z = {:.4g}, "
                      "max tightness {:.4f}, {:.2f} s (< 30 s)",
                      result.reports.size(), violations, worst_slack, result.c / result.z, result.max_tightness, secs)};
}

Outcome lemma_suites() {
  CertificationConfig cfg;
  cfg.lemma_trials = 1000;
  cfg.iid_trials = 1000;
  cfg.perturbations = 1;
  const auto suites = run_certification(cfg);
  bool ok = true;
  std::string detail;
  for (const auto& s : suites) {
    if (s.name == "stability") continue;
    int violations = 0;
    for (const auto& rep : s.reports) violations += rep.slack() < -1e-9 ? 1 : 0;
    ok = ok && violations == 0 && s.trials >= 1000;
    detail += fmt::format("{}{} {}/{} ok", detail.empty() ? "" : ", ", s.name, s.trials - violations, s.trials);
  }
  return {ok, detail + " (slack >= -1e-9)"};
}

bool no_hidden_reads(const TrainingTrace& trace, const HidingMask& mask, std::uint64_t& visible) {
  for (StateId s = 0; s < trace.reward_reads.size(); ++s) {
    if (mask.is_hidden(s) && trace.reward_reads[s] != 0) return false;
    if (!mask.is_hidden(s)) visible += trace.reward_reads[s];
  }
  return true;
}

void sweep_criteria(const fs::path& out) {
  const auto cfg = load_config(fs::path(GFLOW_LAB_CONFIG_DIR) / "sweep_8x8.conf");
  const auto t0 = std::chrono::steady_clock::now();
  const auto result = run_sweep(cfg);
  const double secs = seconds_since(t0);
  fs::create_directories(out / "sweep");
  {
    std::ofstream f(out / "sweep" / "summary.csv");
    write_summary_csv(f, result);
  }
  auto final = [&](Parametrization loss, bool masked) { return result.cell(loss, masked).final_mean_jsd(); };
  const std::string setting = fmt::format("8x8, {} hidden, {} seeds, {} iterations, {:.0f} s (< 600 s)",
                                          result.mask.count(), cfg.train.seeds.size(), cfg.train.iterations, secs);

  bool a = !result.any_aborted();
  std::string detail;
  for (auto loss : cfg.losses) {
    const double u = final(loss, false);
    const double m = final(loss, true);
    a = a && u <= m;
    detail += fmt::format("{}{} {:.4e} <= {:.4e}", detail.empty() ? "" : ", ", to_string(loss), u, m);
  }
  report("sweep (a) unmasked <= masked", {a && secs < 600.0, detail + "; " + setting});

  const double tb = final(Parametrization::kTB, true);
  const double db = final(Parametrization::kDB, true);
  const double fldb = final(Parametrization::kFLDB, true);
  report("sweep (b) FL-DB(masked) < TB(masked)",
         {fldb < tb, fmt::format("FL-DB {:.4e} vs TB {:.4e}", fldb, tb)});
  report("sweep (c) DB(masked) <= 1.1 x TB(masked)",
         {db <= 1.1 * tb, fmt::format("DB {:.4e} vs 1.1 x TB {:.4e}; strict DB < TB: {}", db, 1.1 * tb,
                                      db < tb ? "yes" : "no")});

  bool firewall = true;
  for (const auto& cell : result.cells) {
    if (!cell.masked) continue;
    for (const auto& t : cell.traces) {
      std::uint64_t visible = 0;
      firewall = firewall && no_hidden_reads(t, result.mask, visible);
    }
  }
  report("sweep firewall", {firewall, "masked sweep runs read no hidden reward"});
}

Outcome firewall() {
  const GridSpec g{8, default_nine_modes(8)};
  const std::vector<std::pair<std::string, HidingMask>> masks{
      {"skip-trajectory", sample_hidden_states(g, 48, 0)},
      {"forbid-terminate", sample_hidden_states(g, 48, 0, false, HidingMode::kForbidTerminate)},
      {"length", length_mask(g, 7)}};
  bool ok = true;
  std::uint64_t runs = 0;
  std::uint64_t visible = 0;
  for (const auto& [name, mask] : masks) {
    for (auto loss : {Parametrization::kTB, Parametrization::kDB, Parametrization::kFLDB}) {
      TrainConfig cfg;
      cfg.grid = g;
      cfg.loss = loss;
      cfg.mask = mask;
      cfg.iterations = 1000;
      cfg.eval_every = 1000;
      cfg.hidden_width = 16;
      cfg.epsilon_uniform = 0.5;
      cfg.seeds = {0, 1};
      for (const auto& t : train(cfg)) {
        ++runs;
        ok = ok && !t.abort_reason && no_hidden_reads(t, mask, visible);
      }
    }
  }
  return {ok && visible > 0, fmt::format("{} runs over 3 mask modes x 3 losses, 0 hidden reads required, {} visible "
                                         "reads",
                                         runs, visible)};
}

Outcome length_generalization(const fs::path& out) {
  const auto cfg = load_config(fs::path(GFLOW_LAB_CONFIG_DIR) / "length_16x16.conf");
  const auto t0 = std::chrono::steady_clock::now();
  const auto result = run_length(cfg);
  const double secs = seconds_since(t0);
  const auto grid = cfg.grid();
  fs::create_directories(out / "length");
  {
    std::ofstream f(out / "length" / "target.pgm");
    write_pgm(f, grid, result.target);
  }
  const auto& run = result.runs.at(0);
  {
    std::ofstream f(out / "length" / fmt::format("learned_{}.pgm", to_string(run.loss)));
    write_pgm(f, grid, run.mean_distribution);
  }
  const bool ok = run.hidden_mode_cells > 0 && 2 * run.reconstructed_mode_cells >= run.hidden_mode_cells;
  return {ok, fmt::format("16x16, threshold {}, {} seeds: {}/{} hidden mode cells at >= 50% of ideal mass "
                          "(soft target: half), hidden mass {:.4f} vs ideal {:.4f}, {:.0f} s; heatmaps in {}",
                          *cfg.length_threshold, cfg.train.seeds.size(), run.reconstructed_mode_cells,
                          run.hidden_mode_cells, run.hidden_mass, run.ideal_hidden_mass, secs,
                          (out / "length").string())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gflow-lab acceptance run"};
  std::string out = "acceptance-out";
  bool skip_training = false;
  app.add_option("--out", out, "directory for summaries and heatmaps");
  app.add_flag("--skip-training", skip_training, "run only the exact and property criteria");
  CLI11_PARSE(app, argc, argv);

  report("oracle equivalence", oracle_equivalence());
  report("gradient correctness", gradient_correctness());
  report("exact-minimizer certificate", minimizer_certificate());
  report("stability suite", stability_suite());
  report("lemma suites", lemma_suites());
  report("reward-access firewall", firewall());
  if (!skip_training) {
    sweep_criteria(out);
    report("length generalization (soft target)", length_generalization(out));
  }
  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
