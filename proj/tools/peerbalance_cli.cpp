// peerbalance: command-line front end.
//
//   peerbalance run    [--config spec.json] [overrides...]   replicated experiment
//   peerbalance once   [options]                             single run, full trajectory
//   peerbalance verify [lemma1|lemma2|theorem1|adversarial|all]
//
// Exit codes: 0 success, 1 config error, 2 truncated runs present,
// 3 verification failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "peerbalance/csv.hpp"
#include "peerbalance/error.hpp"
#include "peerbalance/experiments.hpp"
#include "peerbalance/verify.hpp"

namespace pb = peerbalance;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitTruncated = 2;
constexpr int kExitVerify = 3;

struct Overrides {
  std::optional<std::size_t> m;
  std::vector<double> betas;
  std::vector<std::string> protocols;
  std::optional<std::uint64_t> budget;
  std::optional<std::uint64_t> max_draws;
  std::optional<std::uint64_t> seed;
  std::optional<double> d_epsilon;
  std::optional<double> ows_gap;
  std::optional<std::size_t> reps;
  std::optional<unsigned> threads;
  std::string weights;

  void add_to(CLI::App* cmd, bool many_protocols) {
    cmd->add_option("--m", m, "Number of agents");
    cmd->add_option("--beta", betas, many_protocols ? "Loss constant(s)" : "Loss constant")
        ->expected(many_protocols ? -1 : 1);
    cmd->add_option("--protocol", protocols, "ows | swt | owa | swt-flat")
        ->expected(many_protocols ? -1 : 1);
    cmd->add_option("--budget", budget, "Useful interactions per run");
    cmd->add_option("--max-draws", max_draws, "Scheduler draw cap per run");
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_option("--deps", d_epsilon, "Energy quantum for SWT");
    cmd->add_option("--ows-gap", ows_gap, "OWS: minimum relative-energy gap for a transfer");
    cmd->add_option("--weights", weights, "two_tier | equal");
  }

  void apply(pb::ExperimentSpec& spec) const {
    if (m) spec.m = *m;
    if (!betas.empty()) spec.betas = betas;
    if (!protocols.empty()) {
      spec.protocols.clear();
      for (const auto& name : protocols) {
        const auto kind = pb::parse_protocol(name);
        if (!kind) throw pb::Error(pb::ErrorCode::Config, "unknown protocol '" + name + "'");
        spec.protocols.push_back(*kind);
      }
    }
    if (budget) spec.budget = *budget;
    if (max_draws) spec.max_draws = *max_draws;
    if (seed) spec.master_seed = *seed;
    if (d_epsilon) spec.params.d_epsilon = *d_epsilon;
    if (ows_gap) spec.params.ows_min_gap = *ows_gap;
    if (reps) spec.replications = *reps;
    if (threads) spec.threads = *threads;
    if (weights == "equal") {
      spec.weights.kind = pb::WeightSpec::Kind::Equal;
    } else if (weights == "two_tier") {
      spec.weights.kind = pb::WeightSpec::Kind::TwoTier;
    } else if (!weights.empty()) {
      throw pb::Error(pb::ErrorCode::Config, "unknown weights '" + weights + "'");
    }
  }
};

int cmd_run(const std::string& config, const Overrides& ov, const std::string& out,
            bool write_raw) {
  pb::ExperimentSpec spec = config.empty() ? pb::paper_default_spec() : pb::load_spec(config);
  ov.apply(spec);
  pb::validate(spec);
  const pb::ExperimentResult result = pb::run_experiment(spec);
  pb::write_experiment(result, out, write_raw);
  for (const auto& cell : result.cells) {
    const auto& rows = cell.aggregate.rows;
    std::cout << pb::cell_stem(cell.protocol, cell.beta) << ": "
              << cell.runs.size() << " runs";
    if (!rows.empty()) {
      std::cout << ", final mean tvd " << rows.back().mean_tvd << ", final mean energy "
                << rows.back().mean_total_energy;
    }
    if (cell.truncated_runs) std::cout << ", " << cell.truncated_runs << " truncated";
    std::cout << '\n';
  }
  std::cout << "wrote " << out << '\n';
  return result.any_truncated() ? kExitTruncated : kExitOk;
}

int cmd_once(const Overrides& ov, const std::string& out, const std::string& efficiency_out) {
  pb::ExperimentSpec spec = pb::paper_default_spec();
  spec.betas = {0.0};
  spec.protocols = {pb::ProtocolKind::Ows};
  spec.replications = 1;
  ov.apply(spec);
  if (spec.betas.size() != 1 || spec.protocols.size() != 1) {
    throw pb::Error(pb::ErrorCode::Config, "once takes a single --beta and --protocol");
  }
  pb::validate(spec);
  const auto cfg = pb::replication_config(spec, spec.protocols[0], spec.betas[0], 0);
  const pb::Trajectory traj = pb::run(cfg);

  if (out.empty() || out == "-") {
    std::cout << "k,draws,total_energy,tvd,cumulative_loss\n";
    for (const auto& r : traj.rows) {
      std::cout << r.k << ',' << r.draws << ',' << pb::csv::format_double(r.total_energy) << ','
                << pb::csv::format_double(r.tvd) << ','
                << pb::csv::format_double(r.cumulative_loss) << '\n';
    }
  } else {
    pb::emit_csv(traj, out);
  }
  if (!efficiency_out.empty()) pb::emit_csv(pb::efficiency_series(traj), efficiency_out);
  std::cerr << "initial tvd " << traj.initial_tvd << ", " << traj.rows.size()
            << " useful interactions in " << traj.total_draws << " draws"
            << (traj.truncated ? " (truncated)" : "") << '\n';
  return traj.truncated ? kExitTruncated : kExitOk;
}

int cmd_verify(const std::string& which, std::size_t instances, std::size_t reps,
               std::uint64_t seed) {
  std::vector<pb::verify::Report> reports;
  const bool all = which == "all";
  bool known = all;
  if (all || which == "lemma1") {
    known = true;
    reports.push_back(pb::verify::lemma1_random(instances, seed));
    reports.push_back(pb::verify::lemma1_tightness({5, 20, 100}, seed));
  }
  if (all || which == "lemma2") {
    known = true;
    reports.push_back(pb::verify::lemma2_random(instances, 0.01, seed));
  }
  if (all || which == "theorem1") {
    known = true;
    reports.push_back(pb::verify::theorem1_convergence(100, reps, 0.01, seed));
  }
  if (all || which == "adversarial") {
    known = true;
    reports.push_back(pb::verify::adversarial_increase(20, 0.2));
  }
  if (!known) throw pb::Error(pb::ErrorCode::Config, "unknown check '" + which + "'");

  bool ok = true;
  for (const auto& r : reports) {
    std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << '\n';
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Peer-to-peer weighted energy balancing simulator"};
  app.require_subcommand(1);

  std::string config, out = "results", once_out, efficiency_out;
  bool write_raw = false;
  Overrides run_ov, once_ov;

  auto* run_cmd = app.add_subcommand("run", "Replicated experiment over protocols and betas");
  run_cmd->add_option("--config", config, "JSON experiment spec")->check(CLI::ExistingFile);
  run_ov.add_to(run_cmd, true);
  run_cmd->add_option("--reps", run_ov.reps, "Replications per cell");
  run_cmd->add_option("--threads", run_ov.threads, "Worker threads");
  run_cmd->add_option("--out", out, "Output directory");
  run_cmd->add_flag("--raw", write_raw, "Also write every replication's trajectory");

  auto* once_cmd = app.add_subcommand("once", "Single run, full trajectory as CSV");
  once_ov.add_to(once_cmd, false);
  once_cmd->add_option("--out", once_out, "Trajectory CSV path (default: stdout)");
  once_cmd->add_option("--efficiency", efficiency_out, "Also write (remaining_energy, tvd) CSV");

  std::string which = "all";
  std::size_t instances = 1000, reps = 100;
  std::uint64_t verify_seed = 1;
  auto* verify_cmd = app.add_subcommand("verify", "Check the analytical bounds numerically");
  verify_cmd->add_option("check", which, "lemma1 | lemma2 | theorem1 | adversarial | all");
  verify_cmd->add_option("--instances", instances, "Random populations per lemma");
  verify_cmd->add_option("--reps", reps, "Replications for the convergence check");
  verify_cmd->add_option("--seed", verify_seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(config, run_ov, out, write_raw);
    if (*once_cmd) return cmd_once(once_ov, once_out, efficiency_out);
    if (*verify_cmd) return cmd_verify(which, instances, reps, verify_seed);
  } catch (const pb::Error& e) {
    // I/O failures share the config exit code.
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
