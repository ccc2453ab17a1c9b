#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "npsim/io.hpp"
#include "npsim/reference_oracle.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& consensus,
            uint64_t seed, const std::string& out_dir, bool trace, int jobs) {
  npsim::ExperimentConfig cfg;
  if (!config_path.empty()) {
    cfg = npsim::experiment_config_from_json(
        npsim::json::parse(npsim::read_text_file(config_path)));
  }
  if (consensus == "raft") {
    cfg.consensus = {npsim::ConsensusKind::Raft};
  } else if (consensus == "ibft") {
    cfg.consensus = {npsim::ConsensusKind::Ibft};
  }
  cfg.sim.seed = seed;
  if (jobs > 0) cfg.jobs = jobs;

  std::vector<npsim::CellResult> cells = npsim::run_experiment(cfg);
  npsim::write_reports(cells, out_dir, trace);

  bool all_consistent = true;
  for (const npsim::CellResult& cell : cells) {
    const npsim::FnMetrics& m = cell.result.metrics.overall;
    std::printf("%s %-7s itr=%-5g tps=%-8.3f lat_avg=%-7.3fs success=%.4f%s\n",
                npsim::to_string(cell.consensus), cell.round_kind.c_str(), cell.itr,
                m.throughput_tps, m.lat_avg_s, m.success_rate,
                cell.result.replicas_consistent ? "" : "  REPLICA-MISMATCH");
    all_consistent = all_consistent && cell.result.replicas_consistent;
  }
  std::printf("reports written to %s\n", out_dir.c_str());
  return all_consistent ? 0 : 1;
}

int cmd_verify(const std::vector<std::string>& paths) {
  bool all_ok = true;
  for (const std::string& path : paths) {
    bool ok = false;
    try {
      auto blocks = npsim::ledger_blocks_from_json(
          npsim::json::parse(npsim::read_text_file(path)));
      ok = npsim::verify_chain(blocks);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "%s: %s\n", path.c_str(), e.what());
    }
    std::printf("%s: %s\n", path.c_str(), ok ? "OK" : "BROKEN");
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}

// Scenario: {"genesis": {...}, "txs": [{... tx ..., "now_ms": N}, ...]}.
// Replays through the reference implementation and prints one outcome per tx.
int cmd_oracle(const std::string& scenario_path) {
  npsim::json scenario = npsim::json::parse(npsim::read_text_file(scenario_path));
  npsim::WorldState genesis = npsim::genesis_from_json(scenario.at("genesis"));
  npsim::oracle::ReferenceMarket market(genesis);

  npsim::json out = npsim::json::array();
  for (const npsim::json& item : scenario.at("txs")) {
    npsim::Transaction tx = npsim::tx_from_json(item);
    int64_t now_ms = item.value("now_ms", tx.submit_time_ms);
    auto outcome = market.apply(tx, now_ms);
    out.push_back({{"tx_id", tx.tx_id},
                   {"ok", outcome.ok},
                   {"reason", outcome.reason},
                   {"value", outcome.value}});
  }
  npsim::json result = {{"outcomes", out},
                        {"total_balance", market.total_balance()},
                        {"conservation", market.conservation_holds()}};
  std::cout << result.dump(1) << "\n";
  return market.conservation_holds() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic simulator for a permissioned resource marketplace"};
  app.require_subcommand(1);

  std::string config_path, consensus, out_dir = "out", scenario_path;
  uint64_t seed = 0;
  bool trace = false;
  int jobs = 0;
  std::vector<std::string> ledger_paths;

  CLI::App* run = app.add_subcommand("run", "Run the benchmark sweep and write reports");
  run->add_option("--config", config_path, "Experiment config JSON")
      ->check(CLI::ExistingFile);
  run->add_option("--consensus", consensus, "Consensus engine override")
      ->check(CLI::IsMember({"raft", "ibft"}));
  run->add_option("--seed", seed, "Base RNG seed")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_flag("--trace", trace, "Also dump per-node ledgers");
  run->add_option("--jobs", jobs, "Parallel cells")->check(CLI::NonNegativeNumber);

  CLI::App* verify = app.add_subcommand("verify", "Check hash links of ledger dumps");
  verify->add_option("ledgers", ledger_paths, "Ledger JSON files")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* oracle = app.add_subcommand("oracle", "Replay a scenario on the reference model");
  oracle->add_option("scenario", scenario_path, "Scenario JSON")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, consensus, seed, out_dir, trace, jobs);
    if (verify->parsed()) return cmd_verify(ledger_paths);
    return cmd_oracle(scenario_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
