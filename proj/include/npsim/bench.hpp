#pragma once

#include <optional>
#include <string>

#include "npsim/world.hpp"

namespace npsim {

struct WorkloadSpec {
  double itr = 5.0;          // input transaction rate, tx/s
  double duration_s = 300.0;
  double mix_add = 0.0;      // proportions, must sum to 1
  double mix_request = 1.0;
  double mix_return = 0.0;
  double tx_timeout_s = 60.0;
  double warmup_s = 5.0;     // txs submitted before this are excluded
  int registry_size = 3;     // providers pre-registered at genesis
  int genesis_leases = 0;    // expired leases available for returnResources
  double invalid_payment_frac = 0.02;
  double no_match_frac = 0.02;
};

struct FnMetrics {
  uint64_t injected = 0;
  uint64_t committed = 0;
  uint64_t failed = 0;
  double throughput_tps = 0.0;
  double lat_min_s = 0.0;
  double lat_avg_s = 0.0;
  double lat_max_s = 0.0;
  double success_rate = 0.0;
};

struct RoundMetrics {
  std::map<std::string, FnMetrics> per_fn;
  FnMetrics overall;
};

struct TxTraceRow {
  uint64_t tx_id = 0;
  std::string fn;
  double submit_ms = 0.0;
  std::optional<double> confirm_ms;
  std::string status;  // success | reverted | timeout
  bool measured = false;
};

struct RoundResult {
  RoundMetrics metrics;
  std::vector<TxTraceRow> trace;
  bool replicas_consistent = false;
  std::vector<Block> ledger_blocks;  // node 0's chain, for dumps and verification
};

WorldState make_bench_genesis(const WorkloadSpec& spec, int n_nodes);

// Fixed-rate controller + metrics engine for one measurement round.
RoundResult run_round(const SimConfig& sim, const WorkloadSpec& spec);

// Recomputes RoundMetrics from raw trace rows only; kept equation-level
// independent of run_round's aggregation.
RoundMetrics recount_from_trace(const std::vector<TxTraceRow>& rows);

struct ExperimentConfig {
  std::vector<ConsensusKind> consensus = {ConsensusKind::Raft, ConsensusKind::Ibft};
  std::vector<double> itrs = {2, 5, 10, 20, 40, 60};
  std::vector<std::string> round_kinds = {"add", "request", "return", "mixed"};
  SimConfig sim;
  WorkloadSpec workload;
  int jobs = 1;
};

struct CellResult {
  ConsensusKind consensus;
  double itr = 0.0;
  std::string round_kind;
  RoundResult result;
};

WorkloadSpec workload_for_round(const WorkloadSpec& base, const std::string& round_kind);
uint64_t cell_seed(uint64_t base_seed, ConsensusKind c, double itr, const std::string& kind);

std::vector<CellResult> run_experiment(const ExperimentConfig& cfg);

const char* to_string(ConsensusKind c);

}  // namespace npsim
