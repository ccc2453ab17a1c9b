#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "npsim/bench.hpp"

namespace npsim {

using nlohmann::json;

json to_json(const Sla& s);
Sla sla_from_json(const json& j);
json to_json(const ProviderSpec& p);
ProviderSpec provider_spec_from_json(const json& j);
json to_json(const ResourceRequest& r);
ResourceRequest request_from_json(const json& j);
json to_json(const Transaction& tx);
Transaction tx_from_json(const json& j);
json to_json(const Block& b);
Block block_from_json(const json& j);

// Genesis file: admin address, accounts with balances, optional providers.
WorldState genesis_from_json(const json& j);
json genesis_to_json(const WorldState& st);

json ledger_to_json(const std::vector<Block>& blocks,
                    const std::map<uint64_t, Receipt>& receipts);
std::vector<Block> ledger_blocks_from_json(const json& j);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

void write_trace_csv(const std::string& path, const std::vector<TxTraceRow>& rows);
std::vector<TxTraceRow> read_trace_csv(const std::string& path);

json metrics_to_json(const RoundMetrics& m);
void write_reports(const std::vector<CellResult>& cells, const std::string& out_dir,
                   bool dump_ledgers);

// Experiment config file; missing keys keep defaults.
ExperimentConfig experiment_config_from_json(const json& j);

}  // namespace npsim
