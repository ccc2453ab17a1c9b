#include "npsim/io.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace npsim {

namespace fs = std::filesystem;

json to_json(const Sla& s) {
  return {{"max_latency_ms", s.max_latency_ms},
          {"min_throughput_mbps", s.min_throughput_mbps},
          {"max_packet_loss_pct", s.max_packet_loss_pct}};
}

Sla sla_from_json(const json& j) {
  return Sla{j.at("max_latency_ms").get<uint32_t>(),
             j.at("min_throughput_mbps").get<uint32_t>(),
             j.at("max_packet_loss_pct").get<double>()};
}

json to_json(const ProviderSpec& p) {
  json slas = json::array();
  for (const Sla& s : p.slas) slas.push_back(to_json(s));
  return {{"name", p.name},       {"cpu", p.cpu},
          {"ram", p.ram},         {"storage", p.storage},
          {"cost", p.cost},       {"domain", p.domain},
          {"slas", slas},         {"vnf_images", p.vnf_images},
          {"address", p.address}};
}

ProviderSpec provider_spec_from_json(const json& j) {
  ProviderSpec p;
  p.name = j.at("name").get<std::string>();
  p.cpu = j.at("cpu").get<uint64_t>();
  p.ram = j.at("ram").get<uint64_t>();
  p.storage = j.at("storage").get<uint64_t>();
  p.cost = j.at("cost").get<uint64_t>();
  p.domain = j.at("domain").get<std::string>();
  for (const json& s : j.value("slas", json::array())) p.slas.push_back(sla_from_json(s));
  p.vnf_images = j.value("vnf_images", std::vector<std::string>{});
  p.address = j.at("address").get<std::string>();
  return p;
}

json to_json(const ResourceRequest& r) {
  return {{"cpu", r.cpu},           {"ram", r.ram},
          {"storage", r.storage},   {"domain", r.domain},
          {"sla", to_json(r.sla)},  {"vnf_image", r.vnf_image},
          {"lend_time_s", r.lend_time_s}};
}

ResourceRequest request_from_json(const json& j) {
  ResourceRequest r;
  r.cpu = j.at("cpu").get<uint64_t>();
  r.ram = j.at("ram").get<uint64_t>();
  r.storage = j.at("storage").get<uint64_t>();
  r.domain = j.at("domain").get<std::string>();
  r.sla = sla_from_json(j.at("sla"));
  r.vnf_image = j.at("vnf_image").get<std::string>();
  r.lend_time_s = j.at("lend_time_s").get<uint64_t>();
  return r;
}

json to_json(const Transaction& tx) {
  json call;
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, AddProviderCall>) {
          call = {{"fn", "addNetworkProvider"}, {"provider", to_json(c.provider)}};
        } else if constexpr (std::is_same_v<T, RequestResourcesCall>) {
          call = {{"fn", "requestResources"},
                  {"request", to_json(c.request)},
                  {"payment", c.payment}};
        } else {
          call = {{"fn", "returnResources"}, {"lease_id", c.lease_id}};
        }
      },
      tx.call);
  return {{"tx_id", tx.tx_id},
          {"sender", tx.sender},
          {"call", call},
          {"submit_time_ms", tx.submit_time_ms}};
}

Transaction tx_from_json(const json& j) {
  Transaction tx;
  tx.tx_id = j.at("tx_id").get<uint64_t>();
  tx.sender = j.at("sender").get<std::string>();
  tx.submit_time_ms = j.value("submit_time_ms", int64_t(0));
  const json& call = j.at("call");
  std::string fn = call.at("fn").get<std::string>();
  if (fn == "addNetworkProvider") {
    tx.call = AddProviderCall{provider_spec_from_json(call.at("provider"))};
  } else if (fn == "requestResources") {
    tx.call = RequestResourcesCall{request_from_json(call.at("request")),
                                   call.at("payment").get<uint64_t>()};
  } else if (fn == "returnResources") {
    tx.call = ReturnResourcesCall{call.at("lease_id").get<uint64_t>()};
  } else {
    throw std::runtime_error("unknown contract function: " + fn);
  }
  return tx;
}

json to_json(const Block& b) {
  json txs = json::array();
  for (const Transaction& tx : b.txs) txs.push_back(to_json(tx));
  return {{"height", b.height},
          {"prev_hash", to_hex(b.prev_hash)},
          {"hash", to_hex(b.hash)},
          {"proposer", b.proposer},
          {"timestamp_ms", b.timestamp_ms},
          {"txs", txs}};
}

Block block_from_json(const json& j) {
  Block b;
  b.height = j.at("height").get<uint64_t>();
  if (!from_hex(j.at("prev_hash").get<std::string>(), b.prev_hash) ||
      !from_hex(j.at("hash").get<std::string>(), b.hash)) {
    throw std::runtime_error("malformed block hash");
  }
  b.proposer = j.at("proposer").get<uint32_t>();
  b.timestamp_ms = j.at("timestamp_ms").get<int64_t>();
  for (const json& tx : j.at("txs")) b.txs.push_back(tx_from_json(tx));
  return b;
}

WorldState genesis_from_json(const json& j) {
  WorldState st;
  st.admin_address = j.at("admin").get<std::string>();
  st.initial_account_balance = j.value("initial_account_balance", uint64_t(0));
  st.accounts.emplace(st.admin_address,
                      Account{st.admin_address, j.value("admin_balance", uint64_t(0))});
  for (const json& a : j.value("accounts", json::array())) {
    Address addr = a.at("address").get<std::string>();
    st.accounts[addr] = Account{addr, a.at("balance").get<uint64_t>()};
  }
  for (const json& p : j.value("providers", json::array()))
    st.add_network_provider(st.admin_address, provider_spec_from_json(p));
  return st;
}

json genesis_to_json(const WorldState& st) {
  json accounts = json::array();
  for (const auto& [addr, acct] : st.accounts)
    accounts.push_back({{"address", addr}, {"balance", acct.balance}});
  json providers = json::array();
  for (const auto& [_, p] : st.providers) providers.push_back(to_json(p.spec));
  return {{"admin", st.admin_address},
          {"initial_account_balance", st.initial_account_balance},
          {"accounts", accounts},
          {"providers", providers}};
}

json ledger_to_json(const std::vector<Block>& blocks,
                    const std::map<uint64_t, Receipt>& receipts) {
  json jb = json::array();
  for (const Block& b : blocks) jb.push_back(to_json(b));
  json jr = json::array();
  for (const auto& [id, r] : receipts) {
    jr.push_back({{"tx_id", id},
                  {"status", r.status == Receipt::Status::Success ? "success" : "reverted"},
                  {"reason", to_string(r.reason)}});
  }
  return {{"blocks", jb}, {"receipts", jr}};
}

std::vector<Block> ledger_blocks_from_json(const json& j) {
  std::vector<Block> out;
  for (const json& b : j.at("blocks")) out.push_back(block_from_json(b));
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_trace_csv(const std::string& path, const std::vector<TxTraceRow>& rows) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "tx_id,fn,submit_ms,confirm_ms,status,measured\n";
  for (const TxTraceRow& r : rows) {
    os << r.tx_id << ',' << r.fn << ',' << r.submit_ms << ',';
    if (r.confirm_ms) os << *r.confirm_ms;
    os << ',' << r.status << ',' << (r.measured ? 1 : 0) << '\n';
  }
  write_text_file(path, os.str());
}

std::vector<TxTraceRow> read_trace_csv(const std::string& path) {
  std::istringstream is(read_text_file(path));
  std::string line;
  std::getline(is, line);  // header
  std::vector<TxTraceRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    TxTraceRow r;
    std::getline(ls, field, ',');
    r.tx_id = std::stoull(field);
    std::getline(ls, r.fn, ',');
    std::getline(ls, field, ',');
    r.submit_ms = std::stod(field);
    std::getline(ls, field, ',');
    if (!field.empty()) r.confirm_ms = std::stod(field);
    std::getline(ls, r.status, ',');
    std::getline(ls, field, ',');
    r.measured = field == "1";
    rows.push_back(std::move(r));
  }
  return rows;
}

static json fn_metrics_to_json(const FnMetrics& m) {
  return {{"injected", m.injected},   {"committed", m.committed},
          {"failed", m.failed},       {"throughput_tps", m.throughput_tps},
          {"lat_min_s", m.lat_min_s}, {"lat_avg_s", m.lat_avg_s},
          {"lat_max_s", m.lat_max_s}, {"success_rate", m.success_rate}};
}

json metrics_to_json(const RoundMetrics& m) {
  json per_fn;
  for (const auto& [fn, fm] : m.per_fn) per_fn[fn] = fn_metrics_to_json(fm);
  return {{"per_fn", per_fn}, {"overall", fn_metrics_to_json(m.overall)}};
}

static void append_metric_rows(std::ostringstream& csv, const CellResult& cell,
                               const std::string& fn, const FnMetrics& m) {
  csv << to_string(cell.consensus) << ',' << cell.itr << ',' << cell.round_kind << ',' << fn
      << ',' << m.injected << ',' << m.committed << ',' << m.failed << ','
      << m.throughput_tps << ',' << m.lat_min_s << ',' << m.lat_avg_s << ',' << m.lat_max_s
      << ',' << m.success_rate << '\n';
}

void write_reports(const std::vector<CellResult>& cells, const std::string& out_dir,
                   bool dump_ledgers) {
  fs::create_directories(out_dir);

  std::ostringstream csv;
  csv << std::setprecision(17);
  csv << "consensus,itr,round,function,injected,committed,failed,throughput_tps,"
         "lat_min_s,lat_avg_s,lat_max_s,success_rate\n";
  json report = json::array();
  for (const CellResult& cell : cells) {
    for (const auto& [fn, fm] : cell.result.metrics.per_fn) append_metric_rows(csv, cell, fn, fm);
    append_metric_rows(csv, cell, "overall", cell.result.metrics.overall);
    report.push_back({{"consensus", to_string(cell.consensus)},
                      {"itr", cell.itr},
                      {"round", cell.round_kind},
                      {"metrics", metrics_to_json(cell.result.metrics)},
                      {"replicas_consistent", cell.result.replicas_consistent}});

    std::string stem = std::string(to_string(cell.consensus)) + "_" + cell.round_kind + "_itr" +
                       std::to_string(int(cell.itr * 1000));
    write_trace_csv(out_dir + "/trace/" + stem + ".csv", cell.result.trace);
    if (dump_ledgers) {
      std::map<uint64_t, Receipt> no_receipts;
      write_text_file(out_dir + "/ledger/" + stem + ".json",
                      ledger_to_json(cell.result.ledger_blocks, no_receipts).dump(1));
    }
  }
  write_text_file(out_dir + "/report.csv", csv.str());
  write_text_file(out_dir + "/report.json", report.dump(1));

  // Plot-ready series: one file per (consensus, round), rows by ITR.
  std::map<std::string, std::ostringstream> series;
  for (const CellResult& cell : cells) {
    std::string key = std::string(to_string(cell.consensus)) + "_" + cell.round_kind;
    auto [it, fresh] = series.try_emplace(key);
    if (fresh) it->second << "itr,throughput_tps,lat_avg_s,success_rate\n";
    const FnMetrics& m = cell.result.metrics.overall;
    it->second << cell.itr << ',' << m.throughput_tps << ',' << m.lat_avg_s << ','
               << m.success_rate << '\n';
  }
  for (const auto& [key, os] : series)
    write_text_file(out_dir + "/series/" + key + ".csv", os.str());
}

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig cfg;
  if (j.contains("consensus")) {
    std::string c = j.at("consensus").get<std::string>();
    if (c == "raft") {
      cfg.consensus = {ConsensusKind::Raft};
    } else if (c == "ibft") {
      cfg.consensus = {ConsensusKind::Ibft};
    } else if (c == "both") {
      cfg.consensus = {ConsensusKind::Raft, ConsensusKind::Ibft};
    } else {
      throw std::runtime_error("unknown consensus: " + c);
    }
  }
  if (j.contains("itrs")) cfg.itrs = j.at("itrs").get<std::vector<double>>();
  if (j.contains("rounds")) cfg.round_kinds = j.at("rounds").get<std::vector<std::string>>();

  if (j.contains("topology")) {
    const json& t = j.at("topology");
    if (t.contains("sites")) cfg.sim.topology.sites = t.at("sites").get<std::vector<std::string>>();
    auto link = [](const json& l, LinkModel& m) {
      m.mean_ms = l.value("mean_ms", m.mean_ms);
      m.stddev_ms = l.value("stddev_ms", m.stddev_ms);
      m.min_ms = l.value("min_ms", m.min_ms);
      m.loss_rate = l.value("loss_rate", m.loss_rate);
    };
    if (t.contains("intra")) link(t.at("intra"), cfg.sim.topology.intra);
    if (t.contains("inter")) link(t.at("inter"), cfg.sim.topology.inter);
  }
  if (j.contains("cost_model")) {
    const json& c = j.at("cost_model");
    cfg.sim.cost.c_base_ms = c.value("c_base_ms", cfg.sim.cost.c_base_ms);
    cfg.sim.cost.c_scan_ms = c.value("c_scan_ms", cfg.sim.cost.c_scan_ms);
  }
  if (j.contains("consensus_params")) {
    const json& p = j.at("consensus_params");
    ConsensusParams& cp = cfg.sim.params;
    cp.max_block_txs = p.value("max_block_txs", cp.max_block_txs);
    cp.max_pending = p.value("max_pending", cp.max_pending);
    cp.admission_slack_ms = p.value("admission_slack_ms", cp.admission_slack_ms);
    cp.client_give_up_ms = p.value("client_give_up_ms", cp.client_give_up_ms);
    cp.election_timeout_min_ms = p.value("election_timeout_min_ms", cp.election_timeout_min_ms);
    cp.election_timeout_max_ms = p.value("election_timeout_max_ms", cp.election_timeout_max_ms);
    cp.heartbeat_ms = p.value("heartbeat_ms", cp.heartbeat_ms);
    cp.client_retry_ms = p.value("client_retry_ms", cp.client_retry_ms);
    cp.block_period_ms = p.value("block_period_ms", cp.block_period_ms);
    cp.round_timeout_ms = p.value("round_timeout_ms", cp.round_timeout_ms);
  }
  if (j.contains("workload")) {
    const json& w = j.at("workload");
    WorkloadSpec& ws = cfg.workload;
    ws.duration_s = w.value("duration_s", ws.duration_s);
    ws.tx_timeout_s = w.value("tx_timeout_s", ws.tx_timeout_s);
    ws.warmup_s = w.value("warmup_s", ws.warmup_s);
    ws.registry_size = w.value("registry_size", ws.registry_size);
    ws.invalid_payment_frac = w.value("invalid_payment_frac", ws.invalid_payment_frac);
    ws.no_match_frac = w.value("no_match_frac", ws.no_match_frac);
  }
  cfg.jobs = j.value("jobs", cfg.jobs);
  return cfg;
}

}  // namespace npsim
