#include "npsim/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace npsim {

const char* to_string(ConsensusKind c) {
  return c == ConsensusKind::Raft ? "raft" : "ibft";
}

static Address node_address(int i) { return "node-" + std::to_string(i); }

static const Sla kProviderSla{50, 100, 1.0};
static const Sla kRequestSla{100, 50, 5.0};
static constexpr uint64_t kProviderCapacity = 1'000'000'000ull;
static constexpr uint64_t kNodeBalance = 1'000'000'000'000ull;
static constexpr uint64_t kLendTimeS = 600;

WorldState make_bench_genesis(const WorkloadSpec& spec, int n_nodes) {
  WorldState st;
  st.admin_address = "admin";
  st.initial_account_balance = 0;
  st.accounts.emplace("admin", Account{"admin", kNodeBalance});
  for (int i = 0; i < n_nodes; ++i)
    st.accounts.emplace(node_address(i), Account{node_address(i), kNodeBalance});

  for (int i = 0; i < spec.registry_size; ++i) {
    ProviderSpec p;
    p.name = "np-" + std::to_string(i + 1);
    p.cpu = p.ram = p.storage = kProviderCapacity;
    p.cost = 2 + uint64_t(i % 3);
    p.domain = "eu-west";
    p.slas = {kProviderSla};
    p.vnf_images = {"fw-v1", "lb-v2"};
    p.address = "prov-" + std::to_string(i + 1);
    TxResult r = st.add_network_provider("admin", p);
    (void)r;
  }

  // Pre-existing leases, already expired, for returnResources workloads.
  if (spec.genesis_leases > 0 && spec.registry_size > 0) {
    NetworkProvider& supplier = st.providers.at(1);
    Account& requester = st.accounts.at(node_address(0));
    for (int i = 0; i < spec.genesis_leases; ++i) {
      uint64_t price = 3 * supplier.spec.cost * 1;  // (1+1+1) * cost * 1s
      supplier.avail_cpu -= 1;
      supplier.avail_ram -= 1;
      supplier.avail_storage -= 1;
      requester.balance -= price;
      st.accounts.at(supplier.spec.address).balance += price;
      uint64_t id = st.next_lease_id++;
      st.leases.emplace(id, Lease{id, 1, requester.address, 1, 1, 1, 0, 1, price, true});
    }
  }
  return st;
}

namespace {

struct Workload {
  std::vector<std::pair<double, Transaction>> schedule;  // (inject time ms, tx) per node rr
  std::vector<int> target_node;
};

Workload generate_workload(const WorkloadSpec& spec, const WorldState& genesis, int n_nodes,
                           uint64_t seed) {
  Workload w;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  uint64_t max_cost = 0;
  for (const auto& [_, p] : genesis.providers) max_cost = std::max(max_cost, p.spec.cost);
  uint64_t full_payment = 3 * std::max<uint64_t>(max_cost, 1) * kLendTimeS;

  std::vector<uint64_t> lease_pool;
  for (const auto& [id, lease] : genesis.leases) lease_pool.push_back(id);
  size_t next_lease = 0;

  uint64_t count = uint64_t(std::floor(spec.itr * spec.duration_s));
  double spacing_ms = 1000.0 / spec.itr;
  uint64_t provider_serial = 0;

  for (uint64_t i = 0; i < count; ++i) {
    double t = double(i + 1) * spacing_ms;
    int node = int(i % uint64_t(n_nodes));
    Transaction tx;
    tx.tx_id = i + 1;
    tx.submit_time_ms = int64_t(std::llround(t));

    double pick = uni(rng);
    if (pick < spec.mix_add) {
      ProviderSpec p;
      ++provider_serial;
      p.name = "np-dyn-" + std::to_string(provider_serial);
      p.cpu = p.ram = p.storage = kProviderCapacity;
      p.cost = 2 + uint64_t(rng() % 3);
      p.domain = "eu-west";
      p.slas = {kProviderSla};
      p.vnf_images = {"fw-v1"};
      p.address = "prov-dyn-" + std::to_string(provider_serial);
      tx.sender = genesis.admin_address;
      tx.call = AddProviderCall{std::move(p)};
    } else if (pick < spec.mix_add + spec.mix_request) {
      ResourceRequest req;
      req.cpu = req.ram = req.storage = 1;
      req.domain = "eu-west";
      req.sla = kRequestSla;
      req.vnf_image = "fw-v1";
      req.lend_time_s = kLendTimeS;
      uint64_t payment = full_payment;
      double flaw = uni(rng);
      if (flaw < spec.no_match_frac) {
        req.domain = "nowhere";
      } else if (flaw < spec.no_match_frac + spec.invalid_payment_frac) {
        payment = 0;
      }
      tx.sender = node_address(node);
      tx.call = RequestResourcesCall{std::move(req), payment};
    } else {
      uint64_t lease_id = 0;  // deliberately unknown when the pool runs dry
      if (next_lease < lease_pool.size()) lease_id = lease_pool[next_lease++];
      tx.sender = node_address(node);
      tx.call = ReturnResourcesCall{lease_id};
    }
    w.schedule.emplace_back(t, std::move(tx));
    w.target_node.push_back(node);
  }
  return w;
}

std::string fn_name(const TxCall& call) { return to_string(fn_of(call)); }

void fill_metrics(FnMetrics& m, std::vector<double>& latencies, double first_submit_ms,
                  double last_confirm_ms) {
  m.success_rate =
      (m.committed + m.failed) ? double(m.committed) / double(m.committed + m.failed) : 0.0;
  if (!latencies.empty()) {
    m.lat_min_s = *std::min_element(latencies.begin(), latencies.end());
    m.lat_max_s = *std::max_element(latencies.begin(), latencies.end());
    double sum = 0;
    for (double v : latencies) sum += v;
    m.lat_avg_s = sum / double(latencies.size());
  }
  double span_s = (last_confirm_ms - first_submit_ms) / 1000.0;
  m.throughput_tps = (m.committed > 0 && span_s > 0) ? double(m.committed) / span_s : 0.0;
}

RoundMetrics metrics_from_rows(const std::vector<TxTraceRow>& rows) {
  RoundMetrics rm;
  std::map<std::string, std::vector<double>> lat;
  std::vector<double> lat_all;
  double first_submit = std::numeric_limits<double>::infinity();
  std::map<std::string, double> fn_first_submit, fn_last_confirm;
  double last_confirm = 0.0;

  for (const TxTraceRow& row : rows) {
    if (!row.measured) continue;
    FnMetrics& fm = rm.per_fn[row.fn];
    ++fm.injected;
    ++rm.overall.injected;
    if (!fn_first_submit.contains(row.fn)) fn_first_submit[row.fn] = row.submit_ms;
    fn_first_submit[row.fn] = std::min(fn_first_submit[row.fn], row.submit_ms);
    first_submit = std::min(first_submit, row.submit_ms);
    if (row.status == "success") {
      ++fm.committed;
      ++rm.overall.committed;
      double l = (*row.confirm_ms - row.submit_ms) / 1000.0;
      lat[row.fn].push_back(l);
      lat_all.push_back(l);
      fn_last_confirm[row.fn] = std::max(fn_last_confirm[row.fn], *row.confirm_ms);
      last_confirm = std::max(last_confirm, *row.confirm_ms);
    } else {
      ++fm.failed;
      ++rm.overall.failed;
    }
  }
  for (auto& [fn, fm] : rm.per_fn)
    fill_metrics(fm, lat[fn], fn_first_submit[fn], fn_last_confirm[fn]);
  fill_metrics(rm.overall, lat_all, first_submit, last_confirm);
  return rm;
}

}  // namespace

RoundMetrics recount_from_trace(const std::vector<TxTraceRow>& rows) {
  return metrics_from_rows(rows);
}

RoundResult run_round(const SimConfig& sim, const WorkloadSpec& spec) {
  int n_nodes = sim.topology.size();
  WorldState genesis = make_bench_genesis(spec, n_nodes);
  SimWorld world(sim, genesis);
  Workload w = generate_workload(spec, genesis, n_nodes, sim.seed ^ 0x9e3779b97f4a7c15ull);

  world.start();
  double last_submit = 0.0;
  for (size_t i = 0; i < w.schedule.size(); ++i) {
    world.sched().inject_tx(w.target_node[i], w.schedule[i].second, w.schedule[i].first);
    last_submit = std::max(last_submit, w.schedule[i].first);
  }
  double timeout_ms = spec.tx_timeout_s * 1000.0;
  world.sched().run_until(last_submit + timeout_ms + 5000.0);

  RoundResult out;
  double warmup_ms = spec.warmup_s * 1000.0;
  for (const auto& [t, tx] : w.schedule) {
    TxTraceRow row;
    row.tx_id = tx.tx_id;
    row.fn = fn_name(tx.call);
    row.submit_ms = t;
    row.measured = t >= warmup_ms;
    auto it = world.confirms().find(tx.tx_id);
    if (it != world.confirms().end() && it->second.confirm_ms - t <= timeout_ms) {
      row.confirm_ms = it->second.confirm_ms;
      row.status =
          it->second.receipt.status == Receipt::Status::Success ? "success" : "reverted";
    } else {
      row.status = "timeout";
    }
    out.trace.push_back(std::move(row));
  }
  out.metrics = metrics_from_rows(out.trace);
  out.replicas_consistent = world.replicas_consistent();
  out.ledger_blocks = world.node(0).ledger().blocks();
  return out;
}

WorkloadSpec workload_for_round(const WorkloadSpec& base, const std::string& round_kind) {
  WorkloadSpec w = base;
  uint64_t count = uint64_t(std::floor(w.itr * w.duration_s));
  if (round_kind == "add") {
    w.mix_add = 1;
    w.mix_request = 0;
    w.mix_return = 0;
    w.genesis_leases = 0;
  } else if (round_kind == "request") {
    w.mix_add = 0;
    w.mix_request = 1;
    w.mix_return = 0;
    w.genesis_leases = 0;
  } else if (round_kind == "return") {
    w.mix_add = 0;
    w.mix_request = 0;
    w.mix_return = 1;
    w.genesis_leases = int(count) + 2;
  } else {  // mixed
    w.mix_add = w.mix_request = w.mix_return = 1.0 / 3.0;
    w.genesis_leases = int(double(count) * 0.5) + 10;
  }
  return w;
}

uint64_t cell_seed(uint64_t base_seed, ConsensusKind c, double itr, const std::string& kind) {
  uint64_t h = base_seed;
  auto mix = [&h](uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  mix(uint64_t(c) + 1);
  mix(uint64_t(std::llround(itr * 1000.0)));
  for (char ch : kind) mix(uint64_t(uint8_t(ch)));
  return h;
}

std::vector<CellResult> run_experiment(const ExperimentConfig& cfg) {
  std::vector<CellResult> cells;
  for (ConsensusKind c : cfg.consensus) {
    for (double itr : cfg.itrs) {
      for (const std::string& kind : cfg.round_kinds) {
        CellResult cell;
        cell.consensus = c;
        cell.itr = itr;
        cell.round_kind = kind;
        cells.push_back(std::move(cell));
      }
    }
  }

  auto run_cell = [&](CellResult& cell) {
    SimConfig sim = cfg.sim;
    sim.consensus = cell.consensus;
    sim.seed = cell_seed(cfg.sim.seed, cell.consensus, cell.itr, cell.round_kind);
    WorkloadSpec base = cfg.workload;
    base.itr = cell.itr;
    WorkloadSpec spec = workload_for_round(base, cell.round_kind);
    cell.result = run_round(sim, spec);
  };

  int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    for (CellResult& cell : cells) run_cell(cell);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) {
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1))
          run_cell(cells[i]);
      });
    }
    for (auto& t : pool) t.join();
  }
  return cells;
}

}  // namespace npsim
