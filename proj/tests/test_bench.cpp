#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "npsim/bench.hpp"
#include "npsim/io.hpp"

using namespace npsim;

namespace {

SimConfig sim_config(ConsensusKind c, uint64_t seed) {
  SimConfig cfg;
  cfg.consensus = c;
  cfg.seed = seed;
  return cfg;
}

WorkloadSpec request_round(double itr, double duration_s) {
  WorkloadSpec w;
  w.itr = itr;
  w.duration_s = duration_s;
  w.mix_add = w.mix_return = 0;
  w.mix_request = 1;
  w.invalid_payment_frac = 0;
  w.no_match_frac = 0;
  return w;
}

}  // namespace

TEST_CASE("fixed-rate controller: count, spacing, mix") {
  RoundResult r = run_round(sim_config(ConsensusKind::Raft, 1), request_round(5.0, 10.0));
  REQUIRE(r.trace.size() == 50);
  for (size_t i = 0; i < r.trace.size(); ++i) {
    CHECK(r.trace[i].submit_ms == doctest::Approx(double(i + 1) * 200.0));
    CHECK(r.trace[i].fn == "requestResources");
  }
}

TEST_CASE("metric equations on a synthetic trace") {
  std::vector<TxTraceRow> rows;
  // 100 successes spanning 20 s: first submit at 10 000, last confirm at 30 000.
  // Every latency is exactly 2.5 s.
  for (int i = 0; i < 100; ++i) {
    TxTraceRow r;
    r.tx_id = uint64_t(i + 1);
    r.fn = "requestResources";
    r.submit_ms = 10'000.0 + double(i) * 176.76767676767676;
    r.confirm_ms = r.submit_ms + 2'500.0;
    r.status = "success";
    r.measured = true;
    rows.push_back(r);
  }
  rows.back().confirm_ms = 30'000.0;
  rows.back().submit_ms = 27'500.0;

  RoundMetrics m = recount_from_trace(rows);
  CHECK(m.overall.throughput_tps == doctest::Approx(5.0));
  CHECK(m.overall.lat_avg_s == doctest::Approx(2.5));
  CHECK(m.overall.lat_min_s == doctest::Approx(2.5));
  CHECK(m.overall.lat_max_s == doctest::Approx(2.5));
  CHECK(m.overall.success_rate == doctest::Approx(1.0));

  // 45 success / 3 reverted / 2 timeout out of 50 → 0.9.
  std::vector<TxTraceRow> mixed(rows.begin(), rows.begin() + 45);
  for (int i = 0; i < 5; ++i) {
    TxTraceRow r;
    r.tx_id = uint64_t(200 + i);
    r.fn = "returnResources";
    r.submit_ms = 11'000.0 + i;
    r.status = i < 3 ? "reverted" : "timeout";
    r.measured = true;
    mixed.push_back(r);
  }
  RoundMetrics m2 = recount_from_trace(mixed);
  CHECK(m2.overall.success_rate == doctest::Approx(0.9));
  CHECK(m2.overall.injected == 50);
  CHECK(m2.overall.committed == 45);
  CHECK(m2.overall.failed == 5);

  // Warm-up rows are excluded entirely.
  mixed[0].measured = false;
  RoundMetrics m3 = recount_from_trace(mixed);
  CHECK(m3.overall.injected == 49);
}

TEST_CASE("report metrics equal an independent recount of the trace") {
  for (ConsensusKind c : {ConsensusKind::Raft, ConsensusKind::Ibft}) {
    RoundResult r = run_round(sim_config(c, 11), request_round(4.0, 30.0));
    RoundMetrics again = recount_from_trace(r.trace);
    CHECK(r.metrics.overall.throughput_tps ==
          doctest::Approx(again.overall.throughput_tps).epsilon(1e-9));
    CHECK(r.metrics.overall.lat_avg_s == doctest::Approx(again.overall.lat_avg_s).epsilon(1e-9));
    CHECK(r.metrics.overall.success_rate ==
          doctest::Approx(again.overall.success_rate).epsilon(1e-9));
    CHECK(r.metrics.overall.injected == again.overall.injected);
  }
}

TEST_CASE("trace CSV round-trips losslessly") {
  RoundResult r = run_round(sim_config(ConsensusKind::Raft, 13), request_round(3.0, 20.0));
  std::string path = "/tmp/npsim_test_trace.csv";
  write_trace_csv(path, r.trace);
  std::vector<TxTraceRow> back = read_trace_csv(path);
  REQUIRE(back.size() == r.trace.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].tx_id == r.trace[i].tx_id);
    CHECK(back[i].fn == r.trace[i].fn);
    CHECK(back[i].submit_ms == r.trace[i].submit_ms);
    CHECK(back[i].status == r.trace[i].status);
    CHECK(back[i].confirm_ms.has_value() == r.trace[i].confirm_ms.has_value());
    if (back[i].confirm_ms) CHECK(*back[i].confirm_ms == *r.trace[i].confirm_ms);
  }
  RoundMetrics again = recount_from_trace(back);
  CHECK(again.overall.throughput_tps ==
        doctest::Approx(r.metrics.overall.throughput_tps).epsilon(1e-9));
}

TEST_CASE("bench invariants over a small sweep") {
  ExperimentConfig cfg;
  cfg.itrs = {2, 6};
  cfg.round_kinds = {"request", "mixed", "return", "add"};
  cfg.workload.duration_s = 40;
  cfg.workload.invalid_payment_frac = 0;
  cfg.workload.no_match_frac = 0;
  cfg.sim.seed = 99;
  cfg.jobs = 4;
  std::vector<CellResult> cells = run_experiment(cfg);
  REQUIRE(cells.size() == 2 * 2 * 4);

  for (const CellResult& cell : cells) {
    const RoundMetrics& m = cell.result.metrics;
    CAPTURE(to_string(cell.consensus));
    CAPTURE(cell.itr);
    CAPTURE(cell.round_kind);
    // Throughput cannot exceed the injection rate (small numeric slack: the
    // span denominator starts at the first post-warm-up submission).
    CHECK(m.overall.throughput_tps <= cell.itr * 1.05);
    uint64_t committed_sum = 0, injected_sum = 0;
    for (const auto& [fn, fm] : m.per_fn) {
      committed_sum += fm.committed;
      injected_sum += fm.injected;
    }
    CHECK(committed_sum == m.overall.committed);
    CHECK(injected_sum == m.overall.injected);
    CHECK(cell.result.replicas_consistent);
    CHECK(verify_chain(cell.result.ledger_blocks));
  }

  // At ITR 2 the request round commits everything under both consensus.
  for (const CellResult& cell : cells) {
    if (cell.itr == 2 && cell.round_kind == "request")
      CHECK(cell.result.metrics.overall.success_rate == doctest::Approx(1.0));
  }
}

TEST_CASE("same seed, same numbers") {
  ExperimentConfig cfg;
  cfg.consensus = {ConsensusKind::Ibft};
  cfg.itrs = {3};
  cfg.round_kinds = {"mixed"};
  cfg.workload.duration_s = 30;
  cfg.sim.seed = 2718;
  auto a = run_experiment(cfg);
  auto b = run_experiment(cfg);
  REQUIRE(a.size() == 1);
  CHECK(a[0].result.metrics.overall.throughput_tps == b[0].result.metrics.overall.throughput_tps);
  CHECK(a[0].result.metrics.overall.lat_avg_s == b[0].result.metrics.overall.lat_avg_s);
  CHECK(a[0].result.ledger_blocks.back().hash == b[0].result.ledger_blocks.back().hash);
}
