#pragma once

#include <deque>
#include <map>
#include <memory>
#include <set>

#include "npsim/netsim.hpp"

namespace npsim {

struct CostModel {
  double c_base_ms = 1.0;
  double c_scan_ms = 50.0;  // per registered provider, requestResources only

  double tx_cost_ms(const Transaction& tx, size_t registry_size) const {
    if (fn_of(tx.call) == ContractFn::RequestResources)
      return c_base_ms + c_scan_ms * double(registry_size);
    return c_base_ms;
  }
};

struct ConsensusParams {
  int max_block_txs = 10;
  // Mempool admission control. A node sheds load instead of queueing without
  // bound: it rejects a tx when its pool is full or when the projected
  // confirmation (tx age + execution backlog + queued work + own cost) cannot
  // land within the slack. Overloaded rounds then keep committing at capacity
  // instead of pushing every confirmation past the client timeout.
  int max_pending = 120;
  double admission_slack_ms = 45'000.0;
  double client_give_up_ms = 60'000.0;  // raft submitters stop re-forwarding
  // raft
  double election_timeout_min_ms = 150.0;
  double election_timeout_max_ms = 300.0;
  double heartbeat_ms = 50.0;
  double client_retry_ms = 1000.0;
  // ibft
  double block_period_ms = 1000.0;
  double round_timeout_ms = 10000.0;  // doubles per round change
};

class IWorldObserver {
 public:
  virtual ~IWorldObserver() = default;
  virtual void on_confirm(uint64_t /*tx_id*/, int /*node*/, double /*confirm_ms*/,
                          const Receipt& /*receipt*/) {}
  virtual void on_leader_elected(int /*node*/, uint64_t /*term*/) {}
  virtual void on_finalized(int /*node*/, const Block& /*block*/) {}
};

class BlockchainNode;

class ConsensusEngine {
 public:
  virtual ~ConsensusEngine() = default;
  virtual void start() = 0;
  virtual void on_message(int from, const Message& m) = 0;
  virtual void on_timer(int timer_id) = 0;
  virtual void on_inject_tx(const Transaction& tx) = 0;
  virtual void on_recover() = 0;
};

// One simulated blockchain node: ledger + pending pool + consensus engine +
// a serial execution queue that models contract processing time.
class BlockchainNode final : public INode {
 public:
  BlockchainNode(int id, Scheduler& sched, WorldState genesis, CostModel cost,
                 ConsensusParams params, IWorldObserver* observer);

  void set_engine(std::unique_ptr<ConsensusEngine> engine) { engine_ = std::move(engine); }
  void start() { engine_->start(); }

  // INode
  void on_message(int from, const Message& m) override { engine_->on_message(from, m); }
  void on_timer(int timer_id) override { engine_->on_timer(timer_id); }
  void on_inject_tx(const Transaction& tx) override { engine_->on_inject_tx(tx); }
  void on_recover() override { engine_->on_recover(); }

  int id() const { return id_; }
  Scheduler& sched() { return sched_; }
  const ConsensusParams& params() const { return params_; }
  const Ledger& ledger() const { return ledger_; }

  // Pending pool (committed and in-flight txs excluded from building).
  // Applies admission control; overload drops are silent.
  void add_pending(const Transaction& tx);
  bool known(uint64_t tx_id) const;
  std::vector<Transaction> take_for_block(size_t max_txs);  // marks taken txs in-flight
  void clear_in_flight();
  size_t pending_size() const { return pending_.size(); }

  // Appends to the ledger, pushes each tx through the execution queue and
  // reports confirmations; returns the execution completion time.
  double commit_block(const Block& block);
  double exec_busy_until() const { return exec_busy_until_; }

 private:
  int id_;
  Scheduler& sched_;
  Ledger ledger_;
  CostModel cost_;
  ConsensusParams params_;
  IWorldObserver* observer_;
  std::unique_ptr<ConsensusEngine> engine_;

  std::deque<Transaction> pending_;
  std::map<uint64_t, double> pending_ids_;  // id -> service cost at admission
  std::set<uint64_t> in_flight_ids_;
  std::set<uint64_t> committed_ids_;
  double pending_cost_ms_ = 0.0;  // sum of admitted service costs
  double exec_busy_until_ = 0.0;
};

}  // namespace npsim
