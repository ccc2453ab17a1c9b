#include "npsim/node.hpp"

#include <cassert>

namespace npsim {

BlockchainNode::BlockchainNode(int id, Scheduler& sched, WorldState genesis, CostModel cost,
                               ConsensusParams params, IWorldObserver* observer)
    : id_(id),
      sched_(sched),
      ledger_(std::move(genesis)),
      cost_(cost),
      params_(params),
      observer_(observer) {}

void BlockchainNode::add_pending(const Transaction& tx) {
  if (known(tx.tx_id)) return;
  if (int(pending_.size()) >= params_.max_pending) return;
  double service = cost_.tx_cost_ms(tx, ledger_.state().providers.size());
  double backlog = std::max(exec_busy_until_ - sched_.now(), 0.0);
  double age = sched_.now() - double(tx.submit_time_ms);
  if (age + backlog + pending_cost_ms_ + service > params_.admission_slack_ms) return;
  pending_.push_back(tx);
  pending_ids_.emplace(tx.tx_id, service);
  pending_cost_ms_ += service;
}

bool BlockchainNode::known(uint64_t tx_id) const {
  return pending_ids_.contains(tx_id) || committed_ids_.contains(tx_id);
}

std::vector<Transaction> BlockchainNode::take_for_block(size_t max_txs) {
  std::vector<Transaction> out;
  for (const Transaction& tx : pending_) {
    if (out.size() >= max_txs) break;
    if (in_flight_ids_.contains(tx.tx_id)) continue;
    out.push_back(tx);
  }
  for (const Transaction& tx : out) in_flight_ids_.insert(tx.tx_id);
  return out;
}

void BlockchainNode::clear_in_flight() { in_flight_ids_.clear(); }

double BlockchainNode::commit_block(const Block& block) {
  AppendError err = ledger_.append_block(block);
  assert(err == AppendError::Ok);
  (void)err;

  exec_busy_until_ = std::max(exec_busy_until_, sched_.now());
  size_t registry = ledger_.state().providers.size();
  for (const Transaction& tx : block.txs) {
    bool first_commit = !committed_ids_.contains(tx.tx_id);
    committed_ids_.insert(tx.tx_id);
    in_flight_ids_.erase(tx.tx_id);
    if (auto admitted = pending_ids_.find(tx.tx_id); admitted != pending_ids_.end()) {
      pending_cost_ms_ -= admitted->second;
      pending_ids_.erase(admitted);
      for (auto it = pending_.begin(); it != pending_.end(); ++it) {
        if (it->tx_id == tx.tx_id) {
          pending_.erase(it);
          break;
        }
      }
    }
    if (first_commit) {
      exec_busy_until_ += cost_.tx_cost_ms(tx, registry);
      if (observer_)
        observer_->on_confirm(tx.tx_id, id_, exec_busy_until_, ledger_.receipts().at(tx.tx_id));
    }
  }
  if (observer_) observer_->on_finalized(id_, block);
  return exec_busy_until_;
}

}  // namespace npsim
