#include "npsim/ibft.hpp"

#include <cmath>

namespace npsim {

IbftEngine::IbftEngine(BlockchainNode& node, IWorldObserver* observer)
    : node_(node), observer_(observer), n_(node.sched().topology().size()), me_(node.id()) {}

void IbftEngine::start() {
  schedule_new_height(node_.sched().now());
}

void IbftEngine::schedule_new_height(double ready_at) {
  phase_ = Phase::Idle;
  double at = std::max(ready_at, node_.sched().now()) + node_.params().block_period_ms;
  node_.sched().set_timer(me_, kTimerNewHeight, at);
}

void IbftEngine::begin_height() {
  height_ = node_.ledger().tip().height + 1;
  round_ = 0;
  prepares_.clear();
  commits_.clear();
  round_changes_.clear();
  highest_rc_sent_ = 0;
  rc_sent_ = false;
  proposal_.reset();
  current_timeout_ms_ = node_.params().round_timeout_ms;
  phase_ = Phase::AwaitingProposal;
  round_deadline_ = node_.sched().now() + current_timeout_ms_;
  node_.sched().set_timer(me_, kTimerRound, round_deadline_);
  if (proposer_of(height_, round_) == me_) propose();

  auto buffered = std::move(future_);
  future_.clear();
  for (auto& [from, msg] : buffered) on_message(from, msg);
}

void IbftEngine::enter_round(uint32_t round) {
  round_ = round;
  phase_ = Phase::AwaitingProposal;
  proposal_.reset();
  node_.clear_in_flight();
  round_deadline_ = node_.sched().now() + current_timeout_ms_;
  node_.sched().set_timer(me_, kTimerRound, round_deadline_);
  if (proposer_of(height_, round_) == me_) {
    // Re-propose a prepared block from the round-change certificate if one
    // exists; the lock rule forbids replacing it.
    std::optional<Block> carried = locked_block_;
    uint32_t best_round = locked_block_ ? locked_round_ : 0;
    for (const auto& [_, rc] : round_changes_[round_]) {
      if (rc.has_lock && (!carried || rc.locked_round >= best_round)) {
        carried = rc.locked_block;
        best_round = rc.locked_round;
      }
    }
    if (carried) {
      PrePrepareMsg pp{height_, round_, *carried};
      broadcast_and_self(pp);
    } else {
      propose();
    }
  }
}

void IbftEngine::propose() {
  Block b;
  if (locked_block_) {
    b = *locked_block_;
  } else {
    b.height = height_;
    b.prev_hash = node_.ledger().tip().hash;
    b.proposer = uint32_t(me_);
    b.timestamp_ms = int64_t(std::llround(node_.sched().now()));
    b.txs = node_.take_for_block(size_t(node_.params().max_block_txs));  // may be empty
    b.hash = compute_block_hash(b);
  }
  broadcast_and_self(PrePrepareMsg{height_, round_, b});
}

void IbftEngine::broadcast_and_self(const Message& m) {
  node_.sched().broadcast(me_, m);
  on_message(me_, m);
}

bool IbftEngine::valid_proposal(int from, const PrePrepareMsg& m) const {
  if (from != proposer_of(m.height, m.round)) return false;
  const Block& b = m.block;
  if (b.height != height_) return false;
  if (b.prev_hash != node_.ledger().tip().hash) return false;
  if (b.hash != compute_block_hash(b)) return false;
  if (int(b.txs.size()) > node_.params().max_block_txs) return false;
  return true;
}

void IbftEngine::handle_preprepare(int from, const PrePrepareMsg& m) {
  if (m.height != height_ || m.round != round_) return;
  if (phase_ != Phase::AwaitingProposal) return;
  if (!valid_proposal(from, m)) return;
  if (locked_block_ && m.block.hash != locked_block_->hash) return;  // lock rule
  proposal_ = m.block;
  phase_ = Phase::Preprepared;
  // The proposal counts as the proposer's PREPARE.
  prepares_[round_][m.block.hash].insert(from);
  broadcast_and_self(PrepareMsg{height_, round_, m.block.hash});
}

void IbftEngine::handle_prepare(int from, const PrepareMsg& m) {
  if (m.height != height_ || m.round != round_) return;
  prepares_[m.round][m.block_hash].insert(from);
  check_prepared();
}

void IbftEngine::check_prepared() {
  if (phase_ != Phase::Preprepared || !proposal_) return;
  if (int(prepares_[round_][proposal_->hash].size()) < quorum()) return;
  phase_ = Phase::Prepared;
  locked_block_ = proposal_;
  locked_round_ = round_;
  broadcast_and_self(CommitMsg{height_, round_, proposal_->hash});
}

void IbftEngine::handle_commit(int from, const CommitMsg& m) {
  if (m.height != height_ || m.round != round_) return;
  commits_[m.round][m.block_hash].insert(from);
  check_prepared();
  check_committed();
}

void IbftEngine::check_committed() {
  if (phase_ != Phase::Prepared || !proposal_) return;
  if (int(commits_[round_][proposal_->hash].size()) < quorum()) return;
  phase_ = Phase::Committed;
  finalize(*proposal_);
}

void IbftEngine::finalize(const Block& block) {
  double exec_done = node_.commit_block(block);
  height_ = node_.ledger().tip().height + 1;
  locked_block_.reset();
  locked_round_ = 0;
  proposal_.reset();
  node_.clear_in_flight();
  schedule_new_height(exec_done);
}

void IbftEngine::on_timer(int timer_id) {
  switch (timer_id) {
    case kTimerNewHeight:
      if (phase_ == Phase::Idle) begin_height();
      return;
    case kTimerRound: {
      if (phase_ == Phase::Idle || phase_ == Phase::Committed) return;
      if (node_.sched().now() + 1e-9 < round_deadline_) return;  // superseded
      current_timeout_ms_ *= 2.0;  // exponential backoff
      uint32_t next = round_ + 1;
      RoundChangeMsg rc{height_, next, locked_block_.has_value(), locked_round_,
                        locked_block_ ? *locked_block_ : Block{}};
      rc_sent_ = true;
      highest_rc_sent_ = next;
      broadcast_and_self(rc);
      // Keep a deadline running so a stalled round change retries further.
      round_deadline_ = node_.sched().now() + current_timeout_ms_;
      node_.sched().set_timer(me_, kTimerRound, round_deadline_);
      return;
    }
  }
}

void IbftEngine::handle_round_change(int from, const RoundChangeMsg& m) {
  if (m.height != height_) return;
  if (m.round <= round_) return;
  round_changes_[m.round][from] = m;
  int count = int(round_changes_[m.round].size());
  if (count >= quorum()) {
    enter_round(m.round);
    return;
  }
  // F+1 rule: join the smallest round change we are lagging behind.
  if (count >= f() + 1 && (!rc_sent_ || m.round > highest_rc_sent_)) {
    rc_sent_ = true;
    highest_rc_sent_ = m.round;
    RoundChangeMsg join{height_, m.round, locked_block_.has_value(), locked_round_,
                        locked_block_ ? *locked_block_ : Block{}};
    broadcast_and_self(join);
  }
}

void IbftEngine::request_sync(int from, uint64_t msg_height) {
  if (msg_height <= height_) return;
  double now = node_.sched().now();
  if (now - last_sync_request_ < 500.0) return;
  last_sync_request_ = now;
  node_.sched().send(me_, from, SyncRequestMsg{node_.ledger().tip().height + 1});
}

void IbftEngine::handle_sync_request(int from, const SyncRequestMsg& m) {
  SyncResponseMsg resp;
  const auto& blocks = node_.ledger().blocks();
  for (uint64_t h = m.from_height; h < blocks.size() && resp.blocks.size() < 50; ++h)
    resp.blocks.push_back(blocks[h]);
  if (!resp.blocks.empty()) node_.sched().send(me_, from, resp);
}

void IbftEngine::handle_sync_response(int /*from*/, const SyncResponseMsg& m) {
  double exec_done = node_.sched().now();
  bool advanced = false;
  for (const Block& b : m.blocks) {
    if (b.height != node_.ledger().tip().height + 1) continue;
    if (b.prev_hash != node_.ledger().tip().hash) break;
    if (b.hash != compute_block_hash(b)) break;
    exec_done = node_.commit_block(b);
    advanced = true;
  }
  if (advanced) {
    height_ = node_.ledger().tip().height + 1;
    locked_block_.reset();
    locked_round_ = 0;
    proposal_.reset();
    node_.clear_in_flight();
    schedule_new_height(exec_done);
  }
}

void IbftEngine::on_inject_tx(const Transaction& tx) {
  node_.add_pending(tx);
  node_.sched().broadcast(me_, TxGossipMsg{tx});
}

void IbftEngine::on_message(int from, const Message& m) {
  if (const auto* pp = std::get_if<PrePrepareMsg>(&m)) {
    if (pp->height > height_ || phase_ == Phase::Idle) {
      if (pp->height >= height_) {
        future_.emplace_back(from, m);
        request_sync(from, pp->height);
      }
      return;
    }
    handle_preprepare(from, *pp);
  } else if (const auto* pr = std::get_if<PrepareMsg>(&m)) {
    if (pr->height > height_ || (phase_ == Phase::Idle && pr->height >= height_)) {
      future_.emplace_back(from, m);
      request_sync(from, pr->height);
      return;
    }
    handle_prepare(from, *pr);
  } else if (const auto* cm = std::get_if<CommitMsg>(&m)) {
    if (cm->height > height_ || (phase_ == Phase::Idle && cm->height >= height_)) {
      future_.emplace_back(from, m);
      request_sync(from, cm->height);
      return;
    }
    handle_commit(from, *cm);
  } else if (const auto* rc = std::get_if<RoundChangeMsg>(&m)) {
    if (rc->height > height_ || (phase_ == Phase::Idle && rc->height >= height_)) {
      future_.emplace_back(from, m);
      request_sync(from, rc->height);
      return;
    }
    handle_round_change(from, *rc);
  } else if (const auto* sq = std::get_if<SyncRequestMsg>(&m)) {
    handle_sync_request(from, *sq);
  } else if (const auto* sr = std::get_if<SyncResponseMsg>(&m)) {
    handle_sync_response(from, *sr);
  } else if (const auto* tg = std::get_if<TxGossipMsg>(&m)) {
    if (!node_.ledger().receipts().contains(tg->tx.tx_id)) node_.add_pending(tg->tx);
  }
}

void IbftEngine::on_recover() {
  // Rejoin at whatever height the chain reaches next; sync fills the gap.
  schedule_new_height(node_.sched().now());
}

}  // namespace npsim
