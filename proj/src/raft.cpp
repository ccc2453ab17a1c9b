#include "npsim/raft.hpp"

#include <cmath>

namespace npsim {

RaftEngine::RaftEngine(BlockchainNode& node, IWorldObserver* observer)
    : node_(node),
      observer_(observer),
      n_(node.sched().topology().size()),
      me_(node.id()),
      next_index_(n_, 1),
      match_index_(n_, 0) {}

void RaftEngine::start() { arm_election(); }

void RaftEngine::arm_election() {
  const ConsensusParams& p = node_.params();
  double delay = std::uniform_real_distribution<double>(p.election_timeout_min_ms,
                                                        p.election_timeout_max_ms)(
      node_.sched().rng());
  election_deadline_ = node_.sched().now() + delay;
  node_.sched().set_timer(me_, kTimerElection, election_deadline_);
}

bool RaftEngine::log_up_to_date(uint64_t their_term, uint64_t their_index) const {
  if (their_term != last_log_term()) return their_term > last_log_term();
  return their_index >= log_.size();
}

void RaftEngine::start_election() {
  role_ = Role::Candidate;
  term_ += 1;
  voted_for_ = me_;
  votes_ = {me_};
  arm_election();
  node_.sched().broadcast(me_, RequestVoteMsg{term_, me_, log_.size(), last_log_term()});
  if (majority() == 1) become_leader();
}

void RaftEngine::become_leader() {
  role_ = Role::Leader;
  leader_hint_ = me_;
  for (int p = 0; p < n_; ++p) {
    next_index_[p] = log_.size() + 1;
    match_index_[p] = 0;
  }
  node_.clear_in_flight();
  if (observer_) observer_->on_leader_elected(me_, term_);
  // Any txs we were holding as a client go straight to our own pool.
  for (const auto& [_, tx] : own_submitted_) node_.add_pending(tx);
  replicate();
  node_.sched().set_timer(me_, kTimerHeartbeat, node_.sched().now() + node_.params().heartbeat_ms);
}

void RaftEngine::step_down(uint64_t new_term) {
  if (new_term > term_) {
    term_ = new_term;
    voted_for_.reset();
  }
  if (role_ == Role::Leader) node_.clear_in_flight();
  role_ = Role::Follower;
  arm_election();
}

void RaftEngine::maybe_propose() {
  while (true) {
    std::vector<Transaction> txs = node_.take_for_block(size_t(node_.params().max_block_txs));
    if (txs.empty()) break;  // no empty blocks, ever
    Block b;
    b.height = log_.size() + 1;
    b.prev_hash = log_.empty() ? node_.ledger().blocks().front().hash : log_.back().block.hash;
    b.proposer = uint32_t(me_);
    b.timestamp_ms = int64_t(std::llround(node_.sched().now()));
    b.txs = std::move(txs);
    b.hash = compute_block_hash(b);
    log_.push_back(LogEntry{term_, std::move(b)});
  }
}

void RaftEngine::replicate() {
  for (int p = 0; p < n_; ++p) {
    if (p == me_) continue;
    uint64_t ni = next_index_[p];
    uint64_t prev_index = ni - 1;
    uint64_t prev_term = prev_index ? log_[prev_index - 1].term : 0;
    AppendEntriesMsg m{term_, me_, prev_index, prev_term, {}, commit_index_};
    for (uint64_t i = ni; i <= log_.size() && m.entries.size() < kReplicationBatch; ++i)
      m.entries.push_back(log_[i - 1]);
    node_.sched().send(me_, p, m);
  }
}

void RaftEngine::advance_commit() {
  for (uint64_t n = log_.size(); n > commit_index_; --n) {
    if (log_[n - 1].term != term_) break;
    int count = 1;
    for (int p = 0; p < n_; ++p) {
      if (p != me_ && match_index_[p] >= n) ++count;
    }
    if (count >= majority()) {
      apply_up_to(n);
      break;
    }
  }
}

void RaftEngine::apply_up_to(uint64_t index) {
  if (index <= commit_index_) return;
  commit_index_ = index;
  while (last_applied_ < commit_index_) {
    ++last_applied_;
    node_.commit_block(log_[last_applied_ - 1].block);
  }
}

void RaftEngine::on_timer(int timer_id) {
  switch (timer_id) {
    case kTimerElection:
      if (role_ == Role::Leader) return;
      if (node_.sched().now() + 1e-9 < election_deadline_) return;  // superseded
      start_election();
      return;
    case kTimerHeartbeat:
      if (role_ != Role::Leader) return;
      maybe_propose();
      replicate();
      node_.sched().set_timer(me_, kTimerHeartbeat,
                              node_.sched().now() + node_.params().heartbeat_ms);
      return;
    case kTimerClient: {
      client_timer_armed_ = false;
      for (auto it = own_submitted_.begin(); it != own_submitted_.end();) {
        bool settled = node_.ledger().receipts().contains(it->first);
        bool stale = node_.sched().now() - double(it->second.submit_time_ms) >
                     node_.params().client_give_up_ms;
        if (settled || stale) {
          it = own_submitted_.erase(it);
        } else {
          try_submit(it->second);
          ++it;
        }
      }
      if (!own_submitted_.empty()) arm_client_timer();
      return;
    }
  }
}

void RaftEngine::try_submit(const Transaction& tx) {
  if (role_ == Role::Leader) {
    node_.add_pending(tx);
  } else if (leader_hint_ && *leader_hint_ != me_) {
    node_.sched().send(me_, *leader_hint_, TxForwardMsg{tx});
  }
}

void RaftEngine::arm_client_timer() {
  if (client_timer_armed_) return;
  client_timer_armed_ = true;
  node_.sched().set_timer(me_, kTimerClient, node_.sched().now() + node_.params().client_retry_ms);
}

void RaftEngine::on_inject_tx(const Transaction& tx) {
  own_submitted_.emplace(tx.tx_id, tx);
  try_submit(tx);
  arm_client_timer();
}

void RaftEngine::on_message(int from, const Message& m) {
  if (const auto* rv = std::get_if<RequestVoteMsg>(&m)) {
    handle_request_vote(from, *rv);
  } else if (const auto* vr = std::get_if<VoteReplyMsg>(&m)) {
    handle_vote_reply(from, *vr);
  } else if (const auto* ae = std::get_if<AppendEntriesMsg>(&m)) {
    handle_append_entries(from, *ae);
  } else if (const auto* ar = std::get_if<AppendReplyMsg>(&m)) {
    handle_append_reply(from, *ar);
  } else if (const auto* tf = std::get_if<TxForwardMsg>(&m)) {
    if (role_ == Role::Leader && !node_.ledger().receipts().contains(tf->tx.tx_id))
      node_.add_pending(tf->tx);
  }
}

void RaftEngine::handle_request_vote(int from, const RequestVoteMsg& m) {
  if (m.term > term_) step_down(m.term);
  bool grant = m.term == term_ && role_ != Role::Leader &&
               (!voted_for_ || *voted_for_ == m.candidate) &&
               log_up_to_date(m.last_log_term, m.last_log_index);
  if (grant) {
    voted_for_ = m.candidate;
    arm_election();
  }
  node_.sched().send(me_, from, VoteReplyMsg{term_, grant});
}

void RaftEngine::handle_vote_reply(int from, const VoteReplyMsg& m) {
  if (m.term > term_) {
    step_down(m.term);
    return;
  }
  if (role_ != Role::Candidate || m.term != term_ || !m.granted) return;
  votes_.insert(from);
  if (int(votes_.size()) >= majority()) become_leader();
}

void RaftEngine::handle_append_entries(int from, const AppendEntriesMsg& m) {
  if (m.term < term_) {
    node_.sched().send(me_, from, AppendReplyMsg{term_, false, 0});
    return;
  }
  if (m.term > term_ || role_ != Role::Follower) step_down(m.term);
  leader_hint_ = m.leader;
  arm_election();

  bool prev_ok = m.prev_index == 0 ||
                 (log_.size() >= m.prev_index && log_[m.prev_index - 1].term == m.prev_term);
  if (!prev_ok) {
    node_.sched().send(me_, from, AppendReplyMsg{term_, false, 0});
    return;
  }
  uint64_t idx = m.prev_index;
  for (const LogEntry& e : m.entries) {
    ++idx;
    if (log_.size() >= idx && log_[idx - 1].term != e.term) log_.resize(idx - 1);
    if (log_.size() < idx) log_.push_back(e);
  }
  node_.sched().send(me_, from,
                     AppendReplyMsg{term_, true, m.prev_index + m.entries.size()});
  apply_up_to(std::min<uint64_t>(m.leader_commit, log_.size()));
}

void RaftEngine::handle_append_reply(int from, const AppendReplyMsg& m) {
  if (m.term > term_) {
    step_down(m.term);
    return;
  }
  if (role_ != Role::Leader || m.term != term_) return;
  if (m.success) {
    match_index_[from] = std::max(match_index_[from], m.match_index);
    next_index_[from] = match_index_[from] + 1;
    advance_commit();
  } else if (next_index_[from] > 1) {
    next_index_[from] -= 1;
  }
}

void RaftEngine::on_recover() {
  if (role_ == Role::Leader) {
    node_.sched().set_timer(me_, kTimerHeartbeat, node_.sched().now());
  } else {
    arm_election();
  }
  if (!own_submitted_.empty()) arm_client_timer();
}

}  // namespace npsim
