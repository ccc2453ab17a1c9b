#pragma once

#include <map>
#include <optional>
#include <set>

#include "npsim/node.hpp"

namespace npsim {

// Crash-fault-tolerant block ordering. Blocks are created on demand: the
// leader never proposes when its pool is empty, so heartbeats carry no blocks.
class RaftEngine final : public ConsensusEngine {
 public:
  enum class Role { Follower, Candidate, Leader };

  RaftEngine(BlockchainNode& node, IWorldObserver* observer);

  void start() override;
  void on_message(int from, const Message& m) override;
  void on_timer(int timer_id) override;
  void on_inject_tx(const Transaction& tx) override;
  void on_recover() override;

  Role role() const { return role_; }
  uint64_t term() const { return term_; }
  uint64_t log_size() const { return log_.size(); }
  uint64_t commit_index() const { return commit_index_; }
  std::optional<int> leader_hint() const { return leader_hint_; }

 private:
  static constexpr int kTimerElection = 1;
  static constexpr int kTimerHeartbeat = 2;
  static constexpr int kTimerClient = 3;
  static constexpr size_t kReplicationBatch = 20;

  int majority() const { return n_ / 2 + 1; }
  uint64_t last_log_term() const { return log_.empty() ? 0 : log_.back().term; }
  bool log_up_to_date(uint64_t their_term, uint64_t their_index) const;

  void arm_election();
  void start_election();
  void become_leader();
  void step_down(uint64_t new_term);
  void maybe_propose();
  void replicate();
  void advance_commit();
  void apply_up_to(uint64_t index);
  void try_submit(const Transaction& tx);
  void arm_client_timer();

  void handle_request_vote(int from, const RequestVoteMsg& m);
  void handle_vote_reply(int from, const VoteReplyMsg& m);
  void handle_append_entries(int from, const AppendEntriesMsg& m);
  void handle_append_reply(int from, const AppendReplyMsg& m);

  BlockchainNode& node_;
  IWorldObserver* observer_;
  int n_;
  int me_;

  Role role_ = Role::Follower;
  uint64_t term_ = 0;
  std::optional<int> voted_for_;
  std::vector<LogEntry> log_;  // entry i (1-based) holds the block at height i
  uint64_t commit_index_ = 0;
  uint64_t last_applied_ = 0;
  std::vector<uint64_t> next_index_;
  std::vector<uint64_t> match_index_;
  std::set<int> votes_;
  double election_deadline_ = 0.0;
  std::optional<int> leader_hint_;

  std::map<uint64_t, Transaction> own_submitted_;
  bool client_timer_armed_ = false;
};

}  // namespace npsim
