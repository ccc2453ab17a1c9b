#pragma once

#include <map>
#include <optional>
#include <set>

#include "npsim/node.hpp"

namespace npsim {

struct Hash256Less {
  bool operator()(const Hash256& a, const Hash256& b) const { return a < b; }
};

// 3-phase PRE-PREPARE / PREPARE / COMMIT finalization with round changes,
// locking, and round-robin proposers. N = 3F + 1; quorum = 2F + 1.
// Blocks are period-driven: the proposer emits a block every block period,
// empty or not. A new height starts only after the previous block is applied
// locally, so contract execution sits on the consensus critical path.
class IbftEngine final : public ConsensusEngine {
 public:
  enum class Phase { Idle, AwaitingProposal, Preprepared, Prepared, Committed };

  IbftEngine(BlockchainNode& node, IWorldObserver* observer);

  void start() override;
  void on_message(int from, const Message& m) override;
  void on_timer(int timer_id) override;
  void on_inject_tx(const Transaction& tx) override;
  void on_recover() override;

  uint64_t height() const { return height_; }
  uint32_t round() const { return round_; }
  Phase phase() const { return phase_; }
  int proposer_of(uint64_t height, uint32_t round) const {
    return int((height + round) % uint64_t(n_));
  }
  int quorum() const { return 2 * ((n_ - 1) / 3) + 1; }
  int f() const { return (n_ - 1) / 3; }

 private:
  static constexpr int kTimerRound = 1;
  static constexpr int kTimerNewHeight = 2;

  void schedule_new_height(double ready_at);
  void begin_height();
  void enter_round(uint32_t round);
  void propose();
  bool valid_proposal(int from, const PrePrepareMsg& m) const;
  void check_prepared();
  void check_committed();
  void finalize(const Block& block);
  void broadcast_and_self(const Message& m);
  void request_sync(int from, uint64_t msg_height);

  void handle_preprepare(int from, const PrePrepareMsg& m);
  void handle_prepare(int from, const PrepareMsg& m);
  void handle_commit(int from, const CommitMsg& m);
  void handle_round_change(int from, const RoundChangeMsg& m);
  void handle_sync_request(int from, const SyncRequestMsg& m);
  void handle_sync_response(int from, const SyncResponseMsg& m);

  BlockchainNode& node_;
  IWorldObserver* observer_;
  int n_;
  int me_;

  uint64_t height_ = 1;  // next height to finalize
  uint32_t round_ = 0;
  Phase phase_ = Phase::Idle;
  std::optional<Block> proposal_;
  std::optional<Block> locked_block_;
  uint32_t locked_round_ = 0;
  double round_deadline_ = 0.0;
  double current_timeout_ms_ = 0.0;

  // votes for the current height, keyed by round then block hash
  std::map<uint32_t, std::map<Hash256, std::set<int>, Hash256Less>> prepares_;
  std::map<uint32_t, std::map<Hash256, std::set<int>, Hash256Less>> commits_;
  std::map<uint32_t, std::map<int, RoundChangeMsg>> round_changes_;
  uint32_t highest_rc_sent_ = 0;
  bool rc_sent_ = false;

  std::vector<std::pair<int, Message>> future_;  // messages for heights ahead of us
  double last_sync_request_ = -1e18;
};

}  // namespace npsim
