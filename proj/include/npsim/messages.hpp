#pragma once

#include <variant>
#include <vector>

#include "npsim/chain.hpp"

namespace npsim {

// Raft
struct LogEntry {
  uint64_t term = 0;
  Block block;
};
struct RequestVoteMsg {
  uint64_t term = 0;
  int candidate = 0;
  uint64_t last_log_index = 0;
  uint64_t last_log_term = 0;
};
struct VoteReplyMsg {
  uint64_t term = 0;
  bool granted = false;
};
struct AppendEntriesMsg {
  uint64_t term = 0;
  int leader = 0;
  uint64_t prev_index = 0;
  uint64_t prev_term = 0;
  std::vector<LogEntry> entries;
  uint64_t leader_commit = 0;
};
struct AppendReplyMsg {
  uint64_t term = 0;
  bool success = false;
  uint64_t match_index = 0;
};

// IBFT
struct PrePrepareMsg {
  uint64_t height = 0;
  uint32_t round = 0;
  Block block;
};
struct PrepareMsg {
  uint64_t height = 0;
  uint32_t round = 0;
  Hash256 block_hash{};
};
struct CommitMsg {
  uint64_t height = 0;
  uint32_t round = 0;
  Hash256 block_hash{};
};
struct RoundChangeMsg {
  uint64_t height = 0;
  uint32_t round = 0;
  bool has_lock = false;
  uint32_t locked_round = 0;
  Block locked_block;
};

// Client/catch-up traffic
struct TxForwardMsg {
  Transaction tx;
};
struct TxGossipMsg {
  Transaction tx;
};
struct SyncRequestMsg {
  uint64_t from_height = 0;
};
struct SyncResponseMsg {
  std::vector<Block> blocks;
};

using Message =
    std::variant<RequestVoteMsg, VoteReplyMsg, AppendEntriesMsg, AppendReplyMsg, PrePrepareMsg,
                 PrepareMsg, CommitMsg, RoundChangeMsg, TxForwardMsg, TxGossipMsg, SyncRequestMsg,
                 SyncResponseMsg>;

}  // namespace npsim
