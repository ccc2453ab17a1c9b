#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "npsim/common.hpp"
#include "npsim/contract.hpp"

namespace npsim {

struct Transaction {
  uint64_t tx_id = 0;
  Address sender;
  TxCall call;
  int64_t submit_time_ms = 0;

  bool operator==(const Transaction&) const = default;
};

struct Receipt {
  enum class Status : uint8_t { Success, Reverted, TimedOut };
  uint64_t tx_id = 0;
  Status status = Status::Success;
  RevertReason reason = RevertReason::None;

  bool operator==(const Receipt&) const = default;
};

struct Block {
  uint64_t height = 0;
  Hash256 prev_hash{};
  Hash256 hash{};
  uint32_t proposer = 0;
  int64_t timestamp_ms = 0;
  std::vector<Transaction> txs;

  bool operator==(const Block&) const = default;
};

// Canonical encodings; cross-replica hash equality depends on these.
Bytes serialize_tx(const Transaction& tx);
Hash256 compute_block_hash(const Block& b);
Block make_genesis_block();

enum class AppendError : uint8_t { Ok, BrokenChain };

class Ledger {
 public:
  explicit Ledger(WorldState genesis_state);

  // Verifies the link, applies every tx (reverted txs stay in the block and
  // get failure receipts), advances the tip. Rejects without side effects on
  // hash/height mismatch.
  AppendError append_block(const Block& block);

  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& tip() const { return blocks_.back(); }
  const WorldState& state() const { return state_; }
  const std::map<uint64_t, Receipt>& receipts() const { return receipts_; }
  const WorldState& genesis_state() const { return genesis_state_; }

 private:
  std::vector<Block> blocks_;
  WorldState state_;
  WorldState genesis_state_;
  std::map<uint64_t, Receipt> receipts_;
  std::set<uint64_t> seen_tx_ids_;
};

// True iff every recomputed block hash and every prev_hash link matches.
bool verify_chain(const std::vector<Block>& blocks);

}  // namespace npsim
