#include "npsim/chain.hpp"

namespace npsim {

static void write_sla(ByteWriter& w, const Sla& s) {
  w.u32(s.max_latency_ms);
  w.u32(s.min_throughput_mbps);
  w.f64(s.max_packet_loss_pct);
}

static void write_request(ByteWriter& w, const ResourceRequest& r) {
  w.u64(r.cpu);
  w.u64(r.ram);
  w.u64(r.storage);
  w.str(r.domain);
  write_sla(w, r.sla);
  w.str(r.vnf_image);
  w.u64(r.lend_time_s);
}

Bytes serialize_tx(const Transaction& tx) {
  ByteWriter w;
  w.u64(tx.tx_id);
  w.str(tx.sender);
  w.u8(uint8_t(tx.call.index()));
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, AddProviderCall>) {
          const ProviderSpec& p = c.provider;
          w.str(p.name);
          w.u64(p.cpu);
          w.u64(p.ram);
          w.u64(p.storage);
          w.u64(p.cost);
          w.str(p.domain);
          w.u32(uint32_t(p.slas.size()));
          for (const Sla& s : p.slas) write_sla(w, s);
          w.u32(uint32_t(p.vnf_images.size()));
          for (const std::string& v : p.vnf_images) w.str(v);
          w.str(p.address);
        } else if constexpr (std::is_same_v<T, RequestResourcesCall>) {
          write_request(w, c.request);
          w.u64(c.payment);
        } else {
          w.u64(c.lease_id);
        }
      },
      tx.call);
  w.i64(tx.submit_time_ms);
  return w.bytes();
}

Hash256 compute_block_hash(const Block& b) {
  ByteWriter w;
  w.u64(b.height);
  w.raw(b.prev_hash);
  w.u32(b.proposer);
  w.i64(b.timestamp_ms);
  w.u32(uint32_t(b.txs.size()));
  for (const Transaction& tx : b.txs) {
    Bytes enc = serialize_tx(tx);
    w.u32(uint32_t(enc.size()));
    w.raw(enc);
  }
  return sha256(w.bytes());
}

Block make_genesis_block() {
  Block g;
  g.height = 0;
  g.prev_hash = kZeroHash;
  g.proposer = 0;
  g.timestamp_ms = 0;
  g.hash = compute_block_hash(g);
  return g;
}

Ledger::Ledger(WorldState genesis_state)
    : state_(genesis_state), genesis_state_(std::move(genesis_state)) {
  blocks_.push_back(make_genesis_block());
}

AppendError Ledger::append_block(const Block& block) {
  const Block& tip_block = blocks_.back();
  if (block.height != tip_block.height + 1) return AppendError::BrokenChain;
  if (block.prev_hash != tip_block.hash) return AppendError::BrokenChain;
  if (block.hash != compute_block_hash(block)) return AppendError::BrokenChain;

  for (const Transaction& tx : block.txs) {
    if (seen_tx_ids_.contains(tx.tx_id)) {
      // Duplicate inclusion after a leader change; first application stands.
      continue;
    }
    seen_tx_ids_.insert(tx.tx_id);
    TxResult res = state_.apply(tx.sender, tx.call, block.timestamp_ms);
    Receipt r{tx.tx_id,
              res.ok ? Receipt::Status::Success : Receipt::Status::Reverted,
              res.reason};
    receipts_[tx.tx_id] = r;
  }
  blocks_.push_back(block);
  return AppendError::Ok;
}

bool verify_chain(const std::vector<Block>& blocks) {
  for (size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].hash != compute_block_hash(blocks[i])) return false;
    if (i == 0) {
      if (blocks[i].height != 0 || blocks[i].prev_hash != kZeroHash) return false;
    } else {
      if (blocks[i].height != blocks[i - 1].height + 1) return false;
      if (blocks[i].prev_hash != blocks[i - 1].hash) return false;
    }
  }
  return true;
}

}  // namespace npsim
