#include "npsim/world.hpp"

namespace npsim {

SimWorld::SimWorld(SimConfig cfg, const WorldState& genesis) : cfg_(std::move(cfg)) {
  sched_ = std::make_unique<Scheduler>(cfg_.topology, cfg_.seed);
  int n = cfg_.topology.size();
  for (int i = 0; i < n; ++i) {
    auto node = std::make_unique<BlockchainNode>(i, *sched_, genesis, cfg_.cost, cfg_.params, this);
    if (cfg_.consensus == ConsensusKind::Raft) {
      node->set_engine(std::make_unique<RaftEngine>(*node, this));
    } else {
      node->set_engine(std::make_unique<IbftEngine>(*node, this));
    }
    nodes_.push_back(std::move(node));
  }
  for (auto& node : nodes_) sched_->register_node(node.get());
}

void SimWorld::start() {
  for (auto& node : nodes_) node->start();
}

void SimWorld::on_confirm(uint64_t tx_id, int /*node*/, double confirm_ms, const Receipt& r) {
  auto it = confirms_.find(tx_id);
  if (it == confirms_.end() || confirm_ms < it->second.confirm_ms)
    confirms_[tx_id] = ConfirmRec{confirm_ms, r};
}

void SimWorld::on_leader_elected(int node, uint64_t term) {
  leaders_by_term_[term].insert(node);
}

void SimWorld::on_finalized(int node, const Block& block) {
  finalized_[block.height][block.hash].insert(node);
}

bool SimWorld::agreement(const std::set<int>& honest) const {
  for (const auto& [height, by_hash] : finalized_) {
    int distinct = 0;
    for (const auto& [hash, who] : by_hash) {
      for (int n : who) {
        if (honest.contains(n)) {
          ++distinct;
          break;
        }
      }
    }
    if (distinct > 1) return false;
  }
  return true;
}

bool SimWorld::replicas_consistent() const {
  uint64_t min_tip = UINT64_MAX;
  for (const auto& node : nodes_) min_tip = std::min(min_tip, node->ledger().tip().height);
  for (const auto& node : nodes_) {
    if (node->ledger().blocks()[min_tip].hash != nodes_[0]->ledger().blocks()[min_tip].hash)
      return false;
  }
  return true;
}

}  // namespace npsim
