#pragma once

#include <map>
#include <memory>
#include <set>

#include "npsim/ibft.hpp"
#include "npsim/node.hpp"
#include "npsim/raft.hpp"

namespace npsim {

enum class ConsensusKind { Raft, Ibft };

struct SimConfig {
  ConsensusKind consensus = ConsensusKind::Raft;
  Topology topology = Topology::paper_default();
  CostModel cost;
  ConsensusParams params;
  uint64_t seed = 1;
};

// Five nodes, one scheduler, plus the bookkeeping the metrics and the safety
// checks need: earliest confirmation per tx, leaders per term, finalized
// block hashes per height per node.
class SimWorld final : public IWorldObserver {
 public:
  SimWorld(SimConfig cfg, const WorldState& genesis);

  Scheduler& sched() { return *sched_; }
  BlockchainNode& node(int i) { return *nodes_[i]; }
  int size() const { return int(nodes_.size()); }
  const SimConfig& config() const { return cfg_; }

  void start();

  struct ConfirmRec {
    double confirm_ms = 0.0;
    Receipt receipt;
  };
  const std::map<uint64_t, ConfirmRec>& confirms() const { return confirms_; }
  const std::map<uint64_t, std::set<int>>& leaders_by_term() const { return leaders_by_term_; }
  const std::map<uint64_t, std::map<Hash256, std::set<int>, Hash256Less>>& finalized() const {
    return finalized_;
  }

  // At most one distinct finalized hash per height among the given nodes.
  bool agreement(const std::set<int>& honest) const;
  // Tip hash at the highest height every node has committed.
  bool replicas_consistent() const;

  // IWorldObserver
  void on_confirm(uint64_t tx_id, int node, double confirm_ms, const Receipt& r) override;
  void on_leader_elected(int node, uint64_t term) override;
  void on_finalized(int node, const Block& block) override;

 private:
  SimConfig cfg_;
  std::unique_ptr<Scheduler> sched_;
  std::vector<std::unique_ptr<BlockchainNode>> nodes_;
  std::map<uint64_t, ConfirmRec> confirms_;
  std::map<uint64_t, std::set<int>> leaders_by_term_;
  std::map<uint64_t, std::map<Hash256, std::set<int>, Hash256Less>> finalized_;
};

}  // namespace npsim
