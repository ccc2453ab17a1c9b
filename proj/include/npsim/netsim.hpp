#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "npsim/messages.hpp"

namespace npsim {

struct LinkModel {
  double mean_ms = 2.0;
  double stddev_ms = 0.5;
  double min_ms = 0.1;
  double loss_rate = 0.0;  // [0, 1)
};

// Site-class WAN model: 4 co-located cloud nodes plus one remote node.
struct Topology {
  std::vector<std::string> sites;
  LinkModel intra;
  LinkModel inter;

  int size() const { return int(sites.size()); }
  const LinkModel& link(int a, int b) const { return sites[a] == sites[b] ? intra : inter; }

  static Topology paper_default();
};

enum class ByzantinePolicy { Silence, Equivocate, InvalidProposal };

class INode {
 public:
  virtual ~INode() = default;
  virtual void on_message(int from, const Message& m) = 0;
  virtual void on_timer(int timer_id) = 0;
  virtual void on_inject_tx(const Transaction& tx) = 0;
  virtual void on_recover() = 0;
};

class Scheduler {
 public:
  Scheduler(Topology topo, uint64_t seed);

  void register_node(INode* node);  // call in node-id order

  double now() const { return now_; }
  std::mt19937_64& rng() { return rng_; }
  const Topology& topology() const { return topo_; }

  // Throws on fire times in the past.
  void set_timer(int node, int timer_id, double at);
  void inject_tx(int node, Transaction tx, double at);
  void crash(int node, double at);
  void recover(int node, double at);
  void set_byzantine(int node, ByzantinePolicy policy, double at);

  // Samples loss and latency per recipient; self-delivery is immediate.
  void send(int from, int to, const Message& m);
  void broadcast(int from, const Message& m);

  void run_until(double t_end);
  bool empty() const { return queue_.empty(); }

  bool is_crashed(int node) const { return crashed_[node]; }
  std::optional<ByzantinePolicy> byzantine_policy(int node) const { return byzantine_[node]; }

  uint64_t messages_sent() const { return sent_; }
  uint64_t messages_delivered() const { return delivered_; }

  void set_trace(std::vector<std::string>* sink) { trace_ = sink; }

 private:
  struct DeliverEv {
    int from, to;
    Message msg;
  };
  struct TimerEv {
    int node, timer_id;
  };
  struct InjectEv {
    int node;
    Transaction tx;
  };
  struct FaultEv {
    enum class Kind { Crash, Recover, Byzantine } kind;
    int node;
    ByzantinePolicy policy = ByzantinePolicy::Silence;
  };
  using Payload = std::variant<DeliverEv, TimerEv, InjectEv, FaultEv>;
  struct Event {
    double t;
    uint64_t seq;
    Payload payload;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.t > b.t || (a.t == b.t && a.seq > b.seq);
    }
  };

  void push(double t, Payload p);
  void dispatch(const Event& ev);

  Topology topo_;
  std::mt19937_64 rng_;
  std::vector<INode*> nodes_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  double now_ = 0.0;
  uint64_t next_seq_ = 0;
  uint64_t sent_ = 0, delivered_ = 0;
  std::vector<bool> crashed_;
  std::vector<std::optional<ByzantinePolicy>> byzantine_;
  std::vector<std::string>* trace_ = nullptr;
};

// Outgoing-message filter for byzantine senders; nullopt drops the message.
std::optional<Message> apply_byzantine_policy(ByzantinePolicy policy, int to, const Message& m);

}  // namespace npsim
