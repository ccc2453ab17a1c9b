#include "npsim/netsim.hpp"

#include <sstream>
#include <stdexcept>

namespace npsim {

Topology Topology::paper_default() {
  Topology t;
  t.sites = {"cloud_a", "cloud_a", "cloud_a", "cloud_a", "remote"};
  t.intra = LinkModel{2.0, 0.5, 0.1, 0.0};
  t.inter = LinkModel{25.0, 5.0, 5.0, 0.0};
  return t;
}

Scheduler::Scheduler(Topology topo, uint64_t seed)
    : topo_(std::move(topo)),
      rng_(seed),
      crashed_(topo_.size(), false),
      byzantine_(topo_.size()) {}

void Scheduler::register_node(INode* node) { nodes_.push_back(node); }

void Scheduler::push(double t, Payload p) {
  if (t < now_) throw std::logic_error("Scheduler: fire time in the past");
  queue_.push(Event{t, next_seq_++, std::move(p)});
}

void Scheduler::set_timer(int node, int timer_id, double at) {
  push(at, TimerEv{node, timer_id});
}

void Scheduler::inject_tx(int node, Transaction tx, double at) {
  push(at, InjectEv{node, std::move(tx)});
}

void Scheduler::crash(int node, double at) {
  push(at, FaultEv{FaultEv::Kind::Crash, node});
}

void Scheduler::recover(int node, double at) {
  push(at, FaultEv{FaultEv::Kind::Recover, node});
}

void Scheduler::set_byzantine(int node, ByzantinePolicy policy, double at) {
  push(at, FaultEv{FaultEv::Kind::Byzantine, node, policy});
}

void Scheduler::send(int from, int to, const Message& m) {
  if (crashed_[from]) return;
  Message out = m;
  if (byzantine_[from]) {
    auto filtered = apply_byzantine_policy(*byzantine_[from], to, m);
    if (!filtered) return;
    out = std::move(*filtered);
  }
  ++sent_;
  if (from == to) {
    push(now_, DeliverEv{from, to, std::move(out)});
    return;
  }
  const LinkModel& link = topo_.link(from, to);
  if (link.loss_rate > 0.0 &&
      std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < link.loss_rate) {
    return;  // silent loss
  }
  double delay = std::normal_distribution<double>(link.mean_ms, link.stddev_ms)(rng_);
  delay = std::max(link.min_ms, delay);
  push(now_ + delay, DeliverEv{from, to, std::move(out)});
}

void Scheduler::broadcast(int from, const Message& m) {
  for (int to = 0; to < topo_.size(); ++to) {
    if (to != from) send(from, to, m);
  }
}

void Scheduler::dispatch(const Event& ev) {
  if (auto* d = std::get_if<DeliverEv>(&ev.payload)) {
    if (crashed_[d->to]) return;
    ++delivered_;
    if (trace_) {
      std::ostringstream os;
      os << ev.t << " deliver " << d->from << "->" << d->to << " kind=" << d->msg.index();
      trace_->push_back(os.str());
    }
    nodes_[d->to]->on_message(d->from, d->msg);
  } else if (auto* t = std::get_if<TimerEv>(&ev.payload)) {
    if (crashed_[t->node]) return;
    nodes_[t->node]->on_timer(t->timer_id);
  } else if (auto* i = std::get_if<InjectEv>(&ev.payload)) {
    if (crashed_[i->node]) return;
    if (trace_) {
      std::ostringstream os;
      os << ev.t << " inject tx=" << i->tx.tx_id << " node=" << i->node;
      trace_->push_back(os.str());
    }
    nodes_[i->node]->on_inject_tx(i->tx);
  } else if (auto* f = std::get_if<FaultEv>(&ev.payload)) {
    switch (f->kind) {
      case FaultEv::Kind::Crash:
        crashed_[f->node] = true;
        break;
      case FaultEv::Kind::Recover:
        crashed_[f->node] = false;
        nodes_[f->node]->on_recover();
        break;
      case FaultEv::Kind::Byzantine:
        byzantine_[f->node] = f->policy;
        break;
    }
  }
}

void Scheduler::run_until(double t_end) {
  while (!queue_.empty() && queue_.top().t <= t_end) {
    Event ev = queue_.top();
    queue_.pop();
    now_ = ev.t;
    dispatch(ev);
  }
  now_ = std::max(now_, t_end);
}

std::optional<Message> apply_byzantine_policy(ByzantinePolicy policy, int to, const Message& m) {
  switch (policy) {
    case ByzantinePolicy::Silence:
      return std::nullopt;
    case ByzantinePolicy::Equivocate:
      if (const auto* pp = std::get_if<PrePrepareMsg>(&m)) {
        if (to % 2 == 1) {
          PrePrepareMsg alt = *pp;
          alt.block.timestamp_ms += 1;
          alt.block.hash = compute_block_hash(alt.block);
          return Message{alt};
        }
      }
      return m;
    case ByzantinePolicy::InvalidProposal:
      if (const auto* pp = std::get_if<PrePrepareMsg>(&m)) {
        PrePrepareMsg bad = *pp;
        bad.block.prev_hash[0] ^= 0xff;
        bad.block.hash = compute_block_hash(bad.block);
        return Message{bad};
      }
      return m;
  }
  return m;
}

}  // namespace npsim
