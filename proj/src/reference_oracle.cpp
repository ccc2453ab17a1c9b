#include "npsim/reference_oracle.hpp"

namespace npsim::oracle {

ReferenceMarket::ReferenceMarket(const WorldState& genesis)
    : admin_(genesis.admin_address),
      initial_balance_(genesis.initial_account_balance),
      next_lease_id_(genesis.next_lease_id) {
  for (const auto& [index, p] : genesis.providers) {
    (void)index;
    Provider rp{p.spec.name, p.spec.cpu,    p.spec.ram,  p.spec.storage,
                p.spec.cpu - p.avail_cpu,   p.spec.ram - p.avail_ram,
                p.spec.storage - p.avail_storage,
                p.spec.cost, p.spec.domain, p.spec.slas, p.spec.vnf_images,
                p.spec.address};
    providers_.push_back(std::move(rp));
  }
  for (const auto& [addr, acct] : genesis.accounts) balances_.emplace_back(addr, acct.balance);
  for (const auto& [id, lease] : genesis.leases) {
    leases_.push_back(LeaseRec{id, size_t(lease.supplier_index - 1), lease.requester, lease.cpu,
                               lease.ram, lease.storage, lease.start_time_ms, lease.lend_time_s,
                               lease.price, lease.active});
  }
}

uint64_t* ReferenceMarket::find_balance(const std::string& address) {
  for (auto& [addr, bal] : balances_) {
    if (addr == address) return &bal;
  }
  return nullptr;
}

const uint64_t* ReferenceMarket::find_balance(const std::string& address) const {
  return const_cast<ReferenceMarket*>(this)->find_balance(address);
}

uint64_t ReferenceMarket::select(const ResourceRequest& req) const {
  uint64_t best = 0;  // sentinel: no candidate
  for (size_t slot = 0; slot < providers_.size(); ++slot) {
    const Provider& p = providers_[slot];
    uint64_t avail_cpu = p.cap_cpu - p.used_cpu;
    uint64_t avail_ram = p.cap_ram - p.used_ram;
    uint64_t avail_storage = p.cap_storage - p.used_storage;
    if (avail_cpu < req.cpu || avail_ram < req.ram || avail_storage < req.storage) continue;
    if (p.domain != req.domain) continue;
    bool sla_ok = false;
    for (const Sla& s : p.slas) {
      if (s.max_latency_ms <= req.sla.max_latency_ms &&
          s.min_throughput_mbps >= req.sla.min_throughput_mbps &&
          s.max_packet_loss_pct <= req.sla.max_packet_loss_pct) {
        sla_ok = true;
      }
    }
    if (!sla_ok) continue;
    bool vnf_ok = false;
    for (const std::string& v : p.vnfs) {
      if (v == req.vnf_image) vnf_ok = true;
    }
    if (!vnf_ok) continue;
    if (best == 0 || p.cost <= providers_[best - 1].cost) best = slot + 1;
  }
  return best;
}

ReferenceMarket::Outcome ReferenceMarket::apply(const Transaction& tx, int64_t now_ms) {
  if (const auto* add = std::get_if<AddProviderCall>(&tx.call)) {
    if (tx.sender != admin_) return {false, "not_admin"};
    const ProviderSpec& p = add->provider;
    bool ok = !p.name.empty() && !p.address.empty();
    for (const Sla& s : p.slas) {
      if (s.max_packet_loss_pct < 0.0 || s.max_packet_loss_pct > 100.0) ok = false;
    }
    if (!ok) return {false, "invalid_provider"};
    providers_.push_back(Provider{p.name, p.cpu, p.ram, p.storage, 0, 0, 0, p.cost, p.domain,
                                  p.slas, p.vnf_images, p.address});
    if (!find_balance(p.address)) balances_.emplace_back(p.address, initial_balance_);
    return {true, "", uint64_t(providers_.size())};
  }

  if (const auto* req = std::get_if<RequestResourcesCall>(&tx.call)) {
    uint64_t* caller_bal = find_balance(tx.sender);
    if (!caller_bal) return {false, "no_account"};
    if (req->payment > *caller_bal) return {false, "insufficient_payment"};
    uint64_t best = select(req->request);
    if (best == 0) return {false, "no_provider_found"};
    Provider& supplier = providers_[best - 1];
    // Every intermediate must fit in 64 bits, same as the production check.
    unsigned __int128 units = (unsigned __int128)req->request.cpu + req->request.ram +
                              req->request.storage;
    if (units > UINT64_MAX) return {false, "arithmetic_overflow"};
    unsigned __int128 price128 = units * supplier.cost;
    if (price128 > UINT64_MAX) return {false, "arithmetic_overflow"};
    price128 *= req->request.lend_time_s;
    if (price128 > UINT64_MAX) return {false, "arithmetic_overflow"};
    uint64_t price = uint64_t(price128);
    if (req->payment < price) return {false, "insufficient_payment"};
    *caller_bal -= price;
    *find_balance(supplier.address) += price;
    supplier.used_cpu += req->request.cpu;
    supplier.used_ram += req->request.ram;
    supplier.used_storage += req->request.storage;
    uint64_t id = next_lease_id_++;
    leases_.push_back(LeaseRec{id, best - 1, tx.sender, req->request.cpu, req->request.ram,
                               req->request.storage, now_ms, req->request.lend_time_s, price,
                               true});
    return {true, "", id};
  }

  const auto& ret = std::get<ReturnResourcesCall>(tx.call);
  for (LeaseRec& lease : leases_) {
    if (lease.id != ret.lease_id) continue;
    if (!lease.active) return {false, "unknown_lease"};
    if (now_ms < lease.start_ms + int64_t(lease.lend_s) * 1000)
      return {false, "lease_not_expired"};
    Provider& supplier = providers_[lease.provider];
    supplier.used_cpu -= lease.cpu;
    supplier.used_ram -= lease.ram;
    supplier.used_storage -= lease.storage;
    lease.active = false;
    return {true, "", lease.id};
  }
  return {false, "unknown_lease"};
}

uint64_t ReferenceMarket::balance(const std::string& address) const {
  const uint64_t* b = find_balance(address);
  return b ? *b : 0;
}

uint64_t ReferenceMarket::total_balance() const {
  uint64_t sum = 0;
  for (const auto& [_, bal] : balances_) sum += bal;
  return sum;
}

bool ReferenceMarket::conservation_holds() const {
  for (size_t slot = 0; slot < providers_.size(); ++slot) {
    uint64_t cpu = 0, ram = 0, storage = 0;
    for (const LeaseRec& lease : leases_) {
      if (lease.active && lease.provider == slot) {
        cpu += lease.cpu;
        ram += lease.ram;
        storage += lease.storage;
      }
    }
    const Provider& p = providers_[slot];
    if (cpu != p.used_cpu || ram != p.used_ram || storage != p.used_storage) return false;
  }
  return true;
}

bool ReferenceMarket::matches(const WorldState& st) const {
  if (st.providers.size() != providers_.size()) return false;
  for (size_t slot = 0; slot < providers_.size(); ++slot) {
    auto it = st.providers.find(uint32_t(slot + 1));
    if (it == st.providers.end()) return false;
    const NetworkProvider& np = it->second;
    const Provider& rp = providers_[slot];
    if (np.spec.name != rp.name || np.spec.cost != rp.cost) return false;
    if (np.avail_cpu != rp.cap_cpu - rp.used_cpu) return false;
    if (np.avail_ram != rp.cap_ram - rp.used_ram) return false;
    if (np.avail_storage != rp.cap_storage - rp.used_storage) return false;
  }
  if (st.accounts.size() != balances_.size()) return false;
  for (const auto& [addr, bal] : balances_) {
    auto it = st.accounts.find(addr);
    if (it == st.accounts.end() || it->second.balance != bal) return false;
  }
  if (st.leases.size() != leases_.size()) return false;
  for (const LeaseRec& lease : leases_) {
    auto it = st.leases.find(lease.id);
    if (it == st.leases.end()) return false;
    if (it->second.active != lease.active || it->second.price != lease.price) return false;
    if (it->second.supplier_index != uint32_t(lease.provider + 1)) return false;
  }
  return true;
}

}  // namespace npsim::oracle
