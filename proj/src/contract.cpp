#include "npsim/contract.hpp"

#include <algorithm>

namespace npsim {

const char* to_string(RevertReason r) {
  switch (r) {
    case RevertReason::None: return "none";
    case RevertReason::NotAdmin: return "not_admin";
    case RevertReason::InvalidProvider: return "invalid_provider";
    case RevertReason::NoProviderFound: return "no_provider_found";
    case RevertReason::InsufficientPayment: return "insufficient_payment";
    case RevertReason::ArithmeticOverflow: return "arithmetic_overflow";
    case RevertReason::UnknownLease: return "unknown_lease";
    case RevertReason::LeaseNotExpired: return "lease_not_expired";
    case RevertReason::NoAccount: return "no_account";
    case RevertReason::DuplicateTx: return "duplicate_tx";
  }
  return "unknown";
}

ContractFn fn_of(const TxCall& call) {
  return static_cast<ContractFn>(call.index());
}

const char* to_string(ContractFn f) {
  switch (f) {
    case ContractFn::AddNetworkProvider: return "addNetworkProvider";
    case ContractFn::RequestResources: return "requestResources";
    case ContractFn::ReturnResources: return "returnResources";
  }
  return "unknown";
}

bool sla_satisfied(const std::vector<Sla>& provider_slas, const Sla& requested) {
  return std::any_of(provider_slas.begin(), provider_slas.end(), [&](const Sla& s) {
    return s.max_latency_ms <= requested.max_latency_ms &&
           s.min_throughput_mbps >= requested.min_throughput_mbps &&
           s.max_packet_loss_pct <= requested.max_packet_loss_pct;
  });
}

bool vnf_supported(const std::vector<std::string>& provider_images, const std::string& requested) {
  return std::find(provider_images.begin(), provider_images.end(), requested) !=
         provider_images.end();
}

std::optional<uint64_t> calculate_best_cost(const NetworkProvider& p, const ResourceRequest& req) {
  uint64_t units = 0, prod = 0, price = 0;
  if (__builtin_add_overflow(req.cpu, req.ram, &units) ||
      __builtin_add_overflow(units, req.storage, &units) ||
      __builtin_mul_overflow(units, p.spec.cost, &prod) ||
      __builtin_mul_overflow(prod, req.lend_time_s, &price)) {
    return std::nullopt;
  }
  return price;
}

TxResult WorldState::add_network_provider(const Address& caller, const ProviderSpec& p) {
  if (caller != admin_address) return {false, RevertReason::NotAdmin, 0};
  bool slas_ok = std::all_of(p.slas.begin(), p.slas.end(), [](const Sla& s) { return s.valid(); });
  if (p.name.empty() || p.address.empty() || !slas_ok)
    return {false, RevertReason::InvalidProvider, 0};

  uint32_t index = next_provider_index;
  NetworkProvider np{index, p, p.cpu, p.ram, p.storage};
  providers.emplace(index, std::move(np));
  next_provider_index += 1;
  if (!accounts.contains(p.address)) accounts.emplace(p.address, Account{p.address, initial_account_balance});
  return {true, RevertReason::None, index};
}

std::optional<uint32_t> WorldState::select_best_provider(const ResourceRequest& req) const {
  // Ascending scan; <= on cost so the highest index wins a tie.
  std::optional<uint32_t> best;
  for (const auto& [index, p] : providers) {
    if (p.avail_cpu < req.cpu || p.avail_ram < req.ram || p.avail_storage < req.storage) continue;
    if (p.spec.domain != req.domain) continue;
    if (!sla_satisfied(p.spec.slas, req.sla)) continue;
    if (!vnf_supported(p.spec.vnf_images, req.vnf_image)) continue;
    if (!best || p.spec.cost <= providers.at(*best).spec.cost) best = index;
  }
  return best;
}

TxResult WorldState::request_resources(const Address& caller, const ResourceRequest& req,
                                       uint64_t payment, int64_t now_ms) {
  auto caller_it = accounts.find(caller);
  if (caller_it == accounts.end()) return {false, RevertReason::NoAccount, 0};
  if (payment > caller_it->second.balance) return {false, RevertReason::InsufficientPayment, 0};

  auto best = select_best_provider(req);
  if (!best) return {false, RevertReason::NoProviderFound, 0};
  NetworkProvider& supplier = providers.at(*best);

  auto price = calculate_best_cost(supplier, req);
  if (!price) return {false, RevertReason::ArithmeticOverflow, 0};
  if (payment < *price) return {false, RevertReason::InsufficientPayment, 0};

  // Price-exact debit; excess payment stays with the caller.
  caller_it->second.balance -= *price;
  accounts.at(supplier.spec.address).balance += *price;
  supplier.avail_cpu -= req.cpu;
  supplier.avail_ram -= req.ram;
  supplier.avail_storage -= req.storage;

  uint64_t id = next_lease_id++;
  leases.emplace(id, Lease{id, *best, caller, req.cpu, req.ram, req.storage, now_ms,
                           req.lend_time_s, *price, true});
  return {true, RevertReason::None, id};
}

TxResult WorldState::return_resources(const Address& /*caller*/, uint64_t lease_id,
                                      int64_t now_ms) {
  auto it = leases.find(lease_id);
  if (it == leases.end() || !it->second.active) return {false, RevertReason::UnknownLease, 0};
  Lease& lease = it->second;
  int64_t expiry = lease.start_time_ms + int64_t(lease.lend_time_s) * 1000;
  if (now_ms < expiry) return {false, RevertReason::LeaseNotExpired, 0};

  NetworkProvider& supplier = providers.at(lease.supplier_index);
  supplier.avail_cpu += lease.cpu;
  supplier.avail_ram += lease.ram;
  supplier.avail_storage += lease.storage;
  lease.active = false;
  return {true, RevertReason::None, lease_id};
}

TxResult WorldState::apply(const Address& sender, const TxCall& call, int64_t now_ms) {
  return std::visit(
      [&](const auto& c) -> TxResult {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, AddProviderCall>) {
          return add_network_provider(sender, c.provider);
        } else if constexpr (std::is_same_v<T, RequestResourcesCall>) {
          return request_resources(sender, c.request, c.payment, now_ms);
        } else {
          return return_resources(sender, c.lease_id, now_ms);
        }
      },
      call);
}

uint64_t WorldState::total_balance() const {
  uint64_t sum = 0;
  for (const auto& [_, acct] : accounts) sum += acct.balance;
  return sum;
}

}  // namespace npsim
