#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "npsim/common.hpp"

namespace npsim {

using Address = std::string;

struct Sla {
  uint32_t max_latency_ms = 0;
  uint32_t min_throughput_mbps = 0;
  double max_packet_loss_pct = 0.0;  // [0, 100]

  bool valid() const { return max_packet_loss_pct >= 0.0 && max_packet_loss_pct <= 100.0; }
  auto operator<=>(const Sla&) const = default;
};

// Registration payload; the registry key is assigned on insertion.
struct ProviderSpec {
  std::string name;
  uint64_t cpu = 0;      // vCPU units
  uint64_t ram = 0;      // GB
  uint64_t storage = 0;  // GB
  uint64_t cost = 0;     // currency units per resource-unit-second
  std::string domain;
  std::vector<Sla> slas;
  std::vector<std::string> vnf_images;
  Address address;

  bool operator==(const ProviderSpec&) const = default;
};

struct NetworkProvider {
  uint32_t index = 0;
  ProviderSpec spec;
  // Available amounts; registered capacity stays in spec.
  uint64_t avail_cpu = 0;
  uint64_t avail_ram = 0;
  uint64_t avail_storage = 0;

  bool operator==(const NetworkProvider&) const = default;
};

struct ResourceRequest {
  uint64_t cpu = 0;
  uint64_t ram = 0;
  uint64_t storage = 0;
  std::string domain;
  Sla sla;
  std::string vnf_image;
  uint64_t lend_time_s = 0;

  bool operator==(const ResourceRequest&) const = default;
};

struct Lease {
  uint64_t lease_id = 0;
  uint32_t supplier_index = 0;
  Address requester;
  uint64_t cpu = 0, ram = 0, storage = 0;
  int64_t start_time_ms = 0;
  uint64_t lend_time_s = 0;
  uint64_t price = 0;
  bool active = true;

  bool operator==(const Lease&) const = default;
};

struct Account {
  Address address;
  uint64_t balance = 0;

  bool operator==(const Account&) const = default;
};

enum class RevertReason : uint8_t {
  None = 0,
  NotAdmin,
  InvalidProvider,
  NoProviderFound,
  InsufficientPayment,
  ArithmeticOverflow,
  UnknownLease,
  LeaseNotExpired,
  NoAccount,
  DuplicateTx,
};

const char* to_string(RevertReason r);

struct TxResult {
  bool ok = false;
  RevertReason reason = RevertReason::None;
  uint64_t value = 0;  // provider index or lease id on success
};

// Contract calls carried inside transactions.
struct AddProviderCall {
  ProviderSpec provider;
  bool operator==(const AddProviderCall&) const = default;
};
struct RequestResourcesCall {
  ResourceRequest request;
  uint64_t payment = 0;
  bool operator==(const RequestResourcesCall&) const = default;
};
struct ReturnResourcesCall {
  uint64_t lease_id = 0;
  bool operator==(const ReturnResourcesCall&) const = default;
};
using TxCall = std::variant<AddProviderCall, RequestResourcesCall, ReturnResourcesCall>;

enum class ContractFn : uint8_t { AddNetworkProvider = 0, RequestResources = 1, ReturnResources = 2 };
ContractFn fn_of(const TxCall& call);
const char* to_string(ContractFn f);

bool sla_satisfied(const std::vector<Sla>& provider_slas, const Sla& requested);
bool vnf_supported(const std::vector<std::string>& provider_images, const std::string& requested);

// (cpu+ram+storage) * cost * lend_time, exact; nullopt on u64 overflow.
std::optional<uint64_t> calculate_best_cost(const NetworkProvider& p, const ResourceRequest& req);

struct WorldState {
  std::map<uint32_t, NetworkProvider> providers;
  std::map<Address, Account> accounts;
  std::map<uint64_t, Lease> leases;
  uint32_t next_provider_index = 1;
  uint64_t next_lease_id = 1;
  Address admin_address;
  uint64_t initial_account_balance = 0;  // balance granted to a provider's fresh account

  TxResult add_network_provider(const Address& caller, const ProviderSpec& p);
  std::optional<uint32_t> select_best_provider(const ResourceRequest& req) const;
  TxResult request_resources(const Address& caller, const ResourceRequest& req, uint64_t payment,
                             int64_t now_ms);
  TxResult return_resources(const Address& caller, uint64_t lease_id, int64_t now_ms);

  TxResult apply(const Address& sender, const TxCall& call, int64_t now_ms);

  uint64_t total_balance() const;
  bool operator==(const WorldState&) const = default;
};

}  // namespace npsim
