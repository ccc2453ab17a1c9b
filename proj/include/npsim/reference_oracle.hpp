#pragma once

#include <string>
#include <vector>

#include "npsim/chain.hpp"

namespace npsim::oracle {

// Brute-force replay of the marketplace semantics, written against the
// contract rules rather than the WorldState code: flat vectors, full scans,
// explicit filter-then-argmin with max-index tie break. Used to cross-check
// the production state machine; kept free of any WorldState calls.
class ReferenceMarket {
 public:
  struct Provider {
    std::string name;
    uint64_t cap_cpu, cap_ram, cap_storage;
    uint64_t used_cpu = 0, used_ram = 0, used_storage = 0;
    uint64_t cost;
    std::string domain;
    std::vector<Sla> slas;
    std::vector<std::string> vnfs;
    std::string address;
  };
  struct LeaseRec {
    uint64_t id;
    size_t provider;  // 0-based slot
    std::string requester;
    uint64_t cpu, ram, storage;
    int64_t start_ms;
    uint64_t lend_s;
    uint64_t price;
    bool active;
  };
  struct Outcome {
    bool ok;
    std::string reason;
    uint64_t value = 0;
  };

  explicit ReferenceMarket(const WorldState& genesis);

  Outcome apply(const Transaction& tx, int64_t now_ms);

  // 1-based provider index or 0 when no candidate, mirroring the sentinel.
  uint64_t select(const ResourceRequest& req) const;

  uint64_t balance(const std::string& address) const;
  uint64_t total_balance() const;
  const std::vector<Provider>& providers() const { return providers_; }
  const std::vector<LeaseRec>& leases() const { return leases_; }

  // available + sum(active lease amounts) == registered capacity, per dim.
  bool conservation_holds() const;

  // Field-by-field comparison against the production state.
  bool matches(const WorldState& st) const;

 private:
  std::string admin_;
  uint64_t initial_balance_;
  std::vector<Provider> providers_;
  std::vector<std::pair<std::string, uint64_t>> balances_;
  std::vector<LeaseRec> leases_;
  uint64_t next_lease_id_;

  uint64_t* find_balance(const std::string& address);
  const uint64_t* find_balance(const std::string& address) const;
};

}  // namespace npsim::oracle
