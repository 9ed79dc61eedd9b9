#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "orchestral/buffers.hpp"
#include "orchestral/contracts.hpp"
#include "orchestral/orchestrators.hpp"

namespace orchestral {

struct Limits {
  std::size_t node_cap = 1'000'000;
  std::size_t enum_cap = 100'000;
};

struct ResourceLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An orchestrated system <client, orchestrator, server>. Components are
// canonical, so configurations compare and hash by pointer.
struct SystemConfig {
  ContractPtr client;
  OrchPtr orch;
  ContractPtr server;

  bool operator==(const SystemConfig& o) const {
    return client.get() == o.client.get() && orch.get() == o.orch.get() &&
           server.get() == o.server.get();
  }
};

SystemConfig make_config(ContractPtr client, OrchPtr orch, ContractPtr server);

struct SysLabel {
  bool tau = true;
  OrchAction action;  // valid when !tau

  bool operator==(const SysLabel& o) const {
    return tau == o.tau && (tau || action == o.action);
  }
};

std::string to_string(const SysLabel& l);

// One step of the orchestrated-system semantics: the two tau rules for
// internal-choice resolution plus the six mediation rules. The rules never
// consult the buffer; unsound drains are caught at the trace level.
std::vector<std::pair<SysLabel, SystemConfig>> system_step(const SystemConfig& c);

struct ProductGraph {
  struct Edge {
    std::uint32_t src;
    SysLabel label;
    std::uint32_t dst;
  };
  std::vector<SystemConfig> nodes;
  std::vector<Edge> edges;
  std::uint32_t root = 0;
  std::vector<std::uint32_t> stuck;  // nodes with no successor at all
  std::vector<std::vector<std::uint32_t>> adj;  // node -> edge indices
};

ProductGraph product_graph(const ContractPtr& client, const OrchPtr& orch,
                           const ContractPtr& server, const Limits& limits = {});

struct StrictResult {
  bool strict = true;
  std::vector<OrchAction> counterexample;  // shortest unrealizable f-trace
};

// Def 7: every finite orchestrator trace is realizable in the system with
// interleaved tau closure. Decided by walking term_graph(f) against the
// tau-closed subset construction over product-graph nodes.
StrictResult is_strict(const ContractPtr& client, const OrchPtr& orch,
                       const ContractPtr& server, const Limits& limits = {});
StrictResult is_strict(const TermGraph& fg, const ProductGraph& pg);

struct DsResult {
  bool holds = true;
  enum class Reason { None, NotStrict, StuckClientNotSuccess } reason = Reason::None;
  std::vector<OrchAction> trace;      // strictness counterexample or path to stuck
  ContractPtr stuck_client;           // for StuckClientNotSuccess
};

// Def 7(i): strict, and every stuck configuration leaves the client at 1.
DsResult check_ds(const ContractPtr& client, const OrchPtr& orch, const ContractPtr& server,
                  const Limits& limits = {});

std::string to_dot(const ProductGraph& g);
std::string to_json_text(const ProductGraph& g);  // JSON adjacency list

}  // namespace orchestral
