#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "orchestral/contracts.hpp"
#include "orchestral/orchestrators.hpp"
#include "orchestral/system.hpp"

namespace orchestral {

// Assumption environment for the inference system: an ordered list of
// var : client -| server bindings (Def 8).
struct EnvBinding {
  std::string var;
  ContractPtr client;
  ContractPtr server;
};

struct Env {
  std::vector<EnvBinding> bindings;

  const EnvBinding* lookup_var(const std::string& var) const;
  std::optional<std::string> var_for(const ContractPtr& client, const ContractPtr& server) const;
  // Def 8: injective in both directions.
  bool injective() const;
};

struct IllFormedJudgment : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Judgment {
  Env env;
  OrchPtr orch;  // possibly open; free variables must be bound by env
  ContractPtr client;
  ContractPtr server;
};

struct VerifyResult {
  bool derivable = false;
  std::vector<std::string> rules;  // applied rules, root first
  std::string reason;              // why not, when underivable
};

// Syntax-directed decision of Gamma |- f : rho -| sigma for the inference
// system of Fig.-2 shape rules.
VerifyResult verify_judgment(const Judgment& j);

struct SynthStats {
  std::size_t distinct_pairs = 0;  // memo keys allocated over the whole run
  std::size_t peak_env = 0;
  std::size_t pair_bound = 0;      // |reachable(client)| * |reachable(server)|
};

namespace detail {
struct FamNode;
using FamPtr = std::shared_ptr<const FamNode>;
}  // namespace detail

// The finite family Synth(env, client, server) as a choice DAG mirroring the
// algorithm's unions and branch products; members are enumerated on demand
// and counted exactly.
class OrchFamily {
 public:
  OrchFamily() = default;
  OrchFamily(detail::FamPtr root, SynthStats stats);

  bool empty() const { return count() == 0; }
  // Exact member count, saturating at 2^63.
  std::uint64_t count() const;
  // Up to `max` distinct members; smallest first (size, then rendering) when
  // the family is small enough to materialize, DAG order beyond that.
  std::vector<OrchPtr> enumerate(std::size_t max) const;
  // Raw generation order: synchronous-rich alternatives first, as laid out
  // by the partition ordering. Used by the witness search.
  std::vector<OrchPtr> enumerate_generation_order(std::size_t max) const;
  const SynthStats& stats() const { return stats_; }

 private:
  detail::FamPtr root_;
  SynthStats stats_;
};

OrchFamily synth(const Env& env, const ContractPtr& client, const ContractPtr& server);

struct WitnessSearch {
  std::optional<OrchPtr> witness;
  bool capped = false;  // enumeration hit the cap before a verdict
  std::size_t tried = 0;
  std::uint64_t family_count = 0;
  SynthStats stats;
};

// First enumerated member that is both client.server-strict and respectful.
WitnessSearch find_witness(const ContractPtr& client, const ContractPtr& server,
                           const Limits& limits = {});

}  // namespace orchestral
