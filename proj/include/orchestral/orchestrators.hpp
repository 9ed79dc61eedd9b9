#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "orchestral/contracts.hpp"  // Violation

namespace orchestral {

// The six orchestration actions (Def 4):
//   SyncL(a) = <a,!a>   synchronous client-to-server relay
//   SyncR(a) = <!a,a>   synchronous server-to-client relay
//   InC(a)   = <a,_>    receive a from the client, store it
//   InS(a)   = <_,a>    receive a from the server, store it
//   OutC(a)  = <!a,_>   deliver a buffered a to the client
//   OutS(a)  = <_,!a>   deliver a buffered a to the server
enum class OrchActionKind { SyncL, SyncR, InC, InS, OutC, OutS };

// iota_L = {SyncL, InC}, iota_R = {SyncR, InS}, o = {OutC, OutS}.
enum class ActionCategory { IotaL, IotaR, Output };

struct OrchAction {
  OrchActionKind kind;
  std::string name;

  bool operator==(const OrchAction& o) const { return kind == o.kind && name == o.name; }
  bool operator!=(const OrchAction& o) const { return !(*this == o); }
  bool operator<(const OrchAction& o) const {
    if (name != o.name) return name < o.name;
    return kind < o.kind;
  }
};

ActionCategory category(OrchActionKind kind);
std::string to_string(const OrchAction& a);  // concrete <l,r> syntax

enum class OrchKind { Stop, Prefix, Choice, Var, Rec };

struct Orch;
using OrchPtr = std::shared_ptr<const Orch>;

struct Orch {
  OrchKind kind;
  OrchAction action;             // Prefix
  OrchPtr cont;                  // Prefix
  std::vector<OrchPtr> branches; // Choice
  std::string var;               // Var / Rec
  OrchPtr body;                  // Rec
  std::size_t hash = 0;
};

OrchPtr orch_stop();
OrchPtr orch_prefix(OrchAction action, OrchPtr cont);
OrchPtr orch_choice(std::vector<OrchPtr> branches);
OrchPtr orch_var(const std::string& name);
OrchPtr orch_rec(const std::string& var, OrchPtr body);

// Closed, contractive, choices prefix-headed and direction-homogeneous with
// no o-action heads (Def 5). Violations are data.
std::vector<Violation> well_formed_orch(const OrchPtr& f);

OrchPtr canon_orch(const OrchPtr& f);
OrchPtr unfold_orch(const OrchPtr& f);

// One-step orchestrator LTS. The head is unfolded first.
std::vector<std::pair<OrchAction, OrchPtr>> orch_transitions(const OrchPtr& f);

// Finite reachable-state graph under orch_transitions, canonical states.
struct TermGraph {
  struct Edge {
    std::uint32_t src;
    OrchAction action;
    std::uint32_t dst;
  };
  std::vector<OrchPtr> nodes;
  std::vector<Edge> edges;
  std::uint32_t root = 0;
  std::vector<std::uint32_t> terminals;            // Stop states
  std::vector<std::vector<std::uint32_t>> adj;     // node -> edge indices
};

TermGraph term_graph(const OrchPtr& f);

// A finite action sequence, or an eventually-periodic one when `cycle` is
// nonempty (the lasso prefix . cycle^omega).
struct ActionSeq {
  std::vector<OrchAction> prefix;
  std::vector<OrchAction> cycle;

  bool lasso() const { return !cycle.empty(); }
  bool operator==(const ActionSeq& o) const { return prefix == o.prefix && cycle == o.cycle; }
  bool operator<(const ActionSeq& o) const {
    if (prefix != o.prefix) return prefix < o.prefix;
    return cycle < o.cycle;
  }
};

std::string to_string(const ActionSeq& s);

// All trace prefixes of length <= depth (test oracle).
std::vector<ActionSeq> traces_bounded(const OrchPtr& f, std::size_t depth);

// Finite representatives of MaxTraces(f): finite maximal traces along paths
// visiting no node more than `multiplicity` times, plus one lasso per simple
// cycle rotation with a simple entry path. Multiplicity 2 exposes nonzero
// per-lap buffer nets next to an exit, which multiplicity 1 would hide.
std::vector<ActionSeq> maximal_lassos(const OrchPtr& f);
std::vector<ActionSeq> maximal_lassos(const TermGraph& g, std::size_t multiplicity = 2);

std::vector<std::string> orch_names(const OrchPtr& f);
std::size_t orch_size(const OrchPtr& f);
bool orch_closed(const OrchPtr& f);

}  // namespace orchestral
