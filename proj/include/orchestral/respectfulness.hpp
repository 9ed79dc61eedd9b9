#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orchestral/orchestrators.hpp"

namespace orchestral {

// Buffer-aware trees over the orchestrator's syntax. Each node mirrors one
// syntax node; the edge from a node to its parent carries the left/right
// buffer increment of the parent action for the tracked name (or the sum
// over all names for the *-tree). Variable leaves are tied to their binder.
struct WeightedTree {
  struct Node {
    enum class Kind { Action, Choice, Rec, VarLeaf, StopLeaf };
    Kind kind;
    OrchAction action;  // Action nodes
    std::string var;    // Rec / VarLeaf
    std::int32_t parent = -1;
    int lw = 0, rw = 0;  // weight of the edge from parent to this node
    std::vector<std::uint32_t> children;
  };
  std::vector<Node> nodes;
  std::uint32_t root = 0;
  std::map<std::uint32_t, std::uint32_t> binder_of;  // var leaf -> rec node
};

// Weights for name a: <a,_> -> (+1,0), <_,!a> -> (-1,0), <_,a> -> (0,+1),
// <!a,_> -> (0,-1); synchronous and other-name actions weigh (0,0).
WeightedTree buffer_aware_tree(const OrchPtr& f, const std::string& name);

// Same shape, weights summed over all names.
WeightedTree star_tree(const OrchPtr& f);

struct Labelling {
  std::vector<long> left, right;  // path sums from the root, per node
};

Labelling label(const WeightedTree& t);

struct CheckResult {
  bool ok = true;
  std::string evidence;
};

// Sound buffer-labelling: no negative label, and leaf-minus-binder >= 0 on
// both sides for every variable/binder pair.
CheckResult check_sound(const OrchPtr& f, const std::string& name);
CheckResult check_sound(const WeightedTree& t, const Labelling& lab);

// Client-respectful buffer-labelling: stop leaves left-labelled 0; binder
// reaching a stop forces equal labels around the cycle; an all-zero cycle
// under a stop-free binder forces label 0; and every cycle with a +1-left
// edge contains a -1-left edge.
CheckResult check_client_respectful(const OrchPtr& f, const std::string& name);
CheckResult check_client_respectful(const WeightedTree& t, const Labelling& lab);

// No reachable term-graph cycle made of server inputs only (exact Def 15(d)
// reading). `literal_star_rule` instead applies the printed *-tree condition
// verbatim, which also rejects cycles containing synchronous actions.
CheckResult check_non_def_server_inputted(const OrchPtr& f, bool literal_star_rule = false);

struct RespectVerdict {
  struct PerName {
    bool sound = true;
    bool client_respectful = true;
  };
  bool respectful = true;
  std::map<std::string, PerName> per_name;
  bool server_inputted_ok = true;
  std::vector<std::string> evidence;
};

// Def 15(f) via the per-name tree checks plus the server-input cycle scan.
RespectVerdict is_respectful(const OrchPtr& f);

// Verdict only, stopping at the first failing check.
bool is_respectful_fast(const OrchPtr& f);

}  // namespace orchestral
