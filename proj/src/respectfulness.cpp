#include "orchestral/respectfulness.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace orchestral {

namespace {

std::pair<int, int> weight_for(const OrchAction& act, const std::string& name, bool star) {
  switch (act.kind) {
    case OrchActionKind::InC:
      if (star || act.name == name) return {+1, 0};
      break;
    case OrchActionKind::OutS:
      if (star || act.name == name) return {-1, 0};
      break;
    case OrchActionKind::InS:
      if (star || act.name == name) return {0, +1};
      break;
    case OrchActionKind::OutC:
      if (star || act.name == name) return {0, -1};
      break;
    case OrchActionKind::SyncL:
    case OrchActionKind::SyncR:
      break;
  }
  return {0, 0};
}

WeightedTree build_tree(const OrchPtr& f, const std::string& name, bool star) {
  WeightedTree t;
  std::map<std::string, std::uint32_t> scope;  // rec var -> rec node id

  std::function<std::uint32_t(const OrchPtr&, std::int32_t, int, int)> build =
      [&](const OrchPtr& g, std::int32_t parent, int lw, int rw) -> std::uint32_t {
    std::uint32_t id = static_cast<std::uint32_t>(t.nodes.size());
    t.nodes.push_back({});
    t.nodes[id].parent = parent;
    t.nodes[id].lw = lw;
    t.nodes[id].rw = rw;
    switch (g->kind) {
      case OrchKind::Stop:
        t.nodes[id].kind = WeightedTree::Node::Kind::StopLeaf;
        break;
      case OrchKind::Var: {
        t.nodes[id].kind = WeightedTree::Node::Kind::VarLeaf;
        t.nodes[id].var = g->var;
        auto it = scope.find(g->var);
        if (it != scope.end()) t.binder_of[id] = it->second;
        break;
      }
      case OrchKind::Prefix: {
        t.nodes[id].kind = WeightedTree::Node::Kind::Action;
        t.nodes[id].action = g->action;
        auto [clw, crw] = weight_for(g->action, name, star);
        std::uint32_t c = build(g->cont, static_cast<std::int32_t>(id), clw, crw);
        t.nodes[id].children.push_back(c);
        break;
      }
      case OrchKind::Choice: {
        t.nodes[id].kind = WeightedTree::Node::Kind::Choice;
        for (const auto& b : g->branches) {
          std::uint32_t c = build(b, static_cast<std::int32_t>(id), 0, 0);
          t.nodes[id].children.push_back(c);
        }
        break;
      }
      case OrchKind::Rec: {
        t.nodes[id].kind = WeightedTree::Node::Kind::Rec;
        t.nodes[id].var = g->var;
        auto it = scope.find(g->var);
        std::uint32_t saved = 0;
        bool had = it != scope.end();
        if (had) saved = it->second;
        scope[g->var] = id;
        std::uint32_t c = build(g->body, static_cast<std::int32_t>(id), 0, 0);
        t.nodes[id].children.push_back(c);
        if (had)
          scope[g->var] = saved;
        else
          scope.erase(g->var);
        break;
      }
    }
    return id;
  };
  t.root = build(f, -1, 0, 0);
  return t;
}

// Action prefix leading to a node, for evidence messages.
std::string path_to(const WeightedTree& t, std::uint32_t node) {
  std::vector<std::string> parts;
  std::int32_t v = static_cast<std::int32_t>(node);
  while (v >= 0) {
    const auto& n = t.nodes[v];
    if (n.kind == WeightedTree::Node::Kind::Action) parts.push_back(to_string(n.action));
    v = n.parent;
  }
  std::reverse(parts.begin(), parts.end());
  std::string out;
  for (const auto& p : parts) out += p;
  return out.empty() ? "the root" : out;
}

// Nodes on the chain from leaf up to (excluding) the binder; their stored
// weights are exactly the edges of the leaf-to-binder cycle.
std::vector<std::uint32_t> cycle_chain(const WeightedTree& t, std::uint32_t leaf,
                                       std::uint32_t binder) {
  std::vector<std::uint32_t> chain;
  std::int32_t v = static_cast<std::int32_t>(leaf);
  while (v >= 0 && static_cast<std::uint32_t>(v) != binder) {
    chain.push_back(static_cast<std::uint32_t>(v));
    v = t.nodes[v].parent;
  }
  return chain;
}

std::vector<char> stop_reachability(const WeightedTree& t) {
  std::vector<char> gets(t.nodes.size(), 0);
  // nodes are created parent-first, so a reverse sweep is bottom-up
  for (std::size_t i = t.nodes.size(); i-- > 0;) {
    const auto& n = t.nodes[i];
    if (n.kind == WeightedTree::Node::Kind::StopLeaf) {
      gets[i] = 1;
      continue;
    }
    for (std::uint32_t c : n.children)
      if (gets[c]) gets[i] = 1;
  }
  return gets;
}

}  // namespace

WeightedTree buffer_aware_tree(const OrchPtr& f, const std::string& name) {
  return build_tree(f, name, false);
}

WeightedTree star_tree(const OrchPtr& f) { return build_tree(f, "", true); }

Labelling label(const WeightedTree& t) {
  Labelling lab;
  lab.left.assign(t.nodes.size(), 0);
  lab.right.assign(t.nodes.size(), 0);
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    const auto& n = t.nodes[i];
    long pl = n.parent >= 0 ? lab.left[n.parent] : 0;
    long pr = n.parent >= 0 ? lab.right[n.parent] : 0;
    lab.left[i] = pl + n.lw;
    lab.right[i] = pr + n.rw;
  }
  return lab;
}

CheckResult check_sound(const WeightedTree& t, const Labelling& lab) {
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    if (lab.left[i] < 0)
      return {false, "left label " + std::to_string(lab.left[i]) + " after " +
                         path_to(t, static_cast<std::uint32_t>(i))};
    if (lab.right[i] < 0)
      return {false, "right label " + std::to_string(lab.right[i]) + " after " +
                         path_to(t, static_cast<std::uint32_t>(i))};
  }
  for (const auto& [leaf, binder] : t.binder_of) {
    long dl = lab.left[leaf] - lab.left[binder];
    long dr = lab.right[leaf] - lab.right[binder];
    if (dl < 0)
      return {false, "cycle at rec " + t.nodes[binder].var + " pumps the left counter by " +
                         std::to_string(dl)};
    if (dr < 0)
      return {false, "cycle at rec " + t.nodes[binder].var + " pumps the right counter by " +
                         std::to_string(dr)};
  }
  return {};
}

CheckResult check_sound(const OrchPtr& f, const std::string& name) {
  WeightedTree t = buffer_aware_tree(f, name);
  return check_sound(t, label(t));
}

CheckResult check_client_respectful(const WeightedTree& t, const Labelling& lab) {
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    if (t.nodes[i].kind == WeightedTree::Node::Kind::StopLeaf && lab.left[i] != 0)
      return {false, "stop after " + path_to(t, static_cast<std::uint32_t>(i)) +
                         " leaves cs = " + std::to_string(lab.left[i])};
  }
  std::vector<char> gets = stop_reachability(t);
  for (const auto& [leaf, binder] : t.binder_of) {
    long k = lab.left[leaf];
    long h = lab.left[binder];
    auto chain = cycle_chain(t, leaf, binder);
    if (gets[binder]) {
      if (h != k)
        return {false, "cycle at rec " + t.nodes[binder].var + " can exit to stop with cs " +
                           std::to_string(h) + " != " + std::to_string(k)};
    } else {
      bool all_zero = std::all_of(chain.begin(), chain.end(),
                                  [&](std::uint32_t v) { return t.nodes[v].lw == 0; });
      if (all_zero && h != 0)
        return {false, "loop at rec " + t.nodes[binder].var +
                           " never moves the counter but enters it with cs = " +
                           std::to_string(h)};
    }
    bool has_plus = false, has_minus = false;
    for (std::uint32_t v : chain) {
      has_plus |= t.nodes[v].lw == +1;
      has_minus |= t.nodes[v].lw == -1;
    }
    if (has_plus && !has_minus)
      return {false, "cycle at rec " + t.nodes[binder].var +
                         " keeps taking client inputs without delivering them"};
  }
  return {};
}

CheckResult check_client_respectful(const OrchPtr& f, const std::string& name) {
  WeightedTree t = buffer_aware_tree(f, name);
  return check_client_respectful(t, label(t));
}

CheckResult check_non_def_server_inputted(const OrchPtr& f, bool literal_star_rule) {
  if (literal_star_rule) {
    WeightedTree t = star_tree(f);
    for (const auto& [leaf, binder] : t.binder_of) {
      bool has_plus = false, has_minus = false;
      std::int32_t v = static_cast<std::int32_t>(leaf);
      while (v >= 0 && static_cast<std::uint32_t>(v) != binder) {
        has_plus |= t.nodes[v].rw == +1;
        has_minus |= t.nodes[v].rw == -1;
        v = t.nodes[v].parent;
      }
      if (has_plus && !has_minus)
        return {false, "cycle at rec " + t.nodes[binder].var +
                           " only accumulates server inputs (literal *-tree rule)"};
    }
    return {};
  }

  // Exact Def 15(d): a reachable cycle consisting of server inputs only.
  TermGraph g = term_graph(f);
  std::vector<std::vector<std::uint32_t>> ins_adj(g.nodes.size());
  for (std::uint32_t e = 0; e < g.edges.size(); ++e)
    if (g.edges[e].action.kind == OrchActionKind::InS) ins_adj[g.edges[e].src].push_back(e);

  // DFS cycle detection in the InS-only subgraph.
  std::vector<int> state(g.nodes.size(), 0);  // 0 unseen, 1 on stack, 2 done
  std::vector<std::uint32_t> stack_edges;
  std::vector<std::uint32_t> stack_nodes;
  std::function<std::optional<std::string>(std::uint32_t)> dfs =
      [&](std::uint32_t v) -> std::optional<std::string> {
    state[v] = 1;
    stack_nodes.push_back(v);
    for (std::uint32_t e : ins_adj[v]) {
      std::uint32_t w = g.edges[e].dst;
      if (state[w] == 1) {
        std::string cyc;
        bool in_cycle = false;
        for (std::size_t i = 0; i < stack_nodes.size(); ++i) {
          if (stack_nodes[i] == w) in_cycle = true;
          if (in_cycle && i < stack_edges.size()) cyc += to_string(g.edges[stack_edges[i]].action);
        }
        cyc += to_string(g.edges[e].action);
        return "server-input cycle " + cyc;
      }
      if (state[w] == 0) {
        stack_edges.push_back(e);
        auto r = dfs(w);
        stack_edges.pop_back();
        if (r) return r;
      }
    }
    stack_nodes.pop_back();
    state[v] = 2;
    return std::nullopt;
  };
  for (std::uint32_t v = 0; v < g.nodes.size(); ++v) {
    if (state[v] == 0) {
      if (auto r = dfs(v)) return {false, *r};
    }
  }
  return {};
}

bool is_respectful_fast(const OrchPtr& f) {
  for (const auto& name : orch_names(f)) {
    WeightedTree t = buffer_aware_tree(f, name);
    Labelling lab = label(t);
    if (!check_sound(t, lab).ok) return false;
    if (!check_client_respectful(t, lab).ok) return false;
  }
  return check_non_def_server_inputted(f).ok;
}

RespectVerdict is_respectful(const OrchPtr& f) {
  RespectVerdict v;
  for (const auto& name : orch_names(f)) {
    WeightedTree t = buffer_aware_tree(f, name);
    Labelling lab = label(t);
    CheckResult s = check_sound(t, lab);
    CheckResult c = check_client_respectful(t, lab);
    RespectVerdict::PerName pn;
    pn.sound = s.ok;
    pn.client_respectful = c.ok;
    if (!s.ok) v.evidence.push_back("name " + name + ": " + s.evidence);
    if (!c.ok) v.evidence.push_back("name " + name + ": " + c.evidence);
    v.per_name[name] = pn;
    v.respectful = v.respectful && s.ok && c.ok;
  }
  CheckResult si = check_non_def_server_inputted(f);
  v.server_inputted_ok = si.ok;
  if (!si.ok) v.evidence.push_back(si.evidence);
  v.respectful = v.respectful && si.ok;
  return v;
}

}  // namespace orchestral
