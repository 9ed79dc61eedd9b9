#include "orchestral/system.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <unordered_map>
#include <unordered_set>

#include "orchestral/parser.hpp"

#include <json.hpp>

namespace orchestral {

namespace {

struct ConfigHash {
  std::size_t operator()(const SystemConfig& c) const {
    std::size_t h = std::hash<const void*>{}(c.client.get());
    h ^= std::hash<const void*>{}(c.orch.get()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= std::hash<const void*>{}(c.server.get()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

struct LabelKey {
  bool tau;
  OrchActionKind kind;
  std::string name;
  const void* dst1;
  const void* dst2;
  const void* dst3;

  bool operator==(const LabelKey& o) const {
    return tau == o.tau && kind == o.kind && name == o.name && dst1 == o.dst1 &&
           dst2 == o.dst2 && dst3 == o.dst3;
  }
};

struct LabelKeyHash {
  std::size_t operator()(const LabelKey& k) const {
    std::size_t h = std::hash<std::string>{}(k.name);
    h = h * 31 + static_cast<std::size_t>(k.kind) + (k.tau ? 977 : 0);
    h ^= std::hash<const void*>{}(k.dst1) + (h << 6);
    h ^= std::hash<const void*>{}(k.dst2) + (h >> 2);
    h ^= std::hash<const void*>{}(k.dst3) + (h << 3);
    return h;
  }
};

}  // namespace

SystemConfig make_config(ContractPtr client, OrchPtr orch, ContractPtr server) {
  return {canon(client), canon_orch(orch), canon(server)};
}

std::string to_string(const SysLabel& l) { return l.tau ? "tau" : to_string(l.action); }

std::vector<std::pair<SysLabel, SystemConfig>> system_step(const SystemConfig& c) {
  ContractPtr client = unfold(c.client);
  OrchPtr orch = unfold_orch(c.orch);
  ContractPtr server = unfold(c.server);

  std::vector<std::pair<SysLabel, SystemConfig>> out;
  std::unordered_set<LabelKey, LabelKeyHash> seen;
  auto push = [&](SysLabel l, SystemConfig cfg) {
    LabelKey key{l.tau, l.action.kind, l.action.name, cfg.client.get(), cfg.orch.get(),
                 cfg.server.get()};
    if (seen.insert(key).second) out.push_back({std::move(l), std::move(cfg)});
  };

  auto ctrans = transitions(client);
  auto strans = transitions(server);

  for (const auto& [l, next] : ctrans)
    if (l.kind == ContractLabel::Kind::Tau) push({true, {}}, {next, c.orch, c.server});
  for (const auto& [l, next] : strans)
    if (l.kind == ContractLabel::Kind::Tau) push({true, {}}, {c.client, c.orch, next});

  for (const auto& [act, forch] : orch_transitions(orch)) {
    switch (act.kind) {
      case OrchActionKind::SyncL:
        for (const auto& [cl, cnext] : ctrans) {
          if (cl.kind != ContractLabel::Kind::Output || cl.name != act.name) continue;
          for (const auto& [sl, snext] : strans) {
            if (sl.kind != ContractLabel::Kind::Input || sl.name != act.name) continue;
            push({false, act}, {cnext, forch, snext});
          }
        }
        break;
      case OrchActionKind::SyncR:
        for (const auto& [cl, cnext] : ctrans) {
          if (cl.kind != ContractLabel::Kind::Input || cl.name != act.name) continue;
          for (const auto& [sl, snext] : strans) {
            if (sl.kind != ContractLabel::Kind::Output || sl.name != act.name) continue;
            push({false, act}, {cnext, forch, snext});
          }
        }
        break;
      case OrchActionKind::InC:
        for (const auto& [cl, cnext] : ctrans) {
          if (cl.kind != ContractLabel::Kind::Output || cl.name != act.name) continue;
          push({false, act}, {cnext, forch, c.server});
        }
        break;
      case OrchActionKind::OutC:
        for (const auto& [cl, cnext] : ctrans) {
          if (cl.kind != ContractLabel::Kind::Input || cl.name != act.name) continue;
          push({false, act}, {cnext, forch, c.server});
        }
        break;
      case OrchActionKind::InS:
        for (const auto& [sl, snext] : strans) {
          if (sl.kind != ContractLabel::Kind::Output || sl.name != act.name) continue;
          push({false, act}, {c.client, forch, snext});
        }
        break;
      case OrchActionKind::OutS:
        for (const auto& [sl, snext] : strans) {
          if (sl.kind != ContractLabel::Kind::Input || sl.name != act.name) continue;
          push({false, act}, {c.client, forch, snext});
        }
        break;
    }
  }
  return out;
}

ProductGraph product_graph(const ContractPtr& client, const OrchPtr& orch,
                           const ContractPtr& server, const Limits& limits) {
  ProductGraph g;
  SystemConfig root = make_config(client, orch, server);
  std::unordered_map<SystemConfig, std::uint32_t, ConfigHash> index;
  index.emplace(root, 0);
  g.nodes.push_back(root);
  std::deque<std::uint32_t> todo{0};
  while (!todo.empty()) {
    std::uint32_t sid = todo.front();
    todo.pop_front();
    SystemConfig cfg = g.nodes[sid];
    auto steps = system_step(cfg);
    if (steps.empty()) g.stuck.push_back(sid);
    for (auto& [label, next] : steps) {
      auto [it, fresh] = index.emplace(next, static_cast<std::uint32_t>(g.nodes.size()));
      if (fresh) {
        if (g.nodes.size() >= limits.node_cap)
          throw ResourceLimitError("product graph exceeds node cap");
        g.nodes.push_back(next);
        todo.push_back(it->second);
      }
      g.edges.push_back({sid, label, it->second});
    }
  }
  g.adj.assign(g.nodes.size(), {});
  for (std::uint32_t e = 0; e < g.edges.size(); ++e) g.adj[g.edges[e].src].push_back(e);
  return g;
}

namespace {

using NodeSet = std::vector<std::uint32_t>;  // sorted

struct NodeSetHash {
  std::size_t operator()(const NodeSet& s) const {
    std::size_t h = s.size();
    for (auto v : s) h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

NodeSet tau_closure(const ProductGraph& g, NodeSet start) {
  std::unordered_set<std::uint32_t> seen(start.begin(), start.end());
  std::deque<std::uint32_t> todo(start.begin(), start.end());
  while (!todo.empty()) {
    std::uint32_t v = todo.front();
    todo.pop_front();
    for (std::uint32_t e : g.adj[v]) {
      if (!g.edges[e].label.tau) continue;
      if (seen.insert(g.edges[e].dst).second) todo.push_back(g.edges[e].dst);
    }
  }
  NodeSet out(seen.begin(), seen.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

StrictResult is_strict(const TermGraph& fg, const ProductGraph& pg) {
  struct Pair {
    std::uint32_t fnode;
    NodeSet dset;
  };
  struct PairKey {
    std::uint32_t fnode;
    NodeSet dset;
    bool operator==(const PairKey& o) const { return fnode == o.fnode && dset == o.dset; }
  };
  struct PairKeyHash {
    std::size_t operator()(const PairKey& k) const {
      return NodeSetHash{}(k.dset) * 31 + k.fnode;
    }
  };

  NodeSet d0 = tau_closure(pg, {pg.root});
  std::unordered_map<PairKey, std::pair<std::int64_t, std::uint32_t>, PairKeyHash> parent;
  // parent: key -> (parent index in order, edge index in fg); order for path rebuild
  std::vector<PairKey> order;
  std::deque<std::size_t> todo;
  PairKey rootk{fg.root, d0};
  parent.emplace(rootk, std::make_pair(-1, 0));
  order.push_back(rootk);
  todo.push_back(0);

  auto rebuild = [&](std::size_t idx, std::uint32_t final_edge,
                     bool with_final) -> std::vector<OrchAction> {
    std::vector<OrchAction> trace;
    if (with_final) trace.push_back(fg.edges[final_edge].action);
    while (true) {
      const PairKey& k = order[idx];
      auto [pidx, pe] = parent.at(k);
      if (pidx < 0) break;
      trace.push_back(fg.edges[pe].action);
      idx = static_cast<std::size_t>(pidx);
    }
    std::reverse(trace.begin(), trace.end());
    return trace;
  };

  constexpr std::size_t kPairCap = std::size_t{1} << 22;
  while (!todo.empty()) {
    std::size_t idx = todo.front();
    todo.pop_front();
    if (order.size() > kPairCap)
      throw ResourceLimitError("strictness subset construction exceeds pair cap");
    PairKey cur = order[idx];
    for (std::uint32_t e : fg.adj[cur.fnode]) {
      const auto& fedge = fg.edges[e];
      NodeSet targets;
      for (std::uint32_t d : cur.dset) {
        for (std::uint32_t pe : pg.adj[d]) {
          const auto& pedge = pg.edges[pe];
          if (pedge.label.tau) continue;
          if (pedge.label.action == fedge.action) targets.push_back(pedge.dst);
        }
      }
      if (targets.empty()) {
        return {false, rebuild(idx, e, true)};
      }
      std::sort(targets.begin(), targets.end());
      targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
      NodeSet dnext = tau_closure(pg, std::move(targets));
      PairKey key{fedge.dst, std::move(dnext)};
      if (parent.emplace(key, std::make_pair(static_cast<std::int64_t>(idx), e)).second) {
        order.push_back(key);
        todo.push_back(order.size() - 1);
      }
    }
  }
  return {true, {}};
}

StrictResult is_strict(const ContractPtr& client, const OrchPtr& orch, const ContractPtr& server,
                       const Limits& limits) {
  TermGraph fg = term_graph(orch);
  ProductGraph pg = product_graph(client, orch, server, limits);
  return is_strict(fg, pg);
}

DsResult check_ds(const ContractPtr& client, const OrchPtr& orch, const ContractPtr& server,
                  const Limits& limits) {
  TermGraph fg = term_graph(orch);
  ProductGraph pg = product_graph(client, orch, server, limits);

  StrictResult strict = is_strict(fg, pg);
  if (!strict.strict) {
    DsResult r;
    r.holds = false;
    r.reason = DsResult::Reason::NotStrict;
    r.trace = std::move(strict.counterexample);
    return r;
  }

  // BFS for a stuck node whose client is not success.
  std::vector<std::int64_t> parent_edge(pg.nodes.size(), -2);
  parent_edge[pg.root] = -1;
  std::deque<std::uint32_t> todo{pg.root};
  while (!todo.empty()) {
    std::uint32_t v = todo.front();
    todo.pop_front();
    for (std::uint32_t e : pg.adj[v]) {
      std::uint32_t w = pg.edges[e].dst;
      if (parent_edge[w] != -2) continue;
      parent_edge[w] = e;
      todo.push_back(w);
    }
  }
  for (std::uint32_t s : pg.stuck) {
    if (parent_edge[s] == -2) continue;  // unreachable (cannot happen for BFS-built graphs)
    if (pg.nodes[s].client->kind == ContractKind::Success) continue;
    DsResult r;
    r.holds = false;
    r.reason = DsResult::Reason::StuckClientNotSuccess;
    r.stuck_client = pg.nodes[s].client;
    std::uint32_t v = s;
    while (parent_edge[v] >= 0) {
      const auto& e = pg.edges[parent_edge[v]];
      if (!e.label.tau) r.trace.push_back(e.label.action);
      v = e.src;
    }
    std::reverse(r.trace.begin(), r.trace.end());
    return r;
  }
  return {};
}

std::string to_dot(const ProductGraph& g) {
  std::string out = "digraph system {\n  rankdir=LR;\n";
  std::unordered_set<std::uint32_t> stuck(g.stuck.begin(), g.stuck.end());
  for (std::uint32_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    std::string label = render(n.client) + " | " + render(n.orch) + " | " + render(n.server);
    for (auto& c : label)
      if (c == '"') c = '\'';
    out += "  n" + std::to_string(i) + " [label=\"" + label + "\"";
    if (i == g.root) out += ", shape=box";
    if (stuck.count(i)) out += ", style=bold";
    out += "];\n";
  }
  for (const auto& e : g.edges) {
    out += "  n" + std::to_string(e.src) + " -> n" + std::to_string(e.dst) + " [label=\"" +
           to_string(e.label) + "\"];\n";
  }
  out += "}\n";
  return out;
}

std::string to_json_text(const ProductGraph& g) {
  nlohmann::json j;
  j["root"] = g.root;
  j["nodes"] = nlohmann::json::array();
  std::unordered_set<std::uint32_t> stuck(g.stuck.begin(), g.stuck.end());
  for (std::uint32_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    j["nodes"].push_back({{"id", i},
                          {"client", render(n.client)},
                          {"orchestrator", render(n.orch)},
                          {"server", render(n.server)},
                          {"stuck", stuck.count(i) > 0}});
  }
  j["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges) {
    j["edges"].push_back({{"src", e.src}, {"label", to_string(e.label)}, {"dst", e.dst}});
  }
  return j.dump(2);
}

}  // namespace orchestral
