#include "orchestral/compliance.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <functional>
#include <limits>
#include <set>

#include "orchestral/parser.hpp"
#include "orchestral/respectfulness.hpp"

#include <json.hpp>

namespace orchestral {

const char* to_string(Mode m) { return m == Mode::ds ? "ds" : "full"; }

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::inconclusive_by_cap: return "inconclusive_by_cap";
  }
  return "?";
}

namespace {

struct Weights {
  // walk-sum extremes per node; +-infinity via pumping cycles
  std::vector<long> lo, hi;
  std::vector<char> lo_inf, hi_inf;
};

// Min and max walk sums from the root under per-edge weights, with standard
// Bellman-Ford pumping detection propagated forward.
Weights walk_extremes(const ProductGraph& g, const std::vector<int>& weight) {
  const long INF = std::numeric_limits<long>::max() / 4;
  std::size_t n = g.nodes.size();
  Weights w;
  w.lo.assign(n, INF);
  w.hi.assign(n, -INF);
  w.lo_inf.assign(n, 0);
  w.hi_inf.assign(n, 0);
  w.lo[g.root] = 0;
  w.hi[g.root] = 0;
  for (std::size_t round = 0; round + 1 < n + 1; ++round) {
    bool changed = false;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const auto& ed = g.edges[e];
      if (w.lo[ed.src] < INF && w.lo[ed.src] + weight[e] < w.lo[ed.dst]) {
        w.lo[ed.dst] = w.lo[ed.src] + weight[e];
        changed = true;
      }
      if (w.hi[ed.src] > -INF && w.hi[ed.src] + weight[e] > w.hi[ed.dst]) {
        w.hi[ed.dst] = w.hi[ed.src] + weight[e];
        changed = true;
      }
    }
    if (!changed) break;
  }
  // one more pass: nodes still improvable sit on / behind a pumping cycle
  std::deque<std::uint32_t> lo_seed, hi_seed;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& ed = g.edges[e];
    if (w.lo[ed.src] < INF && w.lo[ed.src] + weight[e] < w.lo[ed.dst]) lo_seed.push_back(ed.dst);
    if (w.hi[ed.src] > -INF && w.hi[ed.src] + weight[e] > w.hi[ed.dst]) hi_seed.push_back(ed.dst);
  }
  auto spread = [&](std::deque<std::uint32_t>& todo, std::vector<char>& flag) {
    for (auto v : todo) flag[v] = 1;
    while (!todo.empty()) {
      std::uint32_t v = todo.front();
      todo.pop_front();
      for (std::uint32_t e : g.adj[v]) {
        std::uint32_t d = g.edges[e].dst;
        if (!flag[d]) {
          flag[d] = 1;
          todo.push_back(d);
        }
      }
    }
  };
  spread(lo_seed, w.lo_inf);
  spread(hi_seed, w.hi_inf);
  return w;
}

std::vector<int> edge_weights(const ProductGraph& g, const std::string& name, bool left) {
  std::vector<int> w(g.edges.size(), 0);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& l = g.edges[e].label;
    if (l.tau || l.action.name != name) continue;
    if (left) {
      if (l.action.kind == OrchActionKind::InC) w[e] = +1;
      if (l.action.kind == OrchActionKind::OutS) w[e] = -1;
    } else {
      if (l.action.kind == OrchActionKind::InS) w[e] = +1;
      if (l.action.kind == OrchActionKind::OutC) w[e] = -1;
    }
  }
  return w;
}

// Tarjan SCC over a filtered edge set.
std::vector<std::uint32_t> scc_of(const ProductGraph& g, const std::vector<char>& edge_ok) {
  std::size_t n = g.nodes.size();
  std::vector<std::uint32_t> comp(n, 0);
  std::vector<std::uint32_t> index(n, 0), low(n, 0);
  std::vector<char> on_stack(n, 0), seen(n, 0);
  std::vector<std::uint32_t> stack;
  std::uint32_t next_index = 1, next_comp = 0;

  struct Frame {
    std::uint32_t v;
    std::size_t ei;
  };
  for (std::uint32_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<Frame> frames{{s, 0}};
    seen[s] = 1;
    index[s] = low[s] = next_index++;
    stack.push_back(s);
    on_stack[s] = 1;
    while (!frames.empty()) {
      Frame& fr = frames.back();
      if (fr.ei < g.adj[fr.v].size()) {
        std::uint32_t e = g.adj[fr.v][fr.ei++];
        if (!edge_ok[e]) continue;
        std::uint32_t w = g.edges[e].dst;
        if (!seen[w]) {
          seen[w] = 1;
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[fr.v] = std::min(low[fr.v], index[w]);
        }
      } else {
        std::uint32_t v = fr.v;
        frames.pop_back();
        if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
        if (low[v] == index[v]) {
          while (true) {
            std::uint32_t w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            comp[w] = next_comp;
            if (w == v) break;
          }
          ++next_comp;
        }
      }
    }
  }
  return comp;
}

// A cycle (label sequence) through `edge` using only edges with edge_ok set,
// staying inside edge's SCC.
std::vector<OrchAction> cycle_through(const ProductGraph& g, const std::vector<char>& edge_ok,
                                      const std::vector<std::uint32_t>& comp, std::uint32_t edge) {
  std::uint32_t from = g.edges[edge].dst, to = g.edges[edge].src;
  std::vector<std::int64_t> parent(g.nodes.size(), -2);
  parent[from] = -1;
  std::deque<std::uint32_t> todo{from};
  while (!todo.empty()) {
    std::uint32_t v = todo.front();
    todo.pop_front();
    if (v == to) break;
    for (std::uint32_t e : g.adj[v]) {
      if (!edge_ok[e]) continue;
      std::uint32_t w = g.edges[e].dst;
      if (comp[w] != comp[from] || parent[w] != -2) continue;
      parent[w] = e;
      todo.push_back(w);
    }
  }
  std::vector<OrchAction> labels;
  if (!g.edges[edge].label.tau) labels.push_back(g.edges[edge].label.action);
  std::uint32_t v = to;
  std::vector<OrchAction> back;
  while (v != from && parent[v] >= 0) {
    const auto& e = g.edges[parent[v]];
    if (!e.label.tau) back.push_back(e.label.action);
    v = e.src;
  }
  std::reverse(back.begin(), back.end());
  // cycle = edge then path dst -> src; rotate so it reads from the edge
  std::vector<OrchAction> out;
  out.reserve(labels.size() + back.size());
  for (auto& a : labels) out.push_back(a);
  for (auto& a : back) out.push_back(a);
  return out;
}

std::vector<OrchAction> path_labels_to(const ProductGraph& g, std::uint32_t target) {
  std::vector<std::int64_t> parent(g.nodes.size(), -2);
  parent[g.root] = -1;
  std::deque<std::uint32_t> todo{g.root};
  while (!todo.empty()) {
    std::uint32_t v = todo.front();
    todo.pop_front();
    for (std::uint32_t e : g.adj[v]) {
      std::uint32_t w = g.edges[e].dst;
      if (parent[w] != -2) continue;
      parent[w] = e;
      todo.push_back(w);
    }
  }
  std::vector<OrchAction> out;
  std::uint32_t v = target;
  while (parent[v] >= 0) {
    const auto& e = g.edges[parent[v]];
    if (!e.label.tau) out.push_back(e.label.action);
    v = e.src;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::set<std::string> edge_names(const ProductGraph& g) {
  std::set<std::string> names;
  for (const auto& e : g.edges)
    if (!e.label.tau) names.insert(e.label.action.name);
  return names;
}

}  // namespace

GraphRespectResult analyze_graph_respectfulness(const ProductGraph& g) {
  GraphRespectResult r;

  // tau-only cycles would make the infinite-trace analysis meaningless;
  // internal choice always guards an output, so they cannot arise.
  {
    std::vector<char> tau_only(g.edges.size(), 0);
    for (std::size_t e = 0; e < g.edges.size(); ++e) tau_only[e] = g.edges[e].label.tau;
    auto comp = scc_of(g, tau_only);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      if (tau_only[e] && comp[g.edges[e].src] == comp[g.edges[e].dst])
        throw std::logic_error("tau-only cycle in product graph");
    }
  }

  for (const auto& name : edge_names(g)) {
    for (bool left : {true, false}) {
      auto w = edge_weights(g, name, left);
      auto ext = walk_extremes(g, w);
      // Soundness: no walk may push a counter below zero.
      for (std::size_t v = 0; v < g.nodes.size(); ++v) {
        if (ext.lo[v] < 0 || ext.lo_inf[v]) {
          Evidence ev;
          ev.name = name;
          ev.value = ext.lo_inf[v] ? -1 : ext.lo[v];
          ev.description = std::string("unsound: ") + (left ? "cs_" : "sc_") + name +
                           " can reach " +
                           (ext.lo_inf[v] ? "arbitrarily negative values" :
                                            std::to_string(ext.lo[v]));
          ev.trace = {path_labels_to(g, static_cast<std::uint32_t>(v)), {}};
          r.ok = false;
          r.failure = std::move(ev);
          return r;
        }
      }
      if (!left) continue;

      // Finite traces: every stuck state must close with cs_name = 0.
      for (std::uint32_t s : g.stuck) {
        bool pumped = ext.lo_inf[s] || ext.hi_inf[s];
        if (pumped || ext.lo[s] != 0 || ext.hi[s] != 0) {
          Evidence ev;
          ev.name = name;
          ev.value = pumped ? ext.hi[s] : (ext.lo[s] != 0 ? ext.lo[s] : ext.hi[s]);
          ev.description = "not client-respectful: a maximal trace ends with cs_" + name +
                           " = " + std::to_string(ev.value);
          ev.trace = {path_labels_to(g, s), {}};
          r.ok = false;
          r.failure = std::move(ev);
          return r;
        }
      }

      // Infinite traces, definitely-<name,_>: a cycle taking client inputs
      // of `name` without ever delivering one.
      {
        std::vector<char> ok(g.edges.size(), 1);
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
          const auto& l = g.edges[e].label;
          if (!l.tau && l.action.kind == OrchActionKind::OutS && l.action.name == name)
            ok[e] = 0;
        }
        auto comp = scc_of(g, ok);
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
          const auto& l = g.edges[e].label;
          if (!ok[e] || l.tau) continue;
          if (l.action.kind != OrchActionKind::InC || l.action.name != name) continue;
          if (comp[g.edges[e].src] != comp[g.edges[e].dst]) continue;
          Evidence ev;
          ev.name = name;
          ev.description = "not client-respectful: the interaction can repeat <" + name +
                           ",_> forever without <_,!" + name + ">";
          ev.trace = {path_labels_to(g, g.edges[e].src),
                      cycle_through(g, ok, comp, static_cast<std::uint32_t>(e))};
          r.ok = false;
          r.failure = std::move(ev);
          return r;
        }
      }

      // Infinite traces with a finite left-restriction: the frozen cs value
      // must be zero wherever an infinite name-free tail exists.
      {
        std::vector<char> ok(g.edges.size(), 1);
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
          const auto& l = g.edges[e].label;
          if (l.tau || l.action.name != name) continue;
          if (l.action.kind == OrchActionKind::InC || l.action.kind == OrchActionKind::OutS)
            ok[e] = 0;
        }
        auto comp = scc_of(g, ok);
        std::vector<char> loops(g.nodes.size(), 0);
        for (std::size_t e = 0; e < g.edges.size(); ++e)
          if (ok[e] && comp[g.edges[e].src] == comp[g.edges[e].dst])
            loops[g.edges[e].src] = loops[g.edges[e].dst] = 1;
        // nodes that can reach a name-free loop through name-free edges
        std::vector<char> can_tail = loops;
        bool changed = true;
        while (changed) {
          changed = false;
          for (std::size_t e = 0; e < g.edges.size(); ++e) {
            if (!ok[e]) continue;
            if (can_tail[g.edges[e].dst] && !can_tail[g.edges[e].src]) {
              can_tail[g.edges[e].src] = 1;
              changed = true;
            }
          }
        }
        for (std::size_t v = 0; v < g.nodes.size(); ++v) {
          if (!can_tail[v]) continue;
          bool pumped = ext.lo_inf[v] || ext.hi_inf[v];
          if (!pumped && ext.lo[v] == 0 && ext.hi[v] == 0) continue;
          Evidence ev;
          ev.name = name;
          ev.value = pumped ? ext.hi[v] : (ext.lo[v] != 0 ? ext.lo[v] : ext.hi[v]);
          ev.description = "not client-respectful: an infinite run freezes cs_" + name + " at " +
                           std::to_string(ev.value);
          ev.trace = {path_labels_to(g, static_cast<std::uint32_t>(v)), {}};
          r.ok = false;
          r.failure = std::move(ev);
          return r;
        }
      }
    }
  }

  // Definitely-server-inputted: a cycle of server inputs (and taus) only.
  {
    std::vector<char> ok(g.edges.size(), 0);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const auto& l = g.edges[e].label;
      ok[e] = l.tau || l.action.kind == OrchActionKind::InS;
    }
    auto comp = scc_of(g, ok);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const auto& l = g.edges[e].label;
      if (!ok[e] || l.tau) continue;
      if (comp[g.edges[e].src] != comp[g.edges[e].dst]) continue;
      Evidence ev;
      ev.description = "definitely server-inputted: the interaction can loop on server inputs";
      ev.trace = {path_labels_to(g, g.edges[e].src),
                  cycle_through(g, ok, comp, static_cast<std::uint32_t>(e))};
      r.ok = false;
      r.failure = std::move(ev);
      return r;
    }
  }
  return r;
}

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::int64_t micros() const {
    return std::chrono::duration_cast<std::chrono::microseconds>(
               std::chrono::steady_clock::now() - start)
        .count();
  }
};

}  // namespace

ComplianceReport check_full(const ContractPtr& client, const OrchPtr& orch,
                            const ContractPtr& server, const Limits& limits) {
  Timer timer;
  ComplianceReport rep;
  rep.mode = Mode::full;
  ProductGraph pg = product_graph(client, orch, server, limits);
  rep.stats.product_nodes = pg.nodes.size();
  rep.stats.product_edges = pg.edges.size();

  for (std::uint32_t s : pg.stuck) {
    if (pg.nodes[s].client->kind == ContractKind::Success) continue;
    rep.verdict = Verdict::fails;
    Evidence ev;
    ev.description = "stuck with client " + render(pg.nodes[s].client) + " not at 1";
    ev.trace = {path_labels_to(pg, s), {}};
    rep.evidence = std::move(ev);
    rep.stats.micros = timer.micros();
    return rep;
  }

  GraphRespectResult res = analyze_graph_respectfulness(pg);
  if (!res.ok) {
    rep.verdict = Verdict::fails;
    rep.evidence = res.failure;
  }
  rep.stats.micros = timer.micros();
  return rep;
}

ComplianceReport check_ds_report(const ContractPtr& client, const OrchPtr& orch,
                                 const ContractPtr& server, const Limits& limits) {
  Timer timer;
  ComplianceReport rep;
  rep.mode = Mode::ds;
  ProductGraph pg = product_graph(client, orch, server, limits);
  rep.stats.product_nodes = pg.nodes.size();
  rep.stats.product_edges = pg.edges.size();
  DsResult ds = check_ds(client, orch, server, limits);
  if (!ds.holds) {
    rep.verdict = Verdict::fails;
    Evidence ev;
    ev.trace = {ds.trace, {}};
    if (ds.reason == DsResult::Reason::NotStrict) {
      ev.description = "not strict: orchestrator trace is not realizable in the system";
    } else {
      ev.description = "stuck with client " + render(ds.stuck_client) + " not at 1";
    }
    rep.evidence = std::move(ev);
  }
  rep.stats.micros = timer.micros();
  return rep;
}

ComplianceReport decide_pair(const ContractPtr& client, const ContractPtr& server, Mode mode,
                             const Limits& limits) {
  Timer timer;
  ComplianceReport rep;
  rep.mode = mode;
  if (mode == Mode::ds) {
    OrchFamily fam = synth({}, client, server);
    rep.stats.family_count = fam.count();
    if (fam.empty()) {
      rep.verdict = Verdict::fails;
      Evidence ev;
      ev.description = "the synthesis family is empty: no orchestrator mediates this pair";
      rep.evidence = std::move(ev);
    } else {
      rep.witness = fam.enumerate(1).at(0);
    }
    rep.stats.micros = timer.micros();
    return rep;
  }
  WitnessSearch ws = find_witness(client, server, limits);
  rep.stats.family_count = ws.family_count;
  rep.stats.members_tried = ws.tried;
  if (ws.witness) {
    rep.witness = ws.witness;
  } else if (ws.capped) {
    rep.verdict = Verdict::inconclusive_by_cap;
    Evidence ev;
    ev.description = "enumeration cap reached before exhausting the family";
    rep.evidence = std::move(ev);
  } else {
    rep.verdict = Verdict::fails;
    Evidence ev;
    ev.description = "no member of the synthesis family is both strict and respectful";
    rep.evidence = std::move(ev);
  }
  rep.stats.micros = timer.micros();
  return rep;
}

Prop1Report cross_check_prop1(const ContractPtr& client, const OrchPtr& orch,
                              const ContractPtr& server, const Limits& limits) {
  Prop1Report r;
  r.strict = is_strict(client, orch, server, limits).strict;
  r.full_holds = check_full(client, orch, server, limits).verdict == Verdict::holds;
  DsResult ds = check_ds(client, orch, server, limits);
  r.ds_holds = ds.holds;
  r.orch_respectful = is_respectful(orch).respectful;
  r.left = r.full_holds && r.strict;
  r.right = r.ds_holds && r.orch_respectful;
  r.agree = r.left == r.right;
  if (!r.strict) r.note = "orchestrator is not strict for this pair; equivalence is vacuous";
  return r;
}

std::string report_to_json_text(const ComplianceReport& r) {
  nlohmann::json j;
  j["mode"] = to_string(r.mode);
  j["verdict"] = to_string(r.verdict);
  if (r.witness) j["witness"] = render(*r.witness);
  if (r.evidence) {
    nlohmann::json e;
    e["description"] = r.evidence->description;
    e["trace"] = to_string(r.evidence->trace);
    if (!r.evidence->name.empty()) {
      e["name"] = r.evidence->name;
      e["value"] = r.evidence->value;
    }
    j["evidence"] = e;
  }
  j["stats"] = {{"product_nodes", r.stats.product_nodes},
                {"product_edges", r.stats.product_edges},
                {"family_count", r.stats.family_count},
                {"members_tried", r.stats.members_tried},
                {"micros", r.stats.micros}};
  return j.dump(2);
}

}  // namespace orchestral
