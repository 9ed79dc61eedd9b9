#include "orchestral/orchestrators.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace orchestral {

namespace {

std::size_t hash_mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::size_t node_hash(const Orch& f) {
  std::size_t h = static_cast<std::size_t>(f.kind) * 0x85ebca6bu;
  switch (f.kind) {
    case OrchKind::Stop:
      break;
    case OrchKind::Prefix:
      h = hash_mix(h, static_cast<std::size_t>(f.action.kind));
      h = hash_mix(h, std::hash<std::string>{}(f.action.name));
      h = hash_mix(h, std::hash<const Orch*>{}(f.cont.get()));
      break;
    case OrchKind::Choice:
      for (const auto& b : f.branches) h = hash_mix(h, std::hash<const Orch*>{}(b.get()));
      break;
    case OrchKind::Var:
      h = hash_mix(h, std::hash<std::string>{}(f.var));
      break;
    case OrchKind::Rec:
      h = hash_mix(h, std::hash<std::string>{}(f.var));
      h = hash_mix(h, std::hash<const Orch*>{}(f.body.get()));
      break;
  }
  return h;
}

bool node_equal(const Orch& a, const Orch& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case OrchKind::Stop:
      return true;
    case OrchKind::Prefix:
      return a.action == b.action && a.cont.get() == b.cont.get();
    case OrchKind::Choice: {
      if (a.branches.size() != b.branches.size()) return false;
      for (std::size_t i = 0; i < a.branches.size(); ++i)
        if (a.branches[i].get() != b.branches[i].get()) return false;
      return true;
    }
    case OrchKind::Var:
      return a.var == b.var;
    case OrchKind::Rec:
      return a.var == b.var && a.body.get() == b.body.get();
  }
  return false;
}

class Interner {
 public:
  OrchPtr intern(Orch&& node) {
    node.hash = node_hash(node);
    std::lock_guard<std::mutex> lock(mu_);
    auto range = table_.equal_range(node.hash);
    for (auto it = range.first; it != range.second; ++it) {
      if (node_equal(*it->second, node)) return it->second;
    }
    auto ptr = std::make_shared<const Orch>(std::move(node));
    table_.emplace(ptr->hash, ptr);
    return ptr;
  }

 private:
  std::mutex mu_;
  std::unordered_multimap<std::size_t, OrchPtr> table_;
};

Interner& interner() {
  static Interner store;
  return store;
}

void free_vars_rec(const OrchPtr& f, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (f->kind) {
    case OrchKind::Stop:
      return;
    case OrchKind::Var:
      if (!bound.count(f->var)) out.insert(f->var);
      return;
    case OrchKind::Prefix:
      free_vars_rec(f->cont, bound, out);
      return;
    case OrchKind::Choice:
      for (const auto& b : f->branches) free_vars_rec(b, bound, out);
      return;
    case OrchKind::Rec: {
      bool fresh = bound.insert(f->var).second;
      free_vars_rec(f->body, bound, out);
      if (fresh) bound.erase(f->var);
      return;
    }
  }
}

std::set<std::string> free_vars(const OrchPtr& f) {
  std::set<std::string> bound, out;
  free_vars_rec(f, bound, out);
  return out;
}

OrchPtr subst(const OrchPtr& f, const std::string& var, const OrchPtr& repl) {
  switch (f->kind) {
    case OrchKind::Stop:
      return f;
    case OrchKind::Var:
      return f->var == var ? repl : f;
    case OrchKind::Prefix: {
      OrchPtr c = subst(f->cont, var, repl);
      if (c.get() == f->cont.get()) return f;
      return orch_prefix(f->action, std::move(c));
    }
    case OrchKind::Choice: {
      std::vector<OrchPtr> bs;
      bs.reserve(f->branches.size());
      bool changed = false;
      for (const auto& b : f->branches) {
        OrchPtr c = subst(b, var, repl);
        changed |= c.get() != b.get();
        bs.push_back(std::move(c));
      }
      if (!changed) return f;
      return orch_choice(std::move(bs));
    }
    case OrchKind::Rec: {
      if (f->var == var) return f;
      OrchPtr b = subst(f->body, var, repl);
      if (b.get() == f->body.get()) return f;
      return orch_rec(f->var, std::move(b));
    }
  }
  return f;
}

// Total structural order used for sorting choice branches.
int cmp_orch(const Orch* a, const Orch* b) {
  if (a == b) return 0;
  if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
  switch (a->kind) {
    case OrchKind::Stop:
      return 0;
    case OrchKind::Prefix: {
      if (a->action.name != b->action.name) return a->action.name < b->action.name ? -1 : 1;
      if (a->action.kind != b->action.kind) return a->action.kind < b->action.kind ? -1 : 1;
      return cmp_orch(a->cont.get(), b->cont.get());
    }
    case OrchKind::Choice: {
      if (a->branches.size() != b->branches.size())
        return a->branches.size() < b->branches.size() ? -1 : 1;
      for (std::size_t i = 0; i < a->branches.size(); ++i) {
        int c = cmp_orch(a->branches[i].get(), b->branches[i].get());
        if (c != 0) return c;
      }
      return 0;
    }
    case OrchKind::Var:
      return a->var < b->var ? -1 : (a->var == b->var ? 0 : 1);
    case OrchKind::Rec: {
      if (a->var != b->var) return a->var < b->var ? -1 : 1;
      return cmp_orch(a->body.get(), b->body.get());
    }
  }
  return 0;
}

OrchPtr canon_rec_orch(const OrchPtr& f, std::size_t depth,
                       std::map<std::string, std::string>& env) {
  switch (f->kind) {
    case OrchKind::Stop:
      return orch_stop();
    case OrchKind::Var: {
      auto it = env.find(f->var);
      return orch_var(it == env.end() ? f->var : it->second);
    }
    case OrchKind::Prefix:
      return orch_prefix(f->action, canon_rec_orch(f->cont, depth, env));
    case OrchKind::Choice: {
      std::vector<OrchPtr> flat;
      std::function<void(const OrchPtr&)> flatten = [&](const OrchPtr& g) {
        if (g->kind == OrchKind::Choice) {
          for (const auto& b : g->branches) flatten(b);
        } else {
          flat.push_back(canon_rec_orch(g, depth, env));
        }
      };
      for (const auto& b : f->branches) flatten(b);
      if (flat.size() == 1) return flat[0];
      std::stable_sort(flat.begin(), flat.end(), [](const OrchPtr& x, const OrchPtr& y) {
        return cmp_orch(x.get(), y.get()) < 0;
      });
      return orch_choice(std::move(flat));
    }
    case OrchKind::Rec: {
      if (!free_vars(f->body).count(f->var)) return canon_rec_orch(f->body, depth, env);
      std::string name = "X" + std::to_string(depth);
      auto it = env.find(f->var);
      std::string saved;
      bool had = it != env.end();
      if (had) saved = it->second;
      env[f->var] = name;
      OrchPtr body = canon_rec_orch(f->body, depth + 1, env);
      if (had)
        env[f->var] = saved;
      else
        env.erase(f->var);
      return orch_rec(name, std::move(body));
    }
  }
  return f;
}

void wf_orch_rec(const OrchPtr& f, std::set<std::string>& bound, const std::string& path,
                 std::vector<Violation>& out) {
  switch (f->kind) {
    case OrchKind::Stop:
      return;
    case OrchKind::Var:
      if (!bound.count(f->var))
        out.push_back({Violation::Kind::UnboundVariable, f->var, path});
      return;
    case OrchKind::Prefix:
      wf_orch_rec(f->cont, bound, path + "/" + to_string(f->action), out);
      return;
    case OrchKind::Choice: {
      if (f->branches.empty()) {
        out.push_back({Violation::Kind::EmptyChoice, "", path});
        return;
      }
      bool have_dir = false;
      ActionCategory dir = ActionCategory::IotaL;
      std::size_t i = 0;
      for (const auto& b : f->branches) {
        std::string bpath = path + "/branch" + std::to_string(i++);
        if (b->kind != OrchKind::Prefix) {
          out.push_back({Violation::Kind::ChoiceBranchNotPrefix, "", bpath});
          wf_orch_rec(b, bound, bpath, out);
          continue;
        }
        ActionCategory c = category(b->action.kind);
        if (c == ActionCategory::Output) {
          out.push_back({Violation::Kind::ChoiceHeadedByOutputAction, to_string(b->action), bpath});
        } else if (!have_dir) {
          have_dir = true;
          dir = c;
        } else if (c != dir) {
          out.push_back({Violation::Kind::MixedChoiceDirections, to_string(b->action), bpath});
        }
        wf_orch_rec(b, bound, bpath, out);
      }
      return;
    }
    case OrchKind::Rec: {
      if (f->body->kind == OrchKind::Var)
        out.push_back({Violation::Kind::UnguardedRecursion, f->var, path});
      bool fresh = bound.insert(f->var).second;
      wf_orch_rec(f->body, bound, path + "/rec(" + f->var + ")", out);
      if (fresh) bound.erase(f->var);
      return;
    }
  }
}

}  // namespace

ActionCategory category(OrchActionKind kind) {
  switch (kind) {
    case OrchActionKind::SyncL:
    case OrchActionKind::InC:
      return ActionCategory::IotaL;
    case OrchActionKind::SyncR:
    case OrchActionKind::InS:
      return ActionCategory::IotaR;
    case OrchActionKind::OutC:
    case OrchActionKind::OutS:
      return ActionCategory::Output;
  }
  return ActionCategory::Output;
}

std::string to_string(const OrchAction& a) {
  switch (a.kind) {
    case OrchActionKind::SyncL: return "<" + a.name + ",!" + a.name + ">";
    case OrchActionKind::SyncR: return "<!" + a.name + "," + a.name + ">";
    case OrchActionKind::InC: return "<" + a.name + ",_>";
    case OrchActionKind::InS: return "<_," + a.name + ">";
    case OrchActionKind::OutC: return "<!" + a.name + ",_>";
    case OrchActionKind::OutS: return "<_,!" + a.name + ">";
  }
  return "<?,?>";
}

OrchPtr orch_stop() {
  Orch node;
  node.kind = OrchKind::Stop;
  return interner().intern(std::move(node));
}

OrchPtr orch_prefix(OrchAction action, OrchPtr cont) {
  Orch node;
  node.kind = OrchKind::Prefix;
  node.action = std::move(action);
  node.cont = std::move(cont);
  return interner().intern(std::move(node));
}

OrchPtr orch_choice(std::vector<OrchPtr> branches) {
  Orch node;
  node.kind = OrchKind::Choice;
  node.branches = std::move(branches);
  return interner().intern(std::move(node));
}

OrchPtr orch_var(const std::string& name) {
  Orch node;
  node.kind = OrchKind::Var;
  node.var = name;
  return interner().intern(std::move(node));
}

OrchPtr orch_rec(const std::string& var, OrchPtr body) {
  Orch node;
  node.kind = OrchKind::Rec;
  node.var = var;
  node.body = std::move(body);
  return interner().intern(std::move(node));
}

std::vector<Violation> well_formed_orch(const OrchPtr& f) {
  std::vector<Violation> out;
  std::set<std::string> bound;
  wf_orch_rec(f, bound, "", out);
  return out;
}

namespace {

template <typename V>
class PtrCache {
 public:
  bool get(const Orch* key, V& out) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = map_.find(key);
    if (it == map_.end()) return false;
    out = it->second;
    return true;
  }
  void put(const Orch* key, V value) {
    std::lock_guard<std::mutex> lock(mu_);
    map_.emplace(key, std::move(value));
  }

 private:
  std::mutex mu_;
  std::unordered_map<const Orch*, V> map_;
};

}  // namespace

OrchPtr canon_orch(const OrchPtr& f) {
  static PtrCache<OrchPtr> cache;
  OrchPtr out;
  if (cache.get(f.get(), out)) return out;
  std::map<std::string, std::string> env;
  out = canon_rec_orch(f, 0, env);
  cache.put(f.get(), out);
  return out;
}

OrchPtr unfold_orch(const OrchPtr& f) {
  static PtrCache<OrchPtr> cache;
  OrchPtr out;
  if (cache.get(f.get(), out)) return out;
  OrchPtr t = f;
  int guard = 0;
  while (t->kind == OrchKind::Rec) {
    if (++guard > 4096) throw std::logic_error("unfold_orch: non-contractive term");
    t = canon_orch(subst(t->body, t->var, t));
  }
  cache.put(f.get(), t);
  return t;
}

std::vector<std::pair<OrchAction, OrchPtr>> orch_transitions(const OrchPtr& f) {
  static PtrCache<std::vector<std::pair<OrchAction, OrchPtr>>> cache;
  OrchPtr t = unfold_orch(f);
  std::vector<std::pair<OrchAction, OrchPtr>> out;
  if (cache.get(t.get(), out)) return out;
  switch (t->kind) {
    case OrchKind::Stop:
      break;
    case OrchKind::Prefix:
      out.push_back({t->action, canon_orch(t->cont)});
      break;
    case OrchKind::Choice:
      for (const auto& b : t->branches) {
        for (auto& tr : orch_transitions(b)) out.push_back(std::move(tr));
      }
      break;
    case OrchKind::Var:
    case OrchKind::Rec:
      throw std::logic_error("orch_transitions: open or non-contractive term");
  }
  cache.put(t.get(), out);
  return out;
}

TermGraph term_graph(const OrchPtr& f) {
  TermGraph g;
  OrchPtr root = canon_orch(f);
  std::unordered_map<const Orch*, std::uint32_t> index;
  std::deque<OrchPtr> todo{root};
  index.emplace(root.get(), 0);
  g.nodes.push_back(root);
  while (!todo.empty()) {
    OrchPtr s = todo.front();
    todo.pop_front();
    std::uint32_t sid = index.at(s.get());
    auto trs = orch_transitions(s);
    if (trs.empty()) g.terminals.push_back(sid);
    for (auto& [act, next] : trs) {
      auto [it, fresh] = index.emplace(next.get(), static_cast<std::uint32_t>(g.nodes.size()));
      if (fresh) {
        g.nodes.push_back(next);
        todo.push_back(next);
      }
      g.edges.push_back({sid, act, it->second});
    }
  }
  g.adj.assign(g.nodes.size(), {});
  for (std::uint32_t e = 0; e < g.edges.size(); ++e) g.adj[g.edges[e].src].push_back(e);
  return g;
}

std::string to_string(const ActionSeq& s) {
  std::string out;
  for (const auto& a : s.prefix) out += to_string(a);
  if (s.lasso()) {
    out += "(";
    for (const auto& a : s.cycle) out += to_string(a);
    out += ")^w";
  }
  if (out.empty()) out = "λ";
  return out;
}

std::vector<ActionSeq> traces_bounded(const OrchPtr& f, std::size_t depth) {
  std::set<ActionSeq> out;
  struct Item {
    OrchPtr state;
    std::vector<OrchAction> trace;
  };
  std::deque<Item> todo{{canon_orch(f), {}}};
  out.insert(ActionSeq{});
  while (!todo.empty()) {
    Item it = std::move(todo.front());
    todo.pop_front();
    if (it.trace.size() >= depth) continue;
    for (const auto& [act, next] : orch_transitions(it.state)) {
      std::vector<OrchAction> t = it.trace;
      t.push_back(act);
      if (out.insert(ActionSeq{t, {}}).second) todo.push_back({next, std::move(t)});
    }
  }
  return {out.begin(), out.end()};
}

namespace {

// All simple cycles, each reported once, rooted at its minimal node id.
std::vector<std::vector<std::uint32_t>> simple_cycles(const TermGraph& g) {
  std::vector<std::vector<std::uint32_t>> cycles;  // edge-index sequences
  std::size_t n = g.nodes.size();
  std::vector<char> on_path(n, 0);
  std::vector<std::uint32_t> path_edges;

  std::function<void(std::uint32_t, std::uint32_t)> dfs = [&](std::uint32_t v,
                                                              std::uint32_t start) {
    on_path[v] = 1;
    for (std::uint32_t e : g.adj[v]) {
      std::uint32_t w = g.edges[e].dst;
      if (w == start) {
        path_edges.push_back(e);
        cycles.push_back(path_edges);
        path_edges.pop_back();
      } else if (w > start && !on_path[w]) {
        path_edges.push_back(e);
        dfs(w, start);
        path_edges.pop_back();
      }
    }
    on_path[v] = 0;
  };

  for (std::uint32_t s = 0; s < n; ++s) dfs(s, s);
  return cycles;
}

// All simple paths root -> target, as edge-index sequences.
void simple_paths(const TermGraph& g, std::uint32_t target,
                  std::vector<std::vector<std::uint32_t>>& out) {
  std::vector<char> on_path(g.nodes.size(), 0);
  std::vector<std::uint32_t> path;
  std::function<void(std::uint32_t)> dfs = [&](std::uint32_t v) {
    if (v == target) {
      // A simple path ends at its first arrival: extensions cannot return.
      out.push_back(path);
      return;
    }
    on_path[v] = 1;
    for (std::uint32_t e : g.adj[v]) {
      std::uint32_t w = g.edges[e].dst;
      if (on_path[w]) continue;
      path.push_back(e);
      dfs(w);
      path.pop_back();
    }
    on_path[v] = 0;
  };
  dfs(g.root);
}

std::vector<OrchAction> labels_of(const TermGraph& g, const std::vector<std::uint32_t>& edges) {
  std::vector<OrchAction> out;
  out.reserve(edges.size());
  for (std::uint32_t e : edges) out.push_back(g.edges[e].action);
  return out;
}

}  // namespace

std::vector<ActionSeq> maximal_lassos(const TermGraph& g, std::size_t multiplicity) {
  std::set<ActionSeq> out;
  std::vector<char> terminal(g.nodes.size(), 0);
  for (std::uint32_t t : g.terminals) terminal[t] = 1;

  // Finite maximal traces, visiting no node more than `multiplicity` times.
  {
    std::vector<std::uint32_t> visits(g.nodes.size(), 0);
    std::vector<OrchAction> trace;
    constexpr std::size_t kSeqCap = 1 << 20;
    std::function<void(std::uint32_t)> dfs = [&](std::uint32_t v) {
      if (out.size() > kSeqCap) throw std::runtime_error("maximal_lassos: sequence cap exceeded");
      if (terminal[v]) out.insert(ActionSeq{trace, {}});
      ++visits[v];
      for (std::uint32_t e : g.adj[v]) {
        std::uint32_t w = g.edges[e].dst;
        if (visits[w] >= multiplicity) continue;
        trace.push_back(g.edges[e].action);
        dfs(w);
        trace.pop_back();
      }
      --visits[v];
    };
    dfs(g.root);
  }

  // One lasso per (simple entry path, simple cycle rotation at the entry).
  for (const auto& cyc : simple_cycles(g)) {
    for (std::size_t rot = 0; rot < cyc.size(); ++rot) {
      std::uint32_t entry = g.edges[cyc[rot]].src;
      std::vector<std::uint32_t> rotated;
      rotated.reserve(cyc.size());
      for (std::size_t i = 0; i < cyc.size(); ++i) rotated.push_back(cyc[(rot + i) % cyc.size()]);
      std::vector<std::vector<std::uint32_t>> entries;
      simple_paths(g, entry, entries);
      for (const auto& p : entries)
        out.insert(ActionSeq{labels_of(g, p), labels_of(g, rotated)});
    }
  }
  return {out.begin(), out.end()};
}

std::vector<ActionSeq> maximal_lassos(const OrchPtr& f) {
  return maximal_lassos(term_graph(f), 2);
}

std::vector<std::string> orch_names(const OrchPtr& f) {
  std::set<std::string> s;
  std::function<void(const OrchPtr&)> walk = [&](const OrchPtr& g) {
    switch (g->kind) {
      case OrchKind::Stop:
      case OrchKind::Var:
        return;
      case OrchKind::Prefix:
        s.insert(g->action.name);
        walk(g->cont);
        return;
      case OrchKind::Choice:
        for (const auto& b : g->branches) walk(b);
        return;
      case OrchKind::Rec:
        walk(g->body);
        return;
    }
  };
  walk(f);
  return {s.begin(), s.end()};
}

std::size_t orch_size(const OrchPtr& f) {
  switch (f->kind) {
    case OrchKind::Stop:
    case OrchKind::Var:
      return 1;
    case OrchKind::Prefix:
      return 1 + orch_size(f->cont);
    case OrchKind::Choice: {
      std::size_t n = 1;
      for (const auto& b : f->branches) n += orch_size(b);
      return n;
    }
    case OrchKind::Rec:
      return 1 + orch_size(f->body);
  }
  return 1;
}

bool orch_closed(const OrchPtr& f) { return free_vars(f).empty(); }

}  // namespace orchestral
