#include "orchestral/contracts.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
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

std::size_t node_hash(const Contract& c) {
  std::size_t h = static_cast<std::size_t>(c.kind) * 0x9e3779b1u;
  switch (c.kind) {
    case ContractKind::Success:
      break;
    case ContractKind::External:
    case ContractKind::Internal:
      for (const auto& b : c.branches) {
        h = hash_mix(h, std::hash<std::string>{}(b.name));
        h = hash_mix(h, std::hash<const Contract*>{}(b.cont.get()));
      }
      break;
    case ContractKind::Var:
      h = hash_mix(h, std::hash<std::string>{}(c.var));
      break;
    case ContractKind::Rec:
      h = hash_mix(h, std::hash<std::string>{}(c.var));
      h = hash_mix(h, std::hash<const Contract*>{}(c.body.get()));
      break;
  }
  return h;
}

bool node_equal(const Contract& a, const Contract& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ContractKind::Success:
      return true;
    case ContractKind::External:
    case ContractKind::Internal: {
      if (a.branches.size() != b.branches.size()) return false;
      for (std::size_t i = 0; i < a.branches.size(); ++i) {
        if (a.branches[i].name != b.branches[i].name) return false;
        if (a.branches[i].cont.get() != b.branches[i].cont.get()) return false;
      }
      return true;
    }
    case ContractKind::Var:
      return a.var == b.var;
    case ContractKind::Rec:
      return a.var == b.var && a.body.get() == b.body.get();
  }
  return false;
}

// Hash-consing store. Children of interned nodes are interned, so pointer
// identity on children makes node equality O(branch count).
class Interner {
 public:
  ContractPtr intern(Contract&& node) {
    node.hash = node_hash(node);
    std::lock_guard<std::mutex> lock(mu_);
    auto range = table_.equal_range(node.hash);
    for (auto it = range.first; it != range.second; ++it) {
      if (node_equal(*it->second, node)) return it->second;
    }
    auto ptr = std::make_shared<const Contract>(std::move(node));
    table_.emplace(ptr->hash, ptr);
    return ptr;
  }

 private:
  std::mutex mu_;
  std::unordered_multimap<std::size_t, ContractPtr> table_;
};

Interner& interner() {
  static Interner store;
  return store;
}

void free_vars_rec(const ContractPtr& t, std::set<std::string>& bound,
                   std::set<std::string>& out) {
  switch (t->kind) {
    case ContractKind::Success:
      return;
    case ContractKind::Var:
      if (!bound.count(t->var)) out.insert(t->var);
      return;
    case ContractKind::External:
    case ContractKind::Internal:
      for (const auto& b : t->branches) free_vars_rec(b.cont, bound, out);
      return;
    case ContractKind::Rec: {
      bool fresh = bound.insert(t->var).second;
      free_vars_rec(t->body, bound, out);
      if (fresh) bound.erase(t->var);
      return;
    }
  }
}

std::set<std::string> free_vars(const ContractPtr& t) {
  std::set<std::string> bound, out;
  free_vars_rec(t, bound, out);
  return out;
}

// Substitute the closed term `repl` for free occurrences of `var`.
ContractPtr subst(const ContractPtr& t, const std::string& var, const ContractPtr& repl) {
  switch (t->kind) {
    case ContractKind::Success:
      return t;
    case ContractKind::Var:
      return t->var == var ? repl : t;
    case ContractKind::External:
    case ContractKind::Internal: {
      std::vector<ContractBranch> bs;
      bs.reserve(t->branches.size());
      bool changed = false;
      for (const auto& b : t->branches) {
        ContractPtr c = subst(b.cont, var, repl);
        changed |= c.get() != b.cont.get();
        bs.push_back({b.name, std::move(c)});
      }
      if (!changed) return t;
      Contract node;
      node.kind = t->kind;
      node.branches = std::move(bs);
      return interner().intern(std::move(node));
    }
    case ContractKind::Rec: {
      if (t->var == var) return t;  // shadowed
      ContractPtr b = subst(t->body, var, repl);
      if (b.get() == t->body.get()) return t;
      Contract node;
      node.kind = ContractKind::Rec;
      node.var = t->var;
      node.body = std::move(b);
      return interner().intern(std::move(node));
    }
  }
  return t;
}

ContractPtr canon_rec(const ContractPtr& t, std::size_t depth,
                      std::map<std::string, std::string>& env) {
  switch (t->kind) {
    case ContractKind::Success:
      return success();
    case ContractKind::Var: {
      auto it = env.find(t->var);
      // Free variables keep their name; well_formed reports them.
      return contract_var(it == env.end() ? t->var : it->second);
    }
    case ContractKind::External:
    case ContractKind::Internal: {
      std::vector<ContractBranch> bs;
      bs.reserve(t->branches.size());
      for (const auto& b : t->branches) bs.push_back({b.name, canon_rec(b.cont, depth, env)});
      std::stable_sort(bs.begin(), bs.end(), [](const ContractBranch& x, const ContractBranch& y) {
        if (x.name != y.name) return x.name < y.name;
        return x.cont.get() < y.cont.get();
      });
      Contract node;
      node.kind = t->kind;
      node.branches = std::move(bs);
      return interner().intern(std::move(node));
    }
    case ContractKind::Rec: {
      if (!free_vars(t->body).count(t->var)) return canon_rec(t->body, depth, env);
      std::string name = "X" + std::to_string(depth);
      auto it = env.find(t->var);
      std::string saved;
      bool had = it != env.end();
      if (had) saved = it->second;
      env[t->var] = name;
      ContractPtr body = canon_rec(t->body, depth + 1, env);
      if (had)
        env[t->var] = saved;
      else
        env.erase(t->var);
      Contract node;
      node.kind = ContractKind::Rec;
      node.var = name;
      node.body = std::move(body);
      return interner().intern(std::move(node));
    }
  }
  return t;
}

void collect_names(const ContractPtr& t, std::set<std::string>& out) {
  switch (t->kind) {
    case ContractKind::Success:
    case ContractKind::Var:
      return;
    case ContractKind::External:
    case ContractKind::Internal:
      for (const auto& b : t->branches) {
        out.insert(b.name);
        collect_names(b.cont, out);
      }
      return;
    case ContractKind::Rec:
      collect_names(t->body, out);
      return;
  }
}

void wf_rec(const ContractPtr& t, std::set<std::string>& bound, const std::string& path,
            std::vector<Violation>& out) {
  switch (t->kind) {
    case ContractKind::Success:
      return;
    case ContractKind::Var:
      if (!bound.count(t->var))
        out.push_back({Violation::Kind::UnboundVariable, t->var, path});
      return;
    case ContractKind::External:
    case ContractKind::Internal: {
      if (t->branches.empty())
        out.push_back({Violation::Kind::EmptyChoice, "", path});
      std::set<std::string> seen;
      for (const auto& b : t->branches) {
        if (!seen.insert(b.name).second)
          out.push_back({Violation::Kind::DuplicateBranchName, b.name, path});
        wf_rec(b.cont, bound, path + "/" + b.name, out);
      }
      return;
    }
    case ContractKind::Rec: {
      if (t->body->kind == ContractKind::Var)
        out.push_back({Violation::Kind::UnguardedRecursion, t->var, path});
      if (t->body->kind == ContractKind::Rec)
        out.push_back({Violation::Kind::ConsecutiveRecBinders, t->var, path});
      bool fresh = bound.insert(t->var).second;
      wf_rec(t->body, bound, path + "/rec(" + t->var + ")", out);
      if (fresh) bound.erase(t->var);
      return;
    }
  }
}

}  // namespace

ContractPtr success() {
  Contract node;
  node.kind = ContractKind::Success;
  return interner().intern(std::move(node));
}

ContractPtr external_choice(std::vector<ContractBranch> branches) {
  Contract node;
  node.kind = ContractKind::External;
  node.branches = std::move(branches);
  return interner().intern(std::move(node));
}

ContractPtr internal_choice(std::vector<ContractBranch> branches) {
  Contract node;
  node.kind = ContractKind::Internal;
  node.branches = std::move(branches);
  return interner().intern(std::move(node));
}

ContractPtr contract_var(const std::string& name) {
  Contract node;
  node.kind = ContractKind::Var;
  node.var = name;
  return interner().intern(std::move(node));
}

ContractPtr contract_rec(const std::string& var, ContractPtr body) {
  Contract node;
  node.kind = ContractKind::Rec;
  node.var = var;
  node.body = std::move(body);
  return interner().intern(std::move(node));
}

ContractPtr input_prefix(const std::string& name, ContractPtr cont) {
  return external_choice({{name, std::move(cont)}});
}

ContractPtr output_prefix(const std::string& name, ContractPtr cont) {
  return internal_choice({{name, std::move(cont)}});
}

const char* violation_kind_name(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::UnboundVariable: return "UnboundVariable";
    case Violation::Kind::DuplicateBranchName: return "DuplicateBranchName";
    case Violation::Kind::UnguardedRecursion: return "UnguardedRecursion";
    case Violation::Kind::ConsecutiveRecBinders: return "ConsecutiveRecBinders";
    case Violation::Kind::EmptyChoice: return "EmptyChoice";
    case Violation::Kind::MixedChoiceDirections: return "MixedChoiceDirections";
    case Violation::Kind::ChoiceHeadedByOutputAction: return "ChoiceHeadedByOAction";
    case Violation::Kind::ChoiceBranchNotPrefix: return "ChoiceBranchNotPrefix";
  }
  return "?";
}

std::vector<Violation> well_formed(const ContractPtr& term) {
  std::vector<Violation> out;
  std::set<std::string> bound;
  wf_rec(term, bound, "", out);
  return out;
}

namespace {

// Per-pointer memo caches; interned terms live for the process, so do these.
template <typename V>
class PtrCache {
 public:
  bool get(const Contract* key, V& out) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = map_.find(key);
    if (it == map_.end()) return false;
    out = it->second;
    return true;
  }
  void put(const Contract* key, V value) {
    std::lock_guard<std::mutex> lock(mu_);
    map_.emplace(key, std::move(value));
  }

 private:
  std::mutex mu_;
  std::unordered_map<const Contract*, V> map_;
};

}  // namespace

ContractPtr canon(const ContractPtr& term) {
  static PtrCache<ContractPtr> cache;
  ContractPtr out;
  if (cache.get(term.get(), out)) return out;
  std::map<std::string, std::string> env;
  out = canon_rec(term, 0, env);
  cache.put(term.get(), out);
  return out;
}

ContractPtr unfold(const ContractPtr& term) {
  static PtrCache<ContractPtr> cache;
  ContractPtr out;
  if (cache.get(term.get(), out)) return out;
  ContractPtr t = term;
  int guard = 0;
  while (t->kind == ContractKind::Rec) {
    if (++guard > 4096) throw std::logic_error("unfold: non-contractive term");
    t = canon(subst(t->body, t->var, t));
  }
  cache.put(term.get(), t);
  return t;
}

std::string to_string(const ContractLabel& l) {
  switch (l.kind) {
    case ContractLabel::Kind::Tau: return "tau";
    case ContractLabel::Kind::Input: return l.name;
    case ContractLabel::Kind::Output: return "!" + l.name;
  }
  return "?";
}

std::vector<std::pair<ContractLabel, ContractPtr>> transitions(const ContractPtr& term) {
  static PtrCache<std::vector<std::pair<ContractLabel, ContractPtr>>> cache;
  ContractPtr t = unfold(term);
  std::vector<std::pair<ContractLabel, ContractPtr>> out;
  if (cache.get(t.get(), out)) return out;
  switch (t->kind) {
    case ContractKind::Success:
      break;
    case ContractKind::External:
      for (const auto& b : t->branches)
        out.push_back({{ContractLabel::Kind::Input, b.name}, canon(b.cont)});
      break;
    case ContractKind::Internal:
      if (t->branches.size() == 1) {
        // A singleton internal choice is the output prefix: no tau self-loop.
        out.push_back({{ContractLabel::Kind::Output, t->branches[0].name},
                       canon(t->branches[0].cont)});
      } else {
        for (const auto& b : t->branches)
          out.push_back({{ContractLabel::Kind::Tau, ""}, canon(internal_choice({b}))});
      }
      break;
    case ContractKind::Var:
    case ContractKind::Rec:
      throw std::logic_error("transitions: open or non-contractive term");
  }
  cache.put(t.get(), out);
  return out;
}

std::vector<ContractPtr> reachable_subterms(const ContractPtr& term) {
  ContractPtr root = canon(term);
  std::vector<ContractPtr> order;
  std::unordered_set<const Contract*> seen;
  std::deque<ContractPtr> todo{root};
  seen.insert(root.get());
  while (!todo.empty()) {
    ContractPtr s = todo.front();
    todo.pop_front();
    order.push_back(s);
    for (const auto& [label, next] : transitions(s)) {
      (void)label;
      if (seen.insert(next.get()).second) todo.push_back(next);
    }
  }
  return order;
}

std::vector<std::string> contract_names(const ContractPtr& term) {
  std::set<std::string> s;
  collect_names(term, s);
  return {s.begin(), s.end()};
}

std::size_t contract_size(const ContractPtr& term) {
  switch (term->kind) {
    case ContractKind::Success:
    case ContractKind::Var:
      return 1;
    case ContractKind::External:
    case ContractKind::Internal: {
      std::size_t n = 1;
      for (const auto& b : term->branches) n += contract_size(b.cont);
      return n;
    }
    case ContractKind::Rec:
      return 1 + contract_size(term->body);
  }
  return 1;
}

bool contract_closed(const ContractPtr& term) { return free_vars(term).empty(); }

}  // namespace orchestral
