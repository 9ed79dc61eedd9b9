#include "orchestral/synthesis.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "orchestral/parser.hpp"
#include "orchestral/respectfulness.hpp"

namespace orchestral {

namespace detail {

struct FamNode {
  enum class Kind { Term, Prefixed, Fan, Union };
  Kind kind;
  OrchPtr term;  // Term: stop or a bound variable
  std::string recvar;
  std::vector<std::pair<OrchAction, FamPtr>> parts;  // Prefixed: one; Fan: branches
  std::vector<FamPtr> alternatives;                  // Union
};

namespace {

FamPtr fam_term(OrchPtr t) {
  auto n = std::make_shared<FamNode>();
  n->kind = FamNode::Kind::Term;
  n->term = std::move(t);
  return n;
}

FamPtr fam_prefixed(std::string recvar, OrchAction a, FamPtr child) {
  auto n = std::make_shared<FamNode>();
  n->kind = FamNode::Kind::Prefixed;
  n->recvar = std::move(recvar);
  n->parts.push_back({std::move(a), std::move(child)});
  return n;
}

FamPtr fam_fan(std::string recvar, std::vector<std::pair<OrchAction, FamPtr>> parts) {
  auto n = std::make_shared<FamNode>();
  n->kind = FamNode::Kind::Fan;
  n->recvar = std::move(recvar);
  n->parts = std::move(parts);
  return n;
}

FamPtr fam_union(std::vector<FamPtr> alts) {
  auto n = std::make_shared<FamNode>();
  n->kind = FamNode::Kind::Union;
  n->alternatives = std::move(alts);
  return n;
}

constexpr std::uint64_t kCountSat = std::uint64_t{1} << 63;

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return (a > kCountSat - b) ? kCountSat : a + b;
}

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > kCountSat / b) return kCountSat;
  return a * b;
}

std::uint64_t count_rec(const FamPtr& n, std::unordered_map<const FamNode*, std::uint64_t>& memo) {
  if (!n) return 0;
  auto it = memo.find(n.get());
  if (it != memo.end()) return it->second;
  std::uint64_t c = 0;
  switch (n->kind) {
    case FamNode::Kind::Term:
      c = 1;
      break;
    case FamNode::Kind::Prefixed:
      c = count_rec(n->parts[0].second, memo);
      break;
    case FamNode::Kind::Fan:
      c = 1;
      for (const auto& [a, child] : n->parts) c = sat_mul(c, count_rec(child, memo));
      break;
    case FamNode::Kind::Union:
      for (const auto& alt : n->alternatives) c = sat_add(c, count_rec(alt, memo));
      break;
  }
  memo[n.get()] = c;
  return c;
}

// rec x . body, dropping the binder when unused; result is canonical.
OrchPtr assemble_rec(const std::string& var, OrchPtr body) {
  return canon_orch(orch_rec(var, std::move(body)));
}

void enumerate_rec(const FamPtr& n, std::size_t limit, std::vector<OrchPtr>& out,
                   std::unordered_map<const FamNode*, std::vector<OrchPtr>>& memo);

const std::vector<OrchPtr>& memoized_members(
    const FamPtr& n, std::size_t limit,
    std::unordered_map<const FamNode*, std::vector<OrchPtr>>& memo) {
  auto it = memo.find(n.get());
  if (it != memo.end() && it->second.size() >= std::min<std::size_t>(limit, it->second.size()))
    return it->second;
  std::vector<OrchPtr> members;
  enumerate_rec(n, limit, members, memo);
  return memo[n.get()] = std::move(members);
}

void enumerate_rec(const FamPtr& n, std::size_t limit, std::vector<OrchPtr>& out,
                   std::unordered_map<const FamNode*, std::vector<OrchPtr>>& memo) {
  if (!n || limit == 0) return;
  switch (n->kind) {
    case FamNode::Kind::Term:
      out.push_back(n->term);
      return;
    case FamNode::Kind::Prefixed: {
      const auto& [act, child] = n->parts[0];
      for (const auto& m : memoized_members(child, limit, memo)) {
        if (out.size() >= limit) return;
        out.push_back(assemble_rec(n->recvar, orch_prefix(act, m)));
      }
      return;
    }
    case FamNode::Kind::Fan: {
      std::vector<const std::vector<OrchPtr>*> lists;
      lists.reserve(n->parts.size());
      for (const auto& [a, child] : n->parts) {
        const auto& l = memoized_members(child, limit, memo);
        if (l.empty()) return;  // empty branch family: no members at all
        lists.push_back(&l);
      }
      std::vector<std::size_t> idx(lists.size(), 0);
      while (out.size() < limit) {
        std::vector<OrchPtr> branches;
        branches.reserve(lists.size());
        for (std::size_t i = 0; i < lists.size(); ++i)
          branches.push_back(orch_prefix(n->parts[i].first, (*lists[i])[idx[i]]));
        OrchPtr body = branches.size() == 1 ? branches[0] : orch_choice(std::move(branches));
        out.push_back(assemble_rec(n->recvar, std::move(body)));
        // mixed-radix increment, last branch fastest
        std::size_t k = lists.size();
        while (k-- > 0) {
          if (++idx[k] < lists[k]->size()) break;
          idx[k] = 0;
          if (k == 0) return;
        }
      }
      return;
    }
    case FamNode::Kind::Union: {
      std::unordered_set<const Orch*> seen;
      for (const auto& m : out) seen.insert(m.get());
      for (const auto& alt : n->alternatives) {
        if (out.size() >= limit) return;
        for (const auto& m : memoized_members(alt, limit, memo)) {
          if (out.size() >= limit) return;
          if (seen.insert(m.get()).second) out.push_back(m);
        }
      }
      return;
    }
  }
}

}  // namespace
}  // namespace detail

OrchFamily::OrchFamily(detail::FamPtr root, SynthStats stats)
    : root_(std::move(root)), stats_(stats) {}

std::uint64_t OrchFamily::count() const {
  std::unordered_map<const detail::FamNode*, std::uint64_t> memo;
  return detail::count_rec(root_, memo);
}

std::vector<OrchPtr> OrchFamily::enumerate(std::size_t max) const {
  if (!root_ || max == 0) return {};
  constexpr std::size_t kSortCap = 200'000;
  std::uint64_t n = count();
  std::size_t limit = n <= kSortCap ? static_cast<std::size_t>(n) : max;
  std::vector<OrchPtr> all;
  std::unordered_map<const detail::FamNode*, std::vector<OrchPtr>> memo;
  detail::enumerate_rec(root_, limit, all, memo);
  // dedup (unions may in principle overlap after binder collapse)
  std::unordered_set<const Orch*> seen;
  std::vector<OrchPtr> distinct;
  distinct.reserve(all.size());
  for (auto& m : all)
    if (seen.insert(m.get()).second) distinct.push_back(std::move(m));
  if (n <= kSortCap) {
    std::sort(distinct.begin(), distinct.end(), [](const OrchPtr& a, const OrchPtr& b) {
      std::size_t sa = orch_size(a), sb = orch_size(b);
      if (sa != sb) return sa < sb;
      return render(a) < render(b);
    });
  }
  if (distinct.size() > max) distinct.resize(max);
  return distinct;
}

namespace {

using PairKey = std::pair<const Contract*, const Contract*>;

struct PairKeyHash {
  std::size_t operator()(const PairKey& k) const {
    return std::hash<const void*>{}(k.first) * 31 ^ std::hash<const void*>{}(k.second);
  }
};

struct SynthCtx {
  std::unordered_map<PairKey, std::string, PairKeyHash> env;  // current path
  std::unordered_set<std::string> env_vars;
  std::size_t fresh = 0;
  SynthStats stats;
  std::unordered_set<PairKey, PairKeyHash> pairs_seen;
};

std::vector<std::vector<std::string>> subsets_of(const std::vector<std::string>& names,
                                                 bool descending) {
  if (names.size() > 16) throw ResourceLimitError("synth: too many common branch names");
  std::vector<std::vector<std::string>> out;
  std::size_t total = std::size_t{1} << names.size();
  for (std::size_t mask = 0; mask < total; ++mask) {
    std::vector<std::string> s;
    for (std::size_t i = 0; i < names.size(); ++i)
      if (mask & (std::size_t{1} << i)) s.push_back(names[i]);
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [descending](const auto& a, const auto& b) {
    return descending ? a.size() > b.size() : a.size() < b.size();
  });
  return out;
}

detail::FamPtr synth_rec(SynthCtx& ctx, const ContractPtr& client, const ContractPtr& server) {
  PairKey key{client.get(), server.get()};
  if (auto it = ctx.env.find(key); it != ctx.env.end())
    return detail::fam_term(orch_var(it->second));

  ContractPtr uc = unfold(client);
  if (uc->kind == ContractKind::Success) return detail::fam_term(orch_stop());
  ContractPtr us = unfold(server);

  bool c_ext = uc->kind == ContractKind::External;
  bool c_int = uc->kind == ContractKind::Internal;
  bool s_ext = us->kind == ContractKind::External;
  bool s_int = us->kind == ContractKind::Internal;
  if (!((c_ext || c_int) && (s_ext || s_int))) return detail::fam_union({});

  std::string x = "Z" + std::to_string(ctx.fresh++);
  ctx.env.emplace(key, x);
  ctx.env_vars.insert(x);
  ctx.pairs_seen.insert(key);
  ctx.stats.peak_env = std::max(ctx.stats.peak_env, ctx.env.size());
  if (ctx.stats.pair_bound && ctx.pairs_seen.size() > ctx.stats.pair_bound)
    throw std::logic_error("synth: memo keys exceed |subterms(client)| * |subterms(server)|");

  std::vector<detail::FamPtr> alts;

  if (c_ext && s_ext) {
    for (const auto& b : uc->branches)
      alts.push_back(detail::fam_prefixed(x, {OrchActionKind::OutC, b.name},
                                          synth_rec(ctx, b.cont, server)));
    for (const auto& b : us->branches)
      alts.push_back(detail::fam_prefixed(x, {OrchActionKind::OutS, b.name},
                                          synth_rec(ctx, client, b.cont)));
  } else if (c_int && s_int) {
    std::vector<std::pair<OrchAction, detail::FamPtr>> left, right;
    for (const auto& b : uc->branches)
      left.push_back({{OrchActionKind::InC, b.name}, synth_rec(ctx, b.cont, server)});
    for (const auto& b : us->branches)
      right.push_back({{OrchActionKind::InS, b.name}, synth_rec(ctx, client, b.cont)});
    alts.push_back(detail::fam_fan(x, std::move(left)));
    alts.push_back(detail::fam_fan(x, std::move(right)));
  } else if (c_int && s_ext) {
    std::map<std::string, ContractPtr> cbr, sbr;
    for (const auto& b : uc->branches) cbr[b.name] = b.cont;
    for (const auto& b : us->branches) sbr[b.name] = b.cont;
    std::vector<std::string> common;
    for (const auto& [n, c] : cbr)
      if (sbr.count(n)) common.push_back(n);
    // Child families are shared across every H/K partition.
    std::map<std::string, detail::FamPtr> buf_child, sync_child;
    for (const auto& [n, cont] : cbr) buf_child[n] = synth_rec(ctx, cont, server);
    for (const auto& n : common) sync_child[n] = synth_rec(ctx, cbr.at(n), sbr.at(n));
    // I = H u K with K inside the common names; K descending by size, so
    // synchronous-rich candidates surface first, leanest H next.
    for (const auto& K : subsets_of(common, true)) {
      std::set<std::string> kset(K.begin(), K.end());
      std::vector<std::string> forced;  // I \ K must be in H
      for (const auto& [n, c] : cbr)
        if (!kset.count(n)) forced.push_back(n);
      for (const auto& overlap : subsets_of(K, false)) {
        std::set<std::string> hset(forced.begin(), forced.end());
        for (const auto& n : overlap) hset.insert(n);
        std::vector<std::pair<OrchAction, detail::FamPtr>> parts;
        for (const auto& h : hset) parts.push_back({{OrchActionKind::InC, h}, buf_child.at(h)});
        for (const auto& k : K) parts.push_back({{OrchActionKind::SyncL, k}, sync_child.at(k)});
        alts.push_back(detail::fam_fan(x, std::move(parts)));
      }
    }
    for (const auto& b : us->branches)
      alts.push_back(detail::fam_prefixed(x, {OrchActionKind::OutS, b.name},
                                          synth_rec(ctx, client, b.cont)));
  } else {  // c_ext && s_int
    std::map<std::string, ContractPtr> cbr, sbr;
    for (const auto& b : uc->branches) cbr[b.name] = b.cont;
    for (const auto& b : us->branches) sbr[b.name] = b.cont;
    std::vector<std::string> common;
    for (const auto& [n, c] : sbr)
      if (cbr.count(n)) common.push_back(n);
    std::map<std::string, detail::FamPtr> buf_child, sync_child;
    for (const auto& [n, cont] : sbr) buf_child[n] = synth_rec(ctx, client, cont);
    for (const auto& n : common) sync_child[n] = synth_rec(ctx, cbr.at(n), sbr.at(n));
    // J = H u K with K inside the common names.
    for (const auto& K : subsets_of(common, true)) {
      std::set<std::string> kset(K.begin(), K.end());
      std::vector<std::string> forced;
      for (const auto& [n, c] : sbr)
        if (!kset.count(n)) forced.push_back(n);
      for (const auto& overlap : subsets_of(K, false)) {
        std::set<std::string> hset(forced.begin(), forced.end());
        for (const auto& n : overlap) hset.insert(n);
        std::vector<std::pair<OrchAction, detail::FamPtr>> parts;
        for (const auto& h : hset) parts.push_back({{OrchActionKind::InS, h}, buf_child.at(h)});
        for (const auto& k : K) parts.push_back({{OrchActionKind::SyncR, k}, sync_child.at(k)});
        alts.push_back(detail::fam_fan(x, std::move(parts)));
      }
    }
    for (const auto& b : uc->branches)
      alts.push_back(detail::fam_prefixed(x, {OrchActionKind::OutC, b.name},
                                          synth_rec(ctx, b.cont, server)));
  }

  ctx.env.erase(key);
  ctx.env_vars.erase(x);
  return detail::fam_union(std::move(alts));
}

}  // namespace

const EnvBinding* Env::lookup_var(const std::string& var) const {
  for (auto it = bindings.rbegin(); it != bindings.rend(); ++it)
    if (it->var == var) return &*it;
  return nullptr;
}

std::optional<std::string> Env::var_for(const ContractPtr& client,
                                        const ContractPtr& server) const {
  for (auto it = bindings.rbegin(); it != bindings.rend(); ++it)
    if (it->client.get() == client.get() && it->server.get() == server.get()) return it->var;
  return std::nullopt;
}

bool Env::injective() const {
  std::set<std::string> vars;
  std::set<std::pair<const void*, const void*>> pairs;
  for (const auto& b : bindings) {
    if (!vars.insert(b.var).second) return false;
    if (!pairs.insert({b.client.get(), b.server.get()}).second) return false;
  }
  return true;
}

OrchFamily synth(const Env& env, const ContractPtr& client, const ContractPtr& server) {
  if (!env.injective()) throw IllFormedJudgment("assumption environment is not injective");
  ContractPtr c = canon(client), s = canon(server);
  SynthCtx ctx;
  ctx.stats.pair_bound = reachable_subterms(c).size() * reachable_subterms(s).size();
  for (const auto& b : env.bindings) {
    PairKey key{canon(b.client).get(), canon(b.server).get()};
    ctx.env.emplace(key, b.var);
    ctx.env_vars.insert(b.var);
    ctx.pairs_seen.insert(key);
  }
  detail::FamPtr root = synth_rec(ctx, c, s);
  ctx.stats.distinct_pairs = ctx.pairs_seen.size();
  return OrchFamily(std::move(root), ctx.stats);
}

namespace {

struct VEnv {
  std::vector<EnvBinding> list;
};

bool verify_rec(VEnv& env, const OrchPtr& f, const ContractPtr& client,
                const ContractPtr& server, std::vector<std::string>& rules, std::string& reason,
                std::size_t& fresh);

// Matches a rule body (the part under the rec binder) against the shapes of
// Fig.-2 conclusions.
bool verify_body(VEnv& env, const OrchPtr& g, const ContractPtr& client,
                 const ContractPtr& server, std::vector<std::string>& rules, std::string& reason,
                 std::size_t& fresh) {
  ContractPtr uc = unfold(client);
  ContractPtr us = unfold(server);

  if (g->kind == OrchKind::Prefix && g->action.kind == OrchActionKind::OutC) {
    if (uc->kind != ContractKind::External) {
      reason = "(SumL) needs an external-choice client";
      return false;
    }
    for (const auto& b : uc->branches) {
      if (b.name != g->action.name) continue;
      rules.push_back("(SumL)");
      return verify_rec(env, g->cont, b.cont, server, rules, reason, fresh);
    }
    reason = "(SumL) delivery " + to_string(g->action) + " matches no client branch";
    return false;
  }
  if (g->kind == OrchKind::Prefix && g->action.kind == OrchActionKind::OutS) {
    if (us->kind != ContractKind::External) {
      reason = "(SumR) needs an external-choice server";
      return false;
    }
    for (const auto& b : us->branches) {
      if (b.name != g->action.name) continue;
      rules.push_back("(SumR)");
      return verify_rec(env, g->cont, client, b.cont, rules, reason, fresh);
    }
    reason = "(SumR) delivery " + to_string(g->action) + " matches no server branch";
    return false;
  }

  // Fan shapes: a single prefix or a choice of prefixes with distinct heads.
  std::vector<std::pair<OrchAction, OrchPtr>> fan;
  if (g->kind == OrchKind::Prefix) {
    fan.push_back({g->action, g->cont});
  } else if (g->kind == OrchKind::Choice) {
    for (const auto& b : g->branches) {
      if (b->kind != OrchKind::Prefix) {
        reason = "choice branch is not an action prefix";
        return false;
      }
      fan.push_back({b->action, b->cont});
    }
  } else {
    reason = "orchestrator shape matches no rule";
    return false;
  }
  std::set<std::pair<OrchActionKind, std::string>> heads;
  for (const auto& [a, cont] : fan) {
    if (!heads.insert({a.kind, a.name}).second) {
      reason = "duplicate fan head " + to_string(a);
      return false;
    }
  }

  auto branch_map = [](const ContractPtr& t) {
    std::map<std::string, ContractPtr> m;
    for (const auto& b : t->branches) m[b.name] = b.cont;
    return m;
  };

  if (uc->kind == ContractKind::Internal && us->kind == ContractKind::Internal) {
    bool all_ins = std::all_of(fan.begin(), fan.end(), [](const auto& p) {
      return p.first.kind == OrchActionKind::InS;
    });
    bool all_inc = std::all_of(fan.begin(), fan.end(), [](const auto& p) {
      return p.first.kind == OrchActionKind::InC;
    });
    if (all_ins) {
      auto sm = branch_map(us);
      if (fan.size() != sm.size()) {
        reason = "(IntInt-A) fan must cover every server branch";
        return false;
      }
      rules.push_back("(IntInt-A)");
      for (const auto& [a, cont] : fan) {
        auto it = sm.find(a.name);
        if (it == sm.end()) {
          reason = "(IntInt-A) fan head " + to_string(a) + " matches no server branch";
          return false;
        }
        if (!verify_rec(env, cont, client, it->second, rules, reason, fresh)) return false;
      }
      return true;
    }
    if (all_inc) {
      auto cm = branch_map(uc);
      if (fan.size() != cm.size()) {
        reason = "(IntInt-B) fan must cover every client branch";
        return false;
      }
      rules.push_back("(IntInt-B)");
      for (const auto& [a, cont] : fan) {
        auto it = cm.find(a.name);
        if (it == cm.end()) {
          reason = "(IntInt-B) fan head " + to_string(a) + " matches no client branch";
          return false;
        }
        if (!verify_rec(env, cont, it->second, server, rules, reason, fresh)) return false;
      }
      return true;
    }
    reason = "both-internal pair needs a pure input fan";
    return false;
  }

  if (uc->kind == ContractKind::Internal && us->kind == ContractKind::External) {
    auto cm = branch_map(uc);
    auto sm = branch_map(us);
    std::set<std::string> covered;
    rules.push_back("(IntExt)");
    for (const auto& [a, cont] : fan) {
      if (a.kind == OrchActionKind::InC) {
        auto it = cm.find(a.name);
        if (it == cm.end()) {
          reason = "(IntExt) buffering head " + to_string(a) + " matches no client branch";
          return false;
        }
        covered.insert(a.name);
        if (!verify_rec(env, cont, it->second, server, rules, reason, fresh)) return false;
      } else if (a.kind == OrchActionKind::SyncL) {
        auto ci = cm.find(a.name);
        auto si = sm.find(a.name);
        if (ci == cm.end() || si == sm.end()) {
          reason = "(IntExt) synchronous head " + to_string(a) + " needs the name on both sides";
          return false;
        }
        covered.insert(a.name);
        if (!verify_rec(env, cont, ci->second, si->second, rules, reason, fresh)) return false;
      } else {
        reason = "(IntExt) fan heads must be iota_L actions";
        return false;
      }
    }
    if (covered.size() != cm.size()) {
      reason = "(IntExt) fan must cover every client branch (I = H u K)";
      return false;
    }
    return true;
  }

  if (uc->kind == ContractKind::External && us->kind == ContractKind::Internal) {
    auto cm = branch_map(uc);
    auto sm = branch_map(us);
    std::set<std::string> covered;
    rules.push_back("(ExtInt)");
    for (const auto& [a, cont] : fan) {
      if (a.kind == OrchActionKind::InS) {
        auto it = sm.find(a.name);
        if (it == sm.end()) {
          reason = "(ExtInt) buffering head " + to_string(a) + " matches no server branch";
          return false;
        }
        covered.insert(a.name);
        if (!verify_rec(env, cont, client, it->second, rules, reason, fresh)) return false;
      } else if (a.kind == OrchActionKind::SyncR) {
        auto ci = cm.find(a.name);
        auto si = sm.find(a.name);
        if (ci == cm.end() || si == sm.end()) {
          reason = "(ExtInt) synchronous head " + to_string(a) + " needs the name on both sides";
          return false;
        }
        covered.insert(a.name);
        if (!verify_rec(env, cont, ci->second, si->second, rules, reason, fresh)) return false;
      } else {
        reason = "(ExtInt) fan heads must be iota_R actions";
        return false;
      }
    }
    if (covered.size() != sm.size()) {
      reason = "(ExtInt) fan must cover every server branch (J = H u K)";
      return false;
    }
    return true;
  }

  reason = "contract pair shape matches no rule";
  return false;
}

bool verify_rec(VEnv& env, const OrchPtr& f, const ContractPtr& client,
                const ContractPtr& server, std::vector<std::string>& rules, std::string& reason,
                std::size_t& fresh) {
  switch (f->kind) {
    case OrchKind::Stop:
      if (unfold(client)->kind == ContractKind::Success) {
        rules.push_back("(Ax)");
        return true;
      }
      reason = "(Ax) needs the client at 1";
      return false;
    case OrchKind::Var: {
      for (auto it = env.list.rbegin(); it != env.list.rend(); ++it) {
        if (it->var != f->var) continue;
        if (it->client.get() == client.get() && it->server.get() == server.get()) {
          rules.push_back("(Hyp)");
          return true;
        }
        reason = "(Hyp) variable " + f->var + " is bound to a different pair";
        return false;
      }
      reason = "variable " + f->var + " is not bound";
      return false;
    }
    case OrchKind::Rec: {
      env.list.push_back({f->var, client, server});
      bool ok = verify_body(env, f->body, client, server, rules, reason, fresh);
      env.list.pop_back();
      return ok;
    }
    case OrchKind::Prefix:
    case OrchKind::Choice: {
      // Equi-recursively f = rec x.f for unused x; all non-axiom rules
      // conclude with a rec-wrapped orchestrator.
      std::string x = "W" + std::to_string(fresh++);
      env.list.push_back({x, client, server});
      bool ok = verify_body(env, f, client, server, rules, reason, fresh);
      env.list.pop_back();
      return ok;
    }
  }
  reason = "unsupported orchestrator form";
  return false;
}

void collect_orch_free(const OrchPtr& f, std::set<std::string>& bound,
                       std::set<std::string>& out) {
  switch (f->kind) {
    case OrchKind::Stop:
      return;
    case OrchKind::Var:
      if (!bound.count(f->var)) out.insert(f->var);
      return;
    case OrchKind::Prefix:
      collect_orch_free(f->cont, bound, out);
      return;
    case OrchKind::Choice:
      for (const auto& b : f->branches) collect_orch_free(b, bound, out);
      return;
    case OrchKind::Rec: {
      bool fresh = bound.insert(f->var).second;
      collect_orch_free(f->body, bound, out);
      if (fresh) bound.erase(f->var);
      return;
    }
  }
}

}  // namespace

VerifyResult verify_judgment(const Judgment& j) {
  if (!j.env.injective())
    throw IllFormedJudgment("assumption environment is not injective (Def 8)");
  if (!contract_closed(j.client) || !contract_closed(j.server))
    throw IllFormedJudgment("judgment contracts must be closed");
  std::set<std::string> bound, free;
  collect_orch_free(j.orch, bound, free);
  for (const auto& v : free)
    if (!j.env.lookup_var(v))
      throw IllFormedJudgment("orchestrator variable " + v + " is not bound by the environment");

  VEnv env;
  for (const auto& b : j.env.bindings)
    env.list.push_back({b.var, canon(b.client), canon(b.server)});

  VerifyResult r;
  std::size_t fresh = 0;
  r.derivable = verify_rec(env, canon_orch(j.orch), canon(j.client), canon(j.server), r.rules,
                           r.reason, fresh);
  if (r.derivable) r.reason.clear();
  return r;
}

WitnessSearch find_witness(const ContractPtr& client, const ContractPtr& server,
                           const Limits& limits) {
  WitnessSearch out;
  OrchFamily fam = synth({}, client, server);
  out.family_count = fam.count();
  out.stats = fam.stats();
  // Rounds of growing enumeration keep the search cheap when a small member
  // suffices; each round checks members smallest-first.
  // Generation order: the K-descending partition layout puts synchronous,
  // buffer-light candidates first, which is what makes this search short.
  std::unordered_set<const Orch*> checked;
  std::size_t last_round_size = 0;
  for (std::size_t cap : {std::size_t{64}, std::size_t{512}, std::size_t{4096},
                          limits.enum_cap}) {
    cap = std::min(cap, limits.enum_cap);
    std::vector<OrchPtr> members = fam.enumerate_generation_order(cap);
    last_round_size = members.size();
    for (const auto& f : members) {
      if (!checked.insert(f.get()).second) continue;
      ++out.tried;
      // tree checks are far cheaper than the strictness subset construction
      if (!is_respectful_fast(f)) continue;
      if (!is_strict(client, f, server, limits).strict) continue;
      out.witness = f;
      return out;
    }
    if (cap >= limits.enum_cap) break;
    if (members.size() < cap) break;  // family exhausted
  }
  out.capped = out.family_count > last_round_size;
  return out;
}

}  // namespace orchestral
