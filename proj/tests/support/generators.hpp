#pragma once

// Shared test helpers: seeded random term generators, exhaustive small-term
// enumeration, and the classify-based respectfulness oracle.

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "orchestral/buffers.hpp"
#include "orchestral/contracts.hpp"
#include "orchestral/orchestrators.hpp"
#include "orchestral/parser.hpp"

namespace testsupport {

using namespace orchestral;

inline ContractPtr sc(const std::string& src) {
  ContractParse p = parse_contract(src);
  if (p.error) throw std::runtime_error("test contract: " + p.error->message + " in " + src);
  if (!p.violations.empty()) throw std::runtime_error("test contract ill-formed: " + src);
  return p.term;
}

inline OrchPtr orc(const std::string& src) {
  OrchParse p = parse_orchestrator(src);
  if (p.error) throw std::runtime_error("test orchestrator: " + p.error->message + " in " + src);
  return p.term;  // violations tolerated: some tests use non-session shapes
}

inline std::vector<OrchAction> acts(std::initializer_list<const char*> items) {
  std::vector<OrchAction> out;
  for (const char* s : items) {
    OrchParse p = parse_orchestrator(std::string(s) + ".1");
    if (p.error || p.term->kind != OrchKind::Prefix)
      throw std::runtime_error(std::string("bad action literal ") + s);
    out.push_back(p.term->action);
  }
  return out;
}

// ---- random generators ----

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : rng_(seed) {}
  std::size_t below(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }
  bool chance(double p) { return std::uniform_real_distribution<double>(0, 1)(rng_) < p; }
  std::mt19937_64& raw() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline ContractPtr random_contract_rec(Rng& rng, std::size_t budget,
                                       const std::vector<std::string>& names,
                                       std::vector<std::string>& scope) {
  if (budget <= 1) {
    if (!scope.empty() && rng.chance(0.4)) return contract_var(scope[rng.below(scope.size())]);
    return success();
  }
  // rec wrapper
  if (budget >= 3 && rng.chance(0.25)) {
    std::string var = "R" + std::to_string(scope.size());
    scope.push_back(var);
    ContractPtr body;
    do {
      body = random_contract_rec(rng, budget - 1, names, scope);
    } while (body->kind == ContractKind::Var || body->kind == ContractKind::Rec);
    scope.pop_back();
    return contract_rec(var, body);
  }
  bool internal = rng.chance(0.5);
  std::size_t max_branches = std::min<std::size_t>({names.size(), (budget - 1) / 1, 3});
  std::size_t k = 1 + rng.below(std::max<std::size_t>(max_branches, 1));
  std::vector<std::string> picked(names);
  std::shuffle(picked.begin(), picked.end(), rng.raw());
  picked.resize(std::min(k, picked.size()));
  std::vector<ContractBranch> branches;
  std::size_t remaining = budget - 1;
  for (std::size_t i = 0; i < picked.size(); ++i) {
    std::size_t share = remaining / (picked.size() - i);
    std::size_t sub = share == 0 ? 1 : 1 + rng.below(share);
    remaining -= std::min(remaining, sub);
    branches.push_back({picked[i], random_contract_rec(rng, sub, names, scope)});
  }
  return internal ? internal_choice(std::move(branches)) : external_choice(std::move(branches));
}

// A random closed well-formed session contract with at most `budget` nodes.
inline ContractPtr random_contract(Rng& rng, std::size_t budget,
                                   const std::vector<std::string>& names) {
  std::vector<std::string> scope;
  ContractPtr t = canon(random_contract_rec(rng, budget, names, scope));
  return t;
}

inline OrchAction random_action(Rng& rng, const std::vector<std::string>& names) {
  static const OrchActionKind kinds[] = {OrchActionKind::SyncL, OrchActionKind::SyncR,
                                         OrchActionKind::InC,   OrchActionKind::InS,
                                         OrchActionKind::OutC,  OrchActionKind::OutS};
  return {kinds[rng.below(6)], names[rng.below(names.size())]};
}

inline OrchAction random_action_of(Rng& rng, const std::vector<std::string>& names,
                                   ActionCategory cat) {
  OrchActionKind kind;
  if (cat == ActionCategory::IotaL)
    kind = rng.chance(0.5) ? OrchActionKind::SyncL : OrchActionKind::InC;
  else
    kind = rng.chance(0.5) ? OrchActionKind::SyncR : OrchActionKind::InS;
  return {kind, names[rng.below(names.size())]};
}

inline OrchPtr random_orch_rec(Rng& rng, std::size_t budget,
                               const std::vector<std::string>& names,
                               std::vector<std::string>& scope) {
  if (budget <= 1) {
    if (!scope.empty() && rng.chance(0.45)) return orch_var(scope[rng.below(scope.size())]);
    return orch_stop();
  }
  if (budget >= 3 && rng.chance(0.25)) {
    std::string var = "R" + std::to_string(scope.size());
    scope.push_back(var);
    OrchPtr body;
    do {
      body = random_orch_rec(rng, budget - 1, names, scope);
    } while (body->kind == OrchKind::Var);
    scope.pop_back();
    return orch_rec(var, body);
  }
  if (budget >= 5 && rng.chance(0.3)) {
    // direction-homogeneous choice of prefixes
    ActionCategory cat = rng.chance(0.5) ? ActionCategory::IotaL : ActionCategory::IotaR;
    std::size_t k = 2 + rng.below(2);
    std::vector<OrchPtr> branches;
    std::size_t remaining = budget - 1;
    for (std::size_t i = 0; i < k && remaining >= 2; ++i) {
      std::size_t share = remaining / (k - i);
      std::size_t sub = std::max<std::size_t>(2, share == 0 ? 2 : 1 + rng.below(share + 1));
      sub = std::min(sub, remaining);
      remaining -= sub;
      branches.push_back(
          orch_prefix(random_action_of(rng, names, cat), random_orch_rec(rng, sub - 1, names, scope)));
    }
    if (branches.size() >= 2) return orch_choice(std::move(branches));
    if (!branches.empty()) return branches[0];
  }
  return orch_prefix(random_action(rng, names), random_orch_rec(rng, budget - 1, names, scope));
}

// A random closed well-formed session orchestrator with at most `budget` nodes.
inline OrchPtr random_orch(Rng& rng, std::size_t budget, const std::vector<std::string>& names) {
  std::vector<std::string> scope;
  return canon_orch(random_orch_rec(rng, budget, names, scope));
}

// ---- exhaustive enumeration of small orchestrators ----

// All well-formed orchestrators with at most `max_nodes` syntax nodes over the
// given alphabet, deduplicated by canonical form.
class OrchEnumerator {
 public:
  OrchEnumerator(std::size_t max_nodes, std::vector<std::string> names)
      : max_nodes_(max_nodes), names_(std::move(names)) {
    actions_.reserve(names_.size() * 6);
    for (const auto& n : names_)
      for (OrchActionKind k : {OrchActionKind::SyncL, OrchActionKind::SyncR, OrchActionKind::InC,
                               OrchActionKind::InS, OrchActionKind::OutC, OrchActionKind::OutS})
        actions_.push_back({k, n});
  }

  std::vector<OrchPtr> all() {
    std::set<const Orch*> seen;
    std::vector<OrchPtr> out;
    for (std::size_t n = 1; n <= max_nodes_; ++n) {
      for (const auto& t : terms(n, 0)) {
        OrchPtr c = canon_orch(t);
        if (!orch_closed(c)) continue;
        if (!well_formed_orch(c).empty()) continue;
        if (seen.insert(c.get()).second) out.push_back(c);
      }
    }
    return out;
  }

 private:
  // Terms with exactly n nodes whose free variables are drawn from depth
  // many enclosing binders.
  const std::vector<OrchPtr>& terms(std::size_t n, std::size_t depth) {
    auto key = std::make_pair(n, depth);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    std::vector<OrchPtr> out;
    if (n == 1) {
      out.push_back(orch_stop());
      for (std::size_t d = 0; d < depth; ++d) out.push_back(orch_var("V" + std::to_string(d)));
    } else {
      for (const auto& a : actions_)
        for (const auto& cont : terms(n - 1, depth)) out.push_back(orch_prefix(a, cont));
      for (const auto& body : terms(n - 1, depth + 1)) {
        if (body->kind == OrchKind::Var) continue;  // contractivity
        out.push_back(orch_rec("V" + std::to_string(depth), body));
      }
      // choices: homogeneous fans of two prefix branches (wider fans arise
      // canonically from these sizes only at larger n; cover k = 2 and 3)
      for (std::size_t k = 2; k <= 3; ++k) append_choices(n, depth, k, out);
    }
    return memo_[key] = std::move(out);
  }

  void append_choices(std::size_t n, std::size_t depth, std::size_t k,
                      std::vector<OrchPtr>& out) {
    if (n < 1 + 2 * k) return;
    std::vector<std::vector<OrchPtr>> parts;
    std::vector<OrchPtr> acc;
    split_branches(n - 1, k, depth, acc, out);
  }

  void split_branches(std::size_t remaining, std::size_t k, std::size_t depth,
                      std::vector<OrchPtr>& acc, std::vector<OrchPtr>& out) {
    if (k == 0) {
      if (remaining != 0) return;
      ActionCategory cat = category(acc[0]->action.kind);
      for (std::size_t i = 1; i < acc.size(); ++i)
        if (category(acc[i]->action.kind) != cat) return;
      out.push_back(orch_choice(acc));
      return;
    }
    for (std::size_t take = 2; take + 2 * (k - 1) <= remaining; ++take) {
      for (const auto& b : terms(take, depth)) {
        if (b->kind != OrchKind::Prefix) continue;
        if (category(b->action.kind) == ActionCategory::Output) continue;
        acc.push_back(b);
        split_branches(remaining - take, k - 1, depth, acc, out);
        acc.pop_back();
      }
    }
  }

  std::size_t max_nodes_;
  std::vector<std::string> names_;
  std::vector<OrchAction> actions_;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<OrchPtr>> memo_;
};

// ---- oracles ----

// Independent respectfulness oracle: classify every finite representative of
// MaxTraces(f).
inline bool oracle_respectful(const OrchPtr& f) {
  for (const auto& s : maximal_lassos(f))
    if (!classify(s).respectful) return false;
  return true;
}

}  // namespace testsupport
