#include "orchestral/buffers.hpp"

#include <algorithm>
#include <set>

namespace orchestral {

long Buffer::cs(const std::string& name) const {
  auto it = counts.find(name);
  return it == counts.end() ? 0 : it->second.first;
}

long Buffer::sc(const std::string& name) const {
  auto it = counts.find(name);
  return it == counts.end() ? 0 : it->second.second;
}

void Buffer::add_cs(const std::string& name, long d) {
  auto& e = counts[name];
  e.first += d;
  if (e.first == 0 && e.second == 0) counts.erase(name);
}

void Buffer::add_sc(const std::string& name, long d) {
  auto& e = counts[name];
  e.second += d;
  if (e.first == 0 && e.second == 0) counts.erase(name);
}

Buffer apply_action(Buffer b, const OrchAction& m) {
  switch (m.kind) {
    case OrchActionKind::SyncL:
    case OrchActionKind::SyncR:
      break;  // synchronous actions leave the buffer untouched
    case OrchActionKind::InC:
      b.add_cs(m.name, +1);
      break;
    case OrchActionKind::OutS:
      b.add_cs(m.name, -1);
      break;
    case OrchActionKind::InS:
      b.add_sc(m.name, +1);
      break;
    case OrchActionKind::OutC:
      b.add_sc(m.name, -1);
      break;
  }
  return b;
}

RunResult run_sequence(Buffer b, const std::vector<OrchAction>& seq) {
  RunResult r;
  for (const auto& [name, cnt] : b.counts) {
    r.minima[name] = {std::min(0L, cnt.first), std::min(0L, cnt.second)};
  }
  auto note = [&r](const std::string& name, long cs, long sc) {
    auto it = r.minima.find(name);
    if (it == r.minima.end()) {
      r.minima[name] = {std::min(0L, cs), std::min(0L, sc)};
    } else {
      it->second.first = std::min(it->second.first, cs);
      it->second.second = std::min(it->second.second, sc);
    }
  };
  for (const auto& m : seq) {
    b = apply_action(std::move(b), m);
    if (m.kind != OrchActionKind::SyncL && m.kind != OrchActionKind::SyncR)
      note(m.name, b.cs(m.name), b.sc(m.name));
  }
  r.final = std::move(b);
  return r;
}

namespace {

bool in_left_flow(const OrchAction& m, const std::string& name) {
  return (m.kind == OrchActionKind::InC || m.kind == OrchActionKind::OutS) && m.name == name;
}

std::vector<OrchAction> filter_left(const std::vector<OrchAction>& seq, const std::string& name) {
  std::vector<OrchAction> out;
  for (const auto& m : seq)
    if (in_left_flow(m, name)) out.push_back(m);
  return out;
}

}  // namespace

ActionSeq left_restrict(const ActionSeq& seq, const std::string& name) {
  ActionSeq out;
  out.prefix = filter_left(seq.prefix, name);
  out.cycle = filter_left(seq.cycle, name);
  return out;
}

SequenceVerdict classify(const ActionSeq& seq) {
  SequenceVerdict v;
  std::set<std::string> names;
  for (const auto& m : seq.prefix) names.insert(m.name);
  for (const auto& m : seq.cycle) names.insert(m.name);

  // Soundness: prefix minima over one unrolling, and for lassos every
  // per-name, per-side cycle net must be >= 0.
  {
    Buffer b;
    std::size_t pos = 0;
    std::set<std::pair<std::string, int>> reported;
    auto walk = [&](const std::vector<OrchAction>& part) {
      for (const auto& m : part) {
        b = apply_action(std::move(b), m);
        if (b.cs(m.name) < 0 && reported.insert({m.name, 0}).second) {
          v.sound = false;
          v.issues.push_back({VerdictIssue::What::UnsoundDip, m.name, b.cs(m.name), pos,
                              "cs_" + m.name + " dips below zero"});
        }
        if (b.sc(m.name) < 0 && reported.insert({m.name, 1}).second) {
          v.sound = false;
          v.issues.push_back({VerdictIssue::What::UnsoundDip, m.name, b.sc(m.name), pos,
                              "sc_" + m.name + " dips below zero"});
        }
        ++pos;
      }
    };
    walk(seq.prefix);
    walk(seq.cycle);
  }
  if (seq.lasso()) {
    Buffer net = run_sequence({}, seq.cycle).final;
    for (const auto& [name, cnt] : net.counts) {
      if (cnt.first < 0) {
        v.sound = false;
        v.issues.push_back({VerdictIssue::What::UnsoundCycleNet, name, cnt.first, 0,
                            "cycle net cs_" + name + " < 0"});
      }
      if (cnt.second < 0) {
        v.sound = false;
        v.issues.push_back({VerdictIssue::What::UnsoundCycleNet, name, cnt.second, 0,
                            "cycle net sc_" + name + " < 0"});
      }
    }
  }

  // Client-respectfulness per name (Def 15(c)).
  for (const auto& name : names) {
    bool cyc_inc = false, cyc_outs = false;
    for (const auto& m : seq.cycle) {
      if (m.name != name) continue;
      cyc_inc |= m.kind == OrchActionKind::InC;
      cyc_outs |= m.kind == OrchActionKind::OutS;
    }
    if (!cyc_inc && !cyc_outs) {
      // Finite left-restriction: the frozen cs value must be zero.
      long final_cs = run_sequence({}, seq.prefix).final.cs(name);
      if (final_cs != 0) {
        v.client_respectful = false;
        v.issues.push_back({VerdictIssue::What::StrandedFinite, name, final_cs, 0,
                            "left-restriction finite, cs_" + name + " = " +
                                std::to_string(final_cs)});
      }
    } else if (cyc_inc && !cyc_outs) {
      v.client_respectful = false;
      v.issues.push_back({VerdictIssue::What::DefinitelyClientInput, name, 0, 0,
                          "cycle repeats <" + name + ",_> without <_,!" + name + ">"});
    }
  }

  // Non-definitely-server-inputted (Def 15(d)).
  if (seq.lasso()) {
    bool all_ins = std::all_of(seq.cycle.begin(), seq.cycle.end(), [](const OrchAction& m) {
      return m.kind == OrchActionKind::InS;
    });
    if (all_ins) {
      v.non_def_server_inputted = false;
      std::string cyc;
      for (const auto& m : seq.cycle) cyc += to_string(m);
      v.issues.push_back({VerdictIssue::What::DefinitelyServerInput, "", 0, 0,
                          "cycle " + cyc + " is made of server inputs only"});
    }
  }

  v.respectful = v.sound && v.client_respectful && v.non_def_server_inputted;
  return v;
}

std::string to_string(const VerdictIssue& i) {
  switch (i.what) {
    case VerdictIssue::What::UnsoundDip:
      return "unsound: " + i.detail + " (value " + std::to_string(i.value) + " at action " +
             std::to_string(i.position) + ")";
    case VerdictIssue::What::UnsoundCycleNet:
      return "unsound: " + i.detail;
    case VerdictIssue::What::StrandedFinite:
      return "not client-respectful: " + i.detail;
    case VerdictIssue::What::DefinitelyClientInput:
      return "not client-respectful: " + i.detail;
    case VerdictIssue::What::DefinitelyServerInput:
      return "definitely server-inputted: " + i.detail;
  }
  return "?";
}

}  // namespace orchestral
