#pragma once

#include <map>
#include <string>
#include <vector>

#include "orchestral/orchestrators.hpp"

namespace orchestral {

// Bi-directional per-name buffer (Def 14): cs counts messages from the
// client awaiting the server, sc the reverse. Counters are signed so that
// unsound drains are representable and detectable.
struct Buffer {
  std::map<std::string, std::pair<long, long>> counts;  // nonzero entries only

  long cs(const std::string& name) const;
  long sc(const std::string& name) const;
  void add_cs(const std::string& name, long d);
  void add_sc(const std::string& name, long d);
  bool empty() const { return counts.empty(); }

  bool operator==(const Buffer& o) const { return counts == o.counts; }
};

// Def 14(4) with the direction correction: OutS(a) = <_,!a> drains the
// client-to-server side, OutC(a) = <!a,_> the server-to-client side.
Buffer apply_action(Buffer b, const OrchAction& m);

struct RunResult {
  Buffer final;
  // Minimum value each counter reaches over all prefixes.
  std::map<std::string, std::pair<long, long>> minima;
};

RunResult run_sequence(Buffer b, const std::vector<OrchAction>& seq);

// Left-restriction to a name: keeps exactly {<a,_>, <_,!a>}. A lasso whose
// cycle restricts to nothing denotes the finite restricted sequence.
ActionSeq left_restrict(const ActionSeq& seq, const std::string& name);

struct VerdictIssue {
  enum class What {
    UnsoundDip,            // a counter goes negative at `position`
    UnsoundCycleNet,       // a cycle pumps a counter downward
    StrandedFinite,        // finite left-restriction with nonzero final cs
    DefinitelyClientInput, // infinite restriction, cycle has InC(a) and no OutS(a)
    DefinitelyServerInput, // cycle made of server inputs only
  };
  What what;
  std::string name;       // empty for DefinitelyServerInput
  long value = 0;
  std::size_t position = 0;
  std::string detail;
};

struct SequenceVerdict {
  bool sound = true;
  bool client_respectful = true;
  bool non_def_server_inputted = true;
  bool respectful = true;  // conjunction of the other three (Def 15(e))
  std::vector<VerdictIssue> issues;
};

// Def 15 on a finite sequence or an eventually-periodic lasso.
SequenceVerdict classify(const ActionSeq& seq);

std::string to_string(const VerdictIssue& i);

}  // namespace orchestral
