#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "orchestral/synthesis.hpp"
#include "orchestral/system.hpp"

namespace orchestral {

enum class Mode { ds, full };
enum class Verdict { holds, fails, inconclusive_by_cap };

const char* to_string(Mode m);
const char* to_string(Verdict v);

struct Evidence {
  std::string description;
  ActionSeq trace;   // witnessing trace or lasso (may be empty)
  std::string name;  // involved buffer name, if any
  long value = 0;
};

struct ReportStats {
  std::size_t product_nodes = 0;
  std::size_t product_edges = 0;
  std::uint64_t family_count = 0;
  std::size_t members_tried = 0;
  std::int64_t micros = 0;
};

struct ComplianceReport {
  Mode mode = Mode::full;
  Verdict verdict = Verdict::holds;
  std::optional<OrchPtr> witness;    // pair queries
  std::optional<Evidence> evidence;  // failures
  ReportStats stats;
};

// Graph-level respectfulness of every system trace: finite root-to-stuck
// traces must end with empty client-to-server buffers and never dip any
// counter; infinite traces are checked through cycle conditions. tau edges
// weigh zero; tau-only cycles cannot occur and are asserted against.
struct GraphRespectResult {
  bool ok = true;
  std::optional<Evidence> failure;
};

GraphRespectResult analyze_graph_respectfulness(const ProductGraph& g);

// Def 16: stuck configurations leave the client at 1 and every finite and
// infinite mu-trace is respectful. Does not require f strict or respectful.
ComplianceReport check_full(const ContractPtr& client, const OrchPtr& orch,
                            const ContractPtr& server, const Limits& limits = {});

// Def 7(i) as a report.
ComplianceReport check_ds_report(const ContractPtr& client, const OrchPtr& orch,
                                 const ContractPtr& server, const Limits& limits = {});

// Pair decision: ds via nonemptiness of the Synth family (Corollary-1 route),
// full via the strict-and-respectful witness search.
ComplianceReport decide_pair(const ContractPtr& client, const ContractPtr& server, Mode mode,
                             const Limits& limits = {});

// Both sides of the Prop-1(ii) equivalence, as a standing diagnostic.
struct Prop1Report {
  bool strict = false;
  bool full_holds = false;
  bool ds_holds = false;
  bool orch_respectful = false;
  bool left = false;   // full && strict
  bool right = false;  // ds && respectful
  bool agree = false;
  std::string note;
};

Prop1Report cross_check_prop1(const ContractPtr& client, const OrchPtr& orch,
                              const ContractPtr& server, const Limits& limits = {});

std::string report_to_json_text(const ComplianceReport& r);

}  // namespace orchestral
