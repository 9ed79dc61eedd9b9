#pragma once

#include <memory>
#include <string>
#include <vector>

namespace orchestral {

// Session contracts: success, input-guarded external choice, output-guarded
// internal choice, recursion variables and binders. Terms are immutable and
// hash-consed: two structurally equal terms built through the factories are
// the same pointer, so canonical terms compare and hash as pointers.
//
// An input prefix a.s is a unary external choice, an output prefix !a.s a
// unary internal choice.

enum class ContractKind { Success, External, Internal, Var, Rec };

struct Contract;
using ContractPtr = std::shared_ptr<const Contract>;

struct ContractBranch {
  std::string name;
  ContractPtr cont;
};

struct Contract {
  ContractKind kind;
  std::vector<ContractBranch> branches;  // External / Internal
  std::string var;                       // Var / Rec
  ContractPtr body;                      // Rec
  std::size_t hash = 0;
};

ContractPtr success();
ContractPtr external_choice(std::vector<ContractBranch> branches);
ContractPtr internal_choice(std::vector<ContractBranch> branches);
ContractPtr contract_var(const std::string& name);
ContractPtr contract_rec(const std::string& var, ContractPtr body);
ContractPtr input_prefix(const std::string& name, ContractPtr cont);
ContractPtr output_prefix(const std::string& name, ContractPtr cont);

// Well-formedness (Def 1(ii) plus the usual contractivity assumptions).
// Violations are data: an empty result means the term is a session contract.
struct Violation {
  enum class Kind {
    UnboundVariable,
    DuplicateBranchName,
    UnguardedRecursion,     // rec body is a variable
    ConsecutiveRecBinders,  // rec x . rec y . ...
    EmptyChoice,
    MixedChoiceDirections,        // orchestrators: iota_L with iota_R heads
    ChoiceHeadedByOutputAction,   // orchestrators: o-action heading a branch
    ChoiceBranchNotPrefix,        // orchestrators: branch is not a prefix
  };
  Kind kind;
  std::string subject;  // offending name / variable
  std::string path;     // structural path to the offending subterm
};

const char* violation_kind_name(Violation::Kind k);
std::vector<Violation> well_formed(const ContractPtr& term);

// Canonical form: branches sorted by name, binders renamed by binder depth,
// unused binders dropped, nested structure interned. Idempotent; canonical
// terms are compared by pointer.
ContractPtr canon(const ContractPtr& term);

// Equi-recursive head unfolding: rewrites rec x.s to s[x := rec x.s] until
// the head is not a binder. Expects (and returns) canonical closed terms.
ContractPtr unfold(const ContractPtr& term);

struct ContractLabel {
  enum class Kind { Tau, Input, Output };
  Kind kind;
  std::string name;  // empty for tau

  bool operator==(const ContractLabel& o) const { return kind == o.kind && name == o.name; }
};

std::string to_string(const ContractLabel& l);

// One-step LTS (Def 3). The head is unfolded first. A singleton internal
// choice is the output prefix and takes only the output transition; the tau
// rule applies for two or more branches.
std::vector<std::pair<ContractLabel, ContractPtr>> transitions(const ContractPtr& term);

// The finite set of states reachable by repeated unfold+transitions, as
// canonical terms in BFS order (root first).
std::vector<ContractPtr> reachable_subterms(const ContractPtr& term);

// All action names occurring in the term.
std::vector<std::string> contract_names(const ContractPtr& term);

std::size_t contract_size(const ContractPtr& term);  // syntax node count

bool contract_closed(const ContractPtr& term);

}  // namespace orchestral
