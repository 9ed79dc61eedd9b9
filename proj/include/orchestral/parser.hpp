#pragma once

#include <optional>
#include <string>
#include <vector>

#include "orchestral/contracts.hpp"
#include "orchestral/orchestrators.hpp"

namespace orchestral {

struct SourceSpan {
  std::size_t line = 1;    // 1-based
  std::size_t column = 1;  // 1-based
  std::size_t length = 1;
};

struct ParseError {
  std::string message;
  SourceSpan span;
};

// parse_* return the raw parsed term plus any well-formedness violations;
// `error` is set on lexical/grammatical faults (term is then null).
struct ContractParse {
  ContractPtr term;  // canonical
  std::vector<Violation> violations;
  std::optional<ParseError> error;

  bool ok() const { return term != nullptr && violations.empty() && !error; }
};

struct OrchParse {
  OrchPtr term;  // canonical
  std::vector<Violation> violations;
  std::optional<ParseError> error;

  bool ok() const { return term != nullptr && violations.empty() && !error; }
};

// Concrete syntax. Contracts: `1`, `a.S`, `!a.S`, `+` / `(+)` choices,
// `rec X . S`; trailing `.1` may be omitted. Orchestrators: `<l,r>` actions,
// `\/` choice, `.` prefix, `rec X . F`, `1`. `#` starts a line comment.
ContractParse parse_contract(const std::string& src);
OrchParse parse_orchestrator(const std::string& src);

std::string render(const ContractPtr& term);
std::string render(const OrchPtr& term);

}  // namespace orchestral
