#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "orchestral/compliance.hpp"
#include "orchestral/parser.hpp"
#include "orchestral/respectfulness.hpp"
#include "orchestral/simulate.hpp"
#include "orchestral/synthesis.hpp"

namespace {

using namespace orchestral;

constexpr int kExitHolds = 0;
constexpr int kExitFails = 1;
constexpr int kExitError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_parse_error(const std::string& path, const ParseError& e) {
  std::cerr << path << ":" << e.span.line << ":" << e.span.column << ": error: " << e.message
            << "\n";
}

void print_violations(const std::string& path, const std::vector<Violation>& vs) {
  for (const auto& v : vs)
    std::cerr << path << ": " << violation_kind_name(v.kind)
              << (v.subject.empty() ? "" : " (" + v.subject + ")") << " at " << v.path << "\n";
}

ContractPtr load_contract(const std::string& path) {
  ContractParse p = parse_contract(read_file(path));
  if (p.error) {
    print_parse_error(path, *p.error);
    std::exit(kExitError);
  }
  if (!p.violations.empty()) {
    print_violations(path, p.violations);
    std::exit(kExitError);
  }
  return p.term;
}

OrchPtr load_orchestrator(const std::string& path) {
  OrchParse p = parse_orchestrator(read_file(path));
  if (p.error) {
    print_parse_error(path, *p.error);
    std::exit(kExitError);
  }
  if (!p.violations.empty()) {
    print_violations(path, p.violations);
    std::exit(kExitError);
  }
  return p.term;
}

bool want_json(const std::string& format_flag) {
  if (format_flag == "json") return true;
  if (format_flag == "text") return false;
  const char* env = std::getenv("ORCHESTRAL_FORMAT");
  return env && std::string(env) == "json";
}

nlohmann::json respect_json(const RespectVerdict& v) {
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [name, pn] : v.per_name)
    per[name] = {{"sound", pn.sound}, {"client_respectful", pn.client_respectful}};
  return {{"respectful", v.respectful},
          {"per_name", per},
          {"server_inputted_ok", v.server_inputted_ok},
          {"evidence", v.evidence}};
}

void print_respect_text(const RespectVerdict& v) {
  std::cout << "respectful: " << (v.respectful ? "yes" : "no") << "\n";
  for (const auto& [name, pn] : v.per_name) {
    std::cout << "  " << name << ": sound=" << (pn.sound ? "yes" : "no")
              << " client-respectful=" << (pn.client_respectful ? "yes" : "no") << "\n";
  }
  std::cout << "  server-inputted check: " << (v.server_inputted_ok ? "ok" : "violated") << "\n";
  for (const auto& e : v.evidence) std::cout << "  evidence: " << e << "\n";
}

void print_report_text(const ComplianceReport& r) {
  std::cout << "mode: " << to_string(r.mode) << "\n";
  std::cout << "verdict: " << to_string(r.verdict) << "\n";
  if (r.witness) std::cout << "witness: " << render(*r.witness) << "\n";
  if (r.evidence) {
    std::cout << "evidence: " << r.evidence->description << "\n";
    if (!r.evidence->trace.prefix.empty() || r.evidence->trace.lasso())
      std::cout << "  trace: " << to_string(r.evidence->trace) << "\n";
  }
  std::cout << "stats: nodes=" << r.stats.product_nodes << " edges=" << r.stats.product_edges
            << " family=" << r.stats.family_count << " tried=" << r.stats.members_tried
            << " micros=" << r.stats.micros << "\n";
}

int report_exit(const ComplianceReport& r) {
  switch (r.verdict) {
    case Verdict::holds: return kExitHolds;
    case Verdict::fails: return kExitFails;
    case Verdict::inconclusive_by_cap: return kExitError;
  }
  return kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"orchestral - session-contract orchestration checker and synthesizer"};
  app.require_subcommand(1);

  std::string format = "auto";
  app.add_option("--format", format, "Output format: text or json")
      ->check(CLI::IsMember({"auto", "text", "json"}));

  std::size_t node_cap = Limits{}.node_cap;
  std::size_t enum_cap = Limits{}.enum_cap;
  app.add_option("--node-cap", node_cap, "Product-graph node cap")->check(CLI::PositiveNumber);
  app.add_option("--enum-cap", enum_cap, "Family enumeration cap")->check(CLI::PositiveNumber);

  // parse
  auto* cmd_parse = app.add_subcommand("parse", "Parse a .sc or .orc file and echo its canonical form");
  std::string parse_path;
  cmd_parse->add_option("file", parse_path, "Input file (.sc or .orc)")->required();

  // check
  auto* cmd_check = app.add_subcommand("check", "Decide compliance for a pair or a triple");
  std::string client_path, server_path, orch_path, mode_str = "full";
  bool explain = false, cross = false;
  cmd_check->add_option("client", client_path, "Client contract (.sc)")->required();
  cmd_check->add_option("server", server_path, "Server contract (.sc)")->required();
  cmd_check->add_option("--orch", orch_path, "Orchestrator (.orc); omit to decide the pair");
  cmd_check->add_option("--mode", mode_str, "ds or full")->check(CLI::IsMember({"ds", "full"}));
  cmd_check->add_flag("--explain", explain, "Print the orchestrator respectfulness verdict");
  cmd_check->add_flag("--cross-check", cross, "Print both sides of the Prop-1(ii) equivalence");

  // synthesize
  auto* cmd_synth = app.add_subcommand("synthesize", "Synthesize mediating orchestrators");
  std::string sc_path, ss_path;
  std::size_t max_members = 10;
  bool respectful_only = false;
  cmd_synth->add_option("client", sc_path, "Client contract (.sc)")->required();
  cmd_synth->add_option("server", ss_path, "Server contract (.sc)")->required();
  cmd_synth->add_option("--max", max_members, "Maximum members to list");
  cmd_synth->add_flag("--respectful-only", respectful_only,
                      "List only strict and respectful members");

  // simulate
  auto* cmd_sim = app.add_subcommand("simulate", "Random walk over the orchestrated system");
  std::string sim_client, sim_server, sim_orch;
  std::size_t steps = 20;
  std::uint64_t seed = 0;
  cmd_sim->add_option("client", sim_client, "Client contract (.sc)")->required();
  cmd_sim->add_option("server", sim_server, "Server contract (.sc)")->required();
  cmd_sim->add_option("orch", sim_orch, "Orchestrator (.orc)")->required();
  cmd_sim->add_option("--steps", steps, "Step limit");
  cmd_sim->add_option("--seed", seed, "Random seed");

  CLI11_PARSE(app, argc, argv);

  Limits limits;
  limits.node_cap = node_cap;
  limits.enum_cap = enum_cap;
  bool json_out = want_json(format);

  try {
    if (*cmd_parse) {
      std::string src = read_file(parse_path);
      bool is_orc = parse_path.size() > 4 && parse_path.substr(parse_path.size() - 4) == ".orc";
      nlohmann::json j;
      if (is_orc) {
        OrchParse p = parse_orchestrator(src);
        if (p.error) {
          print_parse_error(parse_path, *p.error);
          return kExitError;
        }
        if (!p.violations.empty()) {
          print_violations(parse_path, p.violations);
          return kExitError;
        }
        if (json_out) {
          j = {{"kind", "orchestrator"}, {"canonical", render(p.term)}};
          std::cout << j.dump(2) << "\n";
        } else {
          std::cout << render(p.term) << "\n";
        }
      } else {
        ContractParse p = parse_contract(src);
        if (p.error) {
          print_parse_error(parse_path, *p.error);
          return kExitError;
        }
        if (!p.violations.empty()) {
          print_violations(parse_path, p.violations);
          return kExitError;
        }
        if (json_out) {
          j = {{"kind", "contract"}, {"canonical", render(p.term)}};
          std::cout << j.dump(2) << "\n";
        } else {
          std::cout << render(p.term) << "\n";
        }
      }
      return kExitHolds;
    }

    if (*cmd_check) {
      ContractPtr client = load_contract(client_path);
      ContractPtr server = load_contract(server_path);
      Mode mode = mode_str == "ds" ? Mode::ds : Mode::full;
      ComplianceReport rep;
      if (!orch_path.empty()) {
        OrchPtr orch = load_orchestrator(orch_path);
        rep = mode == Mode::ds ? check_ds_report(client, orch, server, limits)
                               : check_full(client, orch, server, limits);
        if (json_out) {
          nlohmann::json j = nlohmann::json::parse(report_to_json_text(rep));
          if (explain) j["respectfulness"] = respect_json(is_respectful(orch));
          if (cross) {
            Prop1Report p = cross_check_prop1(client, orch, server, limits);
            j["prop1"] = {{"strict", p.strict},
                          {"full_holds", p.full_holds},
                          {"ds_holds", p.ds_holds},
                          {"orch_respectful", p.orch_respectful},
                          {"left", p.left},
                          {"right", p.right},
                          {"agree", p.agree},
                          {"note", p.note}};
          }
          std::cout << j.dump(2) << "\n";
        } else {
          print_report_text(rep);
          if (explain) print_respect_text(is_respectful(orch));
          if (cross) {
            Prop1Report p = cross_check_prop1(client, orch, server, limits);
            std::cout << "prop1: left(full&strict)=" << (p.left ? "true" : "false")
                      << " right(ds&respectful)=" << (p.right ? "true" : "false")
                      << " agree=" << (p.agree ? "yes" : "no") << "\n";
            if (!p.note.empty()) std::cout << "  note: " << p.note << "\n";
          }
        }
      } else {
        rep = decide_pair(client, server, mode, limits);
        if (json_out)
          std::cout << report_to_json_text(rep) << "\n";
        else
          print_report_text(rep);
      }
      return report_exit(rep);
    }

    if (*cmd_synth) {
      ContractPtr client = load_contract(sc_path);
      ContractPtr server = load_contract(ss_path);
      OrchFamily fam = synth({}, client, server);
      std::vector<OrchPtr> members = fam.enumerate(std::max(max_members, limits.enum_cap));
      std::vector<OrchPtr> listed;
      for (const auto& m : members) {
        if (listed.size() >= max_members) break;
        if (respectful_only) {
          if (!is_strict(client, m, server, limits).strict) continue;
          if (!is_respectful(m).respectful) continue;
        }
        listed.push_back(m);
      }
      if (json_out) {
        nlohmann::json j;
        j["count"] = fam.count();
        j["members"] = nlohmann::json::array();
        for (const auto& m : listed) j["members"].push_back(render(m));
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << "family count: " << fam.count() << "\n";
        for (const auto& m : listed) std::cout << render(m) << "\n";
      }
      return listed.empty() ? kExitFails : kExitHolds;
    }

    if (*cmd_sim) {
      ContractPtr client = load_contract(sim_client);
      ContractPtr server = load_contract(sim_server);
      OrchPtr orch = load_orchestrator(sim_orch);
      Simulation sim = simulate(client, orch, server, steps, seed);
      std::cout << (json_out ? simulation_json_text(sim) : simulation_text(sim));
      return kExitHolds;
    }
  } catch (const ResourceLimitError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
