#include "orchestral/simulate.hpp"

#include <random>

#include "orchestral/parser.hpp"

#include <json.hpp>

namespace orchestral {

Simulation simulate(const ContractPtr& client, const OrchPtr& orch, const ContractPtr& server,
                    std::size_t max_steps, std::uint64_t seed) {
  Simulation sim;
  std::mt19937_64 rng(seed);
  SystemConfig cfg = make_config(client, orch, server);
  Buffer buf;
  for (std::size_t i = 0; i < max_steps; ++i) {
    auto steps = system_step(cfg);
    if (steps.empty()) {
      sim.stuck = true;
      break;
    }
    std::uniform_int_distribution<std::size_t> pick(0, steps.size() - 1);
    auto& [label, next] = steps[pick(rng)];
    if (!label.tau) {
      buf = apply_action(std::move(buf), label.action);
      if (buf.cs(label.action.name) < 0 || buf.sc(label.action.name) < 0) sim.minima_ok = false;
    }
    sim.steps.push_back({label, next, buf});
    cfg = next;
  }
  sim.final_buffer = buf;
  return sim;
}

namespace {

nlohmann::json buffer_json(const Buffer& b) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, cnt] : b.counts)
    j[name] = {{"cs", cnt.first}, {"sc", cnt.second}};
  return j;
}

}  // namespace

std::string simulation_text(const Simulation& s) {
  std::string out;
  std::size_t i = 0;
  for (const auto& step : s.steps) {
    out += std::to_string(i++) + ": " + to_string(step.label) + "  buffer " +
           buffer_json(step.buffer).dump() + "\n";
  }
  out += s.stuck ? "status: stuck\n" : "status: step limit reached\n";
  out += std::string("buffer minima: ") + (s.minima_ok ? "ok" : "dipped below zero") + "\n";
  return out;
}

std::string simulation_json_text(const Simulation& s) {
  nlohmann::json j;
  j["steps"] = nlohmann::json::array();
  std::size_t i = 0;
  for (const auto& step : s.steps) {
    j["steps"].push_back({{"index", i++},
                          {"label", to_string(step.label)},
                          {"client", render(step.config.client)},
                          {"orchestrator", render(step.config.orch)},
                          {"server", render(step.config.server)},
                          {"buffer", buffer_json(step.buffer)}});
  }
  j["status"] = s.stuck ? "stuck" : "step_limit";
  j["minima_ok"] = s.minima_ok;
  j["final_buffer"] = buffer_json(s.final_buffer);
  return j.dump(2);
}

}  // namespace orchestral
