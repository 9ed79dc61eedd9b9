#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "orchestral/buffers.hpp"
#include "orchestral/system.hpp"

namespace orchestral {

// Seeded uniform random walk over the orchestrated-system LTS, tracking the
// buffer induced by the performed actions. Deterministic for a given seed.
struct SimulationStep {
  SysLabel label;
  SystemConfig config;  // configuration after the step
  Buffer buffer;        // buffer after the step
};

struct Simulation {
  std::vector<SimulationStep> steps;
  bool stuck = false;  // stopped because no step was enabled
  Buffer final_buffer;
  bool minima_ok = true;  // no counter dipped below zero along the walk
};

Simulation simulate(const ContractPtr& client, const OrchPtr& orch, const ContractPtr& server,
                    std::size_t max_steps, std::uint64_t seed);

std::string simulation_text(const Simulation& s);
std::string simulation_json_text(const Simulation& s);

}  // namespace orchestral
