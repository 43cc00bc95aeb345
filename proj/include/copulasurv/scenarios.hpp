#pragma once

#include <string>
#include <vector>

#include "copulasurv/simulation.hpp"

namespace copulasurv {

// Built-in simulation scenario grid: Clayton theta in {0.2, 0.5, 1.0, 1.5}
// and Gumbel-Hougaard theta in {0.2, 0.5, 0.8}, K in {50, 200}, censoring
// in {0%, 25%, 50%}. Names look like "clayton-t0.5-K200-c0".
struct Scenario {
  std::string name;
  SimulationConfig config; // seed and replicates left at defaults
};

const std::vector<Scenario>& builtin_scenarios();

// Throws InputError listing the valid names when `name` is unknown.
const Scenario& find_scenario(const std::string& name);

} // namespace copulasurv
