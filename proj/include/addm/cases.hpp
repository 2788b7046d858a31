#pragma once

#include <string>
#include <vector>

#include "addm/deck.hpp"

namespace addm {

// Built-in benchmark decks, selected as "name:scale":
//   case1-mini  layered permeability (high/low/mid bands top down)
//   case2-mini  per-cell random permeability around the same layer means
// Scales: tiny (24x24x3), small (48x48x6), medium (96x96x6). Four corner gas
// injectors perforate the top band, one centered oil producer the bottom
// band; rates scale with pore volume. `seed` only affects case2-mini.
Deck builtin_case(const std::string& spec, unsigned long long seed = 12345);

std::vector<std::string> builtin_case_names();

}  // namespace addm
