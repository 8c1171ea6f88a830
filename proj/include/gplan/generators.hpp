#pragma once

// Seeded problem generators for the bundled domains. Size is blocks
// (blocksworld), balls (gripper), packages/goals (logistics) or grid cells
// (visitall).

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gplan {

/// PDDL problem text; identical for identical arguments.
std::string generate_problem(std::string_view domain, int size, std::uint64_t seed, const std::string &name);

/// rows x cols used for a VisitAll grid of `cells` cells (rows <= cols).
std::pair<int, int> visitall_grid_shape(int cells);

/// Mixes a base seed with instance coordinates.
std::uint64_t instance_seed(std::uint64_t base, std::string_view domain, int size, int index);

}  // namespace gplan
