#pragma once

// Heuristic search used to produce expert plans for training instances.

#include "gplan/task.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gplan {

enum class SearchStrategy { AstarHmax, GbfsGoalcount, GbfsHadd };

std::string_view to_string(SearchStrategy strategy);
SearchStrategy parse_search_strategy(std::string_view name);

struct SearchConfig {
    SearchStrategy strategy = SearchStrategy::AstarHmax;
    double timeout_seconds = 60.0;
    std::size_t max_expansions = 5'000'000;
};

/// Tier 1: A* + h_max for 60 s; tier 2: GBFS + h_add for 300 s.
std::vector<SearchConfig> default_search_tiers();

struct Plan {
    std::vector<ActionId> actions;
    std::string strategy;
    std::size_t expansions = 0;
    double wall_seconds = 0.0;

    std::size_t size() const { return actions.size(); }
};

enum class SearchStatus { Solved, Timeout, Exhausted };

std::string_view to_string(SearchStatus status);

struct SearchResult {
    SearchStatus status = SearchStatus::Exhausted;
    Plan plan;  // valid only when status == Solved
    std::size_t expansions = 0;
    double wall_seconds = 0.0;

    bool solved() const { return status == SearchStatus::Solved; }
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Number of goal atoms not in the state.
double heuristic_goalcount(const SymbolicState &state, std::span<const AtomId> goal);

/// Delete-relaxation heuristics with unit action costs, computed by a
/// generalized Dijkstra over atoms. Construct once per task.
class RelaxationHeuristic {
public:
    enum class Kind { Max, Add };

    RelaxationHeuristic(const GroundedTask &task, Kind kind);

    /// Infinity when some goal atom is unreachable in the relaxation.
    double evaluate(const SymbolicState &state, std::span<const AtomId> goal);

private:
    const GroundedTask &task_;
    Kind kind_;
    std::vector<std::vector<ActionId>> precondition_of_;
    std::vector<double> atom_cost_;
    std::vector<double> action_aggregate_;
    std::vector<int> unsatisfied_;
};

double heuristic_hadd(const SymbolicState &state, std::span<const AtomId> goal,
                      const GroundedTask &task);
double heuristic_hmax(const SymbolicState &state, std::span<const AtomId> goal,
                      const GroundedTask &task);

/// Runs one strategy. A returned plan has been replayed from s0 and reaches
/// the goal. Deterministic: ties are broken FIFO in task action order.
/// `from` replaces s0 as the start state when given.
SearchResult solve(const GroundedTask &task, const SearchConfig &config, const SymbolicState *from = nullptr);

/// Runs tiers in order; a later tier is tried only when the previous one
/// ran out of time or expansions.
SearchResult solve_tiered(const GroundedTask &task, std::span<const SearchConfig> tiers,
                          const SymbolicState *from = nullptr);

/// One "(name obj1 ... objk)" per line, newline-terminated.
std::string format_plan(const GroundedTask &task, std::span<const ActionId> actions);

/// Non-empty, non-comment lines of a plan file, whitespace-normalised and
/// lower-cased. Names are not resolved.
std::vector<std::string> parse_plan_lines(std::string_view text);

}  // namespace gplan
