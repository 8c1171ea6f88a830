#pragma once

// Plan replay, validation, and the on-disk trajectory and split formats.

#include "gplan/error.hpp"
#include "gplan/task.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gplan {

struct Trajectory {
    std::string domain_id;
    std::string problem_id;
    std::vector<SymbolicState> states;  // s0 .. sT
    std::vector<ActionId> actions;      // a1 .. aT
    AtomSet goal;

    std::size_t length() const { return actions.size(); }
};

enum class InvalidReason { None, Inapplicable, GoalUnsatisfied, UnknownAction };

std::string_view to_string(InvalidReason reason);

/// Steps are 1-based: step t refers to the t-th action. A plan that runs to
/// completion without reaching the goal is attributed to step T (0 for an
/// empty plan).
struct ValidationResult {
    bool valid = false;
    std::size_t step = 0;
    InvalidReason reason = InvalidReason::None;
    std::string detail;

    explicit operator bool() const { return valid; }
};

class InvalidPlan : public Error {
public:
    InvalidPlan(std::size_t step, InvalidReason reason, const std::string &detail)
        : Error("invalid plan at step " + std::to_string(step) + " (" +
                std::string(to_string(reason)) + "): " + detail),
          step_(step), reason_(reason) {}

    std::size_t step() const { return step_; }
    InvalidReason reason() const { return reason_; }

private:
    std::size_t step_;
    InvalidReason reason_;
};

/// Folds apply over the plan. Throws InvalidPlan rather than returning a
/// partial trajectory.
Trajectory reconstruct(const GroundedTask &task, std::span<const ActionId> plan);

/// Total: never throws for bad plans.
ValidationResult validate(const GroundedTask &task, std::span<const ActionId> plan);
/// Same, for plan lines that still need resolving to task actions.
ValidationResult validate_lines(const GroundedTask &task, std::span<const std::string> lines);

/// TRAJ1 text: header, goal line, one "state:" line per state.
std::string write_trajectory(const GroundedTask &task, const Trajectory &trajectory);
/// Parses TRAJ1 against `task`. Actions are recovered as the first action in
/// canonical order mapping each state to the next.
Trajectory read_trajectory(const GroundedTask &task, std::string_view text);

enum class SplitName { Train, Validation, Interpolation, Extrapolation };

std::string_view to_string(SplitName split);
SplitName parse_split_name(std::string_view name);

struct ManifestEntry {
    SplitName split = SplitName::Train;
    std::string domain;
    std::string problem_path;
    int size = 0;
};

struct DatasetSplit {
    SplitName name = SplitName::Train;
    std::vector<ManifestEntry> instances;
};

/// "split<TAB>domain<TAB>problem-path<TAB>size" per line.
std::string write_manifest(std::span<const ManifestEntry> entries);
/// Parses and checks split integrity: no problem path in two splits, and
/// every extrapolation size above the largest training size.
std::vector<ManifestEntry> read_manifest(std::string_view text);
void check_split_integrity(std::span<const ManifestEntry> entries);

std::vector<DatasetSplit> group_splits(std::span<const ManifestEntry> entries);

}  // namespace gplan
