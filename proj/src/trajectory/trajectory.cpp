#include "gplan/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

namespace gplan {

std::string_view to_string(InvalidReason reason) {
    switch (reason) {
    case InvalidReason::None:
        return "none";
    case InvalidReason::Inapplicable:
        return "inapplicable";
    case InvalidReason::GoalUnsatisfied:
        return "goal-unsatisfied";
    case InvalidReason::UnknownAction:
        return "unknown-action";
    }
    return "?";
}

namespace {

ValidationResult replay(const GroundedTask &task, std::span<const ActionId> plan,
                        std::vector<SymbolicState> *states) {
    SymbolicState s = task.initial();
    if (states)
        states->push_back(s);
    for (std::size_t t = 0; t < plan.size(); ++t) {
        if (plan[t] >= task.actions().size())
            return {false, t + 1, InvalidReason::UnknownAction, "action id " + std::to_string(plan[t])};
        const auto &action = task.actions()[plan[t]];
        if (!applicable(s, action)) {
            AtomSet missing;
            std::set_difference(action.pre.begin(), action.pre.end(), s.atoms().begin(), s.atoms().end(),
                                std::back_inserter(missing));
            return {false, t + 1, InvalidReason::Inapplicable,
                    action.name + " needs " + render_atoms(task, missing)};
        }
        s = apply(s, action);
        if (states)
            states->push_back(s);
    }
    if (!goal_satisfied(s, task.goal())) {
        AtomSet missing;
        std::set_difference(task.goal().begin(), task.goal().end(), s.atoms().begin(), s.atoms().end(),
                            std::back_inserter(missing));
        return {false, plan.size(), InvalidReason::GoalUnsatisfied, "missing " + render_atoms(task, missing)};
    }
    return {true, plan.size(), InvalidReason::None, {}};
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

AtomSet parse_atoms(const GroundedTask &task, std::string_view text, int line_no) {
    AtomSet out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        if (text[i] != '(')
            throw FormatError("line " + std::to_string(line_no) + ": expected '(' in atom list");
        auto close = text.find(')', i);
        if (close == std::string_view::npos)
            throw FormatError("line " + std::to_string(line_no) + ": unterminated atom");
        std::string atom = "(";
        std::istringstream words{std::string(text.substr(i + 1, close - i - 1))};
        std::string word;
        bool first = true;
        while (words >> word) {
            if (!first)
                atom += ' ';
            atom += word;
            first = false;
        }
        atom += ')';
        auto id = task.find_atom(atom);
        if (!id)
            throw FormatError("line " + std::to_string(line_no) + ": unknown atom " + atom);
        out.push_back(*id);
        i = close + 1;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

Trajectory reconstruct(const GroundedTask &task, std::span<const ActionId> plan) {
    Trajectory traj;
    traj.domain_id = task.domain().name;
    traj.problem_id = task.problem_name();
    traj.goal = task.goal();
    auto result = replay(task, plan, &traj.states);
    if (!result.valid)
        throw InvalidPlan(result.step, result.reason, result.detail);
    traj.actions.assign(plan.begin(), plan.end());
    return traj;
}

ValidationResult validate(const GroundedTask &task, std::span<const ActionId> plan) {
    return replay(task, plan, nullptr);
}

ValidationResult validate_lines(const GroundedTask &task, std::span<const std::string> lines) {
    std::vector<ActionId> plan;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto id = task.find_action(lines[i]);
        if (!id)
            return {false, i + 1, InvalidReason::UnknownAction, lines[i]};
        plan.push_back(*id);
    }
    return validate(task, plan);
}

std::string write_trajectory(const GroundedTask &task, const Trajectory &trajectory) {
    std::string out = "TRAJ1 " + trajectory.domain_id + " " + trajectory.problem_id + "\n";
    out += "goal: " + render_atoms(task, trajectory.goal) + "\n";
    for (const auto &s : trajectory.states)
        out += "state: " + render_atoms(task, s.atoms()) + "\n";
    return out;
}

Trajectory read_trajectory(const GroundedTask &task, std::string_view text) {
    Trajectory traj;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    bool have_goal = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (view.empty())
            continue;
        if (line_no == 1) {
            std::istringstream header{std::string(view)};
            std::string magic;
            header >> magic >> traj.domain_id >> traj.problem_id;
            if (magic != "TRAJ1")
                throw FormatError("unsupported trajectory format '" + magic + "', expected TRAJ1");
            if (traj.problem_id.empty())
                throw FormatError("trajectory header needs a domain and a problem id");
            continue;
        }
        if (view.starts_with("goal:")) {
            if (have_goal)
                throw FormatError("line " + std::to_string(line_no) + ": duplicate goal line");
            traj.goal = parse_atoms(task, view.substr(5), line_no);
            have_goal = true;
        } else if (view.starts_with("state:")) {
            if (!have_goal)
                throw FormatError("line " + std::to_string(line_no) + ": state before goal line");
            traj.states.emplace_back(parse_atoms(task, view.substr(6), line_no));
        } else {
            throw FormatError("line " + std::to_string(line_no) + ": expected 'goal:' or 'state:'");
        }
    }
    if (line_no == 0)
        throw FormatError("empty trajectory file");
    if (!have_goal)
        throw FormatError("trajectory has no goal line");
    if (traj.states.empty())
        throw FormatError("trajectory has no states");
    for (std::size_t t = 0; t + 1 < traj.states.size(); ++t) {
        bool found = false;
        for (auto &succ : successors(traj.states[t], task)) {
            if (succ.state == traj.states[t + 1]) {
                traj.actions.push_back(succ.action);
                found = true;
                break;
            }
        }
        if (!found)
            throw FormatError("no action leads from state " + std::to_string(t) + " to state " +
                              std::to_string(t + 1));
    }
    return traj;
}

std::string_view to_string(SplitName split) {
    switch (split) {
    case SplitName::Train:
        return "train";
    case SplitName::Validation:
        return "validation";
    case SplitName::Interpolation:
        return "interpolation";
    case SplitName::Extrapolation:
        return "extrapolation";
    }
    return "?";
}

SplitName parse_split_name(std::string_view name) {
    for (auto s : {SplitName::Train, SplitName::Validation, SplitName::Interpolation, SplitName::Extrapolation})
        if (to_string(s) == name)
            return s;
    throw FormatError("unknown split '" + std::string(name) + "'");
}

std::string write_manifest(std::span<const ManifestEntry> entries) {
    std::string out;
    for (const auto &e : entries)
        out += std::string(to_string(e.split)) + "\t" + e.domain + "\t" + e.problem_path + "\t" +
               std::to_string(e.size) + "\n";
    return out;
}

std::vector<ManifestEntry> read_manifest(std::string_view text) {
    std::vector<ManifestEntry> entries;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || line.starts_with("#"))
            continue;
        std::vector<std::string> fields;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, '\t'))
            fields.push_back(cell);
        if (fields.size() != 4)
            throw FormatError("manifest line " + std::to_string(line_no) + ": expected 4 tab-separated fields");
        ManifestEntry e;
        e.split = parse_split_name(fields[0]);
        e.domain = fields[1];
        e.problem_path = fields[2];
        auto [ptr, ec] = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), e.size);
        if (ec != std::errc() || ptr != fields[3].data() + fields[3].size())
            throw FormatError("manifest line " + std::to_string(line_no) + ": bad size '" + fields[3] + "'");
        entries.push_back(std::move(e));
    }
    check_split_integrity(entries);
    return entries;
}

void check_split_integrity(std::span<const ManifestEntry> entries) {
    std::map<std::string, SplitName> owner;
    std::map<std::string, int> train_max;
    for (const auto &e : entries) {
        auto [it, inserted] = owner.emplace(e.problem_path, e.split);
        if (!inserted && it->second != e.split)
            throw FormatError("problem " + e.problem_path + " appears in both " +
                              std::string(to_string(it->second)) + " and " + std::string(to_string(e.split)));
        if (e.split == SplitName::Train)
            train_max[e.domain] = std::max(train_max[e.domain], e.size);
    }
    for (const auto &e : entries) {
        if (e.split != SplitName::Extrapolation)
            continue;
        auto it = train_max.find(e.domain);
        if (it != train_max.end() && e.size <= it->second)
            throw FormatError("extrapolation instance " + e.problem_path + " has size " + std::to_string(e.size) +
                              ", not above the training maximum " + std::to_string(it->second));
    }
}

std::vector<DatasetSplit> group_splits(std::span<const ManifestEntry> entries) {
    std::vector<DatasetSplit> out;
    for (auto s : {SplitName::Train, SplitName::Validation, SplitName::Interpolation, SplitName::Extrapolation}) {
        DatasetSplit split{s, {}};
        for (const auto &e : entries)
            if (e.split == s)
                split.instances.push_back(e);
        out.push_back(std::move(split));
    }
    return out;
}

}  // namespace gplan
