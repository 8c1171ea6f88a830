#pragma once

// Model-guided plan decoding: roll the transition model forward while
// tracking the exact symbolic state, picking the applicable successor whose
// embedding is nearest to each prediction.

#include "gplan/encoders.hpp"
#include "gplan/models.hpp"
#include "gplan/task.hpp"
#include "gplan/trajectory.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gplan {

/// Embeds states of one task for a model.
class StateEncoder {
public:
    virtual ~StateEncoder() = default;
    virtual Vector embed(const SymbolicState &state) const = 0;
    virtual const Vector &goal() const = 0;
};

class WlStateEncoder : public StateEncoder {
public:
    WlStateEncoder(const GroundedTask &task, WlVocabulary &vocab, WlOptions options = {});
    Vector embed(const SymbolicState &state) const override;
    const Vector &goal() const override { return goal_; }

private:
    const GroundedTask &task_;
    WlVocabulary &vocab_;
    WlOptions options_;
    Vector goal_;
};

/// Throws CapacityExceeded at construction when the task does not fit.
class FsfStateEncoder : public StateEncoder {
public:
    FsfStateEncoder(const GroundedTask &task, FsfLayout layout);
    Vector embed(const SymbolicState &state) const override;
    const Vector &goal() const override { return goal_; }

private:
    const GroundedTask &task_;
    FsfLayout layout_;
    Vector goal_;
};

/// Rows φ(s_0..s_T) and goal φ(g) of a trajectory through `encoder`.
EmbeddedTrajectory embed_trajectory(const Trajectory &trajectory, const StateEncoder &encoder);

enum class Distance { Euclidean, Cosine };
enum class RevisitPolicy { Allow, AvoidIfAlternative };

std::string_view to_string(Distance distance);
Distance parse_distance(std::string_view name);
std::string_view to_string(RevisitPolicy policy);
RevisitPolicy parse_revisit_policy(std::string_view name);

/// Euclidean for delta-mode models, cosine for state-mode models.
Distance default_distance(TargetMode mode);
double distance(Distance kind, const Vector &a, const Vector &b);

struct DecodeConfig {
    int beam_width = 3;
    int max_steps = 100;
    std::optional<Distance> distance;  // unset: default_distance(model mode)
    RevisitPolicy revisit = RevisitPolicy::AvoidIfAlternative;
};

enum class Outcome { Success, HorizonExceeded, DeadEnd };

std::string_view to_string(Outcome outcome);

struct DecodeStep {
    ActionId action;
    double distance;
    std::size_t successors;
};

struct RolloutResult {
    Outcome outcome = Outcome::DeadEnd;
    std::vector<ActionId> plan;  // best rollout found, complete on success
    std::vector<DecodeStep> steps;
    std::size_t visited = 0;  // steps taken by the returned rollout
    std::size_t model_calls = 0;

    bool success() const { return outcome == Outcome::Success; }
};

struct Candidate {
    ActionId action;
    SymbolicState state;
    double distance;
};

/// Candidates sorted by distance to `target`, ties in canonical action order.
std::vector<Candidate> rank_successors(const Vector &target, std::vector<Successor> succ, const StateEncoder &encoder,
                                       Distance kind);

/// Nearest candidate; ties go to the canonically first action. Throws on an
/// empty candidate list.
Candidate select_successor(const Vector &target, std::vector<Successor> candidates, const StateEncoder &encoder,
                           Distance kind);

/// Greedy rollout (beam width ignored).
RolloutResult decode(const GroundedTask &task, const TransitionModel &model, const StateEncoder &encoder,
                     const DecodeConfig &config = {});

/// Keeps up to beam_width rollouts ranked by cumulative distance, expanding
/// each by its beam_width nearest successors. Width 1 is decode().
RolloutResult beam_decode(const GroundedTask &task, const TransitionModel &model, const StateEncoder &encoder,
                          const DecodeConfig &config = {});

/// One line per step: "t <action> dist=<value> |succ|=<count>".
std::string format_rollout_log(const GroundedTask &task, const RolloutResult &result);

}  // namespace gplan
