#include "gplan/decoder.hpp"

#include "gplan/error.hpp"
#include "gplan/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace gplan {

WlStateEncoder::WlStateEncoder(const GroundedTask &task, WlVocabulary &vocab, WlOptions options)
    : task_(task), vocab_(vocab), options_(options) {
    goal_ = embed_wl_goal(task, vocab, options);
}

Vector WlStateEncoder::embed(const SymbolicState &state) const {
    return embed_wl(state, task_.goal(), task_, vocab_, options_);
}

FsfStateEncoder::FsfStateEncoder(const GroundedTask &task, FsfLayout layout) : task_(task), layout_(layout) {
    goal_ = embed_fsf(task.initial(), task.goal(), task, layout_).second;
}

Vector FsfStateEncoder::embed(const SymbolicState &state) const {
    return embed_fsf(state, task_.goal(), task_, layout_).first;
}

EmbeddedTrajectory embed_trajectory(const Trajectory &trajectory, const StateEncoder &encoder) {
    const Vector &goal = encoder.goal();
    EmbeddedTrajectory out{Matrix(static_cast<Eigen::Index>(trajectory.states.size()), goal.size()), goal};
    for (std::size_t t = 0; t < trajectory.states.size(); ++t)
        out.states.row(static_cast<Eigen::Index>(t)) = encoder.embed(trajectory.states[t]).transpose();
    return out;
}

std::string_view to_string(Distance d) { return d == Distance::Euclidean ? "euclidean" : "cosine"; }

Distance parse_distance(std::string_view name) {
    if (name == "euclidean")
        return Distance::Euclidean;
    if (name == "cosine")
        return Distance::Cosine;
    throw Error("unknown distance '" + std::string(name) + "'");
}

std::string_view to_string(RevisitPolicy p) { return p == RevisitPolicy::Allow ? "allow" : "avoid"; }

RevisitPolicy parse_revisit_policy(std::string_view name) {
    if (name == "allow")
        return RevisitPolicy::Allow;
    if (name == "avoid" || name == "avoid-if-alternative")
        return RevisitPolicy::AvoidIfAlternative;
    throw Error("unknown revisit policy '" + std::string(name) + "'");
}

std::string_view to_string(Outcome o) {
    switch (o) {
    case Outcome::Success:
        return "success";
    case Outcome::HorizonExceeded:
        return "horizon-exceeded";
    case Outcome::DeadEnd:
        return "dead-end";
    }
    return "?";
}

Distance default_distance(TargetMode mode) { return mode == TargetMode::State ? Distance::Cosine : Distance::Euclidean; }

double distance(Distance kind, const Vector &a, const Vector &b) {
    if (a.size() != b.size())
        throw Error("distance between vectors of different widths");
    if (kind == Distance::Euclidean)
        return (a - b).norm();
    double na = a.norm(), nb = b.norm();
    if (na == 0.0 && nb == 0.0)
        return 0.0;
    if (na == 0.0 || nb == 0.0)
        return 1.0;
    return 1.0 - a.dot(b) / (na * nb);
}

std::vector<Candidate> rank_successors(const Vector &target, std::vector<Successor> succ, const StateEncoder &encoder,
                                       Distance kind) {
    std::vector<Candidate> out;
    out.reserve(succ.size());
    for (auto &s : succ) {
        Vector e = encoder.embed(s.state);
        out.push_back({s.action, std::move(s.state), distance(kind, e, target)});
    }
    std::stable_sort(out.begin(), out.end(), [](const Candidate &a, const Candidate &b) {
        if (a.distance != b.distance)
            return a.distance < b.distance;
        return a.action < b.action;
    });
    return out;
}

Candidate select_successor(const Vector &target, std::vector<Successor> candidates, const StateEncoder &encoder,
                           Distance kind) {
    if (candidates.empty())
        throw Error("select_successor: no candidates");
    return rank_successors(target, std::move(candidates), encoder, kind).front();
}

namespace {

struct Beam {
    SymbolicState state;
    ModelMemory memory;
    std::vector<ActionId> plan;
    std::vector<DecodeStep> steps;
    std::set<SymbolicState> seen;
    double cost = 0.0;
};

// Drops revisits unless every candidate is one.
void apply_revisit_policy(std::vector<Candidate> &ranked, const Beam &beam, RevisitPolicy policy) {
    if (policy == RevisitPolicy::Allow)
        return;
    std::vector<Candidate> fresh;
    for (auto &c : ranked)
        if (!beam.seen.count(c.state))
            fresh.push_back(c);
    if (!fresh.empty())
        ranked = std::move(fresh);
}

RolloutResult finish(const GroundedTask &task, Beam &beam, Outcome outcome, std::size_t calls) {
    RolloutResult r;
    r.plan = std::move(beam.plan);
    r.steps = std::move(beam.steps);
    r.visited = r.plan.size();
    r.model_calls = calls;
    r.outcome = outcome;
    // Success is only reported for plans the validator accepts.
    if (outcome == Outcome::Success && !validate(task, r.plan))
        throw Error("decoder produced a plan that does not validate");
    return r;
}

RolloutResult run(const GroundedTask &task, const TransitionModel &model, const StateEncoder &encoder,
                  const DecodeConfig &config, int width) {
    if (width < 1 || config.max_steps < 1)
        throw Error("decode: beam width and max steps must be positive");
    const Vector &goal = encoder.goal();
    if (goal.size() != model.dim())
        throw Error("decode: model width " + std::to_string(model.dim()) + " does not match encoder width " +
                    std::to_string(goal.size()));
    const Distance kind = config.distance.value_or(default_distance(model.mode()));
    std::size_t calls = 0;

    Beam start{task.initial(), model.initial_memory(), {}, {}, {task.initial()}, 0.0};
    if (goal_satisfied(start.state, task.goal()))
        return finish(task, start, Outcome::Success, calls);
    std::vector<Beam> beams{std::move(start)};

    for (int step = 0; step < config.max_steps; ++step) {
        std::vector<Beam> children;
        for (auto &beam : beams) {
            auto succ = successors(beam.state, task);
            if (succ.empty())
                continue;
            const std::size_t count = succ.size();
            ModelMemory memory = beam.memory;
            Vector target = model.predict(encoder.embed(beam.state), goal, memory);
            ++calls;
            auto ranked = rank_successors(target, std::move(succ), encoder, kind);
            apply_revisit_policy(ranked, beam, config.revisit);
            const auto keep = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(width));
            for (std::size_t i = 0; i < keep; ++i) {
                Beam child{ranked[i].state, memory, beam.plan, beam.steps, beam.seen, beam.cost + ranked[i].distance};
                child.plan.push_back(ranked[i].action);
                child.steps.push_back({ranked[i].action, ranked[i].distance, count});
                child.seen.insert(ranked[i].state);
                children.push_back(std::move(child));
            }
        }
        if (children.empty()) {
            // Every rollout dead-ended; report the best-ranked one.
            return finish(task, beams.front(), Outcome::DeadEnd, calls);
        }
        std::stable_sort(children.begin(), children.end(),
                         [](const Beam &a, const Beam &b) { return a.cost < b.cost; });
        for (auto &c : children)
            if (goal_satisfied(c.state, task.goal()))
                return finish(task, c, Outcome::Success, calls);
        // One rollout per distinct state; the best-ranked one survives.
        std::vector<Beam> next;
        std::set<SymbolicState> kept;
        for (auto &c : children) {
            if (next.size() == static_cast<std::size_t>(width))
                break;
            if (kept.insert(c.state).second)
                next.push_back(std::move(c));
        }
        beams = std::move(next);
    }
    return finish(task, beams.front(), Outcome::HorizonExceeded, calls);
}

}  // namespace

RolloutResult decode(const GroundedTask &task, const TransitionModel &model, const StateEncoder &encoder,
                     const DecodeConfig &config) {
    return run(task, model, encoder, config, 1);
}

RolloutResult beam_decode(const GroundedTask &task, const TransitionModel &model, const StateEncoder &encoder,
                          const DecodeConfig &config) {
    return run(task, model, encoder, config, config.beam_width);
}

std::string format_rollout_log(const GroundedTask &task, const RolloutResult &result) {
    std::ostringstream out;
    for (std::size_t i = 0; i < result.steps.size(); ++i) {
        const auto &s = result.steps[i];
        out << (i + 1) << ' ' << task.actions()[s.action].name << " dist=" << format_double(s.distance)
            << " |succ|=" << s.successors << '\n';
    }
    return out.str();
}

}  // namespace gplan
