#include "gplan/encoders.hpp"

#include "gplan/error.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace gplan {

FsfDomain fsf_domain_of(const GroundedTask &task) {
    const auto &name = task.domain().name;
    if (name == "blocksworld" || name == "blocks")
        return FsfDomain::Blocksworld;
    if (name == "gripper" || name == "gripper-strips")
        return FsfDomain::Gripper;
    if (name == "logistics")
        return FsfDomain::Logistics;
    if (name == "grid-visit-all" || name == "visitall")
        return FsfDomain::VisitAll;
    throw Error("no FSF layout for domain '" + name + "'");
}

namespace {

std::vector<int> objects_of(const GroundedTask &task, std::initializer_list<const char *> types) {
    std::vector<int> out;
    for (const char *t : types) {
        auto objs = task.objects_of_type(t);
        out.insert(out.end(), objs.begin(), objs.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// 1-based ordinal of each object within `members`, 0 elsewhere.
std::vector<int> ordinals(const GroundedTask &task, const std::vector<int> &members) {
    std::vector<int> ord(task.objects().size(), 0);
    for (std::size_t i = 0; i < members.size(); ++i)
        ord[members[i]] = static_cast<int>(i) + 1;
    return ord;
}

struct Encoder {
    const GroundedTask &task;
    FsfDomain domain;
    std::vector<int> slots;
    std::vector<int> slot_of;     // object -> slot (1-based) or 0
    std::vector<int> place_of;    // rooms / locations -> 1-based index
    std::vector<int> holder_of;   // grippers / vehicles -> 1-based index
    std::vector<int> ball_of;

    Encoder(const GroundedTask &t, FsfDomain d) : task(t), domain(d) {
        slots = fsf_slot_objects(t);
        slot_of = ordinals(t, slots);
        switch (d) {
        case FsfDomain::Blocksworld:
            break;
        case FsfDomain::Gripper:
            place_of = ordinals(t, objects_of(t, {"room"}));
            holder_of = ordinals(t, objects_of(t, {"gripper"}));
            ball_of = ordinals(t, objects_of(t, {"ball"}));
            break;
        case FsfDomain::Logistics:
            place_of = ordinals(t, objects_of(t, {"place"}));
            holder_of = ordinals(t, objects_of(t, {"vehicle"}));
            break;
        case FsfDomain::VisitAll:
            break;
        }
    }

    // Writes the slot values implied by `atoms` into v (which is pre-filled).
    void fill(std::span<const AtomId> atoms, Vector &v) const {
        const auto &preds = task.domain().predicates;
        for (AtomId a : atoms) {
            const auto &atom = task.atoms()[a];
            const std::string &p = preds[atom.predicate].name;
            const auto &args = atom.args;
            switch (domain) {
            case FsfDomain::Blocksworld:
                if (p == "on")
                    v[slot_of[args[0]]] = slot_of[args[1]];
                else if (p == "ontable")
                    v[slot_of[args[0]]] = 0;
                else if (p == "holding")
                    v[slot_of[args[0]]] = -1;
                break;
            case FsfDomain::Gripper:
                if (p == "at-robby")
                    v[0] = place_of[args[1]];
                else if (p == "at")
                    v[slot_of[args[0]]] = place_of[args[1]];
                else if (p == "carry") {
                    v[slot_of[args[1]]] = -holder_of[args[2]];
                    v[slot_of[args[2]]] = ball_of[args[1]];
                } else if (p == "free")
                    v[slot_of[args[1]]] = 0;
                break;
            case FsfDomain::Logistics:
                if (p == "at" && slot_of[args[0]])
                    v[slot_of[args[0]]] = place_of[args[1]];
                else if (p == "in")
                    v[slot_of[args[0]]] = -holder_of[args[1]];
                break;
            case FsfDomain::VisitAll:
                if (p == "at-robot")
                    v[0] = slot_of[args[0]];
                else if (p == "visited")
                    v[slot_of[args[0]]] = 1;
                break;
            }
        }
    }
};

}  // namespace

std::vector<int> fsf_slot_objects(const GroundedTask &task) {
    switch (fsf_domain_of(task)) {
    case FsfDomain::Blocksworld:
        return objects_of(task, {"block"});
    case FsfDomain::Gripper:
        return objects_of(task, {"ball", "gripper"});
    case FsfDomain::Logistics:
        return objects_of(task, {"physobj"});
    case FsfDomain::VisitAll:
        return objects_of(task, {"place"});
    }
    return {};
}

FsfLayout make_fsf_layout(std::span<const GroundedTask *const> tasks) {
    if (tasks.empty())
        throw Error("FSF layout needs at least one task");
    FsfLayout layout;
    layout.domain = fsf_domain_of(*tasks.front());
    for (const auto *t : tasks) {
        if (fsf_domain_of(*t) != layout.domain)
            throw Error("FSF layout over tasks of different domains");
        layout.N = std::max(layout.N, static_cast<int>(fsf_slot_objects(*t).size()));
    }
    return layout;
}

std::pair<Vector, Vector> embed_fsf(const SymbolicState &state, std::span<const AtomId> goal,
                                    const GroundedTask &task, const FsfLayout &layout) {
    if (fsf_domain_of(task) != layout.domain)
        throw Error("FSF layout belongs to a different domain");
    Encoder enc(task, layout.domain);
    const auto used = enc.slots.size();
    if (used > static_cast<std::size_t>(layout.N))
        throw CapacityExceeded(used, layout.N);

    const auto width = static_cast<Eigen::Index>(layout.width());
    Vector s = Vector::Constant(width, kFsfPadding);
    Vector g = Vector::Constant(width, kFsfPadding);
    for (std::size_t i = 1; i <= used; ++i) {
        s[static_cast<Eigen::Index>(i)] = 0.0;
        g[static_cast<Eigen::Index>(i)] = kFsfDontCare;
    }
    const bool slot0_constant = layout.domain == FsfDomain::Blocksworld || layout.domain == FsfDomain::Logistics;
    s[0] = 0.0;
    g[0] = slot0_constant ? 0.0 : kFsfDontCare;
    enc.fill(state.atoms(), s);
    enc.fill(goal, g);
    return {std::move(s), std::move(g)};
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc())
        throw Error("cannot format double");
    return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
    double value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw FormatError("bad number '" + std::string(text) + "'");
    return value;
}

std::string write_matrix(const Matrix &m) {
    std::string out = "EMB1 " + std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c)
                out += ' ';
            out += format_double(m(r, c));
        }
        out += '\n';
    }
    return out;
}

Matrix read_matrix(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string magic;
    long rows = -1, cols = -1;
    in >> magic >> rows >> cols;
    if (magic != "EMB1" || rows < 0 || cols < 0)
        throw FormatError("expected 'EMB1 <rows> <cols>' header");
    Matrix m(rows, cols);
    std::string token;
    for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c) {
            if (!(in >> token))
                throw FormatError("EMB1 matrix truncated at row " + std::to_string(r));
            m(r, c) = parse_double(token);
        }
    if (in >> token)
        throw FormatError("trailing data after EMB1 matrix");
    return m;
}

}  // namespace gplan
