#include "gplan/generators.hpp"

#include "gplan/error.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace gplan {

namespace {

using Rng = std::mt19937_64;

std::size_t pick(Rng &rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

// Random partition of blocks 1..n into towers (bottom first).
std::vector<std::vector<int>> random_towers(int n, Rng &rng) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 1);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<int>> towers;
    for (int b : order) {
        if (towers.empty() || pick(rng, 3) == 0)
            towers.push_back({b});
        else
            towers[pick(rng, towers.size())].push_back(b);
    }
    return towers;
}

std::string block(int i) { return "b" + std::to_string(i); }

std::string blocksworld(int n, Rng &rng, const std::string &name) {
    if (n < 1)
        throw Error("blocksworld needs at least one block");
    auto init = random_towers(n, rng);
    std::vector<std::vector<int>> goal;
    // Resample until the goal has an (on) atom not already true, when possible.
    for (int attempt = 0; attempt < 100; ++attempt) {
        goal = random_towers(n, rng);
        bool differs = false;
        for (auto &t : goal)
            for (std::size_t i = 1; i < t.size(); ++i) {
                bool held = false;
                for (auto &s : init)
                    for (std::size_t j = 1; j < s.size(); ++j)
                        held = held || (s[j] == t[i] && s[j - 1] == t[i - 1]);
                differs = differs || !held;
            }
        if (differs || n == 1)
            break;
    }
    std::string text = "(define (problem " + name + ") (:domain blocksworld)\n  (:objects";
    for (int i = 1; i <= n; ++i)
        text += " " + block(i);
    text += " - block)\n  (:init (handempty)";
    for (auto &t : init) {
        text += " (ontable " + block(t[0]) + ")";
        for (std::size_t i = 1; i < t.size(); ++i)
            text += " (on " + block(t[i]) + " " + block(t[i - 1]) + ")";
        text += " (clear " + block(t.back()) + ")";
    }
    text += ")\n  (:goal (and";
    bool any = false;
    for (auto &t : goal)
        for (std::size_t i = 1; i < t.size(); ++i) {
            text += " (on " + block(t[i]) + " " + block(t[i - 1]) + ")";
            any = true;
        }
    if (!any)
        for (auto &t : goal)
            text += " (ontable " + block(t[0]) + ")";
    text += ")))\n";
    return text;
}

std::string gripper(int n, const std::string &name) {
    if (n < 1)
        throw Error("gripper needs at least one ball");
    std::string text = "(define (problem " + name + ") (:domain gripper)\n  (:objects robot1 - robot rooma roomb - room "
                       "left right - gripper";
    for (int i = 1; i <= n; ++i)
        text += " ball" + std::to_string(i);
    text += " - ball)\n  (:init (at-robby robot1 rooma) (free robot1 left) (free robot1 right)";
    for (int i = 1; i <= n; ++i)
        text += " (at ball" + std::to_string(i) + " rooma)";
    text += ")\n  (:goal (and";
    for (int i = 1; i <= n; ++i)
        text += " (at ball" + std::to_string(i) + " roomb)";
    text += ")))\n";
    return text;
}

std::string logistics(int packages, Rng &rng, const std::string &name) {
    if (packages < 1)
        throw Error("logistics needs at least one package");
    const int cities = 2 + static_cast<int>(pick(rng, 2));
    std::vector<std::string> places;
    std::string objects, init;
    for (int c = 1; c <= cities; ++c) {
        auto city = "city" + std::to_string(c), apt = "apt" + std::to_string(c), pos = "pos" + std::to_string(c);
        places.push_back(apt);
        places.push_back(pos);
        init += " (in-city " + apt + " " + city + ") (in-city " + pos + " " + city + ")";
        init += " (at truck" + std::to_string(c) + " " + (pick(rng, 2) ? apt : pos) + ")";
    }
    init += " (at plane1 apt" + std::to_string(1 + pick(rng, cities)) + ")";
    std::string goal;
    for (int p = 1; p <= packages; ++p) {
        auto pkg = "pkg" + std::to_string(p);
        std::size_t from = pick(rng, places.size()), to = pick(rng, places.size() - 1);
        if (to >= from)
            ++to;
        init += " (at " + pkg + " " + places[from] + ")";
        goal += " (at " + pkg + " " + places[to] + ")";
    }
    objects += "   ";
    for (int c = 1; c <= cities; ++c)
        objects += " city" + std::to_string(c);
    objects += " - city\n   ";
    for (int c = 1; c <= cities; ++c)
        objects += " apt" + std::to_string(c);
    objects += " - airport\n   ";
    for (int c = 1; c <= cities; ++c)
        objects += " pos" + std::to_string(c);
    objects += " - location\n   ";
    for (int c = 1; c <= cities; ++c)
        objects += " truck" + std::to_string(c);
    objects += " - truck\n    plane1 - airplane\n   ";
    for (int p = 1; p <= packages; ++p)
        objects += " pkg" + std::to_string(p);
    objects += " - package";
    return "(define (problem " + name + ") (:domain logistics)\n  (:objects\n" + objects + ")\n  (:init" + init +
           ")\n  (:goal (and" + goal + ")))\n";
}

std::string visitall(int cells, Rng &rng, const std::string &name) {
    if (cells < 1)
        throw Error("visitall needs at least one cell");
    auto [rows, cols] = visitall_grid_shape(cells);
    auto cell = [](int r, int c) { return "c-" + std::to_string(r) + "-" + std::to_string(c); };
    std::string objects, init, goal;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            objects += " " + cell(r, c);
            goal += " (visited " + cell(r, c) + ")";
            if (r + 1 < rows)
                init += " (connected " + cell(r, c) + " " + cell(r + 1, c) + ") (connected " + cell(r + 1, c) + " " +
                        cell(r, c) + ")";
            if (c + 1 < cols)
                init += " (connected " + cell(r, c) + " " + cell(r, c + 1) + ") (connected " + cell(r, c + 1) + " " +
                        cell(r, c) + ")";
        }
    auto start = pick(rng, static_cast<std::size_t>(cells));
    auto at = cell(static_cast<int>(start) / cols, static_cast<int>(start) % cols);
    return "(define (problem " + name + ") (:domain grid-visit-all)\n  (:objects" + objects + " - place)\n  (:init (at-robot " +
           at + ") (visited " + at + ")" + init + ")\n  (:goal (and" + goal + ")))\n";
}

}  // namespace

std::pair<int, int> visitall_grid_shape(int cells) {
    int rows = 1;
    for (int r = 1; r * r <= cells; ++r)
        if (cells % r == 0)
            rows = r;
    return {rows, cells / rows};
}

std::uint64_t instance_seed(std::uint64_t base, std::string_view domain, int size, int index) {
    std::uint64_t h = base ^ 0x9e3779b97f4a7c15ull;
    auto mix = [&h](std::uint64_t v) {
        h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        h *= 0xff51afd7ed558ccdull;
        h ^= h >> 33;
    };
    for (char c : domain)
        mix(static_cast<unsigned char>(c));
    mix(static_cast<std::uint64_t>(size));
    mix(static_cast<std::uint64_t>(index));
    return h;
}

std::string generate_problem(std::string_view domain, int size, std::uint64_t seed, const std::string &name) {
    Rng rng(seed);
    if (domain == "blocksworld")
        return blocksworld(size, rng, name);
    if (domain == "gripper")
        return gripper(size, name);
    if (domain == "logistics")
        return logistics(size, rng, name);
    if (domain == "visitall")
        return visitall(size, rng, name);
    throw Error("no generator for domain '" + std::string(domain) + "'");
}

}  // namespace gplan
