#include "gplan/domains.hpp"
#include "gplan/generators.hpp"
#include "gplan/harness.hpp"
#include "gplan/log.hpp"

#include <algorithm>
#include <cstdio>

namespace gplan {

std::vector<std::string> harness_domains() { return {"blocksworld", "gripper", "logistics", "visitall"}; }

namespace {

// `count` instances spread over `sizes`, earlier sizes taking the remainder.
std::vector<int> spread(const std::vector<int> &sizes, int count) {
    std::vector<int> out;
    const int n = static_cast<int>(sizes.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < count / n + (i < count % n ? 1 : 0); ++j)
            out.push_back(sizes[i]);
    return out;
}

std::vector<int> range(int lo, int hi, int step = 1) {
    std::vector<int> out;
    for (int v = lo; v <= hi; v += step)
        out.push_back(v);
    return out;
}

// `count` sizes evenly spaced over [lo, hi].
std::vector<int> linspace(int lo, int hi, int count) {
    std::vector<int> out;
    for (int i = 0; i < count; ++i)
        out.push_back(lo + static_cast<int>(static_cast<long long>(hi - lo) * i / std::max(1, count - 1)));
    return out;
}

}  // namespace

std::vector<SplitSpec> default_split_specs(std::string_view domain, std::string_view profile) {
    using S = SplitName;
    if (profile != "ci" && profile != "full")
        throw Error("unknown split profile '" + std::string(profile) + "' (expected ci or full)");
    if (domain == "blocksworld")
        return {{S::Train, spread({4, 6, 7}, 9)},
                {S::Validation, spread({8}, 3)},
                {S::Interpolation, spread({5}, 3)},
                {S::Extrapolation, spread(range(9, 17), 20)}};
    if (domain == "gripper")
        return {{S::Train, {2, 4, 6, 8}},
                {S::Validation, {9, 10}},
                {S::Interpolation, {3, 5, 7}},
                {S::Extrapolation, range(12, 42, 2)}};
    if (domain == "logistics")
        return {{S::Train, spread({1, 3, 5}, 12)},
                {S::Validation, spread({6}, 4)},
                {S::Interpolation, spread({2, 4}, 9)},
                {S::Extrapolation, spread(range(7, 15), 18)}};
    if (domain == "visitall") {
        const std::vector<int> train{1, 3, 4, 6, 10, 11, 12, 14, 16};
        if (profile == "full")
            return {{S::Train, spread(train, 207)},
                    {S::Validation, spread({18, 20}, 24)},
                    {S::Interpolation, spread({2, 5, 8, 9, 15}, 37)},
                    {S::Extrapolation, spread(range(24, 121), 219)}};
        return {{S::Train, spread(train, 63)},
                {S::Validation, spread({18, 20}, 8)},
                {S::Interpolation, spread({2, 5, 8, 9, 15}, 10)},
                {S::Extrapolation, linspace(24, 60, 40)}};
    }
    throw Error("no default splits for domain '" + std::string(domain) + "'");
}

int instance_size(std::string_view domain, const GroundedTask &task) {
    if (domain == "blocksworld")
        return static_cast<int>(task.objects_of_type("block").size());
    if (domain == "gripper")
        return static_cast<int>(task.objects_of_type("ball").size());
    if (domain == "logistics")
        return static_cast<int>(task.goal().size());
    if (domain == "visitall")
        return static_cast<int>(task.objects_of_type("place").size());
    return static_cast<int>(task.objects().size());
}

std::vector<ManifestEntry> generate_dataset(const fs::path &domain_dir, std::string_view domain,
                                            const GenOptions &options) {
    const std::string domain_text(builtin_domain_text(domain));
    StageCache cache(domain_dir.parent_path() / "cache");
    std::vector<ManifestEntry> entries;
    write_file_atomic(domain_dir / "domain.pddl", domain_text);
    for (const auto &spec : default_split_specs(domain, options.profile)) {
        const std::string split(to_string(spec.split));
        const bool verify =
            options.verify && (spec.split == SplitName::Train || spec.split == SplitName::Validation);
        std::map<int, int> per_size;
        for (int size : spec.sizes) {
            const int index = per_size[size]++;
            char buf[128];
            std::snprintf(buf, sizeof buf, "%s-%s-%03d-%02d", std::string(domain).c_str(), split.c_str(), size, index);
            const std::string name = buf;
            std::string text;
            for (int attempt = 0;; ++attempt) {
                auto seed = instance_seed(options.seed, std::string(domain) + "/" + split, size, index + 1000 * attempt);
                text = generate_problem(domain, size, seed, name);
                if (!verify)
                    break;
                auto task = load_task(domain_text, text);
                if (cached_expert_plan(cache, domain_text, text, task, options.tiers))
                    break;
                log_warn("generated " + name + " is not solvable by the expert planner; regenerating");
                if (attempt == 9)
                    throw Error("could not generate a solvable instance for " + name);
            }
            const std::string rel = "problems/" + split + "/" + name + ".pddl";
            write_file_atomic(domain_dir / rel, text);
            entries.push_back({spec.split, std::string(domain), rel, size});
        }
    }
    check_split_integrity(entries);
    write_file_atomic(domain_dir / "manifest.tsv", write_manifest(entries));
    return entries;
}

std::vector<ManifestEntry> import_dataset(const fs::path &domain_dir, std::string_view domain, const fs::path &source) {
    std::string domain_text;
    if (fs::exists(source / "domain.pddl"))
        domain_text = read_file(source / "domain.pddl");
    else
        domain_text = std::string(builtin_domain_text(domain));
    write_file_atomic(domain_dir / "domain.pddl", domain_text);
    std::vector<ManifestEntry> entries;
    for (auto split : {SplitName::Train, SplitName::Validation, SplitName::Interpolation, SplitName::Extrapolation}) {
        const std::string name(to_string(split));
        fs::path dir = source / name;
        if (!fs::is_directory(dir))
            continue;
        std::vector<fs::path> files;
        for (const auto &e : fs::directory_iterator(dir))
            if (e.is_regular_file() && e.path().extension() == ".pddl")
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto &f : files) {
            std::string text = read_file(f);
            auto task = load_task(domain_text, text);
            const std::string rel = "problems/" + name + "/" + f.filename().string();
            write_file_atomic(domain_dir / rel, text);
            entries.push_back({split, std::string(domain), rel, instance_size(domain, task)});
        }
    }
    if (entries.empty())
        throw Error("no problems found under " + source.string());
    check_split_integrity(entries);
    write_file_atomic(domain_dir / "manifest.tsv", write_manifest(entries));
    return entries;
}

}  // namespace gplan
