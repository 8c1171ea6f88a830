#include "gplan/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace gplan {

namespace {

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string join_seeds(std::span<const std::uint64_t> seeds) {
    std::string out;
    for (auto s : seeds)
        out += (out.empty() ? "" : ",") + std::to_string(s);
    return out;
}

std::vector<std::string> split_on(const std::string &text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, sep))
        out.push_back(cur);
    return out;
}

std::string xml_escape(const std::string &s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

}  // namespace

std::string SplitCoverage::formatted() const {
    if (empty())
        return std::string(kZeroDenominator);
    return fixed2(mean) + " ± " + fixed2(stddev);
}

const SplitCoverage *CoverageReport::find(SplitName split) const {
    for (const auto &s : splits)
        if (s.split == split)
            return &s;
    return nullptr;
}

CoverageReport compute_coverage(const std::string &domain, const std::string &label,
                                std::span<const InstanceOutcome> outcomes, std::span<const std::uint64_t> seeds,
                                std::span<const SplitName> splits) {
    if (seeds.empty())
        throw Error("coverage needs at least one seed");
    CoverageReport report;
    report.domain = domain;
    report.label = label;
    report.seeds.assign(seeds.begin(), seeds.end());
    report.outcomes.assign(outcomes.begin(), outcomes.end());
    for (const auto &o : outcomes)
        if (std::find(seeds.begin(), seeds.end(), o.seed) == seeds.end())
            throw Error("outcome for " + o.problem + " has seed " + std::to_string(o.seed) +
                        " outside the configured seeds");
    for (auto split : splits) {
        SplitCoverage c;
        c.split = split;
        std::vector<std::size_t> totals, wins;
        for (auto seed : seeds) {
            std::size_t n = 0, k = 0;
            for (const auto &o : outcomes)
                if (o.split == split && o.seed == seed) {
                    ++n;
                    k += o.success() ? 1 : 0;
                }
            totals.push_back(n);
            wins.push_back(k);
        }
        if (std::adjacent_find(totals.begin(), totals.end(), std::not_equal_to<>()) != totals.end())
            throw Error("seed-count mismatch on split " + std::string(to_string(split)) +
                        ": seeds have different numbers of outcomes");
        c.instances = totals.front();
        if (c.instances > 0) {
            for (std::size_t i = 0; i < seeds.size(); ++i)
                c.per_seed.push_back(static_cast<double>(wins[i]) / static_cast<double>(c.instances));
            double sum = 0.0;
            for (double r : c.per_seed)
                sum += r;
            c.mean = sum / static_cast<double>(c.per_seed.size());
            double sq = 0.0;
            for (double r : c.per_seed)
                sq += (r - c.mean) * (r - c.mean);
            c.stddev = std::sqrt(sq / static_cast<double>(c.per_seed.size()));
        }
        report.splits.push_back(std::move(c));
    }
    return report;
}

std::string write_outcomes(const CoverageReport &report) {
    std::string splits;
    for (const auto &s : report.splits)
        splits += (splits.empty() ? "" : ",") + std::string(to_string(s.split));
    std::string out = "#gplan-outcomes\tdomain=" + report.domain + "\tlabel=" + report.label +
                      "\tseeds=" + join_seeds(report.seeds) + "\tsplits=" + splits + "\n";
    for (const auto &f : report.failures) {
        std::string line = f;
        std::replace(line.begin(), line.end(), '\n', ' ');
        out += "#failure\t" + line + "\n";
    }
    out += "#split\tproblem\tsize\tseed\tstatus\tplan_length\tseconds\tmean_distance\toov_fraction\n";
    for (const auto &o : report.outcomes) {
        out += std::string(to_string(o.split)) + "\t" + o.problem + "\t" + std::to_string(o.size) + "\t" +
               std::to_string(o.seed) + "\t" + o.status + "\t" + std::to_string(o.plan_length) + "\t" +
               format_double(o.seconds) + "\t" + format_double(o.mean_distance) + "\t" +
               format_double(o.oov_fraction) + "\n";
    }
    return out;
}

CoverageReport read_outcomes(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line.rfind("#gplan-outcomes", 0) != 0)
        throw Error("not an outcomes file (missing #gplan-outcomes header)");
    std::string domain, label;
    std::vector<std::uint64_t> seeds;
    std::vector<SplitName> splits;
    for (const auto &field : split_on(line, '\t')) {
        auto eq = field.find('=');
        if (eq == std::string::npos)
            continue;
        const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
        if (key == "domain") domain = value;
        else if (key == "label") label = value;
        else if (key == "seeds")
            for (const auto &s : split_on(value, ','))
                seeds.push_back(std::stoull(s));
        else if (key == "splits")
            for (const auto &s : split_on(value, ','))
                splits.push_back(parse_split_name(s));
    }
    std::vector<InstanceOutcome> outcomes;
    std::vector<std::string> failures;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        if (line.rfind("#failure\t", 0) == 0) {
            failures.push_back(line.substr(9));
            continue;
        }
        if (line[0] == '#')
            continue;
        auto f = split_on(line, '\t');
        if (f.size() != 9)
            throw Error("outcomes row has " + std::to_string(f.size()) + " fields, expected 9");
        InstanceOutcome o;
        o.split = parse_split_name(f[0]);
        o.problem = f[1];
        o.size = std::stoi(f[2]);
        o.seed = std::stoull(f[3]);
        o.status = f[4];
        o.plan_length = std::stoull(f[5]);
        o.seconds = parse_double(f[6]);
        o.mean_distance = parse_double(f[7]);
        o.oov_fraction = parse_double(f[8]);
        outcomes.push_back(std::move(o));
    }
    auto report = compute_coverage(domain, label, outcomes, seeds, splits);
    report.failures = std::move(failures);
    return report;
}

namespace {

std::vector<std::string> labels_of(std::span<const CoverageReport> reports) {
    std::vector<std::string> out;
    for (const auto &r : reports)
        if (std::find(out.begin(), out.end(), r.label) == out.end())
            out.push_back(r.label);
    return out;
}

std::vector<std::pair<std::string, SplitName>> rows_of(std::span<const CoverageReport> reports) {
    std::vector<std::pair<std::string, SplitName>> out;
    for (const auto &r : reports)
        for (const auto &s : r.splits) {
            std::pair<std::string, SplitName> key{r.domain, s.split};
            if (std::find(out.begin(), out.end(), key) == out.end())
                out.push_back(key);
        }
    return out;
}

const SplitCoverage *cell(std::span<const CoverageReport> reports, const std::string &domain, SplitName split,
                          const std::string &label) {
    for (const auto &r : reports)
        if (r.domain == domain && r.label == label)
            if (auto *c = r.find(split))
                return c;
    return nullptr;
}

// Display width of a UTF-8 string (counts code points).
std::size_t width(const std::string &s) {
    std::size_t n = 0;
    for (unsigned char c : s)
        n += (c & 0xC0) != 0x80;
    return n;
}

std::string pad(const std::string &s, std::size_t w) { return s + std::string(w > width(s) ? w - width(s) : 0, ' '); }

}  // namespace

std::string format_report_table(std::span<const CoverageReport> reports) {
    auto labels = labels_of(reports);
    auto rows = rows_of(reports);
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header{"domain", "split"};
    header.insert(header.end(), labels.begin(), labels.end());
    grid.push_back(header);
    for (const auto &[domain, split] : rows) {
        std::vector<std::string> line{domain, std::string(to_string(split))};
        for (const auto &l : labels) {
            auto *c = cell(reports, domain, split, l);
            line.push_back(c ? c->formatted() : "-");
        }
        grid.push_back(line);
    }
    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto &line : grid)
        for (std::size_t i = 0; i < line.size(); ++i)
            widths[i] = std::max(widths[i], width(line[i]));
    std::string out;
    for (std::size_t r = 0; r < grid.size(); ++r) {
        std::string line;
        for (std::size_t i = 0; i < grid[r].size(); ++i)
            line += (i ? "  " : "") + pad(grid[r][i], widths[i]);
        while (!line.empty() && line.back() == ' ')
            line.pop_back();
        out += line + "\n";
        if (r == 0) {
            std::size_t total = 0;
            for (auto w : widths)
                total += w + 2;
            out += std::string(total - 2, '-') + "\n";
        }
    }
    return out;
}

std::string format_report_tsv(std::span<const CoverageReport> reports) {
    std::string out = "domain\tconfig\tsplit\tinstances\tmean\tstd\tper_seed\n";
    for (const auto &r : reports)
        for (const auto &s : r.splits) {
            std::string per;
            for (double v : s.per_seed)
                per += (per.empty() ? "" : ",") + format_double(v);
            out += r.domain + "\t" + r.label + "\t" + std::string(to_string(s.split)) + "\t" +
                   std::to_string(s.instances) + "\t" +
                   (s.empty() ? std::string(kZeroDenominator) : format_double(s.mean)) + "\t" +
                   (s.empty() ? std::string(kZeroDenominator) : format_double(s.stddev)) + "\t" + per + "\n";
        }
    return out;
}

std::string render_split_svg(std::span<const CoverageReport> reports, SplitName split) {
    struct Bar {
        std::string name;
        const SplitCoverage *c;
    };
    std::vector<Bar> bars;
    for (const auto &r : reports)
        if (auto *c = r.find(split))
            bars.push_back({r.domain + " " + r.label, c});
    const int bw = 36, gap = 18, left = 50, top = 30, plot_h = 200, bottom = 150;
    const int w = left + static_cast<int>(bars.size()) * (bw + gap) + gap;
    const int h = top + plot_h + bottom;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<text x=\"" << left << "\" y=\"18\" font-size=\"13\">coverage: " << to_string(split) << "</text>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double y = top + plot_h - plot_h * tick / 4.0;
        svg << "<line x1=\"" << left << "\" x2=\"" << w - gap / 2 << "\" y1=\"" << y << "\" y2=\"" << y
            << "\" stroke=\"#ddd\"/>\n";
        svg << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << fixed2(tick / 4.0)
            << "</text>\n";
    }
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const auto &b = bars[i];
        const int x = left + gap + static_cast<int>(i) * (bw + gap);
        const double mean = b.c->empty() ? 0.0 : b.c->mean;
        const double bh = plot_h * mean;
        svg << "<rect x=\"" << x << "\" y=\"" << top + plot_h - bh << "\" width=\"" << bw << "\" height=\"" << bh
            << "\" fill=\"#4c78a8\"/>\n";
        if (!b.c->empty()) {
            const double lo = std::max(0.0, mean - b.c->stddev), hi = std::min(1.0, mean + b.c->stddev);
            const double cx = x + bw / 2.0;
            svg << "<line x1=\"" << cx << "\" x2=\"" << cx << "\" y1=\"" << top + plot_h - plot_h * lo
                << "\" y2=\"" << top + plot_h - plot_h * hi << "\" stroke=\"#000\"/>\n";
        }
        svg << "<text x=\"" << x + bw / 2.0 << "\" y=\"" << top + plot_h - bh - 4 << "\" text-anchor=\"middle\">"
            << xml_escape(b.c->empty() ? std::string(kZeroDenominator) : fixed2(mean)) << "</text>\n";
        svg << "<text transform=\"translate(" << x + bw / 2.0 << "," << top + plot_h + 10
            << ") rotate(60)\">" << xml_escape(b.name) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string calibration_report(Workspace &ws, const ExperimentConfig &config, const CoverageReport &report) {
    std::ostringstream out;
    out << "calibration: " << report.domain << " " << report.label << "\n";
    auto summary = [](std::vector<double> v) {
        if (v.empty())
            return std::string("none");
        std::sort(v.begin(), v.end());
        double sum = 0.0;
        for (double x : v)
            sum += x;
        char buf[160];
        std::snprintf(buf, sizeof buf, "n=%zu min=%.4g median=%.4g mean=%.4g max=%.4g", v.size(), v.front(),
                      v[v.size() / 2], sum / static_cast<double>(v.size()), v.back());
        return std::string(buf);
    };

    out << "expert plan lengths:\n";
    for (auto split : {SplitName::Train, SplitName::Validation}) {
        std::vector<double> lengths;
        std::size_t missing = 0;
        for (const auto &e : ws.entries(split)) {
            if (auto plan = ws.expert_plan(e, config.expert_tiers))
                lengths.push_back(static_cast<double>(plan->size()));
            else
                ++missing;
        }
        out << "  " << to_string(split) << ": " << summary(lengths) << " unsolved=" << missing << "\n";
    }

    out << "decoded instances by split:\n";
    for (const auto &s : report.splits) {
        std::map<std::string, std::size_t> status;
        std::vector<double> oov, dist, success_len, sizes_ok, sizes_fail;
        for (const auto &o : report.outcomes) {
            if (o.split != s.split)
                continue;
            ++status[o.status];
            oov.push_back(o.oov_fraction);
            if (o.status == "success" || o.status == "horizon-exceeded" || o.status == "dead-end")
                dist.push_back(o.mean_distance);
            if (o.success()) {
                success_len.push_back(static_cast<double>(o.plan_length));
                sizes_ok.push_back(o.size);
            } else {
                sizes_fail.push_back(o.size);
            }
        }
        out << "  " << to_string(s.split) << " coverage " << s.formatted() << "\n";
        out << "    status:";
        for (const auto &[k, v] : status)
            out << " " << k << "=" << v;
        out << "\n";
        out << "    OOV mass of s0: " << summary(oov) << "\n";
        out << "    mean per-step distance: " << summary(dist) << "\n";
        out << "    successful plan lengths: " << summary(success_len) << "\n";
        out << "    sizes solved: " << summary(sizes_ok) << "\n";
        out << "    sizes failed: " << summary(sizes_fail) << "\n";
    }
    return out.str();
}

}  // namespace gplan
