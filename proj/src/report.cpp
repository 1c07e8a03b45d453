#include "fastread/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace fastread {

using nlohmann::json;

json to_json(const SimulationResult& result) {
    json trajectory = json::array();
    std::size_t last_found = 0;
    for (std::size_t k = 0; k < result.trajectory.size(); ++k) {
        const auto& [reviewed, found] = result.trajectory[k];
        if (found != last_found || k + 1 == result.trajectory.size()) {
            trajectory.push_back({reviewed, found});
            last_found = found;
        }
    }
    return json{{"treatment", result.treatment.to_string()},
                {"seed", result.seed},
                {"corpus", result.corpus},
                {"pool", result.pool},
                {"relevant", result.relevant},
                {"x95", result.x95},
                {"wss95", result.wss95},
                {"missed", result.missed},
                {"trajectory", trajectory}};
}

SimulationResult result_from_json(const json& j) {
    SimulationResult result;
    const auto code = TreatmentCode::parse(j.at("treatment").get<std::string>());
    if (!code) throw ReportError("unknown treatment in run log: " + j.at("treatment").dump());
    result.treatment = *code;
    result.seed = j.at("seed").get<std::uint64_t>();
    result.corpus = j.value("corpus", std::string());
    result.pool = j.at("pool").get<std::size_t>();
    result.relevant = j.value("relevant", std::size_t{0});
    result.x95 = j.at("x95").get<std::size_t>();
    result.wss95 = j.at("wss95").get<double>();
    result.missed = j.value("missed", std::vector<std::size_t>{});

    // expand the sparse curve back to one point per reviewed study
    std::size_t reviewed = 0;
    std::size_t found = 0;
    for (const auto& point : j.value("trajectory", json::array())) {
        const auto next_reviewed = point.at(0).get<std::size_t>();
        const auto next_found = point.at(1).get<std::size_t>();
        while (reviewed + 1 < next_reviewed) result.trajectory.emplace_back(++reviewed, found);
        reviewed = next_reviewed;
        found = next_found;
        result.trajectory.emplace_back(reviewed, found);
    }
    return result;
}

void append_run_log(const std::filesystem::path& path, const std::vector<SimulationResult>& results) {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw ReportError("cannot open run log " + path.string());
    for (const auto& r : results) out << to_json(r).dump() << '\n';
    out.flush();
    if (!out) throw ReportError("failed writing run log " + path.string());
}

std::vector<SimulationResult> read_run_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ReportError("cannot open run log " + path.string());
    std::vector<SimulationResult> results;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            results.push_back(result_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw ReportError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return results;
}

std::set<std::pair<std::string, std::uint64_t>> logged_keys(const std::filesystem::path& path) {
    std::set<std::pair<std::string, std::uint64_t>> keys;
    if (!std::filesystem::exists(path)) return keys;
    for (const auto& r : read_run_log(path)) keys.emplace(r.treatment.to_string(), r.seed);
    return keys;
}

RankReport rank_report(const std::vector<SimulationResult>& results, const ScottKnottOptions& options) {
    if (results.empty()) throw ReportError("no results to rank");
    RankReport report;
    report.corpus = results.front().corpus;
    report.pool = results.front().pool;

    std::map<std::string, std::vector<double>> x95;
    std::map<std::string, std::vector<double>> wss;
    for (const auto& r : results) {
        if (r.corpus != report.corpus || r.pool != report.pool) {
            throw ReportError("results come from different corpora (" + report.corpus + ", " +
                              r.corpus + ")");
        }
        const auto name = r.treatment.to_string();
        x95[name].push_back(static_cast<double>(r.x95));
        wss[name].push_back(r.wss95);
    }
    const std::size_t repeats = x95.begin()->second.size();
    for (const auto& [name, values] : x95) {
        if (values.size() != repeats) {
            throw ReportError("treatment " + name + " has " + std::to_string(values.size()) +
                              " repeats, expected " + std::to_string(repeats));
        }
    }

    for (const auto& group : scott_knott(x95, options)) {
        report.rows.push_back({group.treatment, group.rank, median_iqr(x95[group.treatment]),
                               median_iqr(wss[group.treatment]), repeats});
    }
    return report;
}

std::string format_table(const RankReport& report) {
    std::ostringstream out;
    out << report.corpus << " (" << report.pool << " candidates)\n";
    out << std::left << std::setw(6) << "rank" << std::setw(10) << "treatment" << std::right
        << std::setw(10) << "X95 med" << std::setw(10) << "X95 iqr" << std::setw(10) << "WSS med"
        << std::setw(10) << "WSS iqr" << '\n';
    out << std::fixed;
    for (const auto& row : report.rows) {
        out << std::left << std::setw(6) << row.rank << std::setw(10) << row.treatment
            << std::right << std::setprecision(0) << std::setw(10) << row.x95.median
            << std::setw(10) << row.x95.iqr << std::setprecision(2) << std::setw(10)
            << row.wss95.median << std::setw(10) << row.wss95.iqr << '\n';
    }
    return out.str();
}

json to_json(const RankReport& report) {
    json rows = json::array();
    for (const auto& row : report.rows) {
        rows.push_back({{"rank", row.rank},
                        {"treatment", row.treatment},
                        {"repeats", row.repeats},
                        {"x95_median", row.x95.median},
                        {"x95_iqr", row.x95.iqr},
                        {"wss95_median", row.wss95.median},
                        {"wss95_iqr", row.wss95.iqr}});
    }
    return json{{"corpus", report.corpus}, {"pool", report.pool}, {"rows", rows}};
}

std::vector<SimulationResult> median_runs(const std::vector<SimulationResult>& results) {
    std::map<std::string, std::vector<const SimulationResult*>> by_treatment;
    for (const auto& r : results) by_treatment[r.treatment.to_string()].push_back(&r);

    std::vector<SimulationResult> runs;
    for (auto& [name, group] : by_treatment) {
        std::sort(group.begin(), group.end(), [](const auto* a, const auto* b) {
            return a->x95 < b->x95 || (a->x95 == b->x95 && a->seed < b->seed);
        });
        // nearest-rank median position
        const std::size_t rank = (group.size() + 1) / 2;
        runs.push_back(*group[rank - 1]);
    }
    return runs;
}

std::string curves_csv(const std::vector<SimulationResult>& runs) {
    std::ostringstream out;
    out << "treatment,seed,reviewed,found\n";
    for (const auto& r : runs) {
        const auto name = r.treatment.to_string();
        out << name << ',' << r.seed << ",0,0\n";
        for (const auto& [reviewed, found] : r.trajectory) {
            out << name << ',' << r.seed << ',' << reviewed << ',' << found << '\n';
        }
    }
    return out.str();
}

std::string curves_svg(const std::vector<SimulationResult>& runs) {
    constexpr double width = 720;
    constexpr double height = 480;
    constexpr double left = 70;
    constexpr double right = 150;
    constexpr double top = 30;
    constexpr double bottom = 50;
    constexpr const char* palette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                       "#66a61e", "#e6ab02", "#a6761d", "#666666"};

    std::size_t max_x = 1;
    std::size_t max_y = 1;
    for (const auto& r : runs) {
        max_x = std::max(max_x, r.pool);
        max_y = std::max(max_y, r.relevant);
    }
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;
    auto sx = [&](double x) { return left + plot_w * x / static_cast<double>(max_x); };
    auto sy = [&](double y) { return top + plot_h * (1.0 - y / static_cast<double>(max_y)); };

    std::ostringstream out;
    out << std::fixed << std::setprecision(2);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
        << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << top + plot_h << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double fx = static_cast<double>(max_x) * tick / 4.0;
        const double fy = static_cast<double>(max_y) * tick / 4.0;
        out << "<text x=\"" << sx(fx) << "\" y=\"" << top + plot_h + 18
            << "\" text-anchor=\"middle\">" << static_cast<long>(fx) << "</text>\n";
        out << "<text x=\"" << left - 8 << "\" y=\"" << sy(fy) + 4 << "\" text-anchor=\"end\">"
            << static_cast<long>(fy) << "</text>\n";
    }
    out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
        << "\" text-anchor=\"middle\">Studies reviewed</text>\n";
    out << "<text transform=\"translate(18," << top + plot_h / 2
        << ") rotate(-90)\" text-anchor=\"middle\">Relevant studies found</text>\n";

    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& r = runs[i];
        const char* colour = palette[i % std::size(palette)];
        out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\""
            << sx(0) << ',' << sy(0);
        std::size_t last_found = 0;
        for (std::size_t k = 0; k < r.trajectory.size(); ++k) {
            const auto& [reviewed, found] = r.trajectory[k];
            if (found != last_found || k + 1 == r.trajectory.size()) {
                if (k > 0) out << ' ' << sx(static_cast<double>(reviewed) - 1) << ',' << sy(static_cast<double>(last_found));
                out << ' ' << sx(static_cast<double>(reviewed)) << ',' << sy(static_cast<double>(found));
                last_found = found;
            }
        }
        out << "\"/>\n";
        const double ly = top + 16.0 * static_cast<double>(i);
        out << "<line x1=\"" << width - right + 12 << "\" y1=\"" << ly << "\" x2=\""
            << width - right + 32 << "\" y2=\"" << ly << "\" stroke=\"" << colour
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << width - right + 38 << "\" y=\"" << ly + 4 << "\">"
            << r.treatment.to_string() << " (X95=" << r.x95 << ")</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace fastread
