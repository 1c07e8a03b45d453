#pragma once

#include "fastread/eval.hpp"
#include "fastread/scott_knott.hpp"

#include <json.hpp>

#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace fastread {

// ---------------------------------------------------------------------------
// Run logs: one SimulationResult per JSON line. The trajectory is stored
// sparsely as the points where the found count changes plus the last point,
// and expanded back to one point per reviewed study on read.
// ---------------------------------------------------------------------------

nlohmann::json to_json(const SimulationResult& result);
SimulationResult result_from_json(const nlohmann::json& j);

/// Appends one line per result, in the given order.
void append_run_log(const std::filesystem::path& path, const std::vector<SimulationResult>& results);
std::vector<SimulationResult> read_run_log(const std::filesystem::path& path);

/// (treatment, seed) keys already present in a log, for resuming sweeps.
std::set<std::pair<std::string, std::uint64_t>> logged_keys(const std::filesystem::path& path);

struct TreatmentSummary {
    std::string treatment;
    int rank = 0;
    MedianIqr x95;
    MedianIqr wss95;
    std::size_t repeats = 0;
};

struct RankReport {
    std::string corpus;
    std::size_t pool = 0;
    std::vector<TreatmentSummary> rows;  // by rank, then median X95
};

class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scott-Knott on X95 per treatment. Results must share one corpus and
/// every treatment must have the same number of repeats.
RankReport rank_report(const std::vector<SimulationResult>& results,
                       const ScottKnottOptions& options = {});

std::string format_table(const RankReport& report);
nlohmann::json to_json(const RankReport& report);

// ---------------------------------------------------------------------------
// Recall curves. For each treatment the run with the median X95 (lowest
// seed on ties) is drawn.
// ---------------------------------------------------------------------------

std::vector<SimulationResult> median_runs(const std::vector<SimulationResult>& results);
/// treatment,seed,reviewed,found
std::string curves_csv(const std::vector<SimulationResult>& runs);
std::string curves_svg(const std::vector<SimulationResult>& runs);

}  // namespace fastread
