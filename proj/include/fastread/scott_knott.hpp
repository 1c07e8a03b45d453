#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace fastread {

class Rng;

struct ScottKnottOptions {
    int bootstrap_samples = 512;
    double confidence = 0.95;
    /// |delta| below this is a negligible effect.
    double cliffs_small = 0.147;
    std::uint64_t seed = 1;
};

/// Cliff's delta: P(a > b) - P(a < b) over all pairs.
double cliffs_delta(std::span<const double> a, std::span<const double> b);

/// Two-sample bootstrap test on the difference of means (shifted to a
/// common mean under the null). True when significant at the confidence.
bool bootstrap_differs(std::span<const double> a, std::span<const double> b,
                       const ScottKnottOptions& options, Rng& rng);

/// Significantly different and not a negligible effect.
bool distinguishable(std::span<const double> a, std::span<const double> b,
                     const ScottKnottOptions& options, Rng& rng);

struct RankedGroup {
    std::string treatment;
    int rank = 0;
    double median = 0.0;
};

/// Sorts treatments by median (smaller first), splits recursively at the
/// cut maximizing the between-group sum of squares, and keeps a split only
/// when the two sides are distinguishable. Ranks number the leaves from 1.
/// Output is ordered by rank, then median, then name.
std::vector<RankedGroup> scott_knott(const std::map<std::string, std::vector<double>>& samples,
                                     const ScottKnottOptions& options = {});

}  // namespace fastread
