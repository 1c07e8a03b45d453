#include "fastread/scott_knott.hpp"

#include "fastread/eval.hpp"
#include "fastread/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fastread {

namespace {

struct Moments {
    double mean = 0.0;
    double variance = 0.0;  // sample variance
    double n = 0.0;
};

Moments moments(std::span<const double> x) {
    Moments m;
    m.n = static_cast<double>(x.size());
    m.mean = std::accumulate(x.begin(), x.end(), 0.0) / m.n;
    if (x.size() > 1) {
        double ss = 0.0;
        for (double v : x) ss += (v - m.mean) * (v - m.mean);
        m.variance = ss / (m.n - 1.0);
    }
    return m;
}

double welch_statistic(std::span<const double> a, std::span<const double> b) {
    const Moments ma = moments(a);
    const Moments mb = moments(b);
    const double delta = std::fabs(mb.mean - ma.mean);
    const double sd = std::sqrt(ma.variance / ma.n + mb.variance / mb.n);
    if (sd == 0.0) return delta == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return delta / sd;
}

void resample(std::span<const double> from, std::vector<double>& into, Rng& rng) {
    into.resize(from.size());
    for (auto& v : into) v = from[rng.below(from.size())];
}

struct Group {
    std::string name;
    std::vector<double> values;
    double median = 0.0;
};

class Splitter {
public:
    Splitter(const std::vector<Group>& groups, const ScottKnottOptions& options)
        : groups_(groups), options_(options), rng_(options.seed) {}

    // Leaf boundaries, as [begin, end) index pairs in sorted order.
    std::vector<std::pair<std::size_t, std::size_t>> leaves() {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        split(0, groups_.size(), out);
        return out;
    }

private:
    std::vector<double> pooled(std::size_t lo, std::size_t hi) const {
        std::vector<double> all;
        for (std::size_t g = lo; g < hi; ++g) {
            all.insert(all.end(), groups_[g].values.begin(), groups_[g].values.end());
        }
        return all;
    }

    void split(std::size_t lo, std::size_t hi,
               std::vector<std::pair<std::size_t, std::size_t>>& out) {
        if (hi - lo < 2) {
            out.emplace_back(lo, hi);
            return;
        }
        double total = 0.0;
        double count = 0.0;
        for (std::size_t g = lo; g < hi; ++g) {
            for (double v : groups_[g].values) total += v;
            count += static_cast<double>(groups_[g].values.size());
        }
        const double mu = total / count;

        std::size_t best_cut = lo;
        double best_score = -1.0;
        double left_sum = 0.0;
        double left_n = 0.0;
        for (std::size_t cut = lo + 1; cut < hi; ++cut) {
            for (double v : groups_[cut - 1].values) left_sum += v;
            left_n += static_cast<double>(groups_[cut - 1].values.size());
            const double right_n = count - left_n;
            const double left_mu = left_sum / left_n;
            const double right_mu = (total - left_sum) / right_n;
            const double score = left_n * (left_mu - mu) * (left_mu - mu) +
                                 right_n * (right_mu - mu) * (right_mu - mu);
            if (score > best_score) {
                best_score = score;
                best_cut = cut;
            }
        }

        const auto left = pooled(lo, best_cut);
        const auto right = pooled(best_cut, hi);
        if (distinguishable(left, right, options_, rng_)) {
            split(lo, best_cut, out);
            split(best_cut, hi, out);
        } else {
            out.emplace_back(lo, hi);
        }
    }

    const std::vector<Group>& groups_;
    const ScottKnottOptions& options_;
    Rng rng_;
};

}  // namespace

double cliffs_delta(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("Cliff's delta needs two nonempty samples");
    std::vector<double> sorted_b(b.begin(), b.end());
    std::sort(sorted_b.begin(), sorted_b.end());
    double more = 0.0;
    double less = 0.0;
    for (double x : a) {
        const auto lower = std::lower_bound(sorted_b.begin(), sorted_b.end(), x);
        const auto upper = std::upper_bound(sorted_b.begin(), sorted_b.end(), x);
        less += static_cast<double>(sorted_b.end() - upper);   // x < y
        more += static_cast<double>(lower - sorted_b.begin());  // x > y
    }
    return (more - less) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

bool bootstrap_differs(std::span<const double> a, std::span<const double> b,
                       const ScottKnottOptions& options, Rng& rng) {
    if (a.empty() || b.empty()) throw std::invalid_argument("bootstrap needs two nonempty samples");
    const double observed = welch_statistic(a, b);

    // shift both samples onto the pooled mean so the null hypothesis holds
    const Moments ma = moments(a);
    const Moments mb = moments(b);
    const double pooled_mean = (ma.mean * ma.n + mb.mean * mb.n) / (ma.n + mb.n);
    std::vector<double> a_null(a.begin(), a.end());
    std::vector<double> b_null(b.begin(), b.end());
    for (auto& v : a_null) v = v - ma.mean + pooled_mean;
    for (auto& v : b_null) v = v - mb.mean + pooled_mean;

    int bigger = 0;
    std::vector<double> ra;
    std::vector<double> rb;
    for (int i = 0; i < options.bootstrap_samples; ++i) {
        resample(a_null, ra, rng);
        resample(b_null, rb, rng);
        if (welch_statistic(ra, rb) > observed) ++bigger;
    }
    const double p_value = static_cast<double>(bigger) / options.bootstrap_samples;
    return p_value < 1.0 - options.confidence;
}

bool distinguishable(std::span<const double> a, std::span<const double> b,
                     const ScottKnottOptions& options, Rng& rng) {
    if (std::fabs(cliffs_delta(a, b)) < options.cliffs_small) return false;
    return bootstrap_differs(a, b, options, rng);
}

std::vector<RankedGroup> scott_knott(const std::map<std::string, std::vector<double>>& samples,
                                     const ScottKnottOptions& options) {
    if (samples.empty()) throw std::invalid_argument("Scott-Knott needs at least one treatment");
    std::vector<Group> groups;
    const std::size_t repeats = samples.begin()->second.size();
    for (const auto& [name, values] : samples) {
        if (values.empty()) throw std::invalid_argument("treatment " + name + " has no samples");
        if (values.size() != repeats) {
            throw std::invalid_argument("treatments must have equal sample counts");
        }
        groups.push_back({name, values, median_iqr(values).median});
    }
    std::stable_sort(groups.begin(), groups.end(),
                     [](const Group& a, const Group& b) { return a.median < b.median; });

    Splitter splitter(groups, options);
    std::vector<RankedGroup> ranked;
    int rank = 0;
    for (auto [lo, hi] : splitter.leaves()) {
        ++rank;
        for (std::size_t g = lo; g < hi; ++g) ranked.push_back({groups[g].name, rank, groups[g].median});
    }
    return ranked;
}

}  // namespace fastread
