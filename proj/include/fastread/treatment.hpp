#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fastread {

enum class StartRule { patient, hasty };          // P / H
enum class QueryRule { uncertainty, certainty };  // U / C
enum class StopRule { stop, keep_training };      // S / T
enum class Balance { none, aggressive, weighting, mixed };  // N / A / W / M

/// One of the 32 four-letter active-learning treatments, or the linear
/// (random order, no learner) baseline.
class TreatmentCode {
public:
    constexpr TreatmentCode(StartRule start, QueryRule query, StopRule stop, Balance balance)
        : start_(start), query_(query), stop_(stop), balance_(balance) {}

    static constexpr TreatmentCode linear() { return TreatmentCode(); }
    static constexpr TreatmentCode fastread() {
        return {StartRule::hasty, QueryRule::uncertainty, StopRule::keep_training, Balance::mixed};
    }

    /// "HUTM", "PUSA", ... or "linear" (case-insensitive).
    static std::optional<TreatmentCode> parse(std::string_view text);
    /// The 32 learner codes in P/H, U/C, S/T, N/A/W/M order, then linear.
    static std::vector<TreatmentCode> all();

    std::string to_string() const;

    constexpr bool is_linear() const noexcept { return linear_; }
    constexpr StartRule start() const noexcept { return start_; }
    constexpr QueryRule query() const noexcept { return query_; }
    constexpr StopRule stop() const noexcept { return stop_; }
    constexpr Balance balance() const noexcept { return balance_; }

    constexpr bool weighted() const noexcept {
        return !linear_ && (balance_ == Balance::weighting || balance_ == Balance::mixed);
    }
    constexpr bool undersamples() const noexcept {
        return !linear_ && (balance_ == Balance::aggressive || balance_ == Balance::mixed);
    }

    bool operator==(const TreatmentCode&) const = default;

private:
    constexpr TreatmentCode() : linear_(true) {}

    bool linear_ = false;
    StartRule start_ = StartRule::patient;
    QueryRule query_ = QueryRule::uncertainty;
    StopRule stop_ = StopRule::stop;
    Balance balance_ = Balance::none;
};

struct TreatmentConfig {
    std::size_t t1 = 5;    // relevant studies a patient learner waits for
    std::size_t t2 = 30;   // relevant studies after which the learner is stable
    double target_recall = 0.95;

    void validate() const;
};

inline constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();

/// Relevant studies needed before the learner starts; kNever for linear.
std::size_t enough(const TreatmentCode& code, const TreatmentConfig& config);

}  // namespace fastread
