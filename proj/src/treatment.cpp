#include "fastread/treatment.hpp"

#include <cctype>
#include <stdexcept>

namespace fastread {

std::optional<TreatmentCode> TreatmentCode::parse(std::string_view text) {
    std::string upper;
    for (char c : text) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (upper == "LINEAR") return linear();
    if (upper.size() != 4) return std::nullopt;

    StartRule start;
    QueryRule query;
    StopRule stop;
    Balance balance;
    switch (upper[0]) {
        case 'P': start = StartRule::patient; break;
        case 'H': start = StartRule::hasty; break;
        default: return std::nullopt;
    }
    switch (upper[1]) {
        case 'U': query = QueryRule::uncertainty; break;
        case 'C': query = QueryRule::certainty; break;
        default: return std::nullopt;
    }
    switch (upper[2]) {
        case 'S': stop = StopRule::stop; break;
        case 'T': stop = StopRule::keep_training; break;
        default: return std::nullopt;
    }
    switch (upper[3]) {
        case 'N': balance = Balance::none; break;
        case 'A': balance = Balance::aggressive; break;
        case 'W': balance = Balance::weighting; break;
        case 'M': balance = Balance::mixed; break;
        default: return std::nullopt;
    }
    return TreatmentCode(start, query, stop, balance);
}

std::vector<TreatmentCode> TreatmentCode::all() {
    std::vector<TreatmentCode> codes;
    for (auto start : {StartRule::patient, StartRule::hasty}) {
        for (auto query : {QueryRule::uncertainty, QueryRule::certainty}) {
            for (auto stop : {StopRule::stop, StopRule::keep_training}) {
                for (auto balance :
                     {Balance::none, Balance::aggressive, Balance::weighting, Balance::mixed}) {
                    codes.emplace_back(start, query, stop, balance);
                }
            }
        }
    }
    codes.push_back(linear());
    return codes;
}

std::string TreatmentCode::to_string() const {
    if (linear_) return "linear";
    std::string s(4, ' ');
    s[0] = start_ == StartRule::patient ? 'P' : 'H';
    s[1] = query_ == QueryRule::uncertainty ? 'U' : 'C';
    s[2] = stop_ == StopRule::stop ? 'S' : 'T';
    constexpr char balance_letters[] = {'N', 'A', 'W', 'M'};
    s[3] = balance_letters[static_cast<int>(balance_)];
    return s;
}

void TreatmentConfig::validate() const {
    if (t1 < 1 || t1 > t2) throw std::invalid_argument("treatment config needs 1 <= t1 <= t2");
    if (!(target_recall > 0.0 && target_recall <= 1.0)) {
        throw std::invalid_argument("target recall must lie in (0, 1]");
    }
}

std::size_t enough(const TreatmentCode& code, const TreatmentConfig& config) {
    if (code.is_linear()) return kNever;
    return code.start() == StartRule::patient ? config.t1 : 1;
}

}  // namespace fastread
