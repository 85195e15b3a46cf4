#include "scholarperf/credit.hpp"

#include <istream>
#include <numeric>
#include <ostream>

#include "scholarperf/csv.hpp"
#include "scholarperf/error.hpp"

namespace scholarperf {

namespace {

constexpr double kSameFirstLast = 0.40;
constexpr double kSameMiddlePool = 0.20;
constexpr double kDiffFirstLast = 0.30;
constexpr double kDiffSecondPenultimate = 0.15;
constexpr double kDiffRestPool = 0.10;

void renormalize(std::vector<double>& w) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) x /= total;
}

std::vector<double> same_university_weights(std::size_t n) {
    std::vector<double> w(n, 0.0);
    w.front() = kSameFirstLast;
    w.back() = kSameFirstLast;
    if (n < 3) {
        renormalize(w);
        return w;
    }
    const double middle = kSameMiddlePool / double(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) w[i] = middle;
    return w;
}

std::vector<double> different_universities_weights(std::size_t n) {
    std::vector<double> w(n, 0.0);
    w.front() = kDiffFirstLast;
    w.back() = kDiffFirstLast;
    if (n >= 3) {
        // second and penultimate coincide when n == 3
        w[1] = kDiffSecondPenultimate;
        w[n - 2] = kDiffSecondPenultimate;
    }
    if (n < 5) {
        renormalize(w);
        return w;
    }
    const double rest = kDiffRestPool / double(n - 4);
    for (std::size_t i = 2; i + 2 < n; ++i) w[i] = rest;
    return w;
}

}  // namespace

std::string to_string(CreditConvention convention) {
    return convention == CreditConvention::alphabetical ? "alphabetical" : "position_weighted";
}

CreditConvention parse_credit_convention(const std::string& token) {
    const std::string t = to_lower(trim(token));
    if (t == "alphabetical") return CreditConvention::alphabetical;
    if (t == "position_weighted" || t == "position-weighted" || t == "position") return CreditConvention::position_weighted;
    throw InputError("unknown credit convention '" + token + "'");
}

PositionScheme select_scheme(std::span<const Author> byline) {
    if (byline.empty()) throw InputError("empty byline");
    return byline.front().university_id == byline.back().university_id ? PositionScheme::same_university
                                                                         : PositionScheme::different_universities;
}

std::vector<double> contribution_weights(std::span<const Author> byline, CreditConvention convention) {
    const std::size_t n = byline.size();
    if (n == 0) throw InputError("empty byline");
    if (n == 1) return {1.0};
    if (convention == CreditConvention::alphabetical) return std::vector<double>(n, 1.0 / double(n));
    return select_scheme(byline) == PositionScheme::same_university ? same_university_weights(n)
                                                                     : different_universities_weights(n);
}

double fractional_contribution(std::span<const Author> byline, std::size_t position, CreditConvention convention) {
    if (position >= byline.size())
        throw InputError("byline position " + std::to_string(position) + " out of range for " +
                         std::to_string(byline.size()) + " authors");
    return contribution_weights(byline, convention)[position];
}

CreditConvention ConventionMap::uda_default(const std::string& uda) {
    const std::string u = to_lower(uda);
    if (u == "bio" || u == "med" || u == "avs") return CreditConvention::position_weighted;
    return CreditConvention::alphabetical;
}

CreditConvention ConventionMap::resolve(const std::string& sds, const std::string& uda) const {
    if (override_) return *override_;
    if (auto it = by_sds_.find(sds); it != by_sds_.end()) return it->second;
    if (uda_defaults_) return uda_default(uda);
    throw InputError("no credit convention configured for SDS '" + sds + "'");
}

ConventionMap ConventionMap::read_csv(std::istream& in) {
    const CsvTable table = scholarperf::read_csv(in);
    ConventionMap map;
    if (table.header.empty()) return map;
    const auto c_sds = table.require_column("sds");
    const auto c_conv = table.require_column("convention");
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() <= std::max(c_sds, c_conv))
            throw InputError("convention map line " + std::to_string(table.line_numbers[r]) + ": missing field");
        const std::string sds = trim(row[c_sds]);
        const auto conv = parse_credit_convention(row[c_conv]);
        if (auto it = map.by_sds_.find(sds); it != map.by_sds_.end() && it->second != conv)
            throw InputError("convention map: SDS '" + sds + "' listed with two conventions");
        map.set(sds, conv);
    }
    return map;
}

void ConventionMap::write_csv(std::ostream& out) const {
    write_csv_row(out, {"sds", "convention"});
    for (const auto& [sds, conv] : by_sds_) write_csv_row(out, {sds, to_string(conv)});
}

}  // namespace scholarperf
