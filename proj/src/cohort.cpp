#include "scholarperf/cohort.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include "scholarperf/csv.hpp"
#include "scholarperf/error.hpp"

namespace scholarperf {

std::vector<double> percentile_rank(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) throw InputError("percentile of an empty cohort");
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = 50.0;
        return out;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    const double denom = double(n - 1);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        // zero-based positions i..j-1 share the midrank
        const double midrank0 = 0.5 * double(i + j - 1);
        for (std::size_t k = i; k < j; ++k) out[order[k]] = 100.0 * midrank0 / denom;
        i = j;
    }
    return out;
}

std::vector<ProfessorPercentiles> compute_percentiles(const std::vector<Professor>& roster,
                                                      const std::vector<IndicatorScores>& scores) {
    if (roster.size() != scores.size()) throw InputError("indicator scores do not match the roster");
    std::vector<ProfessorPercentiles> out(roster.size());
    std::map<CohortKey, std::vector<std::size_t>> cohorts;
    for (std::size_t i = 0; i < roster.size(); ++i) {
        out[i].professor_id = roster[i].id;
        cohorts[CohortKey{roster[i].sds}].push_back(i);
    }
    for (const auto& [key, members] : cohorts) {
        for (Indicator ind : kAllIndicators) {
            std::vector<std::size_t> defined;
            std::vector<double> values;
            for (auto m : members) {
                if (auto v = scores[m].value(ind)) {
                    defined.push_back(m);
                    values.push_back(*v);
                }
            }
            if (defined.empty()) continue;
            const auto pct = percentile_rank(values);
            for (std::size_t k = 0; k < defined.size(); ++k) out[defined[k]].percentile[std::size_t(ind)] = pct[k];
        }
    }
    return out;
}

void write_percentile_csv(std::ostream& out, const std::vector<ProfessorPercentiles>& percentiles) {
    write_csv_row(out, {"professor_id", "indicator", "percentile"});
    for (const auto& p : percentiles)
        for (Indicator ind : kAllIndicators)
            if (auto v = p.of(ind)) write_csv_row(out, {p.professor_id, to_string(ind), format_exact(*v)});
}

std::vector<ProfessorPercentiles> read_percentile_csv(std::istream& in) {
    const CsvTable table = read_csv(in);
    std::vector<ProfessorPercentiles> out;
    if (table.header.empty()) return out;
    const auto c_id = table.require_column("professor_id");
    const auto c_ind = table.require_column("indicator");
    const auto c_pct = table.require_column("percentile");
    std::map<std::string, std::size_t> position;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() < 3)
            throw InputError("percentile dump line " + std::to_string(table.line_numbers[r]) + ": missing fields");
        const std::string id = row[c_id];
        auto [it, inserted] = position.emplace(id, out.size());
        if (inserted) out.push_back(ProfessorPercentiles{id, {}});
        const double v = parse_double(row[c_pct], "percentile");
        if (v < 0 || v > 100)
            throw InputError("percentile dump line " + std::to_string(table.line_numbers[r]) + ": out of [0,100]");
        out[it->second].percentile[std::size_t(parse_indicator(row[c_ind]))] = v;
    }
    return out;
}

}  // namespace scholarperf
