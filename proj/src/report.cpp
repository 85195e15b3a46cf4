#include "scholarperf/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <set>
#include <sstream>

#include "scholarperf/csv.hpp"
#include "scholarperf/error.hpp"

namespace scholarperf {

namespace {

// Display width of UTF-8 text (continuation bytes do not count).
std::size_t display_width(const std::string& s) {
    return std::size_t(std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string pad(const std::string& s, std::size_t width, bool left) {
    const std::size_t w = display_width(s);
    if (w >= width) return s;
    const std::string fill(width - w, ' ');
    return left ? s + fill : fill + s;
}

std::string fixed(double value, int decimals) {
    if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, decimals);
    std::string out(buf, res.ptr);
    // "-0.000" -> "0.000"
    if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
    return out;
}

std::string strip_zeros(std::string s) {
    if (s.find('.') == std::string::npos) return s;
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    if (s == "-0") s = "0";
    return s;
}

std::string group_thousands(const std::string& s) {
    const std::size_t sign = (!s.empty() && s[0] == '-') ? 1 : 0;
    std::size_t int_end = s.find('.');
    if (int_end == std::string::npos) int_end = s.size();
    std::string digits = s.substr(sign, int_end - sign);
    std::string grouped;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i > 0 && (digits.size() - i) % 3 == 0) grouped += ',';
        grouped += digits[i];
    }
    return s.substr(0, sign) + grouped + s.substr(int_end);
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double percent(std::size_t part, std::size_t whole) { return whole ? 100.0 * double(part) / double(whole) : 0.0; }

}  // namespace

std::string TextTable::to_text() const {
    std::vector<std::size_t> widths(header.size(), 0);
    auto widen = [&](const std::vector<std::string>& row) {
        if (row.size() > widths.size()) widths.resize(row.size(), 0);
        for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], display_width(row[i]));
    };
    widen(header);
    for (const auto& r : rows) widen(r);
    std::string out;
    auto emit = [&](const std::vector<std::string>& row) {
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) line += "  ";
            line += pad(row[i], widths[i], i == 0);
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + "\n";
    };
    emit(header);
    for (const auto& r : rows) emit(r);
    return out;
}

std::string TextTable::to_csv() const {
    std::ostringstream out;
    write_csv_row(out, header);
    for (const auto& r : rows) write_csv_row(out, r);
    return out.str();
}

TextTable read_table_csv(std::istream& in) {
    const CsvTable csv = read_csv(in);
    return TextTable{csv.header, csv.rows};
}

std::string format_decimal(double value, int decimals, bool thousands_separators) {
    std::string s = strip_zeros(fixed(value, decimals));
    return thousands_separators && std::isfinite(value) ? group_thousands(s) : s;
}

std::string format_estimate(double value) { return format_decimal(value, 3, true); }
std::string format_se(double value) { return format_decimal(value, 3, false); }
std::string format_count(std::size_t value) { return group_thousands(std::to_string(value)); }
std::string format_percent(double value) { return fixed(value, 2); }
std::string format_pseudo_r2(double value) { return format_decimal(value, 4, false); }

const std::vector<RegressionRow>& regression_rows() {
    static const std::vector<RegressionRow> rows = {
        {"Intercept", "Intercept"},     {"Age", "Age"},         {"Age²", "Age^2"},
        {"Age³", "Age^3"},             {"Seniority", "Seniority"}, {"Gender", "Gender"},
        {"Polytechnic", "U3"},         {"Private", "U1"},      {"Advanced Studies", "U2"},
    };
    return rows;
}

std::string format_coefficient_cell(double estimate, double se, std::optional<double> ame) {
    std::string cell = format_estimate(estimate) + " (" + format_se(se) + ")";
    if (ame) cell += " [" + format_estimate(*ame) + "]";
    return cell;
}

double parse_formatted_number(const std::string& text) {
    std::string digits;
    for (char c : trim(text))
        if (c != ',') digits += c;
    return parse_double(digits, "table cell");
}

std::optional<ParsedCell> parse_cell(const std::string& raw) {
    const std::string cell = trim(raw);
    if (cell == "-") return std::nullopt;
    const auto open = cell.find('(');
    const auto close = cell.find(')', open == std::string::npos ? 0 : open);
    if (open == std::string::npos || close == std::string::npos)
        throw InputError("malformed coefficient cell '" + cell + "'");
    ParsedCell parsed;
    parsed.estimate = parse_formatted_number(cell.substr(0, open));
    parsed.se = parse_formatted_number(cell.substr(open + 1, close - open - 1));
    const auto bracket = cell.find('[', close);
    if (bracket != std::string::npos) {
        const auto end = cell.find(']', bracket);
        if (end == std::string::npos) throw InputError("malformed coefficient cell '" + cell + "'");
        parsed.ame = parse_formatted_number(cell.substr(bracket + 1, end - bracket - 1));
    }
    return parsed;
}

TextTable regression_table(std::span<const GroupFit> fits) {
    std::vector<std::string> unconverged;
    for (const auto& gf : fits)
        if (!gf.fit.converged) unconverged.push_back(gf.group);
    if (!unconverged.empty()) {
        std::string list;
        for (const auto& g : unconverged) list += (list.empty() ? "" : ", ") + g;
        throw ComputeError("cannot tabulate unconverged fits: " + list);
    }

    TextTable table;
    table.header.push_back("");
    for (const auto& gf : fits) table.header.push_back(gf.group);
    for (const auto& row : regression_rows()) {
        std::vector<std::string> cells{row.label};
        for (const auto& gf : fits) {
            const auto idx = gf.fit.term_index(row.term);
            if (!idx) {
                cells.push_back("-");
                continue;
            }
            std::optional<double> ame;
            if (auto it = gf.fit.ame.find(row.term); it != gf.fit.ame.end()) ame = it->second;
            cells.push_back(format_coefficient_cell(gf.fit.coefficients[*idx], gf.fit.robust_se[*idx], ame));
        }
        table.rows.push_back(std::move(cells));
    }
    std::vector<std::string> r2{kPseudoR2Label}, n{kSampleSizeLabel};
    for (const auto& gf : fits) {
        r2.push_back(format_pseudo_r2(gf.fit.pseudo_r2));
        n.push_back(format_count(gf.fit.n));
    }
    table.rows.push_back(std::move(r2));
    table.rows.push_back(std::move(n));
    return table;
}

std::vector<ParsedRegressionColumn> parse_regression_table(const TextTable& table) {
    if (table.header.size() < 2) throw InputError("regression table has no fit columns");
    std::map<std::string, std::string> term_of;
    for (const auto& r : regression_rows()) term_of[r.label] = r.term;

    std::vector<ParsedRegressionColumn> columns(table.header.size() - 1);
    for (std::size_t c = 0; c < columns.size(); ++c) columns[c].group = table.header[c + 1];
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) throw InputError("ragged regression table row '" + row.front() + "'");
        const std::string& label = row.front();
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const std::string& cell = row[c + 1];
            if (label == kPseudoR2Label) {
                columns[c].pseudo_r2 = parse_formatted_number(cell);
            } else if (label == kSampleSizeLabel) {
                columns[c].n = std::size_t(parse_formatted_number(cell));
            } else if (auto it = term_of.find(label); it != term_of.end()) {
                if (auto parsed = parse_cell(cell)) columns[c].cells[it->second] = *parsed;
            } else {
                throw InputError("unknown regression table row '" + label + "'");
            }
        }
    }
    return columns;
}

TextTable DescriptiveReport::overview_table() const {
    TextTable t;
    t.header = {"UDA", "Full professors", "Coverage (%)", "Average age", "Average age at appointment",
                "Inactive (%)"};
    for (const auto& r : rows) {
        t.rows.push_back({r.group, format_count(r.headcount), format_percent(r.coverage_percent),
                          format_percent(r.mean_age), format_percent(r.mean_appointment_age),
                          format_percent(r.inactive_percent)});
    }
    return t;
}

TextTable DescriptiveReport::appointment_age_table() const {
    TextTable t;
    t.header = {"UDA", "Appointed before 41 (%)", "Appointed after 55 (%)"};
    for (const auto& r : rows)
        t.rows.push_back(
            {r.group, format_percent(r.appointed_before_41_percent), format_percent(r.appointed_after_55_percent)});
    return t;
}

DescriptiveReport descriptive_table(const std::vector<Professor>& roster, const std::vector<IndicatorScores>& scores,
                                    const Date& census, const ObservationWindow& window,
                                    const std::vector<std::string>& uda_codes) {
    std::map<std::string, const IndicatorScores*> score_of;
    for (const auto& s : scores) score_of[s.professor_id] = &s;

    struct Accumulator {
        std::size_t headcount = 0, covered = 0, scored = 0, inactive = 0, before41 = 0, after55 = 0;
        std::vector<double> ages, appointment_ages;
    };
    std::map<std::string, Accumulator> by_uda;
    for (const auto& code : uda_codes) by_uda[code];
    Accumulator total;

    for (const auto& p : roster) {
        Accumulator& acc = by_uda[p.uda];
        for (Accumulator* a : {&acc, &total}) ++a->headcount;
        Covariates cov;
        try {
            cov = derive_covariates(p, census, window);
        } catch (const Error&) {
            continue;
        }
        const int whole_appointment_age = int(whole_years_between(p.birth_date, p.appointment_date));
        const auto s = score_of.find(p.id);
        for (Accumulator* a : {&acc, &total}) {
            ++a->covered;
            a->ages.push_back(cov.age);
            a->appointment_ages.push_back(cov.age_at_appointment);
            if (whole_appointment_age < 41) ++a->before41;
            if (whole_appointment_age > 55) ++a->after55;
            if (s != score_of.end()) {
                ++a->scored;
                if (s->second->inactive()) ++a->inactive;
            }
        }
    }

    DescriptiveReport report;
    auto finish = [](const std::string& group, const Accumulator& a) {
        DescriptiveRow r;
        r.group = group;
        r.headcount = a.headcount;
        r.covered = a.covered;
        r.coverage_percent = percent(a.covered, a.headcount);
        r.mean_age = mean_of(a.ages);
        r.mean_appointment_age = mean_of(a.appointment_ages);
        r.scored = a.scored;
        r.inactive_percent = percent(a.inactive, a.scored);
        r.appointed_before_41_percent = percent(a.before41, a.covered);
        r.appointed_after_55_percent = percent(a.after55, a.covered);
        return r;
    };
    for (const auto& [uda, acc] : by_uda) {
        if (acc.headcount == 0) {
            report.warnings.push_back("UDA " + uda + " has no professors; row omitted");
            continue;
        }
        report.rows.push_back(finish(uda, acc));
    }
    report.rows.push_back(finish("Total", total));
    return report;
}

std::vector<HistogramBin> distribution_histogram(std::span<const double> values, double bin_width) {
    if (!(bin_width > 0) || !std::isfinite(bin_width)) throw InputError("histogram bin width must be positive");
    if (values.empty()) throw InputError("histogram of an empty sample");
    for (double v : values)
        if (!std::isfinite(v)) throw InputError("histogram input contains a non-finite value");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double origin = std::floor(*lo_it / bin_width);
    const auto index_of = [&](double v) {
        return std::size_t(std::max(0.0, std::floor(v / bin_width) - origin));
    };
    std::vector<HistogramBin> bins(index_of(*hi_it) + 1);
    for (std::size_t i = 0; i < bins.size(); ++i) {
        bins[i].lower = (origin + double(i)) * bin_width;
        bins[i].upper = (origin + double(i) + 1) * bin_width;
    }
    for (double v : values) ++bins[std::min(index_of(v), bins.size() - 1)].count;
    for (auto& b : bins) b.share = double(b.count) / double(values.size());
    return bins;
}

TextTable histogram_table(std::span<const HistogramBin> bins) {
    TextTable t;
    t.header = {"lower", "upper", "count", "share"};
    for (const auto& b : bins)
        t.rows.push_back({format_exact(b.lower), format_exact(b.upper), std::to_string(b.count), format_exact(b.share)});
    return t;
}

double coefficient_of_variation(std::span<const double> values) {
    if (values.size() < 2) throw ComputeError("coefficient of variation needs at least two values");
    const double m = std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
    if (m == 0) throw ComputeError("coefficient of variation is undefined for a zero mean");
    double ss = 0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / double(values.size() - 1)) / m;
}

std::map<std::string, double> coefficient_of_variation_by_group(std::span<const std::string> groups,
                                                                std::span<const double> values) {
    if (groups.size() != values.size()) throw InputError("group labels and values differ in length");
    std::map<std::string, std::vector<double>> members;
    for (std::size_t i = 0; i < values.size(); ++i) members[groups[i]].push_back(values[i]);
    std::map<std::string, double> out;
    for (const auto& [g, v] : members) {
        try {
            out[g] = coefficient_of_variation(v);
        } catch (const ComputeError&) {
        }
    }
    return out;
}

}  // namespace scholarperf
