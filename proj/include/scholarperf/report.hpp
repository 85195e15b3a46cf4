#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scholarperf/corpus.hpp"
#include "scholarperf/fit_io.hpp"
#include "scholarperf/indicators.hpp"

namespace scholarperf {

struct TextTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Space-aligned columns, first column left-aligned, the rest right-aligned.
    std::string to_text() const;
    std::string to_csv() const;
};

// Number formatting. Locale independent; trailing zeros after the decimal
// point are dropped except for percentages.
std::string format_decimal(double value, int decimals, bool thousands_separators);
std::string format_estimate(double value);  // 3 decimals, thousands separators
std::string format_se(double value);        // 3 decimals
std::string format_count(std::size_t value);
std::string format_percent(double value);  // fixed 2 decimals
std::string format_pseudo_r2(double value);

/// Row label in the regression table -> fit term name.
struct RegressionRow {
    std::string label;
    std::string term;
};
const std::vector<RegressionRow>& regression_rows();
inline const std::string kPseudoR2Label = "Pseudo R-squared";
inline const std::string kSampleSizeLabel = "N";

/// "estimate (se)" with " [ame]" appended when an AME exists.
std::string format_coefficient_cell(double estimate, double se, std::optional<double> ame);

struct ParsedCell {
    double estimate = 0;
    double se = 0;
    std::optional<double> ame;
};
/// Inverse of format_coefficient_cell. Returns nullopt for "-".
std::optional<ParsedCell> parse_cell(const std::string& cell);
/// Parses a number printed with optional thousands separators.
double parse_formatted_number(const std::string& text);

/// One column per fit in the order given. Throws ComputeError if any fit did not converge.
TextTable regression_table(std::span<const GroupFit> fits);

/// Values read back from a regression table, per column.
struct ParsedRegressionColumn {
    std::string group;
    std::map<std::string, ParsedCell> cells;  // by term name; absent terms omitted
    double pseudo_r2 = 0;
    std::size_t n = 0;
};
std::vector<ParsedRegressionColumn> parse_regression_table(const TextTable& table);
TextTable read_table_csv(std::istream& in);

struct DescriptiveRow {
    std::string group;
    std::size_t headcount = 0;
    std::size_t covered = 0;  // rows with derivable covariates
    double coverage_percent = 0;
    double mean_age = 0;
    double mean_appointment_age = 0;
    std::size_t scored = 0;  // covered rows with indicator scores
    double inactive_percent = 0;
    double appointed_before_41_percent = 0;
    double appointed_after_55_percent = 0;
};

struct DescriptiveReport {
    std::vector<DescriptiveRow> rows;  // UDAs in code order, then Total
    std::vector<std::string> warnings;

    TextTable overview_table() const;        // headcount, coverage, ages, inactive
    TextTable appointment_age_table() const;  // before 41 / after 55
};

/// Per-UDA and Total summaries. `uda_codes` lists every expected UDA; codes
/// with no professors are omitted with a warning. Scores are matched by id.
DescriptiveReport descriptive_table(const std::vector<Professor>& roster, const std::vector<IndicatorScores>& scores,
                                    const Date& census, const ObservationWindow& window,
                                    const std::vector<std::string>& uda_codes = {});

struct HistogramBin {
    double lower = 0;
    double upper = 0;
    std::size_t count = 0;
    double share = 0;
};

/// Left-closed bins of the given width anchored at a multiple of the width.
/// Throws InputError on an empty input or a nonpositive width.
std::vector<HistogramBin> distribution_histogram(std::span<const double> values, double bin_width);
TextTable histogram_table(std::span<const HistogramBin> bins);

/// Sample standard deviation over mean. Throws ComputeError when undefined.
double coefficient_of_variation(std::span<const double> values);

/// Coefficient of variation of `values` within each group label.
/// Groups with fewer than two values or a zero mean are skipped.
std::map<std::string, double> coefficient_of_variation_by_group(std::span<const std::string> groups,
                                                                std::span<const double> values);

}  // namespace scholarperf
