#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scholarperf/corpus.hpp"
#include "scholarperf/indicators.hpp"

namespace scholarperf {

/// Percentile (0 = worst, 100 = best) of every member of one cohort.
///
/// Uses midranks for ties and scales rank r of n as 100 (r - 1) / (n - 1);
/// a single-member cohort sits at 50. Throws InputError on an empty cohort.
std::vector<double> percentile_rank(std::span<const double> values);

/// Cohort key: professors are ranked against same-SDS colleagues of the same academic rank.
struct CohortKey {
    std::string sds;
    std::string rank = "full_professor";

    friend auto operator<=>(const CohortKey&, const CohortKey&) = default;
};

struct ProfessorPercentiles {
    std::string professor_id;
    std::array<std::optional<double>, 4> percentile;  // indexed by Indicator

    std::optional<double> of(Indicator indicator) const { return percentile[std::size_t(indicator)]; }
};

/// Ranks every defined indicator value within its cohort. Professors with an
/// undefined value (IA/IJ of the inactive) get no percentile and are left out
/// of that cohort. `scores[i]` belongs to `roster[i]`.
std::vector<ProfessorPercentiles> compute_percentiles(const std::vector<Professor>& roster,
                                                      const std::vector<IndicatorScores>& scores);

/// Long format: professor_id, indicator, percentile.
void write_percentile_csv(std::ostream& out, const std::vector<ProfessorPercentiles>& percentiles);
std::vector<ProfessorPercentiles> read_percentile_csv(std::istream& in);

}  // namespace scholarperf
