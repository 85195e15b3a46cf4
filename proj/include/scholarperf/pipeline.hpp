#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scholarperf/cohort.hpp"
#include "scholarperf/corpus.hpp"
#include "scholarperf/credit.hpp"
#include "scholarperf/indicators.hpp"
#include "scholarperf/regress.hpp"

namespace scholarperf {

struct PipelineConfig {
    Date census{2010, 12, 31};
    ObservationWindow window = ObservationWindow::from_years(2006, 2010);
    IndicatorOptions indicator_options;
    unsigned threads = 1;
};

/// Everything computed from roster + corpus, aligned with roster order.
struct PipelineOutput {
    std::vector<Covariates> covariates;
    ScalingTable scaling;
    std::vector<IndicatorScores> scores;
    std::vector<ProfessorPercentiles> percentiles;
    std::vector<std::string> warnings;
};

/// Covariates, credit, indicators and cohort percentiles.
PipelineOutput run_indicator_pipeline(const std::vector<Professor>& roster, const Corpus& corpus,
                                      const ConventionMap& conventions, const PipelineConfig& config);

std::vector<Covariates> derive_all_covariates(const std::vector<Professor>& roster, const Date& census,
                                              const ObservationWindow& window);

/// Regression rows for professors with a defined percentile of `dependent`,
/// optionally restricted to one UDA. Percentiles are matched by professor id.
std::vector<Observation> build_observations(const std::vector<Professor>& roster,
                                            const std::vector<Covariates>& covariates,
                                            const std::vector<ProfessorPercentiles>& percentiles,
                                            Indicator dependent, const std::optional<std::string>& uda = std::nullopt);

inline const std::string kTotalGroup = "Total";

struct GroupOutcome {
    std::string group;
    std::optional<DegreeSelection> selection;
    std::string error;

    bool ok() const { return selection.has_value(); }
};

/// AIC-selected fits for the Total group followed by each UDA in code order.
/// A failing group records its error; the others still run.
std::vector<GroupOutcome> fit_groups(const std::vector<Professor>& roster, const std::vector<Covariates>& covariates,
                                     const std::vector<ProfessorPercentiles>& percentiles, const ModelSpec& spec,
                                     int max_degree, unsigned threads = 1);

}  // namespace scholarperf
