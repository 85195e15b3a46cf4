#include "scholarperf/pipeline.hpp"

#include <set>
#include <unordered_map>

#include "scholarperf/error.hpp"
#include "scholarperf/parallel.hpp"

namespace scholarperf {

std::vector<Covariates> derive_all_covariates(const std::vector<Professor>& roster, const Date& census,
                                              const ObservationWindow& window) {
    std::vector<Covariates> out;
    out.reserve(roster.size());
    for (const auto& p : roster) out.push_back(derive_covariates(p, census, window));
    return out;
}

PipelineOutput run_indicator_pipeline(const std::vector<Professor>& roster, const Corpus& corpus,
                                      const ConventionMap& conventions, const PipelineConfig& config) {
    PipelineOutput out;
    out.covariates = derive_all_covariates(roster, config.census, config.window);
    out.scaling = ScalingTable::build(corpus.publications);
    out.scores = compute_indicators(roster, out.covariates, corpus, out.scaling, conventions, config.window,
                                    config.indicator_options, config.threads);
    out.percentiles = compute_percentiles(roster, out.scores);

    std::size_t missing_c = 0, missing_if = 0, unknown_if = 0;
    for (const auto& s : out.scores) {
        missing_c += s.diagnostics.missing_citation_cells;
        missing_if += s.diagnostics.missing_impact_cells;
        unknown_if += s.diagnostics.unknown_impact_factors;
    }
    if (missing_c)
        out.warnings.push_back(std::to_string(missing_c) + " credited publications lack a citation scale (counted as zero)");
    if (missing_if)
        out.warnings.push_back(std::to_string(missing_if) +
                               " credited publications lack an impact-factor scale (skipped)");
    if (unknown_if)
        out.warnings.push_back(std::to_string(unknown_if) +
                               " credited publications have no journal impact factor (left out of IJ)");
    return out;
}

std::vector<Observation> build_observations(const std::vector<Professor>& roster,
                                            const std::vector<Covariates>& covariates,
                                            const std::vector<ProfessorPercentiles>& percentiles,
                                            Indicator dependent, const std::optional<std::string>& uda) {
    if (covariates.size() != roster.size()) throw InputError("covariates do not match the roster");
    std::unordered_map<std::string, const ProfessorPercentiles*> by_id;
    for (const auto& p : percentiles) by_id[p.professor_id] = &p;
    std::vector<Observation> rows;
    for (std::size_t i = 0; i < roster.size(); ++i) {
        if (uda && roster[i].uda != *uda) continue;
        auto it = by_id.find(roster[i].id);
        if (it == by_id.end()) continue;
        auto pct = it->second->of(dependent);
        if (!pct) continue;
        rows.push_back({roster[i].id, covariates[i], *pct});
    }
    return rows;
}

std::vector<GroupOutcome> fit_groups(const std::vector<Professor>& roster, const std::vector<Covariates>& covariates,
                                     const std::vector<ProfessorPercentiles>& percentiles, const ModelSpec& spec,
                                     int max_degree, unsigned threads) {
    std::vector<std::optional<std::string>> groups{std::nullopt};
    std::set<std::string> udas;
    for (const auto& p : roster) udas.insert(p.uda);
    for (const auto& u : udas) groups.emplace_back(u);

    std::vector<GroupOutcome> out(groups.size());
    parallel_for(groups.size(), threads, [&](std::size_t g) {
        GroupOutcome& o = out[g];
        o.group = groups[g].value_or(kTotalGroup);
        try {
            const auto rows = build_observations(roster, covariates, percentiles, spec.dependent, groups[g]);
            o.selection = select_age_degree(rows, spec, max_degree);
        } catch (const Error& e) {
            o.error = e.what();
        }
    });
    return out;
}

}  // namespace scholarperf
