#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "scholarperf/corpus.hpp"
#include "scholarperf/credit.hpp"

namespace scholarperf {

enum class Indicator { fss, p, ia, ij };

inline constexpr std::array<Indicator, 4> kAllIndicators = {Indicator::fss, Indicator::p, Indicator::ia,
                                                            Indicator::ij};

std::string to_string(Indicator indicator);
Indicator parse_indicator(const std::string& token);

struct CellKey {
    int year = 0;
    std::string subject_category;

    friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

/// Field-normalization denominators per (year, subject category).
///
/// The citation scale of a cell is the mean citation count of its cited
/// publications; cells where nothing is cited have no citation scale. The
/// impact scale is the mean journal impact factor over the cell's
/// publications with a known impact factor.
class ScalingTable {
public:
    static ScalingTable build(std::span<const Publication> publications);

    std::optional<double> citation_scale(int year, const std::string& category) const;
    std::optional<double> impact_scale(int year, const std::string& category) const;

    const std::map<CellKey, double>& citation_cells() const { return citations_; }
    const std::map<CellKey, double>& impact_cells() const { return impacts_; }

private:
    std::map<CellKey, double> citations_;
    std::map<CellKey, double> impacts_;
};

/// A publication together with the crediting professor's fractional share.
struct CreditedPublication {
    const Publication* publication = nullptr;
    double share = 0;
};

struct IndicatorOptions {
    /// Abort on missing scaling cells instead of skipping them.
    bool strict = false;
};

struct IndicatorDiagnostics {
    std::size_t missing_citation_cells = 0;
    std::size_t missing_impact_cells = 0;
    std::size_t unknown_impact_factors = 0;
};

/// (1/t) * sum of share * citations / citation scale.
double compute_fss(std::span<const CreditedPublication> pubs, const ScalingTable& scaling, double t,
                   const IndicatorOptions& options = {}, IndicatorDiagnostics* diagnostics = nullptr);

/// Publications per year of work.
double compute_p(std::size_t n_publications, double t);

/// Mean normalized citations; undefined without publications.
std::optional<double> compute_ia(std::span<const CreditedPublication> pubs, const ScalingTable& scaling,
                                 const IndicatorOptions& options = {}, IndicatorDiagnostics* diagnostics = nullptr);

/// Mean normalized journal impact factor over publications with a known impact
/// factor; undefined when there are none.
std::optional<double> compute_ij(std::span<const CreditedPublication> pubs, const ScalingTable& scaling,
                                 const IndicatorOptions& options = {}, IndicatorDiagnostics* diagnostics = nullptr);

struct IndicatorScores {
    std::string professor_id;
    std::string sds;
    double fss = 0;
    double p = 0;
    std::optional<double> ia;
    std::optional<double> ij;
    std::size_t n_pubs = 0;
    IndicatorDiagnostics diagnostics;

    bool inactive() const { return n_pubs == 0; }
    std::optional<double> value(Indicator indicator) const;
};

struct Authorship {
    std::size_t publication = 0;
    std::size_t position = 0;
};

/// author id -> every (publication, byline position) naming that author.
class AuthorshipIndex {
public:
    explicit AuthorshipIndex(const Corpus& corpus);
    std::span<const Authorship> of(const std::string& author_id) const;

private:
    std::unordered_map<std::string, std::vector<Authorship>> index_;
};

/// Window publications of `professor` with the professor's credit share.
/// Repeated appearances on one byline accumulate.
std::vector<CreditedPublication> credited_publications(const Professor& professor, const Corpus& corpus,
                                                       const AuthorshipIndex& index, CreditConvention convention,
                                                       const ObservationWindow& window);

/// Scores every roster professor. `covariates[i]` belongs to `roster[i]`.
/// Independent per professor; the result does not depend on `threads`.
std::vector<IndicatorScores> compute_indicators(const std::vector<Professor>& roster,
                                                const std::vector<Covariates>& covariates, const Corpus& corpus,
                                                const ScalingTable& scaling, const ConventionMap& conventions,
                                                const ObservationWindow& window, const IndicatorOptions& options = {},
                                                unsigned threads = 1);

/// professor_id, sds, fss, p, ia, ij, n_pubs, inactive_flag. Undefined values are empty.
void write_indicator_csv(std::ostream& out, const std::vector<IndicatorScores>& scores);
std::vector<IndicatorScores> read_indicator_csv(std::istream& in);

}  // namespace scholarperf
