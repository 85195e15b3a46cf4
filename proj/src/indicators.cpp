#include "scholarperf/indicators.hpp"

#include <istream>
#include <ostream>

#include "scholarperf/csv.hpp"
#include "scholarperf/error.hpp"
#include "scholarperf/parallel.hpp"

namespace scholarperf {

std::string to_string(Indicator indicator) {
    switch (indicator) {
        case Indicator::fss: return "FSS";
        case Indicator::p: return "P";
        case Indicator::ia: return "IA";
        case Indicator::ij: return "IJ";
    }
    return "FSS";
}

Indicator parse_indicator(const std::string& token) {
    const std::string t = to_lower(trim(token));
    if (t == "fss") return Indicator::fss;
    if (t == "p") return Indicator::p;
    if (t == "ia") return Indicator::ia;
    if (t == "ij") return Indicator::ij;
    throw InputError("unknown indicator '" + token + "' (expected FSS, P, IA or IJ)");
}

ScalingTable ScalingTable::build(std::span<const Publication> publications) {
    struct Acc {
        double sum = 0;
        std::size_t count = 0;
    };
    std::map<CellKey, Acc> cited, impact;
    for (const auto& p : publications) {
        const CellKey key{p.year, p.subject_category};
        if (p.citations > 0) {
            auto& a = cited[key];
            a.sum += double(p.citations);
            ++a.count;
        }
        if (p.journal_if) {
            auto& a = impact[key];
            a.sum += *p.journal_if;
            ++a.count;
        }
    }
    ScalingTable table;
    for (const auto& [key, acc] : cited) table.citations_.emplace(key, acc.sum / double(acc.count));
    for (const auto& [key, acc] : impact)
        if (acc.sum > 0) table.impacts_.emplace(key, acc.sum / double(acc.count));
    return table;
}

std::optional<double> ScalingTable::citation_scale(int year, const std::string& category) const {
    auto it = citations_.find(CellKey{year, category});
    if (it == citations_.end()) return std::nullopt;
    return it->second;
}

std::optional<double> ScalingTable::impact_scale(int year, const std::string& category) const {
    auto it = impacts_.find(CellKey{year, category});
    if (it == impacts_.end()) return std::nullopt;
    return it->second;
}

namespace {

// c_i / c-bar for one publication; uncited work in a cell without a scale
// contributes zero in lenient mode.
double normalized_citations(const Publication& pub, const ScalingTable& scaling, const IndicatorOptions& options,
                            IndicatorDiagnostics* diagnostics) {
    auto scale = scaling.citation_scale(pub.year, pub.subject_category);
    if (!scale) {
        if (options.strict)
            throw ComputeError("no citation scale for cell (" + std::to_string(pub.year) + ", " +
                               pub.subject_category + ") needed by publication " + pub.id);
        if (diagnostics) ++diagnostics->missing_citation_cells;
        return 0.0;
    }
    return double(pub.citations) / *scale;
}

}  // namespace

double compute_fss(std::span<const CreditedPublication> pubs, const ScalingTable& scaling, double t,
                   const IndicatorOptions& options, IndicatorDiagnostics* diagnostics) {
    if (!(t > 0)) throw InputError("years of work must be positive");
    double sum = 0;
    for (const auto& cp : pubs) sum += normalized_citations(*cp.publication, scaling, options, diagnostics) * cp.share;
    return sum / t;
}

double compute_p(std::size_t n_publications, double t) {
    if (!(t > 0)) throw InputError("years of work must be positive");
    return double(n_publications) / t;
}

std::optional<double> compute_ia(std::span<const CreditedPublication> pubs, const ScalingTable& scaling,
                                 const IndicatorOptions& options, IndicatorDiagnostics* diagnostics) {
    if (pubs.empty()) return std::nullopt;
    double sum = 0;
    for (const auto& cp : pubs) sum += normalized_citations(*cp.publication, scaling, options, diagnostics);
    return sum / double(pubs.size());
}

std::optional<double> compute_ij(std::span<const CreditedPublication> pubs, const ScalingTable& scaling,
                                 const IndicatorOptions& options, IndicatorDiagnostics* diagnostics) {
    double sum = 0;
    std::size_t counted = 0;
    for (const auto& cp : pubs) {
        const Publication& pub = *cp.publication;
        if (!pub.journal_if) {
            if (diagnostics) ++diagnostics->unknown_impact_factors;
            continue;
        }
        auto scale = scaling.impact_scale(pub.year, pub.subject_category);
        if (!scale) {
            if (options.strict)
                throw ComputeError("no impact-factor scale for cell (" + std::to_string(pub.year) + ", " +
                                   pub.subject_category + ") needed by publication " + pub.id);
            if (diagnostics) ++diagnostics->missing_impact_cells;
            continue;
        }
        sum += *pub.journal_if / *scale;
        ++counted;
    }
    if (counted == 0) return std::nullopt;
    return sum / double(counted);
}

std::optional<double> IndicatorScores::value(Indicator indicator) const {
    switch (indicator) {
        case Indicator::fss: return fss;
        case Indicator::p: return p;
        case Indicator::ia: return ia;
        case Indicator::ij: return ij;
    }
    return std::nullopt;
}

AuthorshipIndex::AuthorshipIndex(const Corpus& corpus) {
    for (std::size_t i = 0; i < corpus.publications.size(); ++i) {
        const auto& byline = corpus.publications[i].byline;
        for (std::size_t pos = 0; pos < byline.size(); ++pos) index_[byline[pos].author_id].push_back({i, pos});
    }
}

std::span<const Authorship> AuthorshipIndex::of(const std::string& author_id) const {
    auto it = index_.find(author_id);
    if (it == index_.end()) return {};
    return it->second;
}

std::vector<CreditedPublication> credited_publications(const Professor& professor, const Corpus& corpus,
                                                       const AuthorshipIndex& index, CreditConvention convention,
                                                       const ObservationWindow& window) {
    const int first_year = std::max(window.first.year, professor.active_start ? professor.active_start->year : window.first.year);
    const int last_year = std::min(window.last.year, professor.active_end ? professor.active_end->year : window.last.year);

    std::vector<CreditedPublication> out;
    for (const auto& a : index.of(professor.id)) {
        const Publication& pub = corpus.publications[a.publication];
        if (pub.year < first_year || pub.year > last_year) continue;
        const double share = fractional_contribution(pub.byline, a.position, convention);
        if (!out.empty() && out.back().publication == &pub) {
            out.back().share += share;
        } else {
            out.push_back({&pub, share});
        }
    }
    return out;
}

std::vector<IndicatorScores> compute_indicators(const std::vector<Professor>& roster,
                                                const std::vector<Covariates>& covariates, const Corpus& corpus,
                                                const ScalingTable& scaling, const ConventionMap& conventions,
                                                const ObservationWindow& window, const IndicatorOptions& options,
                                                unsigned threads) {
    if (covariates.size() != roster.size()) throw InputError("covariates do not match the roster");
    const AuthorshipIndex index(corpus);
    std::vector<IndicatorScores> scores(roster.size());
    parallel_for(roster.size(), threads, [&](std::size_t i) {
        const Professor& prof = roster[i];
        const double t = covariates[i].t;
        const auto convention = conventions.resolve(prof.sds, prof.uda);
        const auto pubs = credited_publications(prof, corpus, index, convention, window);
        IndicatorScores s;
        s.professor_id = prof.id;
        s.sds = prof.sds;
        s.n_pubs = pubs.size();
        s.fss = compute_fss(pubs, scaling, t, options, &s.diagnostics);
        s.p = compute_p(pubs.size(), t);
        s.ia = compute_ia(pubs, scaling, options, nullptr);
        s.ij = compute_ij(pubs, scaling, options, &s.diagnostics);
        scores[i] = std::move(s);
    });
    return scores;
}

void write_indicator_csv(std::ostream& out, const std::vector<IndicatorScores>& scores) {
    write_csv_row(out, {"professor_id", "sds", "fss", "p", "ia", "ij", "n_pubs", "inactive_flag"});
    for (const auto& s : scores) {
        write_csv_row(out, {s.professor_id, s.sds, format_exact(s.fss), format_exact(s.p),
                            s.ia ? format_exact(*s.ia) : "", s.ij ? format_exact(*s.ij) : "",
                            std::to_string(s.n_pubs), s.inactive() ? "1" : "0"});
    }
}

std::vector<IndicatorScores> read_indicator_csv(std::istream& in) {
    const CsvTable table = read_csv(in);
    std::vector<IndicatorScores> scores;
    if (table.header.empty()) return scores;
    const auto c_id = table.require_column("professor_id");
    const auto c_sds = table.require_column("sds");
    const auto c_fss = table.require_column("fss");
    const auto c_p = table.require_column("p");
    const auto c_ia = table.require_column("ia");
    const auto c_ij = table.require_column("ij");
    const auto c_n = table.require_column("n_pubs");
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() < table.header.size())
            throw InputError("indicator dump line " + std::to_string(table.line_numbers[r]) + ": missing fields");
        IndicatorScores s;
        s.professor_id = row[c_id];
        s.sds = row[c_sds];
        s.fss = parse_double(row[c_fss], "fss");
        s.p = parse_double(row[c_p], "p");
        if (!trim(row[c_ia]).empty()) s.ia = parse_double(row[c_ia], "ia");
        if (!trim(row[c_ij]).empty()) s.ij = parse_double(row[c_ij], "ij");
        s.n_pubs = std::size_t(parse_integer(row[c_n], "n_pubs"));
        scores.push_back(std::move(s));
    }
    return scores;
}

}  // namespace scholarperf
