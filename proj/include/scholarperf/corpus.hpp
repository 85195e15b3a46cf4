#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "scholarperf/dates.hpp"

namespace scholarperf {

enum class Gender { male, female };

/// Polytechnics and schools for advanced studies are public subtypes.
enum class UniversityType { public_university, private_university, polytechnic, advanced_school };

std::string to_string(UniversityType type);
UniversityType parse_university_type(const std::string& token);

struct Professor {
    std::string id;
    Gender gender = Gender::male;
    Date birth_date;
    Date appointment_date;  // promotion to full professor
    std::string sds;
    std::string uda;
    UniversityType university_type = UniversityType::public_university;
    std::optional<Date> active_start;
    std::optional<Date> active_end;

    friend bool operator==(const Professor&, const Professor&) = default;
};

struct Author {
    std::string author_id;
    std::string university_id;

    friend bool operator==(const Author&, const Author&) = default;
};

struct Publication {
    std::string id;
    int year = 0;
    std::string subject_category;
    std::optional<double> journal_if;
    std::int64_t citations = 0;  // counted at the citation census date
    std::vector<Author> byline;
    std::string doc_type;

    friend bool operator==(const Publication&, const Publication&) = default;
};

struct Corpus {
    std::vector<Publication> publications;
    std::size_t dropped_by_doc_type = 0;
    std::vector<std::string> warnings;
};

/// Maps each SDS (field) code to its single UDA (discipline) code.
class SdsMap {
public:
    /// Throws InputError if `sds` is already mapped to a different UDA.
    void add(const std::string& sds, const std::string& uda);
    std::optional<std::string> uda_of(const std::string& sds) const;
    bool empty() const { return map_.empty(); }
    std::size_t size() const { return map_.size(); }
    const std::map<std::string, std::string>& entries() const { return map_; }

    /// Two columns: sds, uda (header row required).
    static SdsMap read_csv(std::istream& in);
    void write_csv(std::ostream& out) const;

private:
    std::map<std::string, std::string> map_;
};

/// Inclusive date range over which performance is observed.
struct ObservationWindow {
    Date first;
    Date last;

    static ObservationWindow from_years(int first_year, int last_year);
    double length_years() const;
    bool contains_year(int year) const { return year >= first.year && year <= last.year; }
};

struct Covariates {
    double age = 0;        // fractional years at census
    double seniority = 0;  // fractional years in rank at census
    int age_years = 0;
    int seniority_years = 0;
    double age_at_appointment = 0;
    int gender_dummy = 0;  // 1 = male
    int u1 = 0;            // private
    int u2 = 0;            // school for advanced studies
    int u3 = 0;            // polytechnic
    double t = 0;          // years of work inside the window
    bool recently_promoted = false;
};

/// Seniority (years) below which a professor counts as recently promoted.
inline constexpr double kRecentPromotionYears = 8.0;

struct RosterIngestOptions {
    /// When set, every roster SDS must appear here with the same UDA.
    /// When null, the roster itself must map each SDS to one UDA.
    const SdsMap* sds_map = nullptr;
};

/// Reads the roster CSV. Fails as a whole with a row-addressed InputError.
std::vector<Professor> ingest_roster(std::istream& in, const RosterIngestOptions& options = {});
void write_roster_csv(std::ostream& out, const std::vector<Professor>& roster);
SdsMap sds_map_from_roster(const std::vector<Professor>& roster);

enum class PublicationFormat { csv, json_lines };

/// Document types dropped by default: not genuine research products.
std::set<std::string> default_excluded_doc_types();

struct PublicationIngestOptions {
    std::set<std::string> excluded_doc_types = default_excluded_doc_types();
    /// Reject bylines naming authors outside `known_authors`.
    bool strict_authors = false;
    const std::unordered_set<std::string>* known_authors = nullptr;
    std::optional<std::pair<int, int>> year_span;
};

Corpus ingest_publications(std::istream& in, PublicationFormat format,
                           const PublicationIngestOptions& options = {});
void write_publications_csv(std::ostream& out, const std::vector<Publication>& publications);
void write_publications_jsonl(std::ostream& out, const std::vector<Publication>& publications);

/// "author@university" tokens joined by ';'.
std::vector<Author> parse_byline(const std::string& text);
std::string format_byline(const std::vector<Author>& byline);

Covariates derive_covariates(const Professor& professor, const Date& census,
                             const ObservationWindow& window);

}  // namespace scholarperf
