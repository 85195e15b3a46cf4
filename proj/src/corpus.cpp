#include "scholarperf/corpus.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "json.hpp"
#include "scholarperf/csv.hpp"
#include "scholarperf/error.hpp"

namespace scholarperf {

namespace {

std::string row_label(const CsvTable& table, std::size_t row) {
    return "row " + std::to_string(row + 1) + " (line " + std::to_string(table.line_numbers[row]) + ")";
}

const std::string& field(const CsvTable& table, std::size_t row, std::size_t col) {
    static const std::string empty;
    const auto& r = table.rows[row];
    return col < r.size() ? r[col] : empty;
}

Gender parse_gender(const std::string& token) {
    const std::string t = to_lower(trim(token));
    if (t == "m" || t == "male") return Gender::male;
    if (t == "f" || t == "female") return Gender::female;
    throw InputError("unknown gender '" + token + "' (expected M or F)");
}

}  // namespace

std::string to_string(UniversityType type) {
    switch (type) {
        case UniversityType::public_university: return "public";
        case UniversityType::private_university: return "private";
        case UniversityType::polytechnic: return "polytechnic";
        case UniversityType::advanced_school: return "advanced_school";
    }
    return "public";
}

UniversityType parse_university_type(const std::string& token) {
    const std::string t = to_lower(trim(token));
    if (t == "public") return UniversityType::public_university;
    if (t == "private") return UniversityType::private_university;
    if (t == "polytechnic") return UniversityType::polytechnic;
    if (t == "advanced_school" || t == "advanced-school" || t == "advanced_studies")
        return UniversityType::advanced_school;
    throw InputError("unknown university_type '" + token + "'");
}

void SdsMap::add(const std::string& sds, const std::string& uda) {
    auto [it, inserted] = map_.emplace(sds, uda);
    if (!inserted && it->second != uda)
        throw InputError("SDS '" + sds + "' mapped to both '" + it->second + "' and '" + uda + "'");
}

std::optional<std::string> SdsMap::uda_of(const std::string& sds) const {
    auto it = map_.find(sds);
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

SdsMap SdsMap::read_csv(std::istream& in) {
    const CsvTable table = scholarperf::read_csv(in);
    SdsMap map;
    if (table.header.empty()) return map;
    if (table.header.size() < 2) throw InputError("SDS map needs two columns: sds, uda");
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string sds = trim(field(table, r, 0));
        const std::string uda = trim(field(table, r, 1));
        if (sds.empty() || uda.empty()) throw InputError("SDS map " + row_label(table, r) + ": empty code");
        try {
            map.add(sds, uda);
        } catch (const InputError& e) {
            throw InputError("SDS map " + row_label(table, r) + ": " + e.what());
        }
    }
    return map;
}

void SdsMap::write_csv(std::ostream& out) const {
    write_csv_row(out, {"sds", "uda"});
    for (const auto& [sds, uda] : map_) write_csv_row(out, {sds, uda});
}

ObservationWindow ObservationWindow::from_years(int first_year, int last_year) {
    if (last_year < first_year) throw InputError("observation window ends before it starts");
    return {Date{first_year, 1, 1}, Date{last_year, 12, 31}};
}

double ObservationWindow::length_years() const { return fractional_years_between(first, last.next_day()); }

std::vector<Professor> ingest_roster(std::istream& in, const RosterIngestOptions& options) {
    const CsvTable table = read_csv(in);
    std::vector<Professor> roster;
    if (table.header.empty()) return roster;

    const auto c_id = table.require_column("id");
    const auto c_gender = table.require_column("gender");
    const auto c_birth = table.require_column("birth_date");
    const auto c_appoint = table.require_column("appointment_date");
    const auto c_sds = table.require_column("sds");
    const auto c_uda = table.require_column("uda");
    const auto c_type = table.require_column("university_type");
    const auto c_start = table.column("active_start");
    const auto c_end = table.column("active_end");

    std::unordered_map<std::string, std::size_t> seen;
    SdsMap learned;
    roster.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        try {
            Professor p;
            p.id = trim(field(table, r, c_id));
            if (p.id.empty()) throw InputError("empty id");
            if (auto [it, inserted] = seen.emplace(p.id, r); !inserted)
                throw InputError("duplicate id '" + p.id + "' (first seen at " + row_label(table, it->second) + ")");
            p.gender = parse_gender(field(table, r, c_gender));
            p.birth_date = Date::parse_iso(trim(field(table, r, c_birth)));
            p.appointment_date = Date::parse_iso(trim(field(table, r, c_appoint)));
            p.sds = trim(field(table, r, c_sds));
            p.uda = trim(field(table, r, c_uda));
            p.university_type = parse_university_type(field(table, r, c_type));
            if (c_start) {
                const std::string s = trim(field(table, r, *c_start));
                if (!s.empty()) p.active_start = Date::parse_iso(s);
            }
            if (c_end) {
                const std::string s = trim(field(table, r, *c_end));
                if (!s.empty()) p.active_end = Date::parse_iso(s);
            }

            if (p.appointment_date < add_years(p.birth_date, 20))
                throw InputError("appointment " + p.appointment_date.iso() + " is less than 20 years after birth " +
                                 p.birth_date.iso());
            if (p.active_start && p.active_end && *p.active_end < *p.active_start)
                throw InputError("active span is empty");
            if (options.sds_map) {
                auto uda = options.sds_map->uda_of(p.sds);
                if (!uda) throw InputError("unknown SDS code '" + p.sds + "'");
                if (p.uda.empty()) p.uda = *uda;
                if (*uda != p.uda)
                    throw InputError("SDS '" + p.sds + "' belongs to UDA '" + *uda + "', not '" + p.uda + "'");
            } else {
                if (p.sds.empty() || p.uda.empty()) throw InputError("empty sds or uda");
                learned.add(p.sds, p.uda);
            }
            roster.push_back(std::move(p));
        } catch (const InputError& e) {
            throw InputError("roster " + row_label(table, r) + ": " + e.what());
        }
    }
    return roster;
}

void write_roster_csv(std::ostream& out, const std::vector<Professor>& roster) {
    write_csv_row(out, {"id", "gender", "birth_date", "appointment_date", "sds", "uda", "university_type",
                        "active_start", "active_end"});
    for (const auto& p : roster) {
        write_csv_row(out, {p.id, p.gender == Gender::male ? "M" : "F", p.birth_date.iso(),
                            p.appointment_date.iso(), p.sds, p.uda, to_string(p.university_type),
                            p.active_start ? p.active_start->iso() : "", p.active_end ? p.active_end->iso() : ""});
    }
}

SdsMap sds_map_from_roster(const std::vector<Professor>& roster) {
    SdsMap map;
    for (const auto& p : roster) map.add(p.sds, p.uda);
    return map;
}

std::set<std::string> default_excluded_doc_types() {
    return {"editorial material", "conference abstract", "meeting abstract", "reply", "letter reply"};
}

std::vector<Author> parse_byline(const std::string& text) {
    std::vector<Author> byline;
    for (const auto& token : split(text, ';')) {
        const std::string t = trim(token);
        if (t.empty()) continue;
        const auto at = t.rfind('@');
        if (at == std::string::npos || at == 0)
            throw InputError("byline token '" + t + "' is not author_id@university_id");
        byline.push_back({t.substr(0, at), t.substr(at + 1)});
    }
    return byline;
}

std::string format_byline(const std::vector<Author>& byline) {
    std::string out;
    for (std::size_t i = 0; i < byline.size(); ++i) {
        if (i) out.push_back(';');
        out += byline[i].author_id + "@" + byline[i].university_id;
    }
    return out;
}

namespace {

struct RawPublication {
    Publication pub;
    std::string doc_type_key;
};

void validate_publication(const Publication& p, const PublicationIngestOptions& options) {
    if (p.id.empty()) throw InputError("empty id");
    if (p.citations < 0) throw InputError("negative citations (" + std::to_string(p.citations) + ")");
    if (p.journal_if && *p.journal_if < 0) throw InputError("negative journal impact factor");
    if (p.byline.empty()) throw InputError("empty byline");
    if (options.year_span && (p.year < options.year_span->first || p.year > options.year_span->second))
        throw InputError("year " + std::to_string(p.year) + " outside corpus span");
    if (options.strict_authors && options.known_authors) {
        for (const auto& a : p.byline)
            if (!options.known_authors->count(a.author_id))
                throw InputError("unknown author id '" + a.author_id + "' in byline");
    }
}

Publication publication_from_json(const nlohmann::json& j) {
    Publication p;
    p.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    p.year = j.at("year").get<int>();
    p.subject_category = j.at("subject_category").get<std::string>();
    if (j.contains("journal_if") && !j.at("journal_if").is_null()) p.journal_if = j.at("journal_if").get<double>();
    p.citations = j.at("citations").get<std::int64_t>();
    p.doc_type = j.value("doc_type", std::string{});
    const auto& by = j.at("byline");
    if (by.is_string()) {
        p.byline = parse_byline(by.get<std::string>());
    } else {
        for (const auto& token : by) {
            auto parsed = parse_byline(token.get<std::string>());
            p.byline.insert(p.byline.end(), parsed.begin(), parsed.end());
        }
    }
    return p;
}

}  // namespace

Corpus ingest_publications(std::istream& in, PublicationFormat format, const PublicationIngestOptions& options) {
    Corpus corpus;
    std::set<std::string> excluded;
    for (const auto& t : options.excluded_doc_types) excluded.insert(to_lower(trim(t)));
    std::unordered_set<std::string> ids;

    auto accept = [&](Publication p, const std::string& where) {
        try {
            if (excluded.count(to_lower(trim(p.doc_type)))) {
                ++corpus.dropped_by_doc_type;
                return;
            }
            validate_publication(p, options);
            if (!ids.insert(p.id).second) throw InputError("duplicate publication id '" + p.id + "'");
            corpus.publications.push_back(std::move(p));
        } catch (const InputError& e) {
            throw InputError("publications " + where + ": " + e.what());
        }
    };

    if (format == PublicationFormat::csv) {
        const CsvTable table = read_csv(in);
        if (!table.header.empty()) {
            const auto c_id = table.require_column("id");
            const auto c_year = table.require_column("year");
            const auto c_cat = table.require_column("subject_category");
            const auto c_if = table.require_column("journal_if");
            const auto c_cit = table.require_column("citations");
            const auto c_doc = table.require_column("doc_type");
            const auto c_by = table.require_column("byline");
            for (std::size_t r = 0; r < table.rows.size(); ++r) {
                Publication p;
                try {
                    p.id = trim(field(table, r, c_id));
                    p.year = int(parse_integer(field(table, r, c_year), "year"));
                    p.subject_category = trim(field(table, r, c_cat));
                    const std::string jif = trim(field(table, r, c_if));
                    if (!jif.empty()) p.journal_if = parse_double(jif, "journal_if");
                    p.citations = parse_integer(field(table, r, c_cit), "citations");
                    p.doc_type = trim(field(table, r, c_doc));
                    p.byline = parse_byline(field(table, r, c_by));
                } catch (const InputError& e) {
                    throw InputError("publications " + row_label(table, r) + ": " + e.what());
                }
                accept(std::move(p), row_label(table, r));
            }
        }
    } else {
        std::string line;
        std::size_t number = 0;
        while (std::getline(in, line)) {
            ++number;
            if (trim(line).empty()) continue;
            const std::string where = "line " + std::to_string(number);
            Publication p;
            try {
                p = publication_from_json(nlohmann::json::parse(line));
            } catch (const nlohmann::json::exception& e) {
                throw InputError("publications " + where + ": " + e.what());
            } catch (const InputError& e) {
                throw InputError("publications " + where + ": " + e.what());
            }
            accept(std::move(p), where);
        }
    }

    if (corpus.publications.empty() && corpus.dropped_by_doc_type == 0)
        corpus.warnings.push_back("publication file is empty");
    if (corpus.dropped_by_doc_type)
        corpus.warnings.push_back("dropped " + std::to_string(corpus.dropped_by_doc_type) +
                                  " publications by document type");
    return corpus;
}

void write_publications_csv(std::ostream& out, const std::vector<Publication>& publications) {
    write_csv_row(out, {"id", "year", "subject_category", "journal_if", "citations", "doc_type", "byline"});
    for (const auto& p : publications) {
        write_csv_row(out, {p.id, std::to_string(p.year), p.subject_category,
                            p.journal_if ? format_exact(*p.journal_if) : "", std::to_string(p.citations), p.doc_type,
                            format_byline(p.byline)});
    }
}

void write_publications_jsonl(std::ostream& out, const std::vector<Publication>& publications) {
    for (const auto& p : publications) {
        nlohmann::json j;
        j["id"] = p.id;
        j["year"] = p.year;
        j["subject_category"] = p.subject_category;
        j["journal_if"] = p.journal_if ? nlohmann::json(*p.journal_if) : nlohmann::json(nullptr);
        j["citations"] = p.citations;
        j["doc_type"] = p.doc_type;
        auto by = nlohmann::json::array();
        for (const auto& a : p.byline) by.push_back(a.author_id + "@" + a.university_id);
        j["byline"] = std::move(by);
        out << j.dump() << '\n';
    }
}

Covariates derive_covariates(const Professor& professor, const Date& census, const ObservationWindow& window) {
    if (census < professor.birth_date)
        throw InputError("professor " + professor.id + ": census date precedes birth date");
    if (census < professor.appointment_date)
        throw InputError("professor " + professor.id + ": census date precedes appointment date");

    Covariates c;
    c.age = fractional_years_between(professor.birth_date, census);
    c.seniority = fractional_years_between(professor.appointment_date, census);
    c.age_years = whole_years_between(professor.birth_date, census);
    c.seniority_years = whole_years_between(professor.appointment_date, census);
    c.age_at_appointment = fractional_years_between(professor.birth_date, professor.appointment_date);
    c.gender_dummy = professor.gender == Gender::male ? 1 : 0;
    c.u1 = professor.university_type == UniversityType::private_university;
    c.u2 = professor.university_type == UniversityType::advanced_school;
    c.u3 = professor.university_type == UniversityType::polytechnic;
    c.recently_promoted = c.seniority < kRecentPromotionYears;

    const Date start = std::max(window.first, professor.active_start.value_or(window.first));
    const Date end = std::min(window.last, professor.active_end.value_or(window.last));
    if (end < start) throw InputError("professor " + professor.id + ": active span does not meet the window");
    c.t = fractional_years_between(start, end.next_day());
    return c;
}

}  // namespace scholarperf
