#include "scholarperf/fit_io.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "scholarperf/csv.hpp"
#include "scholarperf/error.hpp"

namespace scholarperf {

namespace {

const std::vector<std::string> kColumns = {
    "group", "dependent", "term", "coefficient", "robust_se", "classical_se", "vif", "ame",
    "aic", "pseudo_r2", "quasi_log_likelihood", "null_quasi_log_likelihood", "n", "age_degree",
    "age_center", "converged", "iterations", "gradient_sup_norm", "dropped_terms"};

std::string number(double v) { return std::isnan(v) ? "" : format_exact(v); }

double parse_or_nan(const std::string& text, const char* what) {
    return trim(text).empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(text, what);
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.push_back(';');
        out += parts[i];
    }
    return out;
}

nlohmann::json number_json(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

double json_number(const nlohmann::json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

void write_fits_csv(std::ostream& out, std::span<const GroupFit> fits) {
    write_csv_row(out, kColumns);
    for (const auto& gf : fits) {
        const FitResult& f = gf.fit;
        for (std::size_t j = 0; j < f.terms.size(); ++j) {
            auto ame = f.ame.find(f.terms[j]);
            write_csv_row(out, {gf.group, f.dependent, f.terms[j], number(f.coefficients[j]), number(f.robust_se[j]),
                                number(f.classical_se[j]), j < f.vif.size() ? number(f.vif[j]) : "",
                                ame == f.ame.end() ? "" : number(ame->second), number(f.aic), number(f.pseudo_r2),
                                number(f.quasi_log_likelihood), number(f.null_quasi_log_likelihood),
                                std::to_string(f.n), std::to_string(f.age_degree), number(f.age_center),
                                f.converged ? "1" : "0", std::to_string(f.iterations), number(f.gradient_sup_norm),
                                join(f.dropped_terms)});
        }
    }
}

std::vector<GroupFit> read_fits_csv(std::istream& in) {
    const CsvTable table = read_csv(in);
    std::vector<GroupFit> fits;
    if (table.header.empty()) return fits;
    std::vector<std::size_t> col;
    for (const auto& name : kColumns) col.push_back(table.require_column(name));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() < kColumns.size())
            throw InputError("fit table line " + std::to_string(table.line_numbers[r]) + ": missing fields");
        auto at = [&](std::size_t k) -> const std::string& { return row[col[k]]; };
        if (fits.empty() || fits.back().group != at(0)) {
            GroupFit gf;
            gf.group = at(0);
            FitResult& f = gf.fit;
            f.dependent = at(1);
            f.aic = parse_or_nan(at(8), "aic");
            f.pseudo_r2 = parse_or_nan(at(9), "pseudo_r2");
            f.quasi_log_likelihood = parse_or_nan(at(10), "quasi_log_likelihood");
            f.null_quasi_log_likelihood = parse_or_nan(at(11), "null_quasi_log_likelihood");
            f.n = std::size_t(parse_integer(at(12), "n"));
            f.age_degree = int(parse_integer(at(13), "age_degree"));
            f.age_center = parse_or_nan(at(14), "age_center");
            f.converged = at(15) == "1";
            f.iterations = int(parse_integer(at(16), "iterations"));
            f.gradient_sup_norm = parse_or_nan(at(17), "gradient_sup_norm");
            for (const auto& t : split(at(18), ';'))
                if (!t.empty()) f.dropped_terms.push_back(t);
            fits.push_back(std::move(gf));
        }
        FitResult& f = fits.back().fit;
        f.terms.push_back(at(2));
        f.coefficients.push_back(parse_or_nan(at(3), "coefficient"));
        f.robust_se.push_back(parse_or_nan(at(4), "robust_se"));
        f.classical_se.push_back(parse_or_nan(at(5), "classical_se"));
        f.vif.push_back(parse_or_nan(at(6), "vif"));
        if (!trim(at(7)).empty()) f.ame[at(2)] = parse_double(at(7), "ame");
    }
    return fits;
}

nlohmann::json fits_to_json(std::span<const GroupFit> fits) {
    auto doc = nlohmann::json::array();
    for (const auto& gf : fits) {
        const FitResult& f = gf.fit;
        nlohmann::json j;
        j["group"] = gf.group;
        j["dependent"] = f.dependent;
        auto terms = nlohmann::json::array();
        for (std::size_t k = 0; k < f.terms.size(); ++k) {
            terms.push_back({{"term", f.terms[k]},
                             {"coefficient", number_json(f.coefficients[k])},
                             {"robust_se", number_json(f.robust_se[k])},
                             {"classical_se", number_json(f.classical_se[k])},
                             {"vif", number_json(k < f.vif.size() ? f.vif[k] : std::nan(""))}});
        }
        j["terms"] = std::move(terms);
        j["ame"] = f.ame;
        j["aic"] = number_json(f.aic);
        j["pseudo_r2"] = number_json(f.pseudo_r2);
        j["quasi_log_likelihood"] = number_json(f.quasi_log_likelihood);
        j["null_quasi_log_likelihood"] = number_json(f.null_quasi_log_likelihood);
        j["n"] = f.n;
        j["age_degree"] = f.age_degree;
        j["age_center"] = number_json(f.age_center);
        j["converged"] = f.converged;
        j["iterations"] = f.iterations;
        j["gradient_sup_norm"] = number_json(f.gradient_sup_norm);
        j["dropped_terms"] = f.dropped_terms;
        doc.push_back(std::move(j));
    }
    return doc;
}

std::vector<GroupFit> fits_from_json(const nlohmann::json& doc) {
    std::vector<GroupFit> fits;
    try {
        for (const auto& j : doc) {
            GroupFit gf;
            gf.group = j.at("group").get<std::string>();
            FitResult& f = gf.fit;
            f.dependent = j.at("dependent").get<std::string>();
            for (const auto& t : j.at("terms")) {
                f.terms.push_back(t.at("term").get<std::string>());
                f.coefficients.push_back(json_number(t.at("coefficient")));
                f.robust_se.push_back(json_number(t.at("robust_se")));
                f.classical_se.push_back(json_number(t.at("classical_se")));
                f.vif.push_back(json_number(t.at("vif")));
            }
            f.ame = j.at("ame").get<std::map<std::string, double>>();
            f.aic = json_number(j.at("aic"));
            f.pseudo_r2 = json_number(j.at("pseudo_r2"));
            f.quasi_log_likelihood = json_number(j.at("quasi_log_likelihood"));
            f.null_quasi_log_likelihood = json_number(j.at("null_quasi_log_likelihood"));
            f.n = j.at("n").get<std::size_t>();
            f.age_degree = j.at("age_degree").get<int>();
            f.age_center = json_number(j.at("age_center"));
            f.converged = j.at("converged").get<bool>();
            f.iterations = j.at("iterations").get<int>();
            f.gradient_sup_norm = json_number(j.at("gradient_sup_norm"));
            f.dropped_terms = j.at("dropped_terms").get<std::vector<std::string>>();
            fits.push_back(std::move(gf));
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed fit JSON: ") + e.what());
    }
    return fits;
}

}  // namespace scholarperf
