#include "scholarperf/sim.hpp"

#include <algorithm>
#include <array>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <chrono>

#include "scholarperf/csv.hpp"
#include "scholarperf/error.hpp"
#include "scholarperf/parallel.hpp"
#include "scholarperf/pipeline.hpp"

namespace scholarperf {

namespace {

constexpr double kReferenceAge = 60.0;
constexpr double kReferenceSeniority = 15.0;
constexpr double kMeanAppointmentAge = 45.8;
constexpr double kMinAppointmentAge = 30.0;
constexpr double kMinSeniority = 0.05;

// Age at census: uniform within brackets, bracket shares shaped like the
// national full-professor age distribution.
struct AgeBracket {
    int low;
    int high;
    double share;
};
constexpr std::array<AgeBracket, 5> kAgeBrackets = {{
    {35, 40, 0.005},
    {41, 50, 0.110},
    {51, 65, 0.555},
    {66, 70, 0.200},
    {71, 74, 0.130},
}};

double draw_age(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u = unit(rng);
    const AgeBracket* bracket = &kAgeBrackets.back();
    for (const auto& b : kAgeBrackets) {
        if (u < b.share) {
            bracket = &b;
            break;
        }
        u -= b.share;
    }
    std::uniform_int_distribution<int> whole(bracket->low, bracket->high);
    return double(whole(rng)) + unit(rng);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Inverse-CDF draw from N(mean, sd) truncated to [low, high] using uniform u.
double truncated_normal(double mean, double sd, double low, double high, double u) {
    const double a = (low - mean) / sd;
    const double b = (high - mean) / sd;
    double z;
    if (a >= 0) {
        // upper tail: work with survival functions for precision
        const double qa = normal_sf(a), qb = normal_sf(b);
        const double q = qa - u * (qa - qb);
        z = q > 0 ? std::sqrt(2.0) * boost::math::erfc_inv(2.0 * q) : a;
    } else {
        const double pa = normal_cdf(a), pb = normal_cdf(b);
        const double p = pa + u * (pb - pa);
        z = p > 0 ? -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p) : a;
    }
    return std::clamp(mean + sd * z, low, high);
}

double appointment_age(double age, double spread, double u) {
    return truncated_normal(kMeanAppointmentAge, spread, kMinAppointmentAge, age - kMinSeniority, u);
}

double sample_correlation_for_spread(const std::vector<double>& ages, const std::vector<double>& uniforms,
                                     double spread) {
    std::vector<double> sen(ages.size());
    for (std::size_t i = 0; i < ages.size(); ++i) sen[i] = ages[i] - appointment_age(ages[i], spread, uniforms[i]);
    return pearson_correlation(ages, sen);
}

constexpr double kMinSpread = 0.25;
constexpr double kMaxSpread = 60.0;

Date minus_years(const Date& date, double years) {
    const auto days = std::chrono::days{std::llround(years * 365.2425)};
    return Date::from_days(date.to_days() - days);
}

Date plus_years(const Date& date, double years) {
    const auto days = std::chrono::days{std::llround(years * 365.2425)};
    return Date::from_days(date.to_days() + days);
}

std::string padded(const char* prefix, std::size_t value, int width) {
    std::string digits = std::to_string(value);
    if (int(digits.size()) < width) digits.insert(0, std::size_t(width) - digits.size(), '0');
    return prefix + digits;
}

}  // namespace

std::vector<FieldSpec> default_fields() {
    return {
        {"MAT/05", "MAT", CreditConvention::alphabetical, -0.4, 2.5, 3.0, 1.2},
        {"FIS/01", "PHY", CreditConvention::alphabetical, 0.5, 8.0, 6.0, 3.5},
        {"CHIM/03", "CHE", CreditConvention::alphabetical, 0.3, 5.0, 6.0, 3.8},
        {"BIO/10", "BIO", CreditConvention::position_weighted, 0.2, 6.0, 7.0, 4.5},
        {"MED/09", "MED", CreditConvention::position_weighted, 0.1, 7.0, 8.0, 4.0},
        {"ING-INF/05", "IIE", CreditConvention::alphabetical, 0.0, 3.5, 3.0, 1.8},
    };
}

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) return 0.0;
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / double(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / double(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

double calibrate_appointment_spread(double target) {
    static std::mutex mutex;
    static std::map<double, double> cache;
    std::lock_guard lock(mutex);
    if (auto it = cache.find(target); it != cache.end()) return it->second;

    constexpr std::size_t kSample = 20000;
    std::mt19937_64 rng(0x5eedca1bULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> ages(kSample), uniforms(kSample);
    for (std::size_t i = 0; i < kSample; ++i) {
        ages[i] = draw_age(rng);
        uniforms[i] = unit(rng);
    }
    // correlation falls as the spread of appointment age grows
    const double high_corr = sample_correlation_for_spread(ages, uniforms, kMinSpread);
    const double low_corr = sample_correlation_for_spread(ages, uniforms, kMaxSpread);
    if (target > high_corr || target < low_corr) {
        throw InputError("age/seniority correlation target " + format_exact(target) +
                         " is infeasible for the simulated age marginals (reachable range " +
                         format_exact(std::round(low_corr * 1000) / 1000) + " to " +
                         format_exact(std::round(high_corr * 1000) / 1000) + ")");
    }
    double lo = kMinSpread, hi = kMaxSpread;
    for (int iter = 0; iter < 60; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (sample_correlation_for_spread(ages, uniforms, mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    const double spread = 0.5 * (lo + hi);
    cache.emplace(target, spread);
    return spread;
}

void SimConfig::validate() const {
    if (!(std::abs(age_seniority_corr_target) < 1)) throw InputError("correlation target must lie in (-1, 1)");
    if (!(citation_dispersion > 0)) throw InputError("citation dispersion must be positive");
    if (!(latent_heterogeneity >= 0)) throw InputError("latent heterogeneity must be nonnegative");
    if (fields.empty()) throw InputError("at least one field is required");
    for (const auto& f : fields) {
        if (f.sds.empty() || f.uda.empty()) throw InputError("field with empty sds or uda");
        if (!(f.mean_authors >= 1)) throw InputError("field " + f.sds + ": mean byline length must be >= 1");
        if (!(f.citation_base > 0) || !(f.impact_factor_mean > 0))
            throw InputError("field " + f.sds + ": citation and impact-factor means must be positive");
    }
    for (double share : {male_share, private_share, polytechnic_share, advanced_share})
        if (!(share >= 0 && share <= 1)) throw InputError("shares must lie in [0, 1]");
    if (private_share + polytechnic_share + advanced_share > 1) throw InputError("university type shares exceed 1");
    if (window_last_year < window_first_year) throw InputError("window ends before it starts");
    if (census < Date{window_last_year, 12, 31}) throw InputError("census date precedes the end of the window");
}

SimConfig SimConfig::from_key_values(const KeyValueConfig& kv) {
    static const std::set<std::string> known = {
        "n_professors", "fields", "baseline_log_rate", "true_age_effect", "true_seniority_effect",
        "true_gender_effect", "latent_heterogeneity", "age_seniority_corr_target", "citation_dispersion",
        "male_share", "private_share", "polytechnic_share", "advanced_share", "window", "census_date", "seed"};
    for (const auto& [key, value] : kv.values())
        if (!known.count(key)) throw InputError("unknown simulation setting '" + key + "'");

    SimConfig c;
    const long long n = kv.get_integer("n_professors", (long long)c.n_professors);
    if (n < 0) throw InputError("n_professors must be nonnegative");
    c.n_professors = std::size_t(n);
    c.baseline_log_rate = kv.get_double("baseline_log_rate", c.baseline_log_rate);
    c.true_age_effect = kv.get_double("true_age_effect", c.true_age_effect);
    c.true_seniority_effect = kv.get_double("true_seniority_effect", c.true_seniority_effect);
    c.true_gender_effect = kv.get_double("true_gender_effect", c.true_gender_effect);
    c.latent_heterogeneity = kv.get_double("latent_heterogeneity", c.latent_heterogeneity);
    c.age_seniority_corr_target = kv.get_double("age_seniority_corr_target", c.age_seniority_corr_target);
    c.citation_dispersion = kv.get_double("citation_dispersion", c.citation_dispersion);
    c.male_share = kv.get_double("male_share", c.male_share);
    c.private_share = kv.get_double("private_share", c.private_share);
    c.polytechnic_share = kv.get_double("polytechnic_share", c.polytechnic_share);
    c.advanced_share = kv.get_double("advanced_share", c.advanced_share);
    const long long seed = kv.get_integer("seed", (long long)c.seed);
    c.seed = std::uint64_t(seed);
    if (auto w = kv.get("window")) {
        const auto parts = split(*w, '-');
        if (parts.size() != 2) throw InputError("window must look like 2006-2010");
        c.window_first_year = int(parse_integer(parts[0], "window start"));
        c.window_last_year = int(parse_integer(parts[1], "window end"));
    }
    if (auto d = kv.get("census_date")) c.census = Date::parse_iso(*d);
    if (auto f = kv.get("fields")) {
        // sds:uda:convention[:rate_shift:mean_authors:citation_base:impact_factor_mean];...
        c.fields.clear();
        for (const auto& entry : split(*f, ';')) {
            if (trim(entry).empty()) continue;
            const auto parts = split(trim(entry), ':');
            if (parts.size() != 3 && parts.size() != 7)
                throw InputError("field entry '" + entry + "' needs 3 or 7 ':'-separated parts");
            FieldSpec fs;
            fs.sds = trim(parts[0]);
            fs.uda = trim(parts[1]);
            fs.convention = parse_credit_convention(parts[2]);
            if (parts.size() == 7) {
                fs.rate_shift = parse_double(parts[3], "rate_shift");
                fs.mean_authors = parse_double(parts[4], "mean_authors");
                fs.citation_base = parse_double(parts[5], "citation_base");
                fs.impact_factor_mean = parse_double(parts[6], "impact_factor_mean");
            }
            c.fields.push_back(fs);
        }
    }
    c.validate();
    return c;
}

KeyValueConfig SimConfig::to_key_values() const {
    KeyValueConfig kv;
    kv.set("n_professors", std::to_string(n_professors));
    std::string f;
    for (const auto& fs : fields) {
        if (!f.empty()) f += ";";
        f += fs.sds + ":" + fs.uda + ":" + to_string(fs.convention) + ":" + format_exact(fs.rate_shift) + ":" +
             format_exact(fs.mean_authors) + ":" + format_exact(fs.citation_base) + ":" +
             format_exact(fs.impact_factor_mean);
    }
    kv.set("fields", f);
    kv.set("baseline_log_rate", format_exact(baseline_log_rate));
    kv.set("true_age_effect", format_exact(true_age_effect));
    kv.set("true_seniority_effect", format_exact(true_seniority_effect));
    kv.set("true_gender_effect", format_exact(true_gender_effect));
    kv.set("latent_heterogeneity", format_exact(latent_heterogeneity));
    kv.set("age_seniority_corr_target", format_exact(age_seniority_corr_target));
    kv.set("citation_dispersion", format_exact(citation_dispersion));
    kv.set("male_share", format_exact(male_share));
    kv.set("private_share", format_exact(private_share));
    kv.set("polytechnic_share", format_exact(polytechnic_share));
    kv.set("advanced_share", format_exact(advanced_share));
    kv.set("window", std::to_string(window_first_year) + "-" + std::to_string(window_last_year));
    kv.set("census_date", census.iso());
    kv.set("seed", std::to_string(seed));
    return kv;
}

SyntheticCohort generate_cohort(const SimConfig& config) {
    config.validate();
    SyntheticCohort cohort;
    for (const auto& f : config.fields) {
        cohort.sds_map.add(f.sds, f.uda);
        cohort.conventions.set(f.sds, f.convention);
    }
    if (config.n_professors == 0) return cohort;

    const double spread = calibrate_appointment_spread(config.age_seniority_corr_target);
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> standard_normal(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_field(0, config.fields.size() - 1);
    std::gamma_distribution<double> citation_noise(config.citation_dispersion, 1.0 / config.citation_dispersion);
    const ObservationWindow window = ObservationWindow::from_years(config.window_first_year, config.window_last_year);
    const double t = window.length_years();
    std::uniform_int_distribution<int> pick_year(config.window_first_year, config.window_last_year);
    const int citation_year = config.census.year + 1;

    std::size_t pub_counter = 0;
    cohort.roster.reserve(config.n_professors);
    for (std::size_t i = 0; i < config.n_professors; ++i) {
        const FieldSpec& field = config.fields[pick_field(rng)];
        const double age = draw_age(rng);
        const double appointed_at = appointment_age(age, spread, unit(rng));

        Professor p;
        p.id = padded("P", i + 1, 5);
        p.gender = unit(rng) < config.male_share ? Gender::male : Gender::female;
        p.birth_date = minus_years(config.census, age);
        p.appointment_date = plus_years(p.birth_date, appointed_at);
        if (p.appointment_date > config.census) p.appointment_date = config.census;
        p.sds = field.sds;
        p.uda = field.uda;
        const double type_draw = unit(rng);
        std::string university;
        if (type_draw < config.private_share) {
            p.university_type = UniversityType::private_university;
            university = padded("PRIV", std::size_t(unit(rng) * 5), 2);
        } else if (type_draw < config.private_share + config.polytechnic_share) {
            p.university_type = UniversityType::polytechnic;
            university = padded("POLI", std::size_t(unit(rng) * 3), 2);
        } else if (type_draw < config.private_share + config.polytechnic_share + config.advanced_share) {
            p.university_type = UniversityType::advanced_school;
            university = padded("SSA", std::size_t(unit(rng) * 2), 2);
        } else {
            p.university_type = UniversityType::public_university;
            university = padded("UNI", std::size_t(unit(rng) * 50), 2);
        }

        const double seniority = fractional_years_between(p.appointment_date, config.census);
        const double latent = config.latent_heterogeneity * standard_normal(rng);
        const double log_rate = config.baseline_log_rate + field.rate_shift +
                                config.true_age_effect * (age - kReferenceAge) +
                                config.true_seniority_effect * (seniority - kReferenceSeniority) +
                                config.true_gender_effect * (p.gender == Gender::male ? 1.0 : 0.0) + latent;
        std::poisson_distribution<long> count_dist(std::exp(log_rate) * t);
        const long n_pubs = count_dist(rng);

        std::poisson_distribution<long> extra_authors(std::max(field.mean_authors - 1.0, 0.0));
        std::gamma_distribution<double> impact(4.0, field.impact_factor_mean / 4.0);
        for (long k = 0; k < n_pubs; ++k) {
            Publication pub;
            pub.id = padded("W", ++pub_counter, 7);
            pub.year = pick_year(rng);
            pub.subject_category = field.sds;
            pub.doc_type = "article";
            pub.journal_if = impact(rng);
            const double expected_citations = field.citation_base * (double(citation_year - pub.year) + 0.5);
            std::poisson_distribution<long> citations(expected_citations * citation_noise(rng));
            pub.citations = citations(rng);

            const std::size_t n_authors = 1 + std::size_t(extra_authors(rng));
            std::uniform_int_distribution<std::size_t> pick_position(0, n_authors - 1);
            const std::size_t own = pick_position(rng);
            for (std::size_t a = 0; a < n_authors; ++a) {
                if (a == own) {
                    pub.byline.push_back({p.id, university});
                } else {
                    const bool colleague = unit(rng) < 0.6;
                    pub.byline.push_back({pub.id + "-A" + std::to_string(a),
                                          colleague ? university : padded("EXT", std::size_t(unit(rng) * 200), 3)});
                }
            }
            cohort.corpus.publications.push_back(std::move(pub));
        }
        cohort.roster.push_back(std::move(p));
    }
    return cohort;
}

namespace {

std::pair<double, double> mean_sd(const std::vector<double>& v) {
    if (v.empty()) return {0, 0};
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, v.size() > 1 ? std::sqrt(ss / double(v.size() - 1)) : 0.0};
}

}  // namespace

RecoveryReport recovery_experiment(const SimConfig& config, std::size_t n_runs, unsigned threads) {
    if (n_runs < 1) throw InputError("recovery experiment needs at least one run");
    config.validate();
    calibrate_appointment_spread(config.age_seniority_corr_target);  // surface infeasibility up front

    RecoveryReport report;
    report.config = config;
    report.runs.resize(n_runs);
    parallel_for(n_runs, threads, [&](std::size_t r) {
        RecoveryRun& run = report.runs[r];
        run.run = r;
        run.seed = config.seed + r;
        try {
            SimConfig c = config;
            c.seed = run.seed;
            const SyntheticCohort cohort = generate_cohort(c);
            PipelineConfig pc;
            pc.census = c.census;
            pc.window = ObservationWindow::from_years(c.window_first_year, c.window_last_year);
            const PipelineOutput out = run_indicator_pipeline(cohort.roster, cohort.corpus, cohort.conventions, pc);

            std::vector<double> ages, seniorities;
            std::size_t inactive = 0;
            for (std::size_t i = 0; i < cohort.roster.size(); ++i) {
                ages.push_back(out.covariates[i].age);
                seniorities.push_back(out.covariates[i].seniority);
                inactive += out.scores[i].inactive();
            }
            run.age_seniority_corr = pearson_correlation(ages, seniorities);
            run.inactive_share = cohort.roster.empty() ? 0.0 : double(inactive) / double(cohort.roster.size());

            const auto rows = build_observations(cohort.roster, out.covariates, out.percentiles, Indicator::fss);
            const auto selection = select_age_degree(rows, ModelSpec{}, 3);
            const FitResult& fit = selection.selected();
            run.age_degree = selection.degree;
            run.n = fit.n;
            run.pseudo_r2 = fit.pseudo_r2;
            run.age_ame = fit.ame.count("Age") ? fit.ame.at("Age") : 0.0;
            if (!fit.ame.count("Seniority")) throw ComputeError("seniority was dropped from the model");
            run.seniority_ame = fit.ame.at("Seniority");
            run.ok = true;
        } catch (const Error& e) {
            run.error = e.what();
        }
    });

    std::vector<double> age_ames, sen_ames, r2s, corrs;
    std::size_t age_neg = 0, age_pos = 0, sen_pos = 0, sen_neg = 0;
    for (const auto& run : report.runs) {
        if (!run.ok) continue;
        age_ames.push_back(run.age_ame);
        sen_ames.push_back(run.seniority_ame);
        r2s.push_back(run.pseudo_r2);
        corrs.push_back(run.age_seniority_corr);
        age_neg += run.age_ame < 0;
        age_pos += run.age_ame > 0;
        sen_pos += run.seniority_ame > 0;
        sen_neg += run.seniority_ame < 0;
    }
    report.successful_runs = age_ames.size();
    if (report.successful_runs) {
        const double n = double(report.successful_runs);
        report.age_negative_fraction = double(age_neg) / n;
        report.age_positive_fraction = double(age_pos) / n;
        report.seniority_positive_fraction = double(sen_pos) / n;
        report.seniority_negative_fraction = double(sen_neg) / n;
    }
    std::tie(report.mean_age_ame, report.sd_age_ame) = mean_sd(age_ames);
    std::tie(report.mean_seniority_ame, report.sd_seniority_ame) = mean_sd(sen_ames);
    report.mean_pseudo_r2 = mean_sd(r2s).first;
    report.mean_age_seniority_corr = mean_sd(corrs).first;

    if (config.n_professors < kLowPowerCohortSize) {
        report.low_power = true;
        report.notes.push_back("cohort of " + std::to_string(config.n_professors) + " professors is below " +
                               std::to_string(kLowPowerCohortSize) + ": effect signs are unreliable");
    }
    if (report.successful_runs < n_runs) {
        report.low_power = true;
        report.notes.push_back(std::to_string(n_runs - report.successful_runs) + " of " + std::to_string(n_runs) +
                               " runs failed");
    }
    return report;
}

nlohmann::json to_json(const RecoveryReport& report) {
    nlohmann::json j;
    j["config"] = report.config.to_key_values().values();
    j["n_runs"] = report.runs.size();
    j["successful_runs"] = report.successful_runs;
    j["age_ame_negative_fraction"] = report.age_negative_fraction;
    j["age_ame_positive_fraction"] = report.age_positive_fraction;
    j["seniority_ame_positive_fraction"] = report.seniority_positive_fraction;
    j["seniority_ame_negative_fraction"] = report.seniority_negative_fraction;
    j["mean_age_ame"] = report.mean_age_ame;
    j["sd_age_ame"] = report.sd_age_ame;
    j["mean_seniority_ame"] = report.mean_seniority_ame;
    j["sd_seniority_ame"] = report.sd_seniority_ame;
    j["mean_pseudo_r2"] = report.mean_pseudo_r2;
    j["mean_age_seniority_corr"] = report.mean_age_seniority_corr;
    j["low_power"] = report.low_power;
    j["notes"] = report.notes;
    auto runs = nlohmann::json::array();
    for (const auto& r : report.runs) {
        runs.push_back({{"run", r.run},
                        {"seed", r.seed},
                        {"ok", r.ok},
                        {"error", r.error},
                        {"age_ame", r.age_ame},
                        {"seniority_ame", r.seniority_ame},
                        {"pseudo_r2", r.pseudo_r2},
                        {"age_degree", r.age_degree},
                        {"age_seniority_corr", r.age_seniority_corr},
                        {"n", r.n},
                        {"inactive_share", r.inactive_share}});
    }
    j["runs"] = std::move(runs);
    return j;
}

void write_recovery_csv(std::ostream& out, const RecoveryReport& report) {
    write_csv_row(out, {"run", "seed", "ok", "age_ame", "seniority_ame", "pseudo_r2", "age_degree",
                        "age_seniority_corr", "n", "inactive_share", "error"});
    for (const auto& r : report.runs) {
        write_csv_row(out, {std::to_string(r.run), std::to_string(r.seed), r.ok ? "1" : "0", format_exact(r.age_ame),
                            format_exact(r.seniority_ame), format_exact(r.pseudo_r2), std::to_string(r.age_degree),
                            format_exact(r.age_seniority_corr), std::to_string(r.n), format_exact(r.inactive_share),
                            r.error});
    }
}

}  // namespace scholarperf
