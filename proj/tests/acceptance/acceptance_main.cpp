// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "scholarperf/cohort.hpp"
#include "scholarperf/credit.hpp"
#include "scholarperf/pipeline.hpp"
#include "scholarperf/regress.hpp"
#include "scholarperf/report.hpp"
#include "scholarperf/sim.hpp"
#include "synthetic.hpp"

using namespace scholarperf;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double time_limit_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (time_limit_s > 0 && secs >= time_limit_s) {
        o.pass = false;
        o.detail += "; runtime " + std::to_string(secs) + " s exceeds " + std::to_string(time_limit_s) + " s";
    }
    if (!o.pass) ++failures;
    std::printf("%s %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Every affiliation pattern of n authors (restricted growth strings).
void for_each_pattern(std::size_t n, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> a(n, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int max_used) {
        if (i == n) {
            fn(a);
            return;
        }
        for (int v = 0; v <= max_used + 1; ++v) {
            a[i] = v;
            rec(i + 1, std::max(max_used, v));
        }
    };
    a[0] = 0;
    if (n == 1) {
        fn(a);
        return;
    }
    rec(1, 0);
}

Outcome credit_sum() {
    std::size_t checked = 0, bad = 0;
    double worst = 0;
    auto check = [&](const std::vector<Author>& byline) {
        for (auto conv : {CreditConvention::alphabetical, CreditConvention::position_weighted}) {
            const auto w = contribution_weights(byline, conv);
            double sum = 0;
            for (std::size_t i = 0; i < w.size(); ++i) {
                sum += w[i];
                if (!(w[i] > 0 && w[i] <= 1)) ++bad;
                if (fractional_contribution(byline, i, conv) != w[i]) ++bad;
            }
            worst = std::max(worst, std::abs(sum - 1.0));
            if (std::abs(sum - 1.0) > 1e-12) ++bad;
            ++checked;
        }
    };
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = 1 + rng() % 12;
        const int universities = 1 + int(rng() % 4);
        std::vector<Author> b;
        for (std::size_t i = 0; i < n; ++i)
            b.push_back({"a" + std::to_string(i), "u" + std::to_string(rng() % unsigned(universities))});
        check(b);
    }
    for (std::size_t n = 1; n <= 8; ++n) {
        for_each_pattern(n, [&](const std::vector<int>& pattern) {
            std::vector<Author> b;
            for (std::size_t i = 0; i < n; ++i) b.push_back({"a" + std::to_string(i), "u" + std::to_string(pattern[i])});
            check(b);
        });
    }
    return {bad == 0, std::to_string(checked) + " bylines, max |sum-1| = " + fmt("%.3g", worst) + ", " +
                          std::to_string(bad) + " violations"};
}

Outcome weight_constants() {
    std::vector<Author> a{{"p1", "U"}, {"p2", "V"}, {"p3", "W"}, {"p4", "U"}};
    std::vector<Author> b{{"p1", "U"}, {"p2", "V"}, {"p3", "W"}, {"p4", "X"}, {"p5", "Y"}, {"p6", "Z"}};
    const auto wa = contribution_weights(a, CreditConvention::position_weighted);
    const auto wb = contribution_weights(b, CreditConvention::position_weighted);
    const bool ok = wa == std::vector<double>{0.40, 0.10, 0.10, 0.40} &&
                    wb == std::vector<double>{0.30, 0.15, 0.05, 0.05, 0.15, 0.30};
    std::string d = "A(4) =";
    for (double x : wa) d += " " + fmt("%.17g", x);
    d += "; B(6) =";
    for (double x : wb) d += " " + fmt("%.17g", x);
    return {ok, d};
}

Outcome scale_invariance() {
    std::mt19937_64 rng(77);
    const std::vector<std::string> cats{"MATH", "PHYS", "CHEM", "BIOL"};
    std::vector<Professor> roster;
    for (int i = 0; i < 30; ++i) {
        Professor p;
        p.id = "P" + std::to_string(i);
        p.sds = i % 2 ? "BIO/10" : "MAT/05";
        p.uda = i % 2 ? "BIO" : "MAT";
        p.birth_date = {1950 + i % 15, 5, 1};
        p.appointment_date = {1990 + i % 15, 3, 1};
        roster.push_back(p);
    }
    Corpus corpus;
    for (int k = 0; k < 200; ++k) {
        Publication pub;
        pub.id = "W" + std::to_string(k);
        pub.year = 2006 + int(rng() % 5);
        pub.subject_category = cats[rng() % cats.size()];
        pub.citations = std::int64_t(rng() % 5 == 0 ? 0 : rng() % 80);
        pub.journal_if = 0.5 + double(rng() % 500) / 100.0;
        const std::size_t n = 1 + rng() % 6;
        for (std::size_t a = 0; a < n; ++a) {
            const bool prof = rng() % 2 == 0;
            pub.byline.push_back({prof ? "P" + std::to_string(rng() % 30) : "X" + std::to_string(k) + "_" + std::to_string(a),
                                  "U" + std::to_string(rng() % 3)});
        }
        corpus.publications.push_back(pub);
    }
    const ConventionMap conventions;
    const PipelineConfig pc;
    const auto base = run_indicator_pipeline(roster, corpus, conventions, pc);

    double worst = 0;
    std::size_t runs = 0;
    for (int year = 2006; year <= 2010; ++year) {
        for (const auto& cat : cats) {
            for (std::int64_t k : {2, 5, 10}) {
                Corpus scaled = corpus;
                for (auto& p : scaled.publications)
                    if (p.year == year && p.subject_category == cat) p.citations *= k;
                const auto out = run_indicator_pipeline(roster, scaled, conventions, pc);
                for (std::size_t i = 0; i < roster.size(); ++i) {
                    worst = std::max(worst, std::abs(out.scores[i].fss - base.scores[i].fss));
                    if (base.scores[i].ia) worst = std::max(worst, std::abs(*out.scores[i].ia - *base.scores[i].ia));
                }
                ++runs;
            }
        }
    }
    return {worst <= 1e-12, std::to_string(runs) + " cell rescalings, max |change| in FSS/IA = " + fmt("%.3g", worst)};
}

Outcome percentile_properties() {
    std::mt19937_64 rng(99);
    std::size_t bad = 0;
    double worst_oracle = 0, worst_mean = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng() % 200;
        const int distinct = 1 + int(rng() % 50);
        std::vector<double> v(n);
        for (auto& x : v) x = double(rng() % unsigned(distinct)) * 0.37;
        const auto p = percentile_rank(v);
        const auto expect = oracle::midrank_percentiles(v);
        std::vector<double> mono(n), rev(n);
        for (std::size_t i = 0; i < n; ++i) {
            mono[i] = std::log1p(v[i]) * 3 + 1;
            rev[i] = -v[i];
        }
        const auto pm = percentile_rank(mono);
        const auto pr = percentile_rank(rev);
        for (std::size_t i = 0; i < n; ++i) {
            worst_oracle = std::max(worst_oracle, std::abs(p[i] - expect[i]));
            if (pm[i] != p[i]) ++bad;
            if (n > 1 && std::abs(pr[i] - (100.0 - p[i])) > 1e-9) ++bad;
        }
        const double mean = std::accumulate(p.begin(), p.end(), 0.0) / double(n);
        worst_mean = std::max(worst_mean, std::abs(mean - 50.0));
    }
    const bool ok = bad == 0 && worst_oracle <= 1e-12 && worst_mean <= 1e-9;
    return {ok, "1000 cohorts, max |oracle diff| = " + fmt("%.3g", worst_oracle) + ", max |mean-50| = " +
                    fmt("%.3g", worst_mean) + ", " + std::to_string(bad) + " invariance violations"};
}

Outcome solver_recovery() {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    const Eigen::Index n = 500, p = 6;  // intercept + 5 covariates
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = 1;
        X(i, 1) = nd(rng);
        X(i, 2) = nd(rng) * 2;
        X(i, 3) = nd(rng) < 0 ? 1.0 : 0.0;
        X(i, 4) = std::abs(nd(rng));
        X(i, 5) = 0.5 * X(i, 1) + nd(rng);
    }
    Eigen::VectorXd beta(p);
    beta << 0.2, -0.7, 0.3, 0.9, -0.4, 0.25;
    const Eigen::VectorXd y = (X * beta).unaryExpr([](double e) { return oracle::logistic(e); });
    const LogitFit fit = fit_fractional_logit(y, X);
    const double err = (fit.beta - beta).cwiseAbs().maxCoeff();
    const double grad = oracle::score(y, X, fit.beta).cwiseAbs().maxCoeff();
    return {fit.converged && err < 1e-6 && grad < 1e-8,
            "max coefficient error " + fmt("%.3g", err) + ", gradient sup-norm " + fmt("%.3g", grad) + ", " +
                std::to_string(fit.iterations) + " iterations"};
}

Outcome ame_vs_finite_differences() {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1, 1);
    double worst = 0;
    int models = 0;
    for (int m = 0; m < 50; ++m) {
        const int degree = 1 + m % 3;
        const double a1 = 0.05 * u(rng), a2 = 0.003 * u(rng), a3 = 0.0002 * u(rng);
        const double bs = 0.04 * u(rng), bg = 0.5 * u(rng), b1 = 0.5 * u(rng), b2 = 0.5 * u(rng), b3 = 0.5 * u(rng);
        auto rows = synth::observations(
            rng, 400,
            [&](const Covariates& c) {
                const double a = c.age - 55;
                return 0.2 + a1 * a + a2 * a * a + a3 * a * a * a + bs * c.seniority + bg * c.gender_dummy + b1 * c.u1 +
                       b2 * c.u2 + b3 * c.u3;
            },
            10);
        ModelSpec spec;
        spec.age_degree = degree;
        const FitResult fit = fit_model(build_design(rows, spec));
        oracle::RawModel model;
        std::vector<std::string> names;
        for (std::size_t j = 0; j < fit.terms.size(); ++j) {
            const auto& t = fit.terms[j];
            if (t == "Intercept")
                model.intercept = fit.coefficients[j];
            else if (t.rfind("Age", 0) == 0)
                model.age_coef.push_back(fit.coefficients[j]);
            else {
                names.push_back(t);
                model.extra_coef.push_back(fit.coefficients[j]);
            }
        }
        std::vector<double> ages;
        std::vector<std::vector<double>> extras;
        for (const auto& r : rows) {
            ages.push_back(r.covariates.age);
            std::vector<double> e;
            for (const auto& nm : names) {
                const auto& c = r.covariates;
                e.push_back(nm == "Seniority" ? c.seniority
                            : nm == "Gender"  ? c.gender_dummy
                            : nm == "U1"      ? c.u1
                            : nm == "U2"      ? c.u2
                                              : c.u3);
            }
            extras.push_back(e);
        }
        worst = std::max(worst, std::abs(fit.ame.at("Age") - oracle::fd_age_ame(model, ages, extras)));
        for (std::size_t j = 0; j < names.size(); ++j)
            worst = std::max(worst, std::abs(fit.ame.at(names[j]) -
                                             oracle::fd_extra_ame(model, ages, extras, j, names[j] != "Seniority")));
        ++models;
    }
    return {worst < 1e-6, std::to_string(models) + " models (degrees 1-3), max |AME - FD| = " + fmt("%.3g", worst)};
}

Outcome aic_selection() {
    int quad_hits = 0, lin_hits = 0;
    for (int run = 0; run < 100; ++run) {
        std::mt19937_64 rng(1000 + std::uint64_t(run));
        auto quad = synth::observations(
            rng, 1000,
            [](const Covariates& c) {
                const double a = c.age - 55;
                return 0.6 - 0.02 * a - 0.004 * a * a + 0.01 * c.seniority;
            },
            10);
        quad_hits += select_age_degree(quad, ModelSpec{}, 3).degree == 2;
        auto lin = synth::observations(
            rng, 1000, [](const Covariates& c) { return 0.3 - 0.03 * (c.age - 55) + 0.01 * c.seniority; }, 10);
        lin_hits += select_age_degree(lin, ModelSpec{}, 3).degree == 1;
    }
    return {quad_hits >= 90 && lin_hits >= 90, "quadratic truth -> degree 2 in " + std::to_string(quad_hits) +
                                                   "/100; linear truth -> degree 1 in " + std::to_string(lin_hits) +
                                                   "/100"};
}

RecoveryReport& recovery_report() {
    static RecoveryReport report = [] {
        SimConfig cfg;  // defaults: n = 2000, negative age and positive seniority effects, corr target 0.7
        return recovery_experiment(cfg, 100, std::max(1u, std::thread::hardware_concurrency()));
    }();
    return report;
}

Outcome h1_h2_recovery() {
    const RecoveryReport& r = recovery_report();
    std::size_t age_neg = 0, sen_pos = 0, corr_ok = 0;
    double corr_lo = 1, corr_hi = -1;
    for (const auto& run : r.runs) {
        if (!run.ok) continue;
        age_neg += run.age_ame < 0;
        sen_pos += run.seniority_ame > 0;
        corr_ok += std::abs(run.age_seniority_corr - 0.7) <= 0.05;
        corr_lo = std::min(corr_lo, run.age_seniority_corr);
        corr_hi = std::max(corr_hi, run.age_seniority_corr);
    }
    const bool ok = r.config.n_professors == 2000 && r.runs.size() == 100 && age_neg >= 95 && sen_pos >= 95 &&
                    corr_ok == r.runs.size();
    return {ok, "age AME < 0 in " + std::to_string(age_neg) + "/100, seniority AME > 0 in " + std::to_string(sen_pos) +
                    "/100, corr(age, seniority) in [" + fmt("%.3f", corr_lo) + ", " + fmt("%.3f", corr_hi) +
                    "], mean age AME " + fmt("%.3f", r.mean_age_ame) + ", mean seniority AME " +
                    fmt("%.3f", r.mean_seniority_ame) + ", " + std::to_string(r.successful_runs) + " runs fitted"};
}

Outcome pseudo_r2_echo() {
    const RecoveryReport& r = recovery_report();
    std::size_t low = 0;
    double hi = 0;
    for (const auto& run : r.runs) {
        if (!run.ok) continue;
        low += run.pseudo_r2 < 0.15;
        hi = std::max(hi, run.pseudo_r2);
    }
    return {low >= 90, "pseudo R-squared < 0.15 in " + std::to_string(low) + "/100 runs (mean " +
                           fmt("%.4f", r.mean_pseudo_r2) + ", max " + fmt("%.4f", hi) + ")"};
}

Outcome table_fidelity() {
    FitResult f;
    f.terms = {"Intercept", "Age", "Seniority", "Gender", "U1", "U2", "U3"};
    f.coefficients = {319.192, -5.746, 0.1, 0.2, 0.3, 0.4, 0.5};
    f.robust_se = {56.668, 1.09, 0.01, 0.02, 0.03, 0.04, 0.05};
    f.classical_se = f.robust_se;
    f.converged = true;
    f.n = 1000;
    f.age_degree = 1;
    const std::vector<GroupFit> fits{{"MAT", f}};
    const TextTable t = regression_table(fits);
    std::vector<std::string> labels;
    for (const auto& r : t.rows) labels.push_back(r.front());
    const std::vector<std::string> expected{"Intercept", "Age",     "Age²",
                                            "Age³",      "Seniority", "Gender",
                                            "Polytechnic", "Private", "Advanced Studies",
                                            "Pseudo R-squared", "N"};
    const bool ok = labels == expected && t.rows[0][1] == "319.192 (56.668)" && t.rows[1][1] == "-5.746 (1.09)" &&
                    t.rows[2][1] == "-" && t.rows[3][1] == "-";
    return {ok, "Intercept \"" + t.rows[0][1] + "\", Age \"" + t.rows[1][1] + "\", " +
                    std::to_string(labels.size()) + " rows in order"};
}

}  // namespace

int main() {
    criterion("credit shares sum to one", 5.0, credit_sum);
    criterion("position weight constants", 0, weight_constants);
    criterion("FSS and IA scale invariance", 0, scale_invariance);
    criterion("percentile properties", 5.0, percentile_properties);
    criterion("solver recovery", 1.0, solver_recovery);
    criterion("AME matches finite differences", 0, ame_vs_finite_differences);
    criterion("AIC degree selection", 0, aic_selection);
    criterion("H1/H2 sign recovery", 60.0, h1_h2_recovery);
    criterion("pseudo R-squared stays low", 0, pseudo_r2_echo);
    criterion("regression table fidelity", 0, table_fidelity);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
