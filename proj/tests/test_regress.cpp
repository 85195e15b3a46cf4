#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "scholarperf/error.hpp"
#include "scholarperf/fit_io.hpp"
#include "scholarperf/regress.hpp"
#include "synthetic.hpp"

using namespace scholarperf;

namespace {

double linear_truth(const Covariates& c) {
    return 0.8 - 0.03 * (c.age - 55) + 0.02 * c.seniority + 0.1 * c.gender_dummy - 0.2 * c.u1 + 0.3 * c.u2;
}

// Raw-scale linear predictor from a fit, independent of the design matrix.
oracle::RawModel raw_model(const FitResult& fit, std::vector<std::string>& extras) {
    oracle::RawModel m;
    for (std::size_t j = 0; j < fit.terms.size(); ++j) {
        const auto& t = fit.terms[j];
        if (t == "Intercept")
            m.intercept = fit.coefficients[j];
        else if (t.rfind("Age", 0) == 0)
            m.age_coef.push_back(fit.coefficients[j]);
        else {
            extras.push_back(t);
            m.extra_coef.push_back(fit.coefficients[j]);
        }
    }
    return m;
}

double covariate_value(const Covariates& c, const std::string& name) {
    if (name == "Seniority") return c.seniority;
    if (name == "Gender") return c.gender_dummy;
    if (name == "U1") return c.u1;
    if (name == "U2") return c.u2;
    return c.u3;
}

Eigen::MatrixXd raw_design(const std::vector<Observation>& rows, const FitResult& fit) {
    Eigen::MatrixXd X(Eigen::Index(rows.size()), Eigen::Index(fit.terms.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& c = rows[i].covariates;
        for (std::size_t j = 0; j < fit.terms.size(); ++j) {
            const auto& t = fit.terms[j];
            double v;
            if (t == "Intercept")
                v = 1;
            else if (t == "Age")
                v = c.age;
            else if (t == "Age^2")
                v = c.age * c.age;
            else if (t == "Age^3")
                v = c.age * c.age * c.age;
            else
                v = covariate_value(c, t);
            X(Eigen::Index(i), Eigen::Index(j)) = v;
        }
    }
    return X;
}

}  // namespace

TEST_CASE("logistic and quasi-likelihood") {
    CHECK(logistic(0) == 0.5);
    CHECK(logistic(800) == 1.0);
    CHECK(logistic(-800) >= 0.0);
    Eigen::VectorXd y(3), eta(3);
    y << 0.2, 0.9, 0.5;
    eta << -1.0, 2.0, 0.3;
    CHECK(quasi_log_likelihood(y, eta) == doctest::Approx(oracle::qll(y, eta)).epsilon(1e-13));
}

TEST_CASE("noiseless data recover the coefficients") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    const Eigen::Index n = 300, p = 4;
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = 1;
        for (Eigen::Index j = 1; j < p; ++j) X(i, j) = nd(rng);
    }
    Eigen::VectorXd beta(p);
    beta << 0.3, -0.8, 0.5, 1.1;
    Eigen::VectorXd y = (X * beta).unaryExpr([](double e) { return oracle::logistic(e); });
    const LogitFit fit = fit_fractional_logit(y, X);
    CHECK(fit.converged);
    CHECK((fit.beta - beta).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(oracle::score(y, X, fit.beta).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("separation is reported") {
    Eigen::MatrixXd X(6, 2);
    X << 1, -3, 1, -2, 1, -1, 1, 1, 1, 2, 1, 3;
    Eigen::VectorXd y(6);
    y << 0, 0, 0, 1, 1, 1;
    CHECK_THROWS_AS(fit_fractional_logit(y, X), SeparationError);
}

TEST_CASE("iteration cap raises a convergence error") {
    std::mt19937_64 rng(2);
    auto rows = synth::observations(rng, 200, linear_truth, 10);
    const Design d = build_design(rows, ModelSpec{});
    SolverOptions opts;
    opts.max_iterations = 1;
    CHECK_THROWS_AS(fit_fractional_logit(d.y, d.X, opts), ConvergenceError);
}

TEST_CASE("too few rows") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(2, 3);
    Eigen::VectorXd y(2);
    y << 0.1, 0.2;
    CHECK_THROWS_AS(fit_fractional_logit(y, X), ComputeError);
}

TEST_CASE("intercept-only model has zero pseudo R-squared") {
    Eigen::VectorXd y(5);
    y << 0.1, 0.4, 0.5, 0.7, 0.2;
    const auto fit = fit_fractional_logit(y, Eigen::MatrixXd::Ones(5, 1));
    CHECK(fit.beta(0) == doctest::Approx(std::log(0.38 / 0.62)));
    CHECK(mcfadden_pseudo_r2(fit.quasi_log_likelihood, y) == 0.0);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(4);
    CHECK(null_quasi_log_likelihood(ones) == 0.0);
    CHECK_THROWS_AS(mcfadden_pseudo_r2(-1.0, ones), ComputeError);
}

TEST_CASE("raw-scale coefficients reproduce the fitted likelihood and sandwich") {
    std::mt19937_64 rng(3);
    auto rows = synth::observations(rng, 400, linear_truth, 15);
    ModelSpec spec;
    spec.age_degree = 2;
    const Design d = build_design(rows, spec);
    const FitResult fit = fit_model(d);
    const Eigen::MatrixXd X = raw_design(rows, fit);
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(fit.coefficients.data(), Eigen::Index(fit.coefficients.size()));
    CHECK(oracle::qll(d.y, X * b) == doctest::Approx(fit.quasi_log_likelihood).epsilon(1e-10));

    // sandwich computed directly in raw coordinates
    const Eigen::VectorXd eta = X * b;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(X.cols(), X.cols()), B = A;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double g = oracle::logistic(eta(i));
        const Eigen::VectorXd x = X.row(i).transpose();
        A += g * (1 - g) * x * x.transpose();
        B += (d.y(i) - g) * (d.y(i) - g) * x * x.transpose();
    }
    const Eigen::MatrixXd Ai = A.inverse();
    const Eigen::MatrixXd V = Ai * B * Ai;
    for (std::size_t j = 0; j < fit.terms.size(); ++j) {
        CHECK(fit.robust_se[j] == doctest::Approx(std::sqrt(V(Eigen::Index(j), Eigen::Index(j)))).epsilon(1e-6));
        CHECK(fit.classical_se[j] == doctest::Approx(std::sqrt(Ai(Eigen::Index(j), Eigen::Index(j)))).epsilon(1e-6));
    }
}

TEST_CASE("marginal effects match finite differences") {
    std::mt19937_64 rng(4);
    for (int degree = 1; degree <= 3; ++degree) {
        auto rows = synth::observations(
            rng, 500, [](const Covariates& c) { return linear_truth(c) - 0.002 * (c.age - 55) * (c.age - 55); }, 12);
        ModelSpec spec;
        spec.age_degree = degree;
        const FitResult fit = fit_model(build_design(rows, spec));
        std::vector<std::string> names;
        const auto model = raw_model(fit, names);
        std::vector<double> ages;
        std::vector<std::vector<double>> extras;
        for (const auto& r : rows) {
            ages.push_back(r.covariates.age);
            std::vector<double> e;
            for (const auto& nme : names) e.push_back(covariate_value(r.covariates, nme));
            extras.push_back(e);
        }
        CHECK(fit.ame.at("Age") == doctest::Approx(oracle::fd_age_ame(model, ages, extras)).epsilon(1e-6));
        for (std::size_t j = 0; j < names.size(); ++j) {
            const bool binary = names[j] != "Seniority";
            CHECK(fit.ame.at(names[j]) ==
                  doctest::Approx(oracle::fd_extra_ame(model, ages, extras, j, binary)).epsilon(1e-6));
        }
    }
}

TEST_CASE("rescaling a covariate rescales its coefficient and effect") {
    std::mt19937_64 rng(5);
    auto rows = synth::observations(rng, 400, linear_truth, 15);
    const FitResult base = fit_model(build_design(rows, ModelSpec{}));
    const double k = 12.0;  // years -> months
    for (auto& r : rows) r.covariates.seniority *= k;
    const FitResult scaled = fit_model(build_design(rows, ModelSpec{}));
    const auto s = *base.term_index("Seniority");
    CHECK(scaled.coefficients[s] == doctest::Approx(base.coefficients[s] / k).epsilon(1e-7));
    CHECK(scaled.robust_se[s] == doctest::Approx(base.robust_se[s] / k).epsilon(1e-6));
    CHECK(scaled.ame.at("Seniority") == doctest::Approx(base.ame.at("Seniority") / k).epsilon(1e-7));
    CHECK(scaled.ame.at("Age") == doctest::Approx(base.ame.at("Age")).epsilon(1e-7));
    CHECK(scaled.ame.at("Gender") == doctest::Approx(base.ame.at("Gender")).epsilon(1e-7));
    CHECK(scaled.pseudo_r2 == doctest::Approx(base.pseudo_r2).epsilon(1e-9));
}

TEST_CASE("variance inflation factors match the normal equations") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd X(200, 4);
    for (Eigen::Index i = 0; i < 200; ++i) {
        X(i, 0) = 1;
        X(i, 1) = nd(rng);
        X(i, 2) = 0.8 * X(i, 1) + 0.6 * nd(rng);
        X(i, 3) = nd(rng);
    }
    for (Eigen::Index j = 1; j < 4; ++j)
        CHECK(variance_inflation_factor(X, std::size_t(j)) == doctest::Approx(oracle::vif(X, j)).epsilon(1e-9));
}

TEST_CASE("collinear columns are dropped later-first") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd X(100, 5);
    for (Eigen::Index i = 0; i < 100; ++i) {
        X(i, 0) = 1;
        X(i, 1) = nd(rng);
        X(i, 2) = nd(rng);
        X(i, 3) = X(i, 1) + 2 * X(i, 2);            // exact dependence
        X(i, 4) = X(i, 2) + 0.05 * nd(rng);         // near duplicate of column 2
    }
    const auto rep = collinearity_check(X, {true, false, false, false, false});
    CHECK(rep.kept == std::vector<std::size_t>{0, 1, 2});
    CHECK(rep.dropped.size() == 2);
    CHECK(std::find(rep.dropped.begin(), rep.dropped.end(), 3u) != rep.dropped.end());
    CHECK(std::find(rep.dropped.begin(), rep.dropped.end(), 4u) != rep.dropped.end());
}

TEST_CASE("constant dummy is dropped from the design") {
    std::mt19937_64 rng(8);
    auto rows = synth::observations(rng, 150, linear_truth, 15);
    for (auto& r : rows) r.covariates.u2 = 0;
    const Design d = build_design(rows, ModelSpec{});
    CHECK(std::find(d.dropped_terms.begin(), d.dropped_terms.end(), "U2") != d.dropped_terms.end());
    const FitResult fit = fit_model(d);
    CHECK(!fit.term_index("U2"));
    CHECK(!fit.ame.count("U2"));
}

TEST_CASE("seniority filter keeps recently promoted professors") {
    std::mt19937_64 rng(9);
    auto rows = synth::observations(rng, 300, linear_truth, 15);
    std::size_t expected = 0;
    for (const auto& r : rows) expected += r.covariates.seniority < 8;
    ModelSpec spec;
    spec.max_seniority = 8;
    CHECK(std::size_t(build_design(rows, spec).y.size()) == expected);
}

TEST_CASE("model spec validation") {
    ModelSpec spec;
    spec.age_degree = 4;
    CHECK_THROWS_AS(spec.validate(), InputError);
    spec.age_degree = 1;
    spec.covariates = {Covariate::gender, Covariate::gender};
    CHECK_THROWS_AS(spec.validate(), InputError);
    CHECK(parse_covariate("polytechnic") == Covariate::u3);
    CHECK(parse_covariate("Private") == Covariate::u1);
    CHECK_THROWS_AS(parse_covariate("height"), InputError);
    std::vector<Observation> none;
    CHECK_THROWS_AS(build_design(none, ModelSpec{}), InputError);
}

TEST_CASE("degree selection picks the lowest AIC") {
    std::mt19937_64 rng(10);
    auto rows = synth::observations(
        rng, 1000, [](const Covariates& c) { return 1.0 - 0.004 * (c.age - 55) * (c.age - 55); }, 20);
    const auto sel = select_age_degree(rows, ModelSpec{}, 3);
    CHECK(sel.degree == 2);
    for (const auto& c : sel.candidates) CHECK(c->aic >= sel.selected().aic);
    CHECK(sel.selected().age_degree == 2);
    CHECK_THROWS_AS(select_age_degree(rows, ModelSpec{}, 4), InputError);
}

TEST_CASE("fit serialization round-trips") {
    std::mt19937_64 rng(11);
    auto rows = synth::observations(rng, 300, linear_truth, 15);
    ModelSpec spec;
    spec.age_degree = 2;
    std::vector<GroupFit> fits{{"Total", fit_model(build_design(rows, spec))}};
    rows.resize(150);
    fits.push_back({"MAT", fit_model(build_design(rows, ModelSpec{}))});

    auto same = [](const std::vector<GroupFit>& a, const std::vector<GroupFit>& b) {
        REQUIRE(a.size() == b.size());
        for (std::size_t g = 0; g < a.size(); ++g) {
            const auto &x = a[g].fit, &y = b[g].fit;
            CHECK(a[g].group == b[g].group);
            CHECK(x.terms == y.terms);
            CHECK(x.coefficients == y.coefficients);
            CHECK(x.robust_se == y.robust_se);
            CHECK(x.classical_se == y.classical_se);
            CHECK(x.ame == y.ame);
            CHECK(x.aic == y.aic);
            CHECK(x.pseudo_r2 == y.pseudo_r2);
            CHECK(x.n == y.n);
            CHECK(x.age_degree == y.age_degree);
            CHECK(x.age_center == y.age_center);
            CHECK(x.converged == y.converged);
            CHECK(x.dropped_terms == y.dropped_terms);
            for (std::size_t j = 0; j < x.vif.size(); ++j)
                CHECK(((std::isnan(x.vif[j]) && std::isnan(y.vif[j])) || x.vif[j] == y.vif[j]));
        }
    };
    std::stringstream csv;
    write_fits_csv(csv, fits);
    same(fits, read_fits_csv(csv));
    same(fits, fits_from_json(nlohmann::json::parse(fits_to_json(fits).dump())));
}
