#include "scholarperf/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "scholarperf/csv.hpp"
#include "scholarperf/error.hpp"

namespace scholarperf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// log(1 + exp(x)) without overflow
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double binomial(int n, int k) {
    double c = 1;
    for (int i = 1; i <= k; ++i) c = c * double(n - k + i) / double(i);
    return c;
}

// Inverse of a symmetric positive definite matrix after diagonal equilibration.
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& H) {
    const Eigen::Index p = H.rows();
    Eigen::VectorXd d(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!(H(j, j) > 0)) throw ComputeError("information matrix is singular (empty or constant column)");
        d(j) = 1.0 / std::sqrt(H(j, j));
    }
    const Eigen::MatrixXd scaled = d.asDiagonal() * H * d.asDiagonal();
    Eigen::LLT<Eigen::MatrixXd> llt(scaled);
    if (llt.info() != Eigen::Success) throw ComputeError("information matrix is not positive definite");
    const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
    return d.asDiagonal() * inv * d.asDiagonal();
}

Eigen::VectorXd spd_solve(const Eigen::MatrixXd& H, const Eigen::VectorXd& rhs) {
    const Eigen::Index p = H.rows();
    Eigen::VectorXd d(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!(H(j, j) > 0)) throw ComputeError("information matrix is singular (empty or constant column)");
        d(j) = 1.0 / std::sqrt(H(j, j));
    }
    const Eigen::MatrixXd scaled = d.asDiagonal() * H * d.asDiagonal();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(scaled);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw ComputeError("information matrix is not positive definite");
    const Eigen::VectorXd z = ldlt.solve(d.asDiagonal() * rhs);
    return d.asDiagonal() * z;
}

Eigen::VectorXd logistic(const Eigen::VectorXd& eta) {
    return eta.unaryExpr([](double e) { return scholarperf::logistic(e); });
}

}  // namespace

std::string to_string(Covariate covariate) {
    switch (covariate) {
        case Covariate::seniority: return "Seniority";
        case Covariate::gender: return "Gender";
        case Covariate::u1: return "U1";
        case Covariate::u2: return "U2";
        case Covariate::u3: return "U3";
    }
    return "Seniority";
}

Covariate parse_covariate(const std::string& token) {
    const std::string t = to_lower(trim(token));
    if (t == "seniority") return Covariate::seniority;
    if (t == "gender") return Covariate::gender;
    if (t == "u1" || t == "private") return Covariate::u1;
    if (t == "u2" || t == "advanced" || t == "advanced_school" || t == "advanced studies") return Covariate::u2;
    if (t == "u3" || t == "polytechnic") return Covariate::u3;
    throw InputError("unknown covariate '" + token + "'");
}

void ModelSpec::validate() const {
    if (age_degree < 1 || age_degree > 3) throw InputError("age degree must be 1, 2 or 3");
    std::set<Covariate> seen;
    for (auto c : covariates)
        if (!seen.insert(c).second) throw InputError("covariate " + to_string(c) + " listed twice");
    if (max_seniority && !(*max_seniority > 0)) throw InputError("max_seniority must be positive");
}

double variance_inflation_factor(const Eigen::MatrixXd& X, std::size_t column) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    // constant columns are already spanned by the added intercept
    Eigen::MatrixXd Z(n, p);
    Z.col(0).setOnes();
    Eigen::Index k = 1;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (std::size_t(j) == column) continue;
        if ((X.col(j).array() == X(0, j)).all()) continue;
        Z.col(k++) = X.col(j);
    }
    Z.conservativeResize(n, k);
    const Eigen::VectorXd v = X.col(Eigen::Index(column));
    const double mean = v.mean();
    const double tss = (v.array() - mean).square().sum();
    if (!(tss > 0)) return std::numeric_limits<double>::infinity();
    const Eigen::VectorXd coef = Z.completeOrthogonalDecomposition().solve(v);
    const double rss = (v - Z * coef).squaredNorm();
    const double r2 = 1.0 - rss / tss;
    if (r2 >= 1.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (1.0 - std::max(r2, 0.0));
}

CollinearityReport collinearity_check(const Eigen::MatrixXd& X, const std::vector<bool>& vif_exempt,
                                      double vif_threshold) {
    const auto p = std::size_t(X.cols());
    std::vector<bool> exempt = vif_exempt;
    exempt.resize(p, false);

    CollinearityReport report;
    // Exact dependence: sequential Gram-Schmidt, so the later column of any
    // dependent set is the one removed.
    std::vector<Eigen::VectorXd> basis;
    for (std::size_t j = 0; j < p; ++j) {
        Eigen::VectorXd v = X.col(Eigen::Index(j));
        const double norm0 = v.norm();
        if (norm0 == 0) {
            report.dropped.push_back(j);
            continue;
        }
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : basis) v -= q.dot(v) * q;
        const double rest = v.norm();
        if (rest <= 1e-9 * norm0) {
            report.dropped.push_back(j);
            continue;
        }
        basis.push_back(v / rest);
        report.kept.push_back(j);
    }

    auto submatrix = [&](const std::vector<std::size_t>& cols) {
        Eigen::MatrixXd S(X.rows(), Eigen::Index(cols.size()));
        for (std::size_t k = 0; k < cols.size(); ++k) S.col(Eigen::Index(k)) = X.col(Eigen::Index(cols[k]));
        return S;
    };

    while (true) {
        const Eigen::MatrixXd S = submatrix(report.kept);
        report.vif.assign(report.kept.size(), kNaN);
        std::optional<std::size_t> worst;
        for (std::size_t k = 0; k < report.kept.size(); ++k) {
            if (exempt[report.kept[k]] || report.kept.size() < 2) continue;
            report.vif[k] = variance_inflation_factor(S, k);
            if (report.vif[k] > vif_threshold) worst = k;  // keep the last-listed offender
        }
        if (!worst) break;
        report.dropped.push_back(report.kept[*worst]);
        report.kept.erase(report.kept.begin() + std::ptrdiff_t(*worst));
    }
    std::sort(report.dropped.begin(), report.dropped.end());
    return report;
}

Design build_design(std::span<const Observation> observations, const ModelSpec& spec) {
    spec.validate();
    std::vector<const Observation*> rows;
    for (const auto& o : observations) {
        if (spec.max_seniority && !(o.covariates.seniority < *spec.max_seniority)) continue;
        rows.push_back(&o);
    }
    if (rows.empty()) throw InputError("empty design after filtering");

    const auto n = Eigen::Index(rows.size());
    Design d;
    d.dependent = to_string(spec.dependent);
    d.y.resize(n);
    double age_sum = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double pct = rows[std::size_t(i)]->percentile;
        if (!(pct >= 0 && pct <= 100))
            throw InputError("percentile of " + rows[std::size_t(i)]->professor_id + " outside [0,100]");
        d.y(i) = pct / 100.0;
        age_sum += rows[std::size_t(i)]->covariates.age;
    }
    if (d.y.maxCoeff() == d.y.minCoeff()) throw InputError("dependent variable is constant across the design");
    d.age_center = age_sum / double(n);

    std::vector<Term> terms;
    terms.push_back({"Intercept", "Intercept", TermKind::intercept, 0});
    terms.push_back({"Age", "Age", TermKind::polynomial, 1});
    for (int k = 2; k <= spec.age_degree; ++k)
        terms.push_back({"Age^" + std::to_string(k), "Age", TermKind::polynomial, k});
    for (auto c : spec.covariates) {
        const std::string name = to_string(c);
        terms.push_back({name, name, c == Covariate::seniority ? TermKind::continuous : TermKind::binary, 1});
    }

    Eigen::MatrixXd X(n, Eigen::Index(terms.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const Covariates& cv = rows[std::size_t(i)]->covariates;
        const double a = cv.age - d.age_center;
        Eigen::Index col = 0;
        X(i, col++) = 1.0;
        for (int k = 1; k <= spec.age_degree; ++k) X(i, col++) = std::pow(a, k);
        for (auto c : spec.covariates) {
            switch (c) {
                case Covariate::seniority: X(i, col++) = cv.seniority; break;
                case Covariate::gender: X(i, col++) = cv.gender_dummy; break;
                case Covariate::u1: X(i, col++) = cv.u1; break;
                case Covariate::u2: X(i, col++) = cv.u2; break;
                case Covariate::u3: X(i, col++) = cv.u3; break;
            }
        }
    }

    std::vector<bool> exempt(terms.size(), false);
    for (std::size_t j = 0; j < terms.size(); ++j)
        exempt[j] = terms[j].kind == TermKind::intercept || terms[j].kind == TermKind::polynomial;
    const auto report = collinearity_check(X, exempt);

    d.X.resize(n, Eigen::Index(report.kept.size()));
    for (std::size_t k = 0; k < report.kept.size(); ++k) {
        d.X.col(Eigen::Index(k)) = X.col(Eigen::Index(report.kept[k]));
        d.terms.push_back(terms[report.kept[k]]);
    }
    d.vif = report.vif;
    for (auto j : report.dropped) d.dropped_terms.push_back(terms[j].name);
    return d;
}

double logistic(double eta) {
    if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

double quasi_log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
    double q = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) q -= y(i) * softplus(-eta(i)) + (1.0 - y(i)) * softplus(eta(i));
    return q;
}

LogitFit fit_fractional_logit(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const SolverOptions& options) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (y.size() != n) throw InputError("response and design have different lengths");
    if (p == 0) throw InputError("design has no columns");
    if (n <= p) throw ComputeError("need more observations (" + std::to_string(n) + ") than terms (" +
                                   std::to_string(p) + ")");
    if ((y.array() < 0).any() || (y.array() > 1).any()) throw InputError("fractional response outside [0,1]");

    LogitFit fit;
    fit.beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd mu = logistic(eta);
    double qll = quasi_log_likelihood(y, eta);
    Eigen::VectorXd grad = X.transpose() * (y - mu);

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        fit.iterations = iter;
        if (grad.cwiseAbs().maxCoeff() < options.gradient_tolerance) {
            fit.converged = true;
            break;
        }
        const Eigen::VectorXd w = (mu.array() * (1.0 - mu.array())).matrix();
        const Eigen::MatrixXd H = X.transpose() * w.asDiagonal() * X;
        const Eigen::VectorXd step = spd_solve(H, grad);

        // step halving until the quasi-log-likelihood does not decrease;
        // differences below summation round-off do not count as a decrease
        const double noise = options.relative_tolerance * std::max(std::abs(qll), 1.0);
        double t = 1.0;
        bool accepted = false;
        Eigen::VectorXd candidate, cand_eta;
        double cand_qll = qll;
        for (int halving = 0; halving < 60; ++halving) {
            candidate = fit.beta + t * step;
            cand_eta = X * candidate;
            cand_qll = quasi_log_likelihood(y, cand_eta);
            if (cand_qll >= qll - noise) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // No representable improvement along the Newton direction.
            fit.converged = 0.5 * grad.dot(step) <= noise;
            break;
        }
        const double rel_change = std::abs(cand_qll - qll) / std::max(std::abs(qll), 1e-300);
        fit.beta = candidate;
        eta = cand_eta;
        mu = logistic(eta);
        qll = cand_qll;
        grad = X.transpose() * (y - mu);
        if (eta.cwiseAbs().maxCoeff() > 4 * options.separation_threshold) break;
        if (t == 1.0 && rel_change < options.relative_tolerance) {
            fit.converged = true;
            break;
        }
    }

    if (eta.cwiseAbs().maxCoeff() > options.separation_threshold)
        throw SeparationError("quasi-separation: fitted means reach 0 or 1 (max |linear predictor| = " +
                              std::to_string(eta.cwiseAbs().maxCoeff()) + ")");
    if (!fit.converged)
        throw ConvergenceError("fractional logit did not converge in " + std::to_string(options.max_iterations) +
                               " iterations");

    fit.quasi_log_likelihood = qll;
    fit.gradient_sup_norm = grad.cwiseAbs().maxCoeff();
    const Eigen::VectorXd w = (mu.array() * (1.0 - mu.array())).matrix();
    const Eigen::MatrixXd H = X.transpose() * w.asDiagonal() * X;
    fit.classical_covariance = spd_inverse(H);
    const Eigen::VectorXd resid = y - mu;
    const Eigen::MatrixXd meat = X.transpose() * resid.array().square().matrix().asDiagonal() * X;
    fit.robust_covariance = fit.classical_covariance * meat * fit.classical_covariance;
    return fit;
}

double null_quasi_log_likelihood(const Eigen::VectorXd& y, const SolverOptions& options) {
    const double mean = y.mean();
    if (mean <= 0.0 || mean >= 1.0) return 0.0;
    return fit_fractional_logit(y, Eigen::MatrixXd::Ones(y.size(), 1), options).quasi_log_likelihood;
}

double mcfadden_pseudo_r2(double model_qll, const Eigen::VectorXd& y, const SolverOptions& options) {
    const double null_qll = null_quasi_log_likelihood(y, options);
    if (null_qll == 0.0) throw ComputeError("null quasi-log-likelihood is zero; pseudo R-squared undefined");
    return std::max(0.0, 1.0 - model_qll / null_qll);
}

double average_marginal_effect(const Design& design, const Eigen::VectorXd& beta, const std::string& variable) {
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < design.terms.size(); ++j)
        if (design.terms[j].variable == variable && design.terms[j].kind != TermKind::intercept) cols.push_back(j);
    if (cols.empty()) throw InputError("unknown variable '" + variable + "'");

    const Eigen::Index n = design.X.rows();
    const Eigen::VectorXd eta = design.X * beta;
    double total = 0;

    if (design.terms[cols.front()].kind == TermKind::binary) {
        const auto j = Eigen::Index(cols.front());
        for (Eigen::Index i = 0; i < n; ++i) {
            const double base = eta(i) - design.X(i, j) * beta(j);
            total += logistic(base + beta(j)) - logistic(base);
        }
        return 100.0 * total / double(n);
    }

    // Continuous: d/dv of sum_k b_k v^k, with v read off the power-1 column.
    std::optional<Eigen::Index> linear;
    for (auto j : cols)
        if (design.terms[j].power == 1) linear = Eigen::Index(j);
    if (!linear) throw InputError("variable '" + variable + "' has no linear term");
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = design.X(i, *linear);
        double slope = 0;
        for (auto j : cols) {
            const int k = design.terms[j].power;
            slope += double(k) * beta(Eigen::Index(j)) * (k == 1 ? 1.0 : std::pow(v, k - 1));
        }
        const double g = logistic(eta(i));
        total += g * (1.0 - g) * slope;
    }
    return 100.0 * total / double(n);
}

std::map<std::string, double> average_marginal_effects(const Design& design, const Eigen::VectorXd& beta) {
    std::map<std::string, double> out;
    for (const auto& term : design.terms)
        if (term.kind != TermKind::intercept && !out.count(term.variable))
            out[term.variable] = average_marginal_effect(design, beta, term.variable);
    return out;
}

std::optional<std::size_t> FitResult::term_index(const std::string& term) const {
    for (std::size_t j = 0; j < terms.size(); ++j)
        if (terms[j] == term) return j;
    return std::nullopt;
}

namespace {

// Maps coefficients on powers of (age - c) to coefficients on powers of age.
Eigen::MatrixXd centering_transform(const Design& design) {
    const auto p = Eigen::Index(design.terms.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Identity(p, p);
    std::optional<Eigen::Index> intercept;
    std::map<int, Eigen::Index> power_col;
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto& t = design.terms[std::size_t(j)];
        if (t.kind == TermKind::intercept) intercept = j;
        if (t.kind == TermKind::polynomial) power_col[t.power] = j;
    }
    if (power_col.empty() || design.age_center == 0) return T;
    const int max_power = power_col.rbegin()->first;
    if (int(power_col.size()) != max_power) throw ComputeError("age polynomial terms are collinear");
    if (!intercept) throw ComputeError("centered age polynomial needs an intercept");
    const double shift = -design.age_center;
    for (const auto& [pj, j] : power_col) {
        T(*intercept, j) = std::pow(shift, pj);
        for (const auto& [pk, k] : power_col)
            if (pk < pj) T(k, j) = binomial(pj, pk) * std::pow(shift, pj - pk);
    }
    return T;
}

}  // namespace

FitResult fit_model(const Design& design, const SolverOptions& options) {
    const LogitFit lf = fit_fractional_logit(design.y, design.X, options);
    FitResult r;
    r.dependent = design.dependent;
    r.n = std::size_t(design.X.rows());
    r.converged = lf.converged;
    r.iterations = lf.iterations;
    r.gradient_sup_norm = lf.gradient_sup_norm;
    r.quasi_log_likelihood = lf.quasi_log_likelihood;
    r.aic = 2.0 * double(design.X.cols()) - 2.0 * lf.quasi_log_likelihood;
    r.null_quasi_log_likelihood = null_quasi_log_likelihood(design.y, options);
    if (r.null_quasi_log_likelihood == 0.0)
        throw ComputeError("null quasi-log-likelihood is zero; pseudo R-squared undefined");
    r.pseudo_r2 = std::max(0.0, 1.0 - lf.quasi_log_likelihood / r.null_quasi_log_likelihood);
    r.ame = average_marginal_effects(design, lf.beta);
    r.age_center = design.age_center;
    r.dropped_terms = design.dropped_terms;
    for (const auto& t : design.terms) {
        r.terms.push_back(t.name);
        if (t.kind == TermKind::polynomial) r.age_degree = std::max(r.age_degree, t.power);
    }
    r.vif = design.vif;
    r.vif.resize(design.terms.size(), std::numeric_limits<double>::quiet_NaN());

    const Eigen::MatrixXd T = centering_transform(design);
    const Eigen::VectorXd beta = T * lf.beta;
    const Eigen::MatrixXd robust = T * lf.robust_covariance * T.transpose();
    const Eigen::MatrixXd classical = T * lf.classical_covariance * T.transpose();
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        r.coefficients.push_back(beta(j));
        r.robust_se.push_back(std::sqrt(std::max(robust(j, j), 0.0)));
        r.classical_se.push_back(std::sqrt(std::max(classical(j, j), 0.0)));
    }
    return r;
}

DegreeSelection select_age_degree(const std::function<Design(int)>& build_for_degree, int max_degree,
                                  const SolverOptions& options) {
    if (max_degree < 1 || max_degree > 3) throw InputError("max degree must be 1, 2 or 3");
    DegreeSelection sel;
    sel.candidates.resize(std::size_t(max_degree));
    std::optional<double> best_aic;
    std::string last_error;
    for (int d = 1; d <= max_degree; ++d) {
        try {
            FitResult fit = fit_model(build_for_degree(d), options);
            if (!best_aic || fit.aic < *best_aic) {
                best_aic = fit.aic;
                sel.degree = d;
            }
            sel.candidates[std::size_t(d - 1)] = std::move(fit);
        } catch (const Error& e) {
            last_error = "degree " + std::to_string(d) + ": " + e.what();
            sel.errors.push_back(last_error);
        }
    }
    if (!best_aic) throw ComputeError("every age degree failed to fit; last error: " + last_error);
    return sel;
}

DegreeSelection select_age_degree(std::span<const Observation> observations, const ModelSpec& spec, int max_degree,
                                  const SolverOptions& options) {
    return select_age_degree(
        [&](int degree) {
            ModelSpec s = spec;
            s.age_degree = degree;
            return build_design(observations, s);
        },
        max_degree, options);
}

}  // namespace scholarperf
