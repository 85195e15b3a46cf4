#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scholarperf/corpus.hpp"
#include "scholarperf/indicators.hpp"

namespace scholarperf {

enum class Covariate { seniority, gender, u1, u2, u3 };

std::string to_string(Covariate covariate);
/// Accepts Seniority, Gender, U1/Private, U2/Advanced, U3/Polytechnic (any case).
Covariate parse_covariate(const std::string& token);

inline const std::vector<Covariate> kDefaultCovariates = {Covariate::seniority, Covariate::gender, Covariate::u1,
                                                          Covariate::u2, Covariate::u3};

/// Performance = G(intercept + age polynomial + covariates).
struct ModelSpec {
    Indicator dependent = Indicator::fss;
    int age_degree = 1;
    std::vector<Covariate> covariates = kDefaultCovariates;
    /// Keep only professors with seniority strictly below this many years.
    std::optional<double> max_seniority;

    /// Throws InputError on degree outside 1..3 or repeated covariates.
    void validate() const;
};

/// One professor's regression row: covariates and the dependent percentile.
struct Observation {
    std::string professor_id;
    Covariates covariates;
    double percentile = 0;  // 0..100
};

enum class TermKind { intercept, polynomial, continuous, binary };

struct Term {
    std::string name;      // column label, e.g. "Age^2"
    std::string variable;  // marginal-effect group, e.g. "Age"
    TermKind kind = TermKind::continuous;
    int power = 1;
};

/// Regression design. Age enters as powers of (age - age_center).
struct Design {
    std::string dependent;
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    std::vector<Term> terms;
    double age_center = 0;
    std::vector<std::string> dropped_terms;
    std::vector<double> vif;  // per retained term; NaN where not computed
};

/// y = percentile / 100; X = [1, centered age powers, covariates in spec
/// order], pruned by collinearity_check. Throws InputError when no rows remain
/// after filtering or the dependent is constant.
Design build_design(std::span<const Observation> observations, const ModelSpec& spec);

struct CollinearityReport {
    std::vector<std::size_t> kept;
    std::vector<std::size_t> dropped;
    std::vector<double> vif;  // aligned with `kept`; NaN for exempt columns
};

/// Variance inflation factor of `column`: 1 / (1 - R^2) from regressing it on
/// the other columns plus a constant.
double variance_inflation_factor(const Eigen::MatrixXd& X, std::size_t column);

/// Drops exactly dependent columns and columns whose VIF exceeds the threshold,
/// always removing the later-listed column first. Exempt columns (intercept,
/// age powers) are never dropped for VIF.
CollinearityReport collinearity_check(const Eigen::MatrixXd& X, const std::vector<bool>& vif_exempt = {},
                                      double vif_threshold = 10.0);

struct SolverOptions {
    int max_iterations = 100;
    double gradient_tolerance = 1e-8;
    double relative_tolerance = 1e-12;
    /// |x'b| beyond this at the solution is reported as separation.
    double separation_threshold = 15.0;
};

struct LogitFit {
    Eigen::VectorXd beta;
    Eigen::MatrixXd robust_covariance;     // sandwich
    Eigen::MatrixXd classical_covariance;  // inverse expected Hessian
    double quasi_log_likelihood = 0;
    double gradient_sup_norm = 0;
    int iterations = 0;
    bool converged = false;
};

/// Logistic function.
double logistic(double eta);

/// Bernoulli quasi-log-likelihood of fractional y at linear predictor eta.
double quasi_log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& eta);

/// Fractional-logit QMLE by damped Newton (IRLS) iterations.
///
/// Converges when the gradient sup-norm drops below the tolerance, or when a
/// full Newton step changes the quasi-log-likelihood by less than the relative
/// tolerance. Throws ConvergenceError after max_iterations and SeparationError
/// when coefficients diverge.
LogitFit fit_fractional_logit(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const SolverOptions& options = {});

/// Quasi-log-likelihood of the intercept-only model on y.
double null_quasi_log_likelihood(const Eigen::VectorXd& y, const SolverOptions& options = {});

/// 1 - model / null quasi-log-likelihood. Throws ComputeError when the null
/// quasi-log-likelihood is zero.
double mcfadden_pseudo_r2(double model_qll, const Eigen::VectorXd& y, const SolverOptions& options = {});

/// Average marginal effect of `variable` on the percentile scale (x100).
/// Continuous variables pool every polynomial term; binary ones use the
/// discrete 0 -> 1 contrast. Throws InputError for unknown variables.
double average_marginal_effect(const Design& design, const Eigen::VectorXd& beta, const std::string& variable);

/// AME of every non-intercept variable in the design.
std::map<std::string, double> average_marginal_effects(const Design& design, const Eigen::VectorXd& beta);

struct FitResult {
    std::string dependent;
    std::vector<std::string> terms;
    std::vector<double> coefficients;  // raw age scale
    std::vector<double> robust_se;
    std::vector<double> classical_se;
    std::vector<double> vif;
    std::map<std::string, double> ame;  // percentile scale
    double aic = 0;
    double quasi_log_likelihood = 0;
    double null_quasi_log_likelihood = 0;
    double pseudo_r2 = 0;
    std::size_t n = 0;
    bool converged = false;
    int iterations = 0;
    double gradient_sup_norm = 0;
    int age_degree = 0;
    double age_center = 0;
    std::vector<std::string> dropped_terms;

    std::optional<std::size_t> term_index(const std::string& term) const;
};

/// Fits the design and derives every reported quantity. Coefficients and
/// standard errors are mapped back from centered to raw age powers.
FitResult fit_model(const Design& design, const SolverOptions& options = {});

struct DegreeSelection {
    int degree = 1;
    std::vector<std::optional<FitResult>> candidates;  // index d-1; empty if that fit failed
    std::vector<std::string> errors;
    const FitResult& selected() const { return *candidates[std::size_t(degree - 1)]; }
};

/// Fits degrees 1..max_degree and keeps the minimum-AIC one (ties go to the
/// lower degree). Throws the last fit error when every degree fails.
DegreeSelection select_age_degree(const std::function<Design(int)>& build_for_degree, int max_degree,
                                  const SolverOptions& options = {});

DegreeSelection select_age_degree(std::span<const Observation> observations, const ModelSpec& spec,
                                  int max_degree, const SolverOptions& options = {});

}  // namespace scholarperf
