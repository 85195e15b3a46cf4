#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "scholarperf/corpus.hpp"
#include "scholarperf/credit.hpp"
#include "scholarperf/keyvalue.hpp"

namespace scholarperf {

struct FieldSpec {
    std::string sds;
    std::string uda;
    CreditConvention convention = CreditConvention::alphabetical;
    double rate_shift = 0;        // log publication-rate offset of the field
    double mean_authors = 4;      // mean byline length
    double citation_base = 4;     // mean citations per year since publication
    double impact_factor_mean = 2.5;
};

std::vector<FieldSpec> default_fields();

/// Ground truth for a synthetic cohort.
///
/// A professor's publication rate is
///   exp(baseline + field shift + age_effect (age - 60) + seniority_effect (seniority - 15)
///       + gender_effect male + u),  u ~ N(0, latent_heterogeneity),
/// and publications over the window are Poisson with that rate times t.
struct SimConfig {
    std::size_t n_professors = 2000;
    std::vector<FieldSpec> fields = default_fields();
    double baseline_log_rate = 0.7;
    double true_age_effect = -0.05;
    double true_seniority_effect = 0.04;
    double true_gender_effect = 0.1;
    double latent_heterogeneity = 0.6;
    double age_seniority_corr_target = 0.7;
    double citation_dispersion = 1.5;  // gamma shape of the per-paper citation multiplier
    double male_share = 0.8;
    double private_share = 0.06;
    double polytechnic_share = 0.10;
    double advanced_share = 0.02;
    int window_first_year = 2006;
    int window_last_year = 2010;
    Date census{2010, 12, 31};
    std::uint64_t seed = 1;

    /// Throws InputError on out-of-range parameters.
    void validate() const;

    static SimConfig from_key_values(const KeyValueConfig& kv);
    KeyValueConfig to_key_values() const;
};

struct SyntheticCohort {
    std::vector<Professor> roster;
    Corpus corpus;
    SdsMap sds_map;
    ConventionMap conventions;
};

/// Fully determined by the config (including its seed). Throws InputError
/// when the age/seniority correlation target cannot be reached.
SyntheticCohort generate_cohort(const SimConfig& config);

/// Spread of appointment age that makes corr(age, seniority) hit `target`,
/// found by bisection on a fixed Monte Carlo sample. Cached per target.
double calibrate_appointment_spread(double target);

/// Sample Pearson correlation.
double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y);

struct RecoveryRun {
    std::size_t run = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double age_ame = 0;
    double seniority_ame = 0;
    double pseudo_r2 = 0;
    int age_degree = 0;
    double age_seniority_corr = 0;
    std::size_t n = 0;
    double inactive_share = 0;
};

struct RecoveryReport {
    SimConfig config;
    std::vector<RecoveryRun> runs;
    std::size_t successful_runs = 0;
    double age_negative_fraction = 0;
    double age_positive_fraction = 0;
    double seniority_positive_fraction = 0;
    double seniority_negative_fraction = 0;
    double mean_age_ame = 0;
    double sd_age_ame = 0;
    double mean_seniority_ame = 0;
    double sd_seniority_ame = 0;
    double mean_pseudo_r2 = 0;
    double mean_age_seniority_corr = 0;
    bool low_power = false;
    std::vector<std::string> notes;
};

/// Cohorts below this size are reported as low power.
inline constexpr std::size_t kLowPowerCohortSize = 200;

/// Runs generate -> indicators -> percentiles -> FSS fit `n_runs` times with
/// seeds config.seed + run. A failing run is recorded and the rest continue.
RecoveryReport recovery_experiment(const SimConfig& config, std::size_t n_runs, unsigned threads = 1);

nlohmann::json to_json(const RecoveryReport& report);
/// One row per run.
void write_recovery_csv(std::ostream& out, const RecoveryReport& report);

}  // namespace scholarperf
