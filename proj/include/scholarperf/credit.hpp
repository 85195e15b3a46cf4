#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scholarperf/corpus.hpp"

namespace scholarperf {

enum class CreditConvention { alphabetical, position_weighted };

std::string to_string(CreditConvention convention);
CreditConvention parse_credit_convention(const std::string& token);

/// Position-weighted sub-rule, chosen by the affiliations of the first and last author.
enum class PositionScheme {
    same_university,        // first/last 40% each, 20% over the middle
    different_universities  // first/last 30%, second/penultimate 15%, 10% over the rest
};

PositionScheme select_scheme(std::span<const Author> byline);

/// Credit share of every byline position. Shares are positive and sum to one;
/// bylines too short to hold every named position are renormalized.
std::vector<double> contribution_weights(std::span<const Author> byline, CreditConvention convention);

/// Share of the author at `position`; throws InputError when out of range.
double fractional_contribution(std::span<const Author> byline, std::size_t position, CreditConvention convention);

/// Resolves the credit convention of each SDS.
///
/// Precedence: global override, then explicit SDS entry, then the UDA default
/// (life sciences BIO, MED, AVS are position-weighted, all else alphabetical).
class ConventionMap {
public:
    void set(const std::string& sds, CreditConvention convention) { by_sds_[sds] = convention; }
    void set_global_override(CreditConvention convention) { override_ = convention; }
    void set_uda_defaults(bool enabled) { uda_defaults_ = enabled; }

    /// Throws InputError when no rule applies.
    CreditConvention resolve(const std::string& sds, const std::string& uda) const;

    static CreditConvention uda_default(const std::string& uda);

    /// CSV with columns sds, convention.
    static ConventionMap read_csv(std::istream& in);
    void write_csv(std::ostream& out) const;

    const std::map<std::string, CreditConvention>& entries() const { return by_sds_; }
    std::optional<CreditConvention> global_override() const { return override_; }

private:
    std::map<std::string, CreditConvention> by_sds_;
    std::optional<CreditConvention> override_;
    bool uda_defaults_ = true;
};

}  // namespace scholarperf
