#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "scholarperf/regress.hpp"

namespace scholarperf {

/// A fit labelled with its group ("Total" or a UDA code).
struct GroupFit {
    std::string group;
    FitResult fit;
};

/// One row per (group, term); fit-level fields repeat on every row of a group.
/// Values are written in shortest round-trip form.
void write_fits_csv(std::ostream& out, std::span<const GroupFit> fits);
std::vector<GroupFit> read_fits_csv(std::istream& in);

nlohmann::json fits_to_json(std::span<const GroupFit> fits);
std::vector<GroupFit> fits_from_json(const nlohmann::json& doc);

}  // namespace scholarperf
