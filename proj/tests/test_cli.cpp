#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "scholarperf/cli.hpp"
#include "scholarperf/csv.hpp"
#include "scholarperf/fit_io.hpp"

namespace fs = std::filesystem;
using scholarperf::cli::run;

namespace {

const std::string kFix = SCHOLARPERF_FIXTURES;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string scratch(const std::string& name) {
    const fs::path p = fs::path(SCHOLARPERF_SCRATCH) / name;
    fs::remove_all(p);
    fs::create_directories(p.parent_path());
    return p.string();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> compute_args(const std::string& out) {
    return {"compute",         "--roster", kFix + "/roster.csv", "--pubs",  kFix + "/publications.csv",
            "--conventions",   kFix + "/conventions.csv",        "--sds-map", kFix + "/sds_map.csv",
            "--census-date",   "2010-12-31",                     "--window", "2006-2010",
            "--out",           out};
}

// Two-field synthetic cohort written by `simulate`, then computed.
std::string simulated_inputs() {
    static std::string dir;
    if (!dir.empty()) return dir;
    dir = scratch("sim_two_fields");
    fs::create_directories(dir);
    {
        std::ofstream cfg(dir + "/sim.conf");
        cfg << "n_professors = 600\nfields = MAT/05:MAT:alphabetical;BIO/10:BIO:position_weighted\nseed = 3\n";
    }
    REQUIRE(invoke({"simulate", "--config", dir + "/sim.conf", "--runs", "1", "--out", dir}).code == 0);
    const auto r = invoke({"compute", "--roster", dir + "/roster.csv", "--pubs", dir + "/publications.csv",
                           "--conventions", dir + "/conventions.csv", "--out", dir + "/computed"});
    REQUIRE(r.code == 0);
    return dir;
}

std::vector<scholarperf::GroupFit> read_fits(const std::string& dir) {
    std::ifstream in(dir + "/fits.csv");
    return scholarperf::read_fits_csv(in);
}

}  // namespace

TEST_CASE("compute on the fixture") {
    const std::string out = scratch("compute");
    const auto r = invoke(compute_args(out));
    CHECK_MESSAGE(r.code == 0, r.err);
    std::ifstream in(out + "/indicators.csv");
    const auto table = scholarperf::read_csv(in);
    CHECK(table.rows.size() == 4);
    CHECK(fs::exists(out + "/percentiles.csv"));
    CHECK(fs::exists(out + "/run_manifest.json"));
    const auto manifest = nlohmann::json::parse(slurp(out + "/run_manifest.json"));
    CHECK(manifest["command"] == "compute");
    CHECK(manifest["inputs"]["census_date"] == "2010-12-31");
}

TEST_CASE("compute is byte-identical on rerun") {
    const std::string a = scratch("rerun_a"), b = scratch("rerun_b");
    REQUIRE(invoke(compute_args(a)).code == 0);
    REQUIRE(invoke(compute_args(b)).code == 0);
    CHECK(slurp(a + "/indicators.csv") == slurp(b + "/indicators.csv"));
    CHECK(slurp(a + "/percentiles.csv") == slurp(b + "/percentiles.csv"));
    auto args = compute_args(a);
    args.insert(args.end(), {"--threads", "3"});
    REQUIRE(invoke(args).code == 0);
    CHECK(slurp(a + "/indicators.csv") == slurp(b + "/indicators.csv"));
}

TEST_CASE("missing input path exits 2 and names the path") {
    auto args = compute_args(scratch("missing"));
    args[2] = kFix + "/no_such_roster.csv";
    const auto r = invoke(args);
    CHECK(r.code == 2);
    CHECK(r.err.find("no_such_roster.csv") != std::string::npos);
}

TEST_CASE("strict mode surfaces computation failures") {
    auto args = compute_args(scratch("strict"));
    args.push_back("--strict");
    const auto r = invoke(args);
    CHECK(r.code == 1);
    CHECK(r.err.find("indicators") != std::string::npos);
}

TEST_CASE("argument errors") {
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"frobnicate"}).code == 2);
    CHECK(invoke({"simulate", "--runs", "0", "--out", scratch("runs0")}).code == 2);
    CHECK(invoke({"compute", "--roster", kFix + "/roster.csv"}).code == 2);
    CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("simulate is reproducible") {
    const std::string a = scratch("sim_a"), b = scratch("sim_b");
    for (const auto& d : {a, b})
        REQUIRE(invoke({"simulate", "--runs", "1", "--seed", "7", "--n-professors", "300", "--out", d}).code == 0);
    CHECK(slurp(a + "/recovery.json") == slurp(b + "/recovery.json"));
    CHECK(slurp(a + "/roster.csv") == slurp(b + "/roster.csv"));
    const auto report = nlohmann::json::parse(slurp(a + "/recovery.json"));
    CHECK(report.contains("age_ame_negative_fraction"));
    CHECK(report.contains("seniority_ame_positive_fraction"));
    CHECK(report["runs"].size() == 1);
}

TEST_CASE("regress produces a column per group") {
    const std::string dir = simulated_inputs();
    const std::string out = dir + "/fss";
    const auto r = invoke({"regress", "--roster", dir + "/roster.csv", "--in", dir + "/computed", "--out", out});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    std::ifstream in(out + "/regression_table.csv");
    const auto table = scholarperf::read_csv(in);
    CHECK(table.header == std::vector<std::string>{"", "Total", "BIO", "MAT"});
    CHECK(fs::exists(out + "/regression_table.txt"));
    CHECK(fs::exists(out + "/run_manifest.json"));
}

TEST_CASE("seniority cap keeps the recently promoted") {
    const std::string dir = simulated_inputs();
    REQUIRE(invoke({"regress", "--roster", dir + "/roster.csv", "--in", dir + "/computed", "--out", dir + "/all"})
                .code == 0);
    const auto r = invoke({"regress", "--roster", dir + "/roster.csv", "--in", dir + "/computed", "--max-seniority",
                           "8", "--allow-partial", "--out", dir + "/recent"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto all = read_fits(dir + "/all"), recent = read_fits(dir + "/recent");
    CHECK(recent.front().group == "Total");
    CHECK(recent.front().fit.n < all.front().fit.n);
    CHECK(recent.front().fit.n > 0);
}

TEST_CASE("dependent choice changes the output") {
    const std::string dir = simulated_inputs();
    REQUIRE(invoke({"regress", "--roster", dir + "/roster.csv", "--in", dir + "/computed", "--out", dir + "/dep_fss"})
                .code == 0);
    REQUIRE(invoke({"regress", "--roster", dir + "/roster.csv", "--in", dir + "/computed", "--dependent", "IA",
                    "--out", dir + "/dep_ia"})
                .code == 0);
    CHECK(slurp(dir + "/dep_fss/fits.csv") != slurp(dir + "/dep_ia/fits.csv"));
    CHECK(read_fits(dir + "/dep_ia").front().fit.dependent == "IA");
}

TEST_CASE("report writes tables") {
    const std::string dir = simulated_inputs();
    REQUIRE(invoke({"regress", "--roster", dir + "/roster.csv", "--in", dir + "/computed", "--out", dir + "/computed"})
                .code == 0);
    const std::string out = dir + "/report";
    const auto r = invoke({"report", "--roster", dir + "/roster.csv", "--in", dir + "/computed", "--uda",
                           "MAT,BIO,PHY", "--out", out});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.err.find("PHY") != std::string::npos);
    for (const char* f : {"descriptive.txt", "appointment_age.txt", "age_histogram.txt", "seniority_histogram.txt",
                          "cv_by_sds.txt", "regression_table.txt", "run_manifest.json"})
        CHECK_MESSAGE(fs::exists(out + "/" + f), f);
    const auto csv = invoke({"report", "--roster", dir + "/roster.csv", "--in", dir + "/computed", "--format", "csv",
                             "--out", out + "_csv"});
    CHECK(csv.code == 0);
    CHECK(fs::exists(out + "_csv/descriptive.csv"));
}
