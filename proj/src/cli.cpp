#include "scholarperf/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "scholarperf/cohort.hpp"
#include "scholarperf/csv.hpp"
#include "scholarperf/error.hpp"
#include "scholarperf/fit_io.hpp"
#include "scholarperf/pipeline.hpp"
#include "scholarperf/report.hpp"
#include "scholarperf/sim.hpp"

namespace scholarperf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifestName = "run_manifest.json";
constexpr const char* kIndicatorFile = "indicators.csv";
constexpr const char* kPercentileFile = "percentiles.csv";

// Prefixes errors with the pipeline stage that raised them.
template <typename Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const InputError& e) {
        throw InputError(name + ": " + e.what());
    } catch (const ConvergenceError& e) {
        throw ComputeError(name + ": " + e.what());
    } catch (const ComputeError& e) {
        throw ComputeError(name + ": " + e.what());
    }
}

void require_file(const std::string& path, const std::string& what) {
    if (!fs::is_regular_file(path)) throw InputError(what + " not found: " + path);
}

std::ifstream open_input(const std::string& path, const std::string& what) {
    require_file(path, what);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + what + ": " + path);
    return in;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out << content;
    if (!out) throw InputError("failed writing " + path.string());
}

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn) {
    std::ostringstream buffer;
    fn(buffer);
    write_file(path, buffer.str());
}

void prepare_output_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory: " + dir);
}

void write_manifest(const std::string& dir, const json& manifest) {
    write_file(fs::path(dir) / kManifestName, manifest.dump(2) + "\n");
}

ObservationWindow parse_window(const std::string& text) {
    const auto parts = split(text, '-');
    if (parts.size() != 2) throw InputError("window must look like 2006-2010, got '" + text + "'");
    const int first = int(parse_integer(parts[0], "window start"));
    const int last = int(parse_integer(parts[1], "window end"));
    if (last < first) throw InputError("window ends before it starts: " + text);
    return ObservationWindow::from_years(first, last);
}

std::optional<double> optional_value(const CLI::Option* opt, double value) {
    return opt->count() ? std::optional<double>(value) : std::nullopt;
}

// Options shared by subcommands that rebuild covariates from a roster.
struct RosterOptions {
    std::string roster;
    std::string sds_map;
    std::string census = "2010-12-31";
    std::string window = "2006-2010";
};

void add_roster_options(CLI::App* cmd, RosterOptions& o, bool roster_required = true) {
    auto* r = cmd->add_option("--roster", o.roster, "Roster CSV");
    if (roster_required) r->required();
    cmd->add_option("--sds-map", o.sds_map, "CSV mapping sds to uda");
    cmd->add_option("--census-date", o.census, "Census date (YYYY-MM-DD)")->capture_default_str();
    cmd->add_option("--window", o.window, "Observation window, e.g. 2006-2010")->capture_default_str();
}

std::vector<Professor> load_roster(const RosterOptions& o) {
    std::optional<SdsMap> map;
    if (!o.sds_map.empty()) {
        auto in = open_input(o.sds_map, "sds map");
        map = stage("read sds map", [&] { return SdsMap::read_csv(in); });
    }
    auto in = open_input(o.roster, "roster");
    RosterIngestOptions opts;
    opts.sds_map = map ? &*map : nullptr;
    return stage("ingest roster", [&] { return ingest_roster(in, opts); });
}

json roster_manifest(const RosterOptions& o) {
    return {{"roster", o.roster}, {"sds_map", o.sds_map}, {"census_date", o.census}, {"window", o.window}};
}

// compute -------------------------------------------------------------------

struct ComputeOptions {
    RosterOptions roster;
    std::string pubs;
    std::string pubs_format = "auto";
    std::string conventions;
    std::string convention_override;
    bool strict = false;
    unsigned threads = 1;
    std::string out;
};

void cmd_compute(const ComputeOptions& o, std::ostream& log) {
    const Date census = Date::parse_iso(o.roster.census);
    const ObservationWindow window = parse_window(o.roster.window);
    require_file(o.roster.roster, "roster");
    require_file(o.pubs, "publications");
    if (!o.conventions.empty()) require_file(o.conventions, "convention map");
    if (!o.roster.sds_map.empty()) require_file(o.roster.sds_map, "sds map");
    prepare_output_dir(o.out);

    const auto roster = load_roster(o.roster);

    PublicationFormat format = PublicationFormat::csv;
    if (o.pubs_format == "jsonl" || (o.pubs_format == "auto" && (o.pubs.ends_with(".jsonl") || o.pubs.ends_with(".json"))))
        format = PublicationFormat::json_lines;
    else if (o.pubs_format != "csv" && o.pubs_format != "auto")
        throw InputError("unknown publication format '" + o.pubs_format + "'");
    auto pubs_in = open_input(o.pubs, "publications");
    const Corpus corpus = stage("ingest publications", [&] { return ingest_publications(pubs_in, format); });

    ConventionMap conventions;
    if (!o.conventions.empty()) {
        auto in = open_input(o.conventions, "convention map");
        conventions = stage("read convention map", [&] { return ConventionMap::read_csv(in); });
    }
    if (!o.convention_override.empty())
        conventions.set_global_override(stage("convention override", [&] {
            return parse_credit_convention(o.convention_override);
        }));

    PipelineConfig pc;
    pc.census = census;
    pc.window = window;
    pc.indicator_options.strict = o.strict;
    pc.threads = o.threads;
    const PipelineOutput result = stage("indicators", [&] {
        return run_indicator_pipeline(roster, corpus, conventions, pc);
    });

    for (const auto& w : corpus.warnings) log << "warning: " << w << "\n";
    for (const auto& w : result.warnings) log << "warning: " << w << "\n";
    if (corpus.dropped_by_doc_type) log << "dropped " << corpus.dropped_by_doc_type << " non-research documents\n";

    write_with(fs::path(o.out) / kIndicatorFile, [&](std::ostream& s) { write_indicator_csv(s, result.scores); });
    write_with(fs::path(o.out) / kPercentileFile, [&](std::ostream& s) { write_percentile_csv(s, result.percentiles); });

    json manifest = {{"command", "compute"},
                     {"inputs", roster_manifest(o.roster)},
                     {"publications", o.pubs},
                     {"conventions", o.conventions},
                     {"convention_override", o.convention_override},
                     {"strict", o.strict},
                     {"output_dir", o.out},
                     {"outputs", {kIndicatorFile, kPercentileFile}},
                     {"professors", roster.size()},
                     {"publications_kept", corpus.publications.size()},
                     {"publications_dropped", corpus.dropped_by_doc_type}};
    write_manifest(o.out, manifest);
    log << "wrote " << roster.size() << " indicator rows to " << (fs::path(o.out) / kIndicatorFile).string() << "\n";
}

// regress -------------------------------------------------------------------

struct RegressOptions {
    RosterOptions roster;
    std::string in;
    std::string dependent = "FSS";
    int max_degree = 3;
    double max_seniority = 0;
    const CLI::Option* max_seniority_opt = nullptr;
    std::vector<std::string> covariates;
    bool allow_partial = false;
    std::string format = "text";
    unsigned threads = 1;
    std::string out;
};

int cmd_regress(const RegressOptions& o, std::ostream& log) {
    const Date census = Date::parse_iso(o.roster.census);
    const ObservationWindow window = parse_window(o.roster.window);
    const fs::path in_dir = o.in.empty() ? fs::path(o.out) : fs::path(o.in);
    const std::string pct_path = (in_dir / kPercentileFile).string();
    require_file(o.roster.roster, "roster");
    require_file(pct_path, "percentile dump");
    if (o.format != "text" && o.format != "csv") throw InputError("--format must be text or csv");
    if (o.max_degree < 1 || o.max_degree > 3) throw InputError("--max-degree must be 1, 2 or 3");

    ModelSpec spec;
    spec.dependent = parse_indicator(o.dependent);
    spec.max_seniority = optional_value(o.max_seniority_opt, o.max_seniority);
    if (!o.covariates.empty()) {
        spec.covariates.clear();
        for (const auto& c : o.covariates) spec.covariates.push_back(parse_covariate(c));
    }
    spec.validate();
    prepare_output_dir(o.out);

    const auto roster = load_roster(o.roster);
    auto pct_in = open_input(pct_path, "percentile dump");
    const auto percentiles = stage("read percentiles", [&] { return read_percentile_csv(pct_in); });
    const auto covariates = stage("covariates", [&] { return derive_all_covariates(roster, census, window); });

    const auto outcomes = fit_groups(roster, covariates, percentiles, spec, o.max_degree, o.threads);
    std::vector<GroupFit> fits;
    std::vector<std::string> failures;
    for (const auto& g : outcomes) {
        if (g.ok()) {
            fits.push_back({g.group, g.selection->selected()});
            for (const auto& e : g.selection->errors) log << "note: " << g.group << ": " << e << "\n";
        } else {
            failures.push_back(g.group + ": " + g.error);
        }
    }
    for (const auto& f : failures) log << "fit failed: " << f << "\n";

    write_with(fs::path(o.out) / "fits.csv", [&](std::ostream& s) { write_fits_csv(s, fits); });
    write_file(fs::path(o.out) / "fits.json", fits_to_json(fits).dump(2) + "\n");
    if (!fits.empty()) {
        const TextTable table = stage("regression table", [&] { return regression_table(fits); });
        write_file(fs::path(o.out) / "regression_table.txt", table.to_text());
        write_file(fs::path(o.out) / "regression_table.csv", table.to_csv());
    }

    json manifest = {{"command", "regress"},
                     {"inputs", roster_manifest(o.roster)},
                     {"input_dir", in_dir.string()},
                     {"model",
                      {{"dependent", to_string(spec.dependent)},
                       {"max_degree", o.max_degree},
                       {"max_seniority", spec.max_seniority ? json(*spec.max_seniority) : json(nullptr)},
                       {"covariates", [&] {
                            json a = json::array();
                            for (auto c : spec.covariates) a.push_back(to_string(c));
                            return a;
                        }()}}},
                     {"allow_partial", o.allow_partial},
                     {"output_dir", o.out},
                     {"failed_groups", failures}};
    write_manifest(o.out, manifest);

    if (fits.empty()) throw ComputeError("no group could be fitted");
    if (!failures.empty() && !o.allow_partial) {
        log << failures.size() << " group(s) failed; pass --allow-partial to accept partial results\n";
        return kExitComputeFailure;
    }
    return kExitOk;
}

// simulate ------------------------------------------------------------------

struct SimulateOptions {
    std::string config;
    std::size_t runs = 1;
    std::uint64_t seed = 1;
    const CLI::Option* seed_opt = nullptr;
    std::size_t n_professors = 0;
    const CLI::Option* n_opt = nullptr;
    unsigned threads = 1;
    std::string out;
};

void cmd_simulate(const SimulateOptions& o, std::ostream& log) {
    if (o.runs < 1) throw InputError("--runs must be at least 1");
    SimConfig config;
    if (!o.config.empty()) {
        require_file(o.config, "simulation config");
        config = stage("simulation config", [&] { return SimConfig::from_key_values(KeyValueConfig::load(o.config)); });
    }
    if (o.seed_opt->count()) config.seed = o.seed;
    if (o.n_opt->count()) config.n_professors = o.n_professors;
    stage("simulation config", [&] { config.validate(); });
    prepare_output_dir(o.out);

    const SyntheticCohort cohort = stage("generate", [&] { return generate_cohort(config); });
    const fs::path dir(o.out);
    write_with(dir / "roster.csv", [&](std::ostream& s) { write_roster_csv(s, cohort.roster); });
    write_with(dir / "publications.csv",
               [&](std::ostream& s) { write_publications_csv(s, cohort.corpus.publications); });
    write_with(dir / "sds_map.csv", [&](std::ostream& s) { cohort.sds_map.write_csv(s); });
    write_with(dir / "conventions.csv", [&](std::ostream& s) { cohort.conventions.write_csv(s); });

    const RecoveryReport report = stage("recovery", [&] { return recovery_experiment(config, o.runs, o.threads); });
    write_file(dir / "recovery.json", to_json(report).dump(2) + "\n");
    write_with(dir / "recovery.csv", [&](std::ostream& s) { write_recovery_csv(s, report); });
    const KeyValueConfig resolved = config.to_key_values();
    write_with(dir / "sim_config.txt", [&](std::ostream& s) {
        for (const auto& [k, v] : resolved.values()) s << k << " = " << v << "\n";
    });

    json manifest = {{"command", "simulate"},
                     {"config", o.config},
                     {"resolved_config", resolved.values()},
                     {"runs", o.runs},
                     {"seed", config.seed},
                     {"output_dir", o.out}};
    write_manifest(o.out, manifest);

    log << "age AME negative in " << format_percent(100 * report.age_negative_fraction) << "% of "
        << report.successful_runs << " runs; seniority AME positive in "
        << format_percent(100 * report.seniority_positive_fraction) << "%\n";
    for (const auto& n : report.notes) log << "note: " << n << "\n";
}

// report --------------------------------------------------------------------

struct ReportOptions {
    RosterOptions roster;
    std::string in;
    std::vector<std::string> udas;
    double bin_width = 1;
    std::string format = "text";
    std::string out;
};

void cmd_report(const ReportOptions& o, std::ostream& log) {
    const Date census = Date::parse_iso(o.roster.census);
    const ObservationWindow window = parse_window(o.roster.window);
    const fs::path in_dir = o.in.empty() ? fs::path(o.out) : fs::path(o.in);
    require_file(o.roster.roster, "roster");
    const std::string ind_path = (in_dir / kIndicatorFile).string();
    require_file(ind_path, "indicator dump");
    if (o.format != "text" && o.format != "csv") throw InputError("--format must be text or csv");
    if (!(o.bin_width > 0)) throw InputError("--bin-width must be positive");
    prepare_output_dir(o.out);

    const auto roster = load_roster(o.roster);
    auto ind_in = open_input(ind_path, "indicator dump");
    const auto scores = stage("read indicators", [&] { return read_indicator_csv(ind_in); });

    const fs::path dir(o.out);
    const std::string ext = o.format == "csv" ? ".csv" : ".txt";
    auto emit = [&](const std::string& stem, const TextTable& t) {
        write_file(dir / (stem + ext), o.format == "csv" ? t.to_csv() : t.to_text());
    };

    const DescriptiveReport desc = descriptive_table(roster, scores, census, window, o.udas);
    for (const auto& w : desc.warnings) log << "warning: " << w << "\n";
    emit("descriptive", desc.overview_table());
    emit("appointment_age", desc.appointment_age_table());

    std::vector<double> ages, seniorities;
    for (const auto& p : roster) {
        try {
            const Covariates c = derive_covariates(p, census, window);
            ages.push_back(c.age);
            seniorities.push_back(c.seniority);
        } catch (const Error&) {
        }
    }
    if (!ages.empty()) {
        emit("age_histogram", histogram_table(distribution_histogram(ages, o.bin_width)));
        emit("seniority_histogram", histogram_table(distribution_histogram(seniorities, o.bin_width)));
    }

    std::vector<std::string> groups;
    std::vector<double> fss;
    for (const auto& s : scores) {
        groups.push_back(s.sds);
        fss.push_back(s.fss);
    }
    TextTable cv;
    cv.header = {"SDS", "FSS coefficient of variation"};
    for (const auto& [g, v] : coefficient_of_variation_by_group(groups, fss)) cv.rows.push_back({g, format_decimal(v, 3, false)});
    emit("cv_by_sds", cv);

    const fs::path fits_path = in_dir / "fits.csv";
    if (fs::is_regular_file(fits_path)) {
        std::ifstream fin(fits_path, std::ios::binary);
        const auto fits = stage("read fits", [&] { return read_fits_csv(fin); });
        if (!fits.empty()) emit("regression_table", stage("regression table", [&] { return regression_table(fits); }));
    }

    json manifest = {{"command", "report"},
                     {"inputs", roster_manifest(o.roster)},
                     {"input_dir", in_dir.string()},
                     {"bin_width", o.bin_width},
                     {"format", o.format},
                     {"output_dir", o.out}};
    write_manifest(o.out, manifest);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Field-normalized research performance of full professors"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "scholarperf 0.1.0");

    unsigned threads = 1;
    app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    ComputeOptions compute;
    auto* c = app.add_subcommand("compute", "Indicators and cohort percentiles from roster and publications");
    add_roster_options(c, compute.roster);
    c->add_option("--pubs", compute.pubs, "Publications (CSV or JSON lines)")->required();
    c->add_option("--pubs-format", compute.pubs_format, "csv, jsonl or auto")->capture_default_str();
    c->add_option("--conventions", compute.conventions, "CSV of sds,convention");
    c->add_option("--convention", compute.convention_override, "Force one credit convention everywhere");
    c->add_flag("--strict", compute.strict, "Fail on publications without a citation scale");
    c->add_option("--threads", compute.threads)->check(CLI::PositiveNumber);
    c->add_option("--out", compute.out, "Output directory")->required();

    RegressOptions regress;
    auto* r = app.add_subcommand("regress", "Fractional-logit fits per UDA with AIC-selected age degree");
    add_roster_options(r, regress.roster);
    r->add_option("--in", regress.in, "Directory holding the compute outputs (defaults to --out)");
    r->add_option("--dependent", regress.dependent, "FSS, P, IA or IJ")->capture_default_str();
    r->add_option("--max-degree", regress.max_degree, "Highest age polynomial degree")->capture_default_str();
    regress.max_seniority_opt = r->add_option("--max-seniority", regress.max_seniority,
                                              "Keep professors with seniority below this many years");
    r->add_option("--covariates", regress.covariates, "Covariates besides age")->delimiter(',');
    r->add_flag("--allow-partial", regress.allow_partial, "Exit 0 even when some groups fail");
    r->add_option("--format", regress.format, "text or csv")->capture_default_str();
    r->add_option("--threads", regress.threads)->check(CLI::PositiveNumber);
    r->add_option("--out", regress.out, "Output directory")->required();

    SimulateOptions simulate;
    auto* s = app.add_subcommand("simulate", "Synthetic cohort and sign-recovery experiment");
    s->add_option("--config", simulate.config, "key = value simulation settings");
    s->add_option("--runs", simulate.runs, "Number of replications")->capture_default_str();
    simulate.seed_opt = s->add_option("--seed", simulate.seed, "Base seed (run r uses seed + r)");
    simulate.n_opt = s->add_option("--n-professors", simulate.n_professors, "Cohort size");
    s->add_option("--threads", simulate.threads)->check(CLI::PositiveNumber);
    s->add_option("--out", simulate.out, "Output directory")->required();

    ReportOptions report;
    auto* p = app.add_subcommand("report", "Descriptive tables, histograms and regression table");
    add_roster_options(p, report.roster);
    p->add_option("--in", report.in, "Directory holding compute/regress outputs (defaults to --out)");
    p->add_option("--uda", report.udas, "Expected UDA codes (empty ones are reported)")->delimiter(',');
    p->add_option("--bin-width", report.bin_width, "Histogram bin width in years")->capture_default_str();
    p->add_option("--format", report.format, "text or csv")->capture_default_str();
    p->add_option("--out", report.out, "Output directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << "scholarperf 0.1.0\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputFailure;
    }

    // a global --threads applies unless the subcommand sets its own
    auto pick_threads = [&](CLI::App* sub, unsigned local) { return sub->count("--threads") ? local : threads; };
    try {
        if (c->parsed()) {
            compute.threads = pick_threads(c, compute.threads);
            cmd_compute(compute, err);
        } else if (r->parsed()) {
            regress.threads = pick_threads(r, regress.threads);
            return cmd_regress(regress, err);
        } else if (s->parsed()) {
            simulate.threads = pick_threads(s, simulate.threads);
            cmd_simulate(simulate, err);
        } else if (p->parsed()) {
            cmd_report(report, err);
        }
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputFailure;
    } catch (const ComputeError& e) {
        err << "error: " << e.what() << "\n";
        return kExitComputeFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitComputeFailure;
    }
    return kExitOk;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace scholarperf::cli
