// evdeg: batch extreme-value analysis of graph degree sequences.
//
// Subcommands: degrees, tail, mex, theta, fht, walk, rate. Inputs are SNAP
// edge lists or one-integer-per-line degree files. Every command writes its
// outputs plus a manifest into the output directory; seeded commands are
// bit-reproducible for a fixed seed regardless of the thread count.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evdeg/evdeg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace evdeg;

namespace {

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

struct CommonOptions {
    std::string input;
    std::string format = "auto";  // auto | snap | degree-list
    std::string out_dir;
    unsigned threads = 0;
};

struct SeedOption {
    std::optional<std::uint64_t> seed;

    // Test mode (EVDEG_TEST_MODE=1) requires an explicit seed; otherwise a
    // fresh one is drawn and recorded in the manifest.
    std::uint64_t resolve(const char* command) const {
        if (seed) return *seed;
        const char* test_mode = std::getenv("EVDEG_TEST_MODE");
        if (test_mode && std::string_view(test_mode) == "1")
            throw error(errc::usage,
                        std::string(command) + ": --seed is required in test mode");
        std::random_device rd;
        return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }
};

std::string default_out_dir() {
    const char* env = std::getenv("EVDEG_OUT_DIR");
    return env && *env ? env : ".";
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

fs::path out_path(const CommonOptions& common, const std::string& name) {
    fs::path dir(common.out_dir.empty() ? default_out_dir() : common.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw error(errc::io, "cannot create output directory '" + dir.string() + "'");
    return dir / name;
}

void finalize_manifest(RunManifest& manifest, const CommonOptions& common,
                       const std::string& name) {
    manifest.version = kVersion;
    manifest.timestamp = iso_timestamp();
    write_json_file(out_path(common, name).string(), manifest.to_json());
}

bool looks_like_degree_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::io, "cannot open input '" + path + "'");
    std::string line;
    while (std::getline(in, line)) {
        std::string_view sv = detail::trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        return sv.find_first_of(" \t") == std::string_view::npos;
    }
    throw error(errc::parse, "empty input: '" + path + "' has no data lines");
}

struct LoadedInput {
    std::optional<ParseReport> parsed_graph;
    DegreeSequence degrees;
    std::string resolved_format;
};

LoadedInput load_input(const CommonOptions& common, Ordering ordering) {
    if (common.input.empty()) throw error(errc::usage, "--input is required");
    std::string format = common.format;
    if (format == "auto")
        format = looks_like_degree_list(common.input) ? "degree-list" : "snap";

    LoadedInput loaded;
    loaded.resolved_format = format;
    std::ifstream in(common.input);
    if (!in) throw error(errc::io, "cannot open input '" + common.input + "'");
    if (format == "snap") {
        loaded.parsed_graph = parse_edge_list(in);
        loaded.degrees = degree_sequence(loaded.parsed_graph->graph, ordering);
    } else if (format == "degree-list") {
        auto values = parse_degree_file(in);
        if (ordering == Ordering::sorted_ascending)
            std::sort(values.begin(), values.end());
        loaded.degrees = DegreeSequence::from_values(std::move(values), ordering);
    } else {
        throw error(errc::usage, "unknown --format '" + format + "'");
    }
    return loaded;
}

std::span<const std::int64_t> values_span(const DegreeSequence& seq) {
    return {seq.values.data(), seq.values.size()};
}

std::span<const std::int64_t> sorted_span(const DegreeSequence& seq) {
    return {seq.sorted_view.data(), seq.sorted_view.size()};
}

std::vector<double> parse_grid_option(const std::string& csv) {
    std::vector<double> grid;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            grid.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw error(errc::usage, "bad grid value '" + item + "'");
        }
    }
    if (grid.empty()) throw error(errc::usage, "--grid must contain at least one threshold");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

Proposal parse_proposal(const std::string& text) {
    if (text == "finite") return GaussianProposal{1.0};
    auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    std::optional<double> value;
    if (colon != std::string::npos) {
        try {
            value = std::stod(text.substr(colon + 1));
        } catch (const std::exception&) {
            throw error(errc::usage, "bad proposal parameter in '" + text + "'");
        }
    }
    if (kind == "heavy") {
        if (!value) throw error(errc::usage, "heavy proposal needs eta, e.g. heavy:0.01");
        return HeavyProposal{*value, 1.0};
    }
    if (kind == "gauss" || kind == "gaussian" || kind == "finite")
        return GaussianProposal{value.value_or(1.0)};
    throw error(errc::usage, "unknown proposal '" + text + "' (use heavy:ETA or finite)");
}

ContinuousTarget parse_target(const std::string& text) {
    auto first = text.find(':');
    const std::string kind = text.substr(0, first);
    std::vector<double> params;
    std::size_t pos = first;
    while (pos != std::string::npos) {
        const std::size_t next = text.find(':', pos + 1);
        const std::string tok = text.substr(pos + 1, next == std::string::npos
                                                         ? std::string::npos
                                                         : next - pos - 1);
        try {
            params.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw error(errc::usage, "bad target parameter in '" + text + "'");
        }
        pos = next;
    }
    if (kind == "power") {
        if (params.empty()) throw error(errc::usage, "power target needs r, e.g. power:0.337");
        PowerLawTarget t{params[0], params.size() > 1 ? params[1] : 1.0};
        return t;
    }
    if (kind == "exp") {
        if (params.empty()) throw error(errc::usage, "exp target needs lambda, e.g. exp:1");
        return ExponentialTarget{params[0]};
    }
    throw error(errc::usage, "unknown target '" + text + "' (use power:R[:XMIN] or exp:LAMBDA)");
}

json tail_estimate_json(const TailEstimate& est) {
    json j;
    j["method"] = std::string(tail_method_name(est.method));
    if (est.method == TailMethod::ratio) {
        j["threshold"] = est.threshold;
        j["exceedances"] = est.k;
    } else {
        j["k"] = est.k;
        j["threshold"] = est.threshold;
    }
    j["gamma"] = est.gamma;
    if (est.alpha)
        j["alpha"] = *est.alpha;
    else
        j["alpha"] = nullptr;
    j["n"] = est.n;
    return j;
}

// ---------------------------------------------------------------------------
// degrees
// ---------------------------------------------------------------------------

struct DegreesArgs {
    CommonOptions common;
    std::string ordering = "first-appearance";
};

void run_degrees(const DegreesArgs& args) {
    const Ordering ordering = args.ordering == "sorted-ascending"
                                  ? Ordering::sorted_ascending
                                  : Ordering::first_appearance;
    if (args.ordering != "first-appearance" && args.ordering != "sorted-ascending")
        throw error(errc::usage, "unknown --ordering '" + args.ordering + "'");
    auto loaded = load_input(args.common, ordering);
    const auto& seq = loaded.degrees;

    const auto degree_file = out_path(args.common, "degrees.txt");
    {
        std::ofstream out(degree_file, std::ios::binary);
        if (!out) throw error(errc::io, "cannot open '" + degree_file.string() + "'");
        for (auto v : seq.values) out << v << '\n';
    }

    json summary;
    summary["schema_version"] = 1;
    summary["input_path"] = args.common.input;
    summary["format"] = loaded.resolved_format;
    summary["ordering"] = std::string(ordering_name(ordering));
    summary["n"] = seq.values.size();
    summary["max_degree"] = seq.sorted_view.empty() ? 0 : seq.sorted_view.back();
    double mean = 0.0;
    for (auto v : seq.values) mean += static_cast<double>(v);
    mean /= static_cast<double>(seq.values.size());
    summary["mean_degree"] = mean;
    if (loaded.parsed_graph) {
        summary["node_count"] = loaded.parsed_graph->graph.node_count;
        summary["edge_count"] = loaded.parsed_graph->graph.edge_count;
        summary["self_loops_dropped"] = loaded.parsed_graph->self_loops_dropped;
        summary["duplicates_dropped"] = loaded.parsed_graph->duplicates_dropped;
    }
    const auto summary_file = out_path(args.common, "degrees_summary.json");
    write_json_file(summary_file.string(), summary);

    RunManifest manifest;
    manifest.command = "degrees";
    manifest.input_path = args.common.input;
    manifest.parameters["ordering"] = args.ordering;
    manifest.parameters["format"] = loaded.resolved_format;
    manifest.outputs = {degree_file.string(), summary_file.string()};
    finalize_manifest(manifest, args.common, "degrees_manifest.json");
    std::cout << "degrees: n=" << seq.values.size() << " max=" << summary["max_degree"]
              << " mean=" << format_double(mean) << "\n";
}

// ---------------------------------------------------------------------------
// tail
// ---------------------------------------------------------------------------

struct TailArgs {
    CommonOptions common;
    SeedOption seed;
    std::string method = "all";
    std::optional<std::size_t> k;
    std::optional<std::size_t> bootstrap_B;
    std::size_t n1 = 0;
    std::optional<double> ratio_threshold;
    std::string bootstrap_mode = "select-k";  // select-k | average
};

void run_tail(const TailArgs& args) {
    if (args.method != "all" && args.method != "hill" && args.method != "ratio" &&
        args.method != "moment")
        throw error(errc::usage, "unknown --method '" + args.method + "'");
    if (!args.k && !args.bootstrap_B)
        throw error(errc::usage, "tail: pass --k or --bootstrap B");
    if (args.k && *args.k < 1) throw error(errc::usage, "tail: --k must be >= 1");
    if (args.bootstrap_mode != "select-k" && args.bootstrap_mode != "average")
        throw error(errc::usage, "unknown --bootstrap-mode '" + args.bootstrap_mode + "'");

    auto loaded = load_input(args.common, Ordering::first_appearance);
    const auto sorted = sorted_span(loaded.degrees);
    const std::size_t n = sorted.size();

    json doc;
    doc["schema_version"] = 1;
    doc["input_path"] = args.common.input;
    doc["n"] = n;

    std::size_t k = 0;
    std::uint64_t seed = 0;
    bool seeded = false;
    std::optional<BootstrapResult> boot;
    if (args.bootstrap_B) {
        seed = args.seed.resolve("tail");
        seeded = true;
        BootstrapOptions opts;
        opts.B = *args.bootstrap_B;
        opts.n1 = args.n1;
        opts.seed = seed;
        opts.threads = args.common.threads;
        boot = double_bootstrap_k(sorted, opts);
        k = boot->k_star;
        doc["B"] = *args.bootstrap_B;
        doc["seed"] = seed;
        doc["bootstrap"] = {{"k_star", boot->k_star}, {"k1", boot->k1},   {"k2", boot->k2},
                            {"n1", boot->n1},         {"n2", boot->n2}};
        doc["bootstrap_mode"] = args.bootstrap_mode;
    } else {
        k = *args.k;
    }
    doc["k"] = k;

    // The ratio threshold defaults to the Hill cut X_(n-k); this is an
    // assumption, so it is always recorded in the output.
    const double x_n = args.ratio_threshold
                           ? *args.ratio_threshold
                           : static_cast<double>(sorted[n - 1 - std::min(k, n - 1)]);
    doc["ratio_threshold"] = x_n;
    doc["ratio_threshold_source"] =
        args.ratio_threshold ? "explicit" : "order-statistic X_(n-k)";

    const bool want_hill = args.method == "all" || args.method == "hill";
    const bool want_ratio = args.method == "all" || args.method == "ratio";
    const bool want_moment = args.method == "all" || args.method == "moment";

    json estimates = json::array();
    if (want_hill) estimates.push_back(tail_estimate_json(hill(sorted, k)));
    if (want_ratio) estimates.push_back(tail_estimate_json(ratio(sorted, x_n)));
    if (want_moment) estimates.push_back(tail_estimate_json(moment(sorted, k)));

    // average mode: re-estimate on B full-size resamples at the selected k
    // and report the mean alongside the point estimates.
    if (boot && args.bootstrap_mode == "average") {
        const std::size_t B = *args.bootstrap_B;
        std::vector<double> h_sum(B, 0.0), r_sum(B, 0.0), m_sum(B, 0.0);
        std::vector<int> h_ok(B, 0), r_ok(B, 0), m_ok(B, 0);
        parallel_for(B, args.common.threads, [&](std::size_t b) {
            Rng rng = Rng::stream(seed, 2 * B + b);
            std::vector<std::int64_t> resample(n);
            for (auto& v : resample) v = sorted[rng.below(n)];
            std::sort(resample.begin(), resample.end());
            std::span<const std::int64_t> rs(resample.data(), resample.size());
            const std::size_t kk = std::min(k, n - 1);
            try {
                h_sum[b] = hill(rs, kk).gamma;
                h_ok[b] = 1;
            } catch (const error&) {
            }
            try {
                r_sum[b] = ratio(rs, x_n).gamma;
                r_ok[b] = 1;
            } catch (const error&) {
            }
            try {
                m_sum[b] = moment(rs, kk).gamma;
                m_ok[b] = 1;
            } catch (const error&) {
            }
        });
        auto average = [&](const std::vector<double>& sums, const std::vector<int>& ok) -> json {
            double total = 0.0;
            int count = 0;
            for (std::size_t b = 0; b < sums.size(); ++b)
                if (ok[b]) {
                    total += sums[b];
                    ++count;
                }
            if (count == 0) return nullptr;
            const double gamma = total / count;
            json j;
            j["gamma"] = gamma;
            j["alpha"] = gamma > 0.0 ? json(1.0 / gamma) : json(nullptr);
            j["resamples_used"] = count;
            return j;
        };
        json averaged;
        if (want_hill) averaged["hill"] = average(h_sum, h_ok);
        if (want_ratio) averaged["ratio"] = average(r_sum, r_ok);
        if (want_moment) averaged["moment"] = average(m_sum, m_ok);
        doc["bootstrap_averaged"] = averaged;
    }
    doc["estimates"] = estimates;

    const auto estimates_file = out_path(args.common, "tail_estimates.json");
    write_json_file(estimates_file.string(), doc);

    // k-vs-gamma curve for the Hill estimator on a log-spaced k grid.
    const auto curve_file = out_path(args.common, "tail_curve.csv");
    {
        CsvWriter csv(curve_file.string());
        csv.row({"k", "gamma", "alpha"});
        std::vector<std::size_t> ks;
        const std::size_t k_max = n - 1;
        const double step = std::pow(static_cast<double>(k_max), 1.0 / 512.0);
        double cursor = 1.0;
        while (ks.size() < 512 && cursor <= static_cast<double>(k_max)) {
            const auto kk = static_cast<std::size_t>(cursor);
            if (ks.empty() || ks.back() != kk) ks.push_back(kk);
            cursor = std::max(cursor * step, cursor + 1.0);
        }
        for (std::size_t kk : ks) {
            try {
                const auto est = hill(sorted, kk);
                csv.row({std::to_string(kk), format_double(est.gamma),
                         est.alpha ? format_double(*est.alpha) : ""});
            } catch (const error&) {
                // non-positive cut at this k; omit the row
            }
        }
    }

    RunManifest manifest;
    manifest.command = "tail";
    manifest.input_path = args.common.input;
    manifest.seeded = seeded;
    manifest.seed = seed;
    manifest.parameters["method"] = args.method;
    manifest.parameters["k"] = std::to_string(k);
    if (args.bootstrap_B) {
        manifest.parameters["B"] = std::to_string(*args.bootstrap_B);
        manifest.parameters["bootstrap_mode"] = args.bootstrap_mode;
    }
    manifest.parameters["ratio_threshold"] = format_double(x_n);
    manifest.outputs = {estimates_file.string(), curve_file.string()};
    finalize_manifest(manifest, args.common, "tail_manifest.json");

    for (const auto& est : estimates)
        std::cout << "tail: " << est["method"].get<std::string>() << " gamma="
                  << format_double(est["gamma"].get<double>())
                  << (est["alpha"].is_null()
                          ? std::string(" alpha=n/a")
                          : " alpha=" + format_double(est["alpha"].get<double>()))
                  << " (k=" << k << ")\n";
}

// ---------------------------------------------------------------------------
// mex
// ---------------------------------------------------------------------------

struct MexArgs {
    CommonOptions common;
    std::string grid;
};

void run_mex(const MexArgs& args) {
    auto loaded = load_input(args.common, Ordering::first_appearance);
    const auto sorted = sorted_span(loaded.degrees);
    std::vector<double> grid = args.grid.empty() ? default_mean_excess_grid(sorted)
                                                 : parse_grid_option(args.grid);
    if (grid.empty())
        throw error(errc::domain, "mean excess grid is empty (constant input?)");
    auto curve = mean_excess_curve(values_span(loaded.degrees), grid);

    const auto curve_file = out_path(args.common, "mex_curve.csv");
    {
        CsvWriter csv(curve_file.string());
        csv.row({"u", "e", "count"});
        for (const auto& p : curve.points)
            csv.row({format_double(p.u), format_double(p.e), std::to_string(p.count)});
    }

    RunManifest manifest;
    manifest.command = "mex";
    manifest.input_path = args.common.input;
    manifest.parameters["grid"] = args.grid.empty() ? "default" : args.grid;
    manifest.parameters["points"] = std::to_string(curve.points.size());
    manifest.parameters["skipped"] = std::to_string(curve.skipped.size());
    manifest.outputs = {curve_file.string()};
    finalize_manifest(manifest, args.common, "mex_manifest.json");
    std::cout << "mex: " << curve.points.size() << " points, " << curve.skipped.size()
              << " thresholds skipped\n";
}

// ---------------------------------------------------------------------------
// theta
// ---------------------------------------------------------------------------

struct ThetaArgs {
    CommonOptions common;
    std::string grid;
    std::size_t window = 10;
    std::string ordering = "first-appearance";
};

void run_theta(const ThetaArgs& args) {
    const Ordering ordering = args.ordering == "sorted-ascending"
                                  ? Ordering::sorted_ascending
                                  : Ordering::first_appearance;
    auto loaded = load_input(args.common, ordering);
    const auto seq = values_span(loaded.degrees);
    std::vector<double> grid =
        args.grid.empty() ? default_theta_grid(seq) : parse_grid_option(args.grid);
    auto curve = theta_curve(seq, grid);

    const auto curve_file = out_path(args.common, "theta_curve.csv");
    {
        CsvWriter csv(curve_file.string());
        csv.row({"u", "theta", "raw", "branch", "N"});
        for (const auto& p : curve.points)
            csv.row({format_double(p.u), format_double(p.theta), format_double(p.raw),
                     std::string(branch_name(p.branch)), std::to_string(p.exceedance_count)});
    }

    const std::size_t window = std::min(args.window, curve.points.size());
    auto sel = select_theta_plateau(curve.points, std::max<std::size_t>(window, 3));

    json selected;
    selected["schema_version"] = 1;
    selected["theta"] = sel.theta;
    selected["u_low"] = sel.u_low;
    selected["u_high"] = sel.u_high;
    selected["window_w"] = sel.window;
    selected["cv"] = sel.cv;
    selected["mean_cluster_size"] = mean_cluster_size(sel.theta);
    selected["infeasible_thresholds"] = curve.infeasible.size();
    const auto sel_file = out_path(args.common, "theta_selected.json");
    write_json_file(sel_file.string(), selected);

    RunManifest manifest;
    manifest.command = "theta";
    manifest.input_path = args.common.input;
    manifest.parameters["grid"] = args.grid.empty() ? "default" : args.grid;
    manifest.parameters["window"] = std::to_string(args.window);
    manifest.parameters["ordering"] = args.ordering;
    manifest.outputs = {curve_file.string(), sel_file.string()};
    finalize_manifest(manifest, args.common, "theta_manifest.json");
    std::cout << "theta: selected " << format_double(sel.theta) << " on u in ["
              << format_double(sel.u_low) << ", " << format_double(sel.u_high)
              << "], mean cluster size " << format_double(mean_cluster_size(sel.theta)) << "\n";
}

// ---------------------------------------------------------------------------
// fht
// ---------------------------------------------------------------------------

struct FhtArgs {
    CommonOptions common;
    double rho = 0.05;
    std::string theta = "auto";
    std::size_t window = 10;
    double tail_cutoff = 1e-6;
};

void run_fht(const FhtArgs& args) {
    if (!(args.rho > 0.0 && args.rho < 1.0))
        throw error(errc::usage, "fht: --rho must lie in (0, 1)");
    auto loaded = load_input(args.common, Ordering::first_appearance);
    const auto sorted = sorted_span(loaded.degrees);

    double theta;
    std::string theta_source;
    if (args.theta == "auto") {
        auto grid = default_theta_grid(values_span(loaded.degrees));
        auto curve = theta_curve(values_span(loaded.degrees), grid);
        const std::size_t window =
            std::max<std::size_t>(3, std::min(args.window, curve.points.size()));
        theta = select_theta_plateau(curve.points, window).theta;
        theta_source = "plateau";
    } else {
        try {
            theta = std::stod(args.theta);
        } catch (const std::exception&) {
            throw error(errc::usage, "fht: --theta must be 'auto' or a number");
        }
        theta_source = "explicit";
    }
    if (!(theta >= 0.0 && theta <= 1.0))
        throw error(errc::usage, "fht: theta must lie in [0, 1]");

    const double x_rho = static_cast<double>(empirical_quantile(sorted, 1.0 - args.rho));
    const double rho_eff = effective_tail_fraction(sorted, x_rho);
    if (rho_eff <= 0.0)
        throw error(errc::domain, "fht: no degrees exceed the threshold quantile");

    FhtModel model{rho_eff, theta};
    json doc;
    doc["schema_version"] = 1;
    doc["rho_nominal"] = args.rho;
    doc["rho_effective"] = rho_eff;
    doc["x_rho"] = x_rho;
    doc["theta"] = theta;
    doc["theta_source"] = theta_source;
    if (theta == 0.0) {
        doc["mean_scaled"] = "infinite";
        doc["mean_fraction"] = "infinite";
        doc["regime"] = "polynomial (theta = 0)";
    } else {
        doc["mean_scaled"] = model.mean_scaled();
        doc["mean_fraction"] = model.mean_fraction();
    }
    const auto model_file = out_path(args.common, "fht_model.json");
    write_json_file(model_file.string(), doc);

    const auto pmf_file = out_path(args.common, "fht_pmf.csv");
    {
        CsvWriter csv(pmf_file.string());
        csv.row({"j", "normalized", "raw"});
        if (theta > 0.0) {
            double tail = 1.0;
            std::int64_t j = 1;
            const double p = model.p();
            while (tail > args.tail_cutoff && j <= 10000000) {
                const auto v = fht_pmf(j, rho_eff, theta);
                csv.row({std::to_string(j), format_double(v.normalized), format_double(v.raw)});
                tail -= v.normalized;
                ++j;
            }
            (void)p;
        }
    }

    RunManifest manifest;
    manifest.command = "fht";
    manifest.input_path = args.common.input;
    manifest.parameters["rho"] = format_double(args.rho);
    manifest.parameters["theta"] = args.theta;
    manifest.parameters["tail_cutoff"] = format_double(args.tail_cutoff);
    manifest.outputs = {model_file.string(), pmf_file.string()};
    finalize_manifest(manifest, args.common, "fht_manifest.json");
    std::cout << "fht: x_rho=" << format_double(x_rho) << " rho_eff=" << format_double(rho_eff)
              << " theta=" << format_double(theta);
    if (theta > 0.0)
        std::cout << " mean_scaled=" << format_double(model.mean_scaled());
    else
        std::cout << " mean_scaled=infinite";
    std::cout << "\n";
}

// ---------------------------------------------------------------------------
// walk
// ---------------------------------------------------------------------------

struct WalkArgs {
    CommonOptions common;
    SeedOption seed;
    std::string walker = "srw";  // srw | mhrw | metropolis | iid
    double threshold_rho = 0.05;
    std::size_t runs = 1;
    std::int64_t max_steps = 100000;
    std::optional<std::uint32_t> start;
    std::string target = "exp:1";
    std::string proposal = "finite";
    double x0 = 1.0;
    std::string dist = "uniform";  // iid generators: uniform|pareto:A[:XMIN]|frechet|exp:L|movmax:M
    std::size_t calibration_n = 100000;
    std::string trace_file;
};

struct IidSpec {
    std::string kind;
    double a = 0.0;
    double b = 1.0;
    std::size_t m = 2;
};

IidSpec parse_dist(const std::string& text) {
    IidSpec spec;
    auto colon = text.find(':');
    spec.kind = text.substr(0, colon);
    std::vector<double> params;
    std::size_t pos = colon;
    while (pos != std::string::npos) {
        const std::size_t next = text.find(':', pos + 1);
        try {
            params.push_back(std::stod(text.substr(
                pos + 1, next == std::string::npos ? std::string::npos : next - pos - 1)));
        } catch (const std::exception&) {
            throw error(errc::usage, "bad distribution parameter in '" + text + "'");
        }
        pos = next;
    }
    if (spec.kind == "uniform" || spec.kind == "frechet") return spec;
    if (spec.kind == "pareto") {
        if (params.empty()) throw error(errc::usage, "pareto needs alpha, e.g. pareto:1.5");
        spec.a = params[0];
        spec.b = params.size() > 1 ? params[1] : 1.0;
        return spec;
    }
    if (spec.kind == "exp") {
        if (params.empty()) throw error(errc::usage, "exp needs lambda, e.g. exp:1");
        spec.a = params[0];
        return spec;
    }
    if (spec.kind == "movmax") {
        if (params.empty()) throw error(errc::usage, "movmax needs m, e.g. movmax:2");
        spec.m = static_cast<std::size_t>(params[0]);
        if (spec.m < 1) throw error(errc::usage, "movmax m must be >= 1");
        return spec;
    }
    throw error(errc::usage, "unknown distribution '" + text + "'");
}

void run_walk(const WalkArgs& args) {
    if (!(args.threshold_rho > 0.0 && args.threshold_rho < 1.0))
        throw error(errc::usage, "walk: --threshold-rho must lie in (0, 1)");
    if (args.runs < 1) throw error(errc::usage, "walk: --runs must be >= 1");
    const std::uint64_t seed = args.seed.resolve("walk");

    std::optional<ParseReport> parsed;
    DegreeSequence degrees;
    const bool graph_walker = args.walker == "srw" || args.walker == "mhrw";
    if (graph_walker) {
        auto loaded = load_input(args.common, Ordering::first_appearance);
        if (!loaded.parsed_graph)
            throw error(errc::usage, "walk: " + args.walker + " requires a SNAP edge-list input");
        parsed = std::move(loaded.parsed_graph);
        degrees = std::move(loaded.degrees);
    } else if (args.walker != "metropolis" && args.walker != "iid") {
        throw error(errc::usage, "unknown --walker '" + args.walker + "'");
    }

    // Threshold at the (1 - rho) quantile of the relevant value law, with the
    // effective tail fraction reported next to the nominal one.
    double threshold = 0.0;
    double rho_eff = args.threshold_rho;
    std::string threshold_source;
    if (graph_walker) {
        const auto sorted = sorted_span(degrees);
        threshold = static_cast<double>(empirical_quantile(sorted, 1.0 - args.threshold_rho));
        rho_eff = effective_tail_fraction(sorted, threshold);
        threshold_source = "empirical degree quantile";
    } else if (args.walker == "metropolis") {
        const ContinuousTarget target = parse_target(args.target);
        threshold = target_quantile(target, 1.0 - args.threshold_rho);
        threshold_source = "closed-form target quantile";
    } else {
        const IidSpec spec = parse_dist(args.dist);
        if (spec.kind == "uniform")
            threshold = UniformGenerator{}.quantile(1.0 - args.threshold_rho);
        else if (spec.kind == "pareto")
            threshold = ParetoGenerator{spec.a, spec.b}.quantile(1.0 - args.threshold_rho);
        else if (spec.kind == "exp")
            threshold = ExponentialGenerator{spec.a}.quantile(1.0 - args.threshold_rho);
        else if (spec.kind == "frechet")
            threshold = FrechetGenerator{}.quantile(1.0 - args.threshold_rho);
        else {
            // moving maximum: calibrate on an empirical sample and report the
            // effective tail fraction, since runs are short and dependent
            Rng rng = Rng::stream(seed, 0xCA11B);
            MovingMaxGenerator gen(spec.m);
            auto sample = generate_sequence(gen, args.calibration_n, rng);
            std::sort(sample.begin(), sample.end());
            std::span<const double> ss(sample.data(), sample.size());
            threshold = empirical_quantile(ss, 1.0 - args.threshold_rho);
            rho_eff = effective_tail_fraction(ss, threshold);
        }
        threshold_source = spec.kind == "movmax" ? "empirical calibration sample"
                                                 : "closed-form quantile";
    }

    FhtOptions fht_opts;
    fht_opts.threshold = threshold;
    fht_opts.runs = args.runs;
    fht_opts.max_steps = args.max_steps;
    fht_opts.seed = seed;
    fht_opts.threads = args.common.threads;

    FhtSamples samples;
    if (graph_walker) {
        const Graph& graph = parsed->graph;
        const GraphWalker kind = args.walker == "srw" ? GraphWalker::srw : GraphWalker::mhrw;
        const auto start = args.start;
        samples = empirical_fht(
            [&graph, kind, start](Rng& rng) {
                return detail::GraphWalkGen(graph, kind, start, rng);
            },
            fht_opts);
    } else if (args.walker == "metropolis") {
        const ContinuousTarget target = parse_target(args.target);
        const Proposal proposal = parse_proposal(args.proposal);
        const double x0 = args.x0;
        samples = empirical_fht(
            [&target, &proposal, x0](Rng& rng) {
                return detail::MetropolisGen(target, proposal, x0, rng);
            },
            fht_opts);
    } else {
        const IidSpec spec = parse_dist(args.dist);
        samples = empirical_fht(
            [spec](Rng& rng) -> std::function<double()> {
                if (spec.kind == "uniform")
                    return [&rng]() mutable { return UniformGenerator{}.next(rng); };
                if (spec.kind == "pareto")
                    return [&rng, g = ParetoGenerator{spec.a, spec.b}]() mutable {
                        return g.next(rng);
                    };
                if (spec.kind == "exp")
                    return [&rng, g = ExponentialGenerator{spec.a}]() mutable {
                        return g.next(rng);
                    };
                if (spec.kind == "frechet")
                    return [&rng]() mutable { return FrechetGenerator{}.next(rng); };
                return [&rng, g = MovingMaxGenerator(spec.m)]() mutable { return g.next(rng); };
            },
            fht_opts);
    }

    const auto fht_file = out_path(args.common, "walk_fht.csv");
    {
        CsvWriter csv(fht_file.string());
        csv.row({"run", "hitting_step", "censored"});
        for (std::size_t r = 0; r < samples.hitting.size(); ++r) {
            const bool censored = samples.hitting[r] < 0;
            csv.row({std::to_string(r),
                     censored ? "" : std::to_string(samples.hitting[r]),
                     censored ? "1" : "0"});
        }
    }

    if (!args.trace_file.empty()) {
        // trace of run 0, one value per line
        Rng rng = Rng::stream(seed, 0);
        std::ofstream out(args.trace_file, std::ios::binary);
        if (!out) throw error(errc::io, "cannot open trace file '" + args.trace_file + "'");
        if (graph_walker) {
            detail::GraphWalkGen gen(parsed->graph,
                                     args.walker == "srw" ? GraphWalker::srw : GraphWalker::mhrw,
                                     args.start, rng);
            for (std::int64_t t = 0; t < args.max_steps; ++t) {
                const double v = gen();
                out << format_double(v) << '\n';
                if (v > threshold) break;
            }
        } else if (args.walker == "metropolis") {
            detail::MetropolisGen gen(parse_target(args.target), parse_proposal(args.proposal),
                                      args.x0, rng);
            for (std::int64_t t = 0; t < args.max_steps; ++t) {
                const double v = gen();
                out << format_double(v) << '\n';
                if (v > threshold) break;
            }
        }
    }

    json summary;
    summary["schema_version"] = 1;
    summary["walker"] = args.walker;
    summary["threshold"] = threshold;
    summary["threshold_source"] = threshold_source;
    summary["rho_nominal"] = args.threshold_rho;
    summary["rho_effective"] = rho_eff;
    summary["runs"] = args.runs;
    summary["max_steps"] = args.max_steps;
    summary["seed"] = seed;
    summary["censored_count"] = samples.censored;
    summary["acceptance_rate"] = samples.mean_acceptance;
    if (samples.censored < samples.hitting.size()) {
        summary["mean"] = samples.mean_uncensored();
        summary["median"] = samples.median_uncensored();
    } else {
        summary["mean"] = nullptr;
        summary["median"] = nullptr;
        summary["all_censored"] = true;
    }
    const auto summary_file = out_path(args.common, "walk_summary.json");
    write_json_file(summary_file.string(), summary);

    RunManifest manifest;
    manifest.command = "walk";
    manifest.input_path = args.common.input;
    manifest.seeded = true;
    manifest.seed = seed;
    manifest.parameters["walker"] = args.walker;
    manifest.parameters["threshold_rho"] = format_double(args.threshold_rho);
    manifest.parameters["runs"] = std::to_string(args.runs);
    manifest.parameters["max_steps"] = std::to_string(args.max_steps);
    if (args.walker == "metropolis") {
        manifest.parameters["target"] = args.target;
        manifest.parameters["proposal"] = args.proposal;
        manifest.parameters["x0"] = format_double(args.x0);
    }
    if (args.walker == "iid") manifest.parameters["dist"] = args.dist;
    if (args.start) manifest.parameters["start"] = std::to_string(*args.start);
    manifest.outputs = {fht_file.string(), summary_file.string()};
    if (!args.trace_file.empty()) manifest.outputs.push_back(args.trace_file);
    finalize_manifest(manifest, args.common, "walk_manifest.json");

    std::cout << "walk: " << args.walker << " runs=" << args.runs << " censored="
              << samples.censored;
    if (samples.censored < samples.hitting.size())
        std::cout << " mean=" << format_double(samples.mean_uncensored());
    std::cout << "\n";
}

// ---------------------------------------------------------------------------
// rate
// ---------------------------------------------------------------------------

struct RateArgs {
    CommonOptions common;
    std::optional<double> r;
    std::optional<double> alpha;
    std::string proposal = "finite";
};

void run_rate(const RateArgs& args) {
    if (args.r.has_value() == args.alpha.has_value())
        throw error(errc::usage, "rate: pass exactly one of --r or --alpha");
    // tail exponent alpha on P{X > x} corresponds to density exponent 1 + r
    const double r = args.r ? *args.r : *args.alpha - 1.0;
    const Proposal proposal = parse_proposal(args.proposal);
    auto rc = polynomial_rate(r, proposal);

    json doc;
    doc["schema_version"] = 1;
    doc["regime"] = std::string(regime_name(rc.regime));
    doc["eta_criterion"] = rc.eta_criterion;
    doc["r"] = *rc.r;
    if (args.alpha) doc["alpha"] = *args.alpha;
    doc["v"] = *rc.v;
    doc["theta_is_zero"] = rc.theta_is_zero;
    doc["proposal"] = args.proposal;
    const auto rate_file = out_path(args.common, "rate.json");
    write_json_file(rate_file.string(), doc);

    RunManifest manifest;
    manifest.command = "rate";
    manifest.input_path = "";
    if (args.r) manifest.parameters["r"] = format_double(*args.r);
    if (args.alpha) manifest.parameters["alpha"] = format_double(*args.alpha);
    manifest.parameters["proposal"] = args.proposal;
    manifest.outputs = {rate_file.string()};
    finalize_manifest(manifest, args.common, "rate_manifest.json");
    std::cout << "rate: r=" << format_double(r) << " v=" << format_double(*rc.v) << " ("
              << regime_name(rc.regime) << ")\n";
}

void attach_common(CLI::App* cmd, CommonOptions& common, bool needs_input = true) {
    auto* opt = cmd->add_option("--input,-i", common.input, "input file (SNAP edge list or degree list)");
    if (needs_input) opt->required();
    cmd->add_option("--format", common.format, "input format: auto|snap|degree-list")
        ->default_val("auto");
    cmd->add_option("--out,-o", common.out_dir, "output directory (default $EVDEG_OUT_DIR or .)");
    cmd->add_option("--threads", common.threads, "worker threads (0 = hardware)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"extreme-value analysis of graph degree sequences"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    DegreesArgs degrees_args;
    auto* degrees_cmd = app.add_subcommand("degrees", "extract a degree sequence");
    attach_common(degrees_cmd, degrees_args.common);
    degrees_cmd->add_option("--ordering", degrees_args.ordering,
                            "first-appearance|sorted-ascending");

    TailArgs tail_args;
    auto* tail_cmd = app.add_subcommand("tail", "tail-index estimation");
    attach_common(tail_cmd, tail_args.common);
    tail_cmd->add_option("--k", tail_args.k, "number of upper order statistics");
    tail_cmd->add_option("--bootstrap", tail_args.bootstrap_B, "double-bootstrap resamples B");
    tail_cmd->add_option("--n1", tail_args.n1, "first bootstrap resample size (0 = n^0.9)");
    tail_cmd->add_option("--seed", tail_args.seed.seed, "bootstrap seed");
    tail_cmd->add_option("--method", tail_args.method, "all|hill|ratio|moment");
    tail_cmd->add_option("--x-n", tail_args.ratio_threshold,
                         "ratio-estimator threshold (default X_(n-k))");
    tail_cmd->add_option("--bootstrap-mode", tail_args.bootstrap_mode,
                         "select-k|average (Table-style averaging of resample estimates)");

    MexArgs mex_args;
    auto* mex_cmd = app.add_subcommand("mex", "mean excess curve");
    attach_common(mex_cmd, mex_args.common);
    mex_cmd->add_option("--grid", mex_args.grid, "comma-separated thresholds (default: order statistics)");

    ThetaArgs theta_args;
    auto* theta_cmd = app.add_subcommand("theta", "extremal index curve and plateau selection");
    attach_common(theta_cmd, theta_args.common);
    theta_cmd->add_option("--grid", theta_args.grid, "comma-separated thresholds");
    theta_cmd->add_option("--window", theta_args.window, "plateau window length");
    theta_cmd->add_option("--ordering", theta_args.ordering,
                          "sequence ordering: first-appearance|sorted-ascending");

    FhtArgs fht_args;
    auto* fht_cmd = app.add_subcommand("fht", "first-hitting-time model");
    attach_common(fht_cmd, fht_args.common);
    fht_cmd->add_option("--rho", fht_args.rho, "tail probability of the threshold quantile");
    fht_cmd->add_option("--theta", fht_args.theta, "auto or a value in [0,1]");
    fht_cmd->add_option("--window", fht_args.window, "plateau window for --theta auto");
    fht_cmd->add_option("--tail-cutoff", fht_args.tail_cutoff, "stop the pmf at this tail mass");

    WalkArgs walk_args;
    auto* walk_cmd = app.add_subcommand("walk", "empirical first hitting times of samplers");
    attach_common(walk_cmd, walk_args.common, false);
    walk_cmd->add_option("--walker", walk_args.walker, "srw|mhrw|metropolis|iid");
    walk_cmd->add_option("--threshold-rho", walk_args.threshold_rho, "tail probability of threshold");
    walk_cmd->add_option("--runs", walk_args.runs, "independent runs");
    walk_cmd->add_option("--max-steps", walk_args.max_steps, "censoring horizon per run");
    walk_cmd->add_option("--seed", walk_args.seed.seed, "master seed");
    walk_cmd->add_option("--start", walk_args.start, "start node (default: random non-isolated)");
    walk_cmd->add_option("--target", walk_args.target, "metropolis target: power:R[:XMIN]|exp:LAMBDA");
    walk_cmd->add_option("--proposal", walk_args.proposal, "heavy:ETA|finite|gauss:SIGMA");
    walk_cmd->add_option("--x0", walk_args.x0, "metropolis start state");
    walk_cmd->add_option("--dist", walk_args.dist,
                         "iid generator: uniform|pareto:A[:XMIN]|exp:L|frechet|movmax:M");
    walk_cmd->add_option("--calibration-n", walk_args.calibration_n,
                         "calibration sample size for empirical thresholds");
    walk_cmd->add_option("--trace", walk_args.trace_file, "stream run 0 values to this file");

    RateArgs rate_args;
    auto* rate_cmd = app.add_subcommand("rate", "polynomial convergence-rate arithmetic");
    attach_common(rate_cmd, rate_args.common, false);
    rate_cmd->add_option("--r", rate_args.r, "density exponent is 1 + r");
    rate_cmd->add_option("--alpha", rate_args.alpha, "tail exponent; converted via r = alpha - 1");
    rate_cmd->add_option("--proposal", rate_args.proposal, "heavy:ETA|finite");

    try {
        app.parse(argc, argv);
        if (degrees_cmd->parsed()) run_degrees(degrees_args);
        if (tail_cmd->parsed()) run_tail(tail_args);
        if (mex_cmd->parsed()) run_mex(mex_args);
        if (theta_cmd->parsed()) run_theta(theta_args);
        if (fht_cmd->parsed()) run_fht(fht_args);
        if (walk_cmd->parsed()) run_walk(walk_args);
        if (rate_cmd->parsed()) run_rate(rate_args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return 0;  // --help / --version
        std::cerr << "error[usage] " << e.what() << "\n";
        return 1;
    } catch (const error& e) {
        std::cerr << "error[" << errc_name(e.category()) << "] " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error[internal] " << e.what() << "\n";
        return 1;
    }
    return 0;
}
