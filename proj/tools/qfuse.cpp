// qfuse — command-line workbench for fault-tolerant quantum sensor fusion.
//
// Subcommands:
//   bounds        sweep the unified MSE lower bound over (M, f, V, strategy)
//   simulate      Monte Carlo estimator race across sensor counts
//   crossover     empirical + closed-form classical/entangled phase boundary
//   eight-sensor  embedded eight-sensor benchmark report
//   intel         Intel Lab mote pipeline: clustering, agreement, SNR, curves
//
// Every run writes a manifest next to its outputs recording the exact
// invocation, the effective configuration, input checksums, and output
// paths. `qfuse --from-manifest FILE` replays the recorded invocation and
// reproduces the outputs byte for byte (only the manifest's duration field
// differs between a run and its replay).

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qfuse/bounds.hpp"
#include "qfuse/datasets.hpp"
#include "qfuse/errors.hpp"
#include "qfuse/fusion.hpp"
#include "qfuse/montecarlo.hpp"
#include "qfuse/sensor.hpp"

#include <CLI11.hpp>
#include <json.hpp>

namespace {

using nlohmann::ordered_json;

constexpr const char* kVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Formatting and small parsing helpers
// ---------------------------------------------------------------------------

/// CSV real formatting: 6 significant digits, C locale, decimal point.
std::string fmt_g6(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", value);
    return std::string(buf);
}

int parse_int_token(const std::string& token) {
    int value = 0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw qfuse::InvalidArgument("not an integer: '" + token + "'");
    }
    return value;
}

double parse_double_token(const std::string& token) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw qfuse::InvalidArgument("not a finite number: '" + token + "'");
    }
    return value;
}

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> tokens;
    std::stringstream stream(text);
    std::string token;
    while (std::getline(stream, token, ',')) tokens.push_back(token);
    return tokens;
}

/// Comma-separated integers; a token `a..b` expands by doubling
/// (so "2..64" means 2, 4, 8, 16, 32, 64).
std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> values;
    for (const std::string& token : split_commas(text)) {
        auto dots = token.find("..");
        if (dots != std::string::npos) {
            int start = parse_int_token(token.substr(0, dots));
            int stop = parse_int_token(token.substr(dots + 2));
            if (start < 1 || stop < start) {
                throw qfuse::InvalidArgument("bad doubling range '" + token +
                                             "': need 1 <= start <= stop");
            }
            for (long v = start; v <= stop; v *= 2) values.push_back(static_cast<int>(v));
        } else {
            values.push_back(parse_int_token(token));
        }
    }
    if (values.empty()) throw qfuse::InvalidArgument("empty integer list");
    return values;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> values;
    for (const std::string& token : split_commas(text)) {
        values.push_back(parse_double_token(token));
    }
    if (values.empty()) throw qfuse::InvalidArgument("empty number list");
    return values;
}

qfuse::Strategy parse_strategy(const std::string& name) {
    if (name == "bft") return qfuse::Strategy::BFT;
    if (name == "outlier") return qfuse::Strategy::Outlier;
    throw qfuse::InvalidArgument("unknown strategy '" + name + "' (want bft or outlier)");
}

std::string strategy_name(qfuse::Strategy strategy) {
    return strategy == qfuse::Strategy::BFT ? "bft" : "outlier";
}

qfuse::ByzantineKind parse_byz_kind(const std::string& name) {
    if (name == "offset") return qfuse::ByzantineKind::ConstantOffset;
    if (name == "uniform") return qfuse::ByzantineKind::UniformArbitrary;
    if (name == "wide") return qfuse::ByzantineKind::WideInterval;
    throw qfuse::InvalidArgument("unknown byzantine kind '" + name +
                                 "' (want offset, uniform, or wide)");
}

std::string fault_class_name(qfuse::FaultClass fault_class) {
    switch (fault_class) {
        case qfuse::FaultClass::NonFaulty: return "non-faulty";
        case qfuse::FaultClass::TamelyFaulty: return "tamely-faulty";
        default: return "widely-faulty";
    }
}

// ---------------------------------------------------------------------------
// Output files and the run manifest
// ---------------------------------------------------------------------------

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw qfuse::IoError("cannot open output file '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) throw qfuse::IoError("failed while writing '" + path + "'");
}

/// FNV-1a 64-bit checksum of a file's bytes, rendered as `fnv1a64:<hex>`.
std::string file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw qfuse::IoError("cannot read '" + path + "' for checksumming");
    std::uint64_t hash = 1469598103934665603ull;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 1099511628211ull;
        }
        if (!in) break;
    }
    char hex[32];
    std::snprintf(hex, sizeof(hex), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(hash));
    return std::string(hex);
}

/// Collects everything the manifest records while a command runs.
struct RunRecorder {
    std::string command;
    std::vector<std::string> argv;
    std::uint64_t seed = 0;
    ordered_json config = ordered_json::object();
    ordered_json inputs = ordered_json::object();
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void add_input(const std::string& path) { inputs[path] = file_checksum(path); }

    void write_manifest(const std::string& path) const {
        auto elapsed = std::chrono::steady_clock::now() - start;
        ordered_json manifest;
        manifest["tool"] = "qfuse";
        manifest["version"] = kVersion;
        manifest["command"] = command;
        manifest["argv"] = argv;
        manifest["seed"] = seed;
        manifest["config"] = config;
        manifest["inputs"] = inputs;
        manifest["outputs"] = outputs;
        manifest["duration_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
        write_text_file(path, manifest.dump(2) + "\n");
    }
};

// ---------------------------------------------------------------------------
// Option bundles
// ---------------------------------------------------------------------------

struct GlobalOpts {
    std::uint64_t seed = 42;
    int trials = 0;          // 0 = use the subcommand's default
    std::string out;         // empty = subcommand default
    std::string data_dir;    // empty = $QFUSE_DATA_DIR
    std::string format;      // empty = subcommand default
};

std::string pick_format(const GlobalOpts& opts, const std::string& fallback) {
    return opts.format.empty() ? fallback : opts.format;
}

int pick_trials(const GlobalOpts& opts, int fallback) {
    if (opts.trials < 0) throw qfuse::InvalidArgument("--trials must be positive");
    return opts.trials == 0 ? fallback : opts.trials;
}

struct BoundsOpts {
    int atoms = 1000;
    double sensitivity = 0.1;
    std::string sensor_list = "2,4,8,16,32,64";
    std::string fault_list = "0";
    std::string visibility_list = "1";
    std::string strategy = "bft";   // bft | outlier | both
};

struct SimulateOpts {
    int atoms = 1000;
    double sensitivity = 0.1;
    double t_true = 25.0;
    std::string sensor_list = "2,4,8,16,32,64";
    std::string methods = "naive,brooks-iyengar,entangled";
    double fault_frac = 0.0;
    double visibility = 1.0;
    double tau_prep = 0.0;
    double alpha = 0.05;
    std::string strategy = "bft";
    std::string byz_kind = "offset";
    double byz_offset = 5.0;
    double byz_spread = 1.0;
};

struct CrossoverOpts {
    int atoms = 1000;
    double sensitivity = 0.1;
    int sensors = 10;
    std::string fault_fracs = "0,0.1,0.2";
    std::string tau_preps = "0,0.15,0.3";
    std::string strategy = "bft";
};

struct EightSensorOpts {
    int atoms = 1000;
    double sensitivity = 0.1;
};

struct IntelOpts {
    int atoms = 1000;
    double sensitivity = 0.1;
    int k = 6;
    int epochs = 80;
    double z_thresh = 1.0;
    double wall_margin = 2.0;
    double tolerance = 0.5;
    bool exclude_windows = false;
    std::string missing_fracs = "0,0.1,0.2,0.3";
    std::string visibilities = "1,0.7,0.5,0.3";
    int curve_reps = 32;
};

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

int cmd_bounds(const GlobalOpts& global, const BoundsOpts& opts, RunRecorder& rec) {
    std::vector<int> sensor_counts = parse_int_list(opts.sensor_list);
    std::vector<int> faults = parse_int_list(opts.fault_list);
    std::vector<double> visibilities = parse_double_list(opts.visibility_list);
    std::vector<qfuse::Strategy> strategies;
    if (opts.strategy == "both") {
        strategies = {qfuse::Strategy::BFT, qfuse::Strategy::Outlier};
    } else {
        strategies = {parse_strategy(opts.strategy)};
    }

    struct Row {
        int sensors, faults;
        double visibility;
        qfuse::Strategy strategy;
        qfuse::BoundValue bound;
        double gain_db, advantage_db;
    };
    std::vector<Row> rows;
    long infeasible = 0;
    for (qfuse::Strategy strategy : strategies) {
        for (int sensors : sensor_counts) {
            for (int fault_count : faults) {
                for (double visibility : visibilities) {
                    qfuse::BoundQuery query{opts.atoms, opts.sensitivity, sensors,
                                            fault_count, visibility, strategy};
                    try {
                        query.validate();
                    } catch (const qfuse::Error&) {
                        ++infeasible;   // e.g. f over the BFT budget for this M
                        continue;
                    }
                    qfuse::BoundValue bound = qfuse::unified_bound(query);
                    double advantage = sensors - 2 * fault_count > 0
                                           ? qfuse::outlier_advantage_db(sensors, fault_count)
                                           : std::numeric_limits<double>::quiet_NaN();
                    rows.push_back({sensors, fault_count, visibility, strategy, bound,
                                    qfuse::metrological_gain_db(sensors), advantage});
                }
            }
        }
    }
    if (rows.empty()) {
        throw qfuse::InvalidArgument(
            "no feasible (M, f, strategy) combination in the requested sweep");
    }

    std::string out_path = global.out.empty() ? "bounds.csv" : global.out;
    std::string format = pick_format(global, "csv");
    if (format == "csv") {
        std::string csv = "M,f,V,strategy,m_eff,mse_lower,rmse_lower,gain_db,advantage_db\n";
        for (const Row& row : rows) {
            csv += std::to_string(row.sensors) + ',' + std::to_string(row.faults) + ',' +
                   fmt_g6(row.visibility) + ',' + strategy_name(row.strategy) + ',' +
                   std::to_string(row.bound.m_eff) + ',' + fmt_g6(row.bound.mse_lower) +
                   ',' + fmt_g6(row.bound.rmse_lower) + ',' + fmt_g6(row.gain_db) + ',' +
                   fmt_g6(row.advantage_db) + '\n';
        }
        write_text_file(out_path, csv);
    } else {
        ordered_json doc = ordered_json::array();
        for (const Row& row : rows) {
            ordered_json item;
            item["M"] = row.sensors;
            item["f"] = row.faults;
            item["V"] = row.visibility;
            item["strategy"] = strategy_name(row.strategy);
            item["m_eff"] = row.bound.m_eff;
            item["mse_lower"] = row.bound.mse_lower;
            item["rmse_lower"] = row.bound.rmse_lower;
            item["gain_db"] = row.gain_db;
            if (std::isfinite(row.advantage_db)) {
                item["advantage_db"] = row.advantage_db;
            } else {
                item["advantage_db"] = nullptr;
            }
            doc.push_back(std::move(item));
        }
        write_text_file(out_path, doc.dump(2) + "\n");
    }

    rec.config = {{"atoms", opts.atoms},
                  {"sensitivity", opts.sensitivity},
                  {"M", sensor_counts},
                  {"f", faults},
                  {"V", visibilities},
                  {"strategy", opts.strategy},
                  {"format", format},
                  {"infeasible_skipped", infeasible}};
    rec.outputs.push_back(out_path);
    rec.write_manifest(out_path + ".manifest.json");
    std::cerr << "bounds: " << rows.size() << " rows -> " << out_path;
    if (infeasible > 0) std::cerr << " (" << infeasible << " infeasible combinations skipped)";
    std::cerr << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

qfuse::ExperimentConfig build_experiment_config(const GlobalOpts& global,
                                                const SimulateOpts& opts) {
    qfuse::ExperimentConfig config;
    config.atoms = opts.atoms;
    config.sensitivity = opts.sensitivity;
    config.t_true = opts.t_true;
    config.sensor_counts = parse_int_list(opts.sensor_list);
    config.fault_fraction = opts.fault_frac;
    config.visibility = opts.visibility;
    config.tau_prep = opts.tau_prep;
    config.trials = pick_trials(global, 10000);
    config.seed = global.seed;
    config.methods.clear();
    for (const std::string& token : split_commas(opts.methods)) {
        config.methods.push_back(qfuse::method_from_name(token));
    }
    config.byzantine.kind = parse_byz_kind(opts.byz_kind);
    config.byzantine.offset = opts.byz_offset;
    config.byzantine.spread = opts.byz_spread;
    config.alpha = opts.alpha;
    config.strategy = parse_strategy(opts.strategy);
    config.validate();
    return config;
}

int cmd_simulate(const GlobalOpts& global, const SimulateOpts& opts, RunRecorder& rec) {
    qfuse::ExperimentConfig config = build_experiment_config(global, opts);
    std::vector<qfuse::TrialStats> rows = qfuse::run_experiment(config);

    // dB gain over naive averaging at the same sensor count, when available.
    std::map<int, double> naive_rmse;
    for (const qfuse::TrialStats& row : rows) {
        if (row.method == qfuse::Method::Naive) naive_rmse[row.sensors] = row.rmse;
    }
    auto gain_of = [&](const qfuse::TrialStats& row) {
        auto it = naive_rmse.find(row.sensors);
        if (it == naive_rmse.end() || it->second <= 0.0 || row.rmse <= 0.0) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        return 20.0 * std::log10(it->second / row.rmse);
    };

    std::string out_path = global.out.empty() ? "simulate.csv" : global.out;
    std::string format = pick_format(global, "csv");
    if (format == "csv") {
        std::string csv = "method,sensors,trials,rmse,rmse_stderr,mean_bias,gain_db\n";
        for (const qfuse::TrialStats& row : rows) {
            csv += qfuse::method_name(row.method) + ',' + std::to_string(row.sensors) +
                   ',' + std::to_string(config.trials) + ',' + fmt_g6(row.rmse) + ',' +
                   fmt_g6(row.rmse_stderr) + ',' + fmt_g6(row.mean_bias) + ',' +
                   fmt_g6(gain_of(row)) + '\n';
        }
        write_text_file(out_path, csv);
    } else {
        ordered_json doc;
        doc["rows"] = ordered_json::array();
        for (const qfuse::TrialStats& row : rows) {
            ordered_json item;
            item["method"] = qfuse::method_name(row.method);
            item["sensors"] = row.sensors;
            item["trials"] = config.trials;
            item["rmse"] = row.rmse;
            item["rmse_stderr"] = row.rmse_stderr;
            item["mean_bias"] = row.mean_bias;
            double gain = gain_of(row);
            if (std::isfinite(gain)) {
                item["gain_db"] = gain;
            } else {
                item["gain_db"] = nullptr;
            }
            doc["rows"].push_back(std::move(item));
        }
        // Fitted log-log RMSE slopes, one per method, when the sweep is wide
        // enough for a least-squares fit.
        if (config.sensor_counts.size() >= 3) {
            ordered_json slopes = ordered_json::object();
            for (qfuse::Method method : config.methods) {
                std::vector<std::pair<double, double>> points;
                for (const qfuse::TrialStats& row : rows) {
                    if (row.method == method && row.rmse > 0.0) {
                        points.emplace_back(static_cast<double>(row.sensors), row.rmse);
                    }
                }
                if (points.size() >= 3) {
                    slopes[qfuse::method_name(method)] = qfuse::fit_loglog_slope(points);
                }
            }
            doc["slopes"] = std::move(slopes);
        }
        write_text_file(out_path, doc.dump(2) + "\n");
    }

    rec.config = {{"atoms", config.atoms},
                  {"sensitivity", config.sensitivity},
                  {"t_true", config.t_true},
                  {"M", config.sensor_counts},
                  {"methods", opts.methods},
                  {"fault_frac", config.fault_fraction},
                  {"visibility", config.visibility},
                  {"tau_prep", config.tau_prep},
                  {"trials", config.trials},
                  {"alpha", config.alpha},
                  {"strategy", strategy_name(config.strategy)},
                  {"byz_kind", opts.byz_kind},
                  {"byz_offset", config.byzantine.offset},
                  {"byz_spread", config.byzantine.spread},
                  {"format", format}};
    rec.outputs.push_back(out_path);
    rec.write_manifest(out_path + ".manifest.json");
    std::cerr << "simulate: " << rows.size() << " rows -> " << out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// crossover
// ---------------------------------------------------------------------------

int cmd_crossover(const GlobalOpts& global, const CrossoverOpts& opts, RunRecorder& rec) {
    std::vector<double> fracs = parse_double_list(opts.fault_fracs);
    std::vector<double> taus = parse_double_list(opts.tau_preps);
    qfuse::Strategy strategy = parse_strategy(opts.strategy);
    int trials = pick_trials(global, 2000);

    std::string csv = "fault_frac,tau_prep,v_star_empirical,v_star_literal,no_crossing\n";
    ordered_json items = ordered_json::array();
    for (double frac : fracs) {
        for (double tau : taus) {
            qfuse::ExperimentConfig config;
            config.atoms = opts.atoms;
            config.sensitivity = opts.sensitivity;
            config.sensor_counts = {opts.sensors};
            config.fault_fraction = frac;
            config.tau_prep = tau;
            config.trials = trials;
            config.seed = global.seed;
            config.strategy = strategy;
            config.validate();

            qfuse::CrossoverResult result = qfuse::empirical_crossover(config, strategy);
            int fault_count = static_cast<int>(frac * opts.sensors);
            double literal = qfuse::critical_visibility_literal(
                qfuse::m_eff(opts.sensors, fault_count, strategy), tau);

            csv += fmt_g6(frac) + ',' + fmt_g6(tau) + ',' + fmt_g6(result.v_star) + ',' +
                   fmt_g6(literal) + ',' + (result.no_crossing ? "1" : "0") + '\n';
            ordered_json item;
            item["fault_frac"] = frac;
            item["tau_prep"] = tau;
            item["v_star_empirical"] = result.v_star;
            item["v_star_literal"] = literal;
            item["no_crossing"] = result.no_crossing;
            items.push_back(std::move(item));
        }
    }

    std::string out_path = global.out.empty() ? "crossover.csv" : global.out;
    std::string format = pick_format(global, "csv");
    if (format == "csv") {
        write_text_file(out_path, csv);
    } else {
        write_text_file(out_path, items.dump(2) + "\n");
    }

    rec.config = {{"atoms", opts.atoms},
                  {"sensitivity", opts.sensitivity},
                  {"M", opts.sensors},
                  {"fault_fracs", fracs},
                  {"tau_preps", taus},
                  {"trials", trials},
                  {"strategy", opts.strategy},
                  {"format", format}};
    rec.outputs.push_back(out_path);
    rec.write_manifest(out_path + ".manifest.json");
    std::cerr << "crossover: " << fracs.size() * taus.size() << " grid points -> "
              << out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// eight-sensor
// ---------------------------------------------------------------------------

int cmd_eight_sensor(const GlobalOpts& global, const EightSensorOpts& opts,
                     RunRecorder& rec) {
    std::string format = pick_format(global, "json");
    if (format != "json") {
        throw qfuse::InvalidArgument("eight-sensor emits a JSON report; use --format json");
    }

    std::vector<qfuse::CrispSensor> sensors = qfuse::eight_sensor_dataset();
    std::vector<qfuse::Interval> intervals = qfuse::crisp_intervals(sensors);
    std::vector<double> scores = qfuse::similarity_scores(intervals);
    std::vector<qfuse::OverlapRegion> regions = qfuse::max_overlap_regions(intervals);
    qfuse::FusionResult fused = qfuse::brooks_iyengar_fuse(intervals);

    std::vector<double> centers;
    for (const qfuse::CrispSensor& sensor : sensors) centers.push_back(sensor.center);
    double naive = qfuse::simple_average(centers);

    ordered_json doc;
    doc["sensors"] = ordered_json::array();
    for (std::size_t i = 0; i < sensors.size(); ++i) {
        ordered_json item;
        item["id"] = sensors[i].id;
        item["center"] = sensors[i].center;
        item["half_width"] = sensors[i].half_width;
        item["lower"] = intervals[i].lower;
        item["upper"] = intervals[i].upper;
        item["score"] = scores[i];
        item["fault_class"] = fault_class_name(qfuse::classify_score(scores[i]));
        item["excluded"] = fused.excluded.count(static_cast<int>(i)) > 0;
        doc["sensors"].push_back(std::move(item));
    }
    doc["max_overlap"]["count"] = regions.empty() ? 0 : regions.front().count;
    doc["max_overlap"]["regions"] = ordered_json::array();
    for (const qfuse::OverlapRegion& region : regions) {
        doc["max_overlap"]["regions"].push_back(
            ordered_json{{"lower", region.interval.lower}, {"upper", region.interval.upper}});
    }
    doc["bi_estimate"] = fused.estimate;
    doc["naive_average"] = naive;

    int count = static_cast<int>(sensors.size());
    doc["bounds"]["atoms"] = opts.atoms;
    doc["bounds"]["sensitivity"] = opts.sensitivity;
    doc["bounds"]["sensors"] = count;
    doc["bounds"]["sql_rmse"] =
        std::sqrt(qfuse::sql_variance(opts.atoms, opts.sensitivity, count));
    doc["bounds"]["hl_rmse"] =
        std::sqrt(qfuse::hl_variance(opts.atoms, opts.sensitivity, count));
    doc["bounds"]["gain_db"] = qfuse::metrological_gain_db(count);

    // The dataset pairs a coarse tier (S1..S4) with a fine tier (S5..S8);
    // each fine sensor halves its partner's range, costing 4x the atoms.
    doc["range_to_atom"] = ordered_json::array();
    for (int i = 0; i < 4; ++i) {
        double ratio = sensors[i].half_width / sensors[i + 4].half_width;
        ordered_json item;
        item["pair"] = sensors[i].id + "/" + sensors[i + 4].id;
        item["range_ratio"] = ratio;
        item["atom_factor"] = qfuse::range_to_atom_factor(ratio);
        doc["range_to_atom"].push_back(std::move(item));
    }

    std::string out_path = global.out.empty() ? "eight_sensor.json" : global.out;
    write_text_file(out_path, doc.dump(2) + "\n");

    rec.config = {{"atoms", opts.atoms}, {"sensitivity", opts.sensitivity}};
    rec.outputs.push_back(out_path);
    rec.write_manifest(out_path + ".manifest.json");
    std::cerr << "eight-sensor: report -> " << out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// intel
// ---------------------------------------------------------------------------

int cmd_intel(const GlobalOpts& global, const IntelOpts& opts, RunRecorder& rec) {
    std::string data_dir = global.data_dir;
    if (data_dir.empty()) {
        if (const char* env = std::getenv("QFUSE_DATA_DIR")) data_dir = env;
    }
    if (data_dir.empty()) {
        throw qfuse::InvalidArgument(
            "intel needs a data directory: pass --data-dir or set QFUSE_DATA_DIR");
    }
    std::string data_path = data_dir + "/data.txt";
    std::string locs_path = data_dir + "/mote_locs.txt";
    if (!std::filesystem::exists(data_path) || !std::filesystem::exists(locs_path)) {
        throw qfuse::IoError(
            "missing Intel Lab input files: expected '" + data_path + "' and '" +
            locs_path + "'; download them with tools/fetch_intel.sh (the pipeline "
            "never synthesizes data)");
    }
    rec.add_input(data_path);
    rec.add_input(locs_path);

    qfuse::ParsedMotes motes = qfuse::load_mote_data(data_path);
    qfuse::ParsedLocations locs = qfuse::load_mote_locations(locs_path);
    if (motes.records.empty()) throw qfuse::IoError("no usable rows in '" + data_path + "'");
    if (locs.locations.empty()) throw qfuse::IoError("no usable rows in '" + locs_path + "'");

    qfuse::ClusterAssignment assignment =
        qfuse::kmeans_clusters(locs.locations, opts.k, global.seed);
    std::set<int> windows = qfuse::detect_window_motes(motes.records, locs.locations,
                                                       opts.z_thresh, opts.wall_margin);
    std::vector<long> epochs =
        qfuse::best_covered_epochs(motes.records, assignment, opts.epochs);
    if (epochs.empty()) throw qfuse::IoError("no epochs with clean temperatures found");

    qfuse::AgreementReport all_motes = qfuse::cluster_agreement(
        motes.records, assignment, epochs, {}, opts.tolerance);
    qfuse::AgreementReport excluded = qfuse::cluster_agreement(
        motes.records, assignment, epochs, windows, opts.tolerance);
    const qfuse::AgreementReport& headline = opts.exclude_windows ? excluded : all_motes;

    std::vector<qfuse::ClusterSnr> snr =
        qfuse::cluster_snr(motes.records, assignment, opts.atoms, opts.sensitivity);

    std::vector<double> missing_fracs = parse_double_list(opts.missing_fracs);
    std::vector<double> visibilities = parse_double_list(opts.visibilities);
    qfuse::DegradationCurves curves = qfuse::missing_vs_decoherence_curves(
        motes.records, assignment, epochs, missing_fracs, visibilities, opts.atoms,
        global.seed, opts.tolerance, pick_trials(global, 2000), opts.curve_reps);

    // Per-cluster SNR table.
    std::string prefix = global.out.empty() ? "intel" : global.out;
    std::string clusters_path = prefix + "_clusters.csv";
    std::string csv = "cluster,sensors,classical_db,sql_db,hl_db,gain_db\n";
    for (const qfuse::ClusterSnr& row : snr) {
        csv += std::to_string(row.cluster) + ',' + std::to_string(row.sensors) + ',' +
               fmt_g6(row.classical_db) + ',' + fmt_g6(row.sql_db) + ',' +
               fmt_g6(row.hl_db) + ',' + fmt_g6(row.gain_db) + '\n';
    }
    write_text_file(clusters_path, csv);

    // Agreement and degradation summary.
    auto members = qfuse::cluster_members(assignment);
    ordered_json doc;
    doc["parse"] = {{"data_rows", static_cast<long>(motes.records.size())},
                    {"data_skipped", motes.skipped},
                    {"location_rows", static_cast<long>(locs.locations.size())},
                    {"location_skipped", locs.skipped}};
    doc["clustering"]["k"] = opts.k;
    doc["clustering"]["cluster_sizes"] = ordered_json::array();
    for (const auto& [cluster, ids] : members) {
        doc["clustering"]["cluster_sizes"].push_back(static_cast<long>(ids.size()));
    }
    doc["window_motes"] = ordered_json::array();
    for (int mote : windows) doc["window_motes"].push_back(mote);
    doc["epochs"] = {{"requested", opts.epochs},
                     {"selected", static_cast<long>(epochs.size())},
                     {"first", epochs.front()},
                     {"last", epochs.back()}};
    doc["agreement"] = {{"all_motes_pct", all_motes.agreement_pct},
                        {"windows_excluded_pct", excluded.agreement_pct},
                        {"improvement_pp", excluded.agreement_pct - all_motes.agreement_pct},
                        {"absent_fraction", all_motes.absent_fraction},
                        {"pairs", all_motes.pairs},
                        {"headline", opts.exclude_windows ? "windows_excluded" : "all_motes"},
                        {"headline_pct", headline.agreement_pct}};
    doc["snr"] = ordered_json::array();
    for (const qfuse::ClusterSnr& row : snr) {
        doc["snr"].push_back({{"cluster", row.cluster},
                              {"sensors", row.sensors},
                              {"classical_db", row.classical_db},
                              {"sql_db", row.sql_db},
                              {"hl_db", row.hl_db},
                              {"gain_db", row.gain_db}});
    }
    doc["curves"]["classical"] = ordered_json::array();
    for (const auto& [frac, pct] : curves.classical) {
        doc["curves"]["classical"].push_back(
            {{"missing_frac", frac}, {"agreement_pct", pct}});
    }
    doc["curves"]["quantum"] = ordered_json::array();
    for (const auto& [visibility, pct] : curves.quantum) {
        doc["curves"]["quantum"].push_back(
            {{"visibility", visibility}, {"within_pct", pct}});
    }
    std::string agreement_path = prefix + "_agreement.json";
    write_text_file(agreement_path, doc.dump(2) + "\n");

    rec.config = {{"data_dir", data_dir},
                  {"k", opts.k},
                  {"epochs", opts.epochs},
                  {"z_thresh", opts.z_thresh},
                  {"wall_margin", opts.wall_margin},
                  {"tolerance", opts.tolerance},
                  {"exclude_windows", opts.exclude_windows},
                  {"missing_fracs", missing_fracs},
                  {"visibilities", visibilities},
                  {"atoms", opts.atoms},
                  {"sensitivity", opts.sensitivity},
                  {"curve_trials", pick_trials(global, 2000)},
                  {"curve_reps", opts.curve_reps}};
    rec.outputs.push_back(clusters_path);
    rec.outputs.push_back(agreement_path);
    rec.write_manifest(prefix + "_manifest.json");
    std::cerr << "intel: agreement " << fmt_g6(headline.agreement_pct) << "% over "
              << headline.pairs << " cluster-epoch pairs -> " << clusters_path << ", "
              << agreement_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// Harness
// ---------------------------------------------------------------------------

/// Reads the argv array stored in a manifest for byte-identical replay.
std::vector<std::string> manifest_argv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw qfuse::IoError("cannot read manifest '" + path + "'");
    ordered_json manifest;
    try {
        in >> manifest;
    } catch (const std::exception& e) {
        throw qfuse::InvalidArgument("manifest '" + path + "' is not valid JSON: " +
                                     e.what());
    }
    if (!manifest.contains("argv") || !manifest["argv"].is_array()) {
        throw qfuse::InvalidArgument("manifest '" + path + "' has no argv record");
    }
    std::vector<std::string> argv;
    for (const auto& item : manifest["argv"]) {
        if (!item.is_string()) {
            throw qfuse::InvalidArgument("manifest '" + path + "' argv must be strings");
        }
        argv.push_back(item.get<std::string>());
    }
    if (argv.empty()) {
        throw qfuse::InvalidArgument("manifest '" + path + "' records an empty command");
    }
    return argv;
}

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"fault-tolerant quantum sensor fusion workbench"};
    app.set_version_flag("--version", std::string("qfuse ") + kVersion);
    app.set_config("--config", "", "read options from a TOML/INI file (flags win)");
    app.fallthrough();
    app.require_subcommand(1);
    app.footer("Replay a recorded run with: qfuse --from-manifest FILE");

    GlobalOpts global;
    app.add_option("--seed", global.seed, "base seed for every random stream")
        ->capture_default_str();
    app.add_option("--trials", global.trials,
                   "Monte Carlo trials (0 = subcommand default)");
    app.add_option("--out", global.out, "output path (intel: output prefix)");
    app.add_option("--data-dir", global.data_dir,
                   "dataset directory (falls back to $QFUSE_DATA_DIR)");
    app.add_option("--format", global.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));

    BoundsOpts bounds;
    CLI::App* bounds_cmd =
        app.add_subcommand("bounds", "sweep the unified MSE lower bound");
    bounds_cmd->add_option("--N", bounds.atoms, "atoms per sensor")
        ->check(CLI::PositiveNumber)->capture_default_str();
    bounds_cmd->add_option("--eta", bounds.sensitivity, "phase sensitivity")
        ->capture_default_str();
    bounds_cmd->add_option("--M", bounds.sensor_list,
                           "sensor counts (comma list; a..b doubles)")
        ->capture_default_str();
    bounds_cmd->add_option("--f", bounds.fault_list, "fault counts (comma list)")
        ->capture_default_str();
    bounds_cmd->add_option("--V", bounds.visibility_list, "visibilities (comma list)")
        ->capture_default_str();
    bounds_cmd->add_option("--strategy", bounds.strategy, "fault strategy")
        ->check(CLI::IsMember({"bft", "outlier", "both"}))->capture_default_str();

    SimulateOpts simulate;
    CLI::App* simulate_cmd =
        app.add_subcommand("simulate", "Monte Carlo estimator race");
    simulate_cmd->add_option("--N", simulate.atoms, "atoms per sensor")
        ->check(CLI::PositiveNumber)->capture_default_str();
    simulate_cmd->add_option("--eta", simulate.sensitivity, "phase sensitivity")
        ->capture_default_str();
    simulate_cmd->add_option("--t-true", simulate.t_true, "true parameter value")
        ->capture_default_str();
    simulate_cmd->add_option("--M", simulate.sensor_list,
                             "sensor counts (comma list; a..b doubles)")
        ->capture_default_str();
    simulate_cmd->add_option("--methods", simulate.methods,
                             "estimators: naive, brooks-iyengar, outlier, bayesian, "
                             "kalman, entangled")
        ->capture_default_str();
    simulate_cmd->add_option("--fault-frac", simulate.fault_frac,
                             "Byzantine fraction in [0, 1)")
        ->capture_default_str();
    simulate_cmd->add_option("--visibility", simulate.visibility,
                             "honest-sensor visibility in (0, 1]")
        ->capture_default_str();
    simulate_cmd->add_option("--tau-prep", simulate.tau_prep,
                             "entanglement preparation overhead")
        ->capture_default_str();
    simulate_cmd->add_option("--alpha", simulate.alpha, "interval confidence level")
        ->capture_default_str();
    simulate_cmd->add_option("--strategy", simulate.strategy, "fault budget model")
        ->check(CLI::IsMember({"bft", "outlier"}))->capture_default_str();
    simulate_cmd->add_option("--byz-kind", simulate.byz_kind, "Byzantine behavior")
        ->check(CLI::IsMember({"offset", "uniform", "wide"}))->capture_default_str();
    simulate_cmd->add_option("--byz-offset", simulate.byz_offset,
                             "constant-offset magnitude")
        ->capture_default_str();
    simulate_cmd->add_option("--byz-spread", simulate.byz_spread,
                             "uniform/wide spread parameter")
        ->capture_default_str();

    CrossoverOpts crossover;
    CLI::App* crossover_cmd = app.add_subcommand(
        "crossover", "classical/entangled phase boundary in visibility");
    crossover_cmd->add_option("--N", crossover.atoms, "atoms per sensor")
        ->check(CLI::PositiveNumber)->capture_default_str();
    crossover_cmd->add_option("--eta", crossover.sensitivity, "phase sensitivity")
        ->capture_default_str();
    crossover_cmd->add_option("--M", crossover.sensors, "sensor count")
        ->check(CLI::PositiveNumber)->capture_default_str();
    crossover_cmd->add_option("--fault-fracs", crossover.fault_fracs,
                              "fault fractions (comma list)")
        ->capture_default_str();
    crossover_cmd->add_option("--tau-preps", crossover.tau_preps,
                              "preparation overheads (comma list)")
        ->capture_default_str();
    crossover_cmd->add_option("--strategy", crossover.strategy, "fault budget model")
        ->check(CLI::IsMember({"bft", "outlier"}))->capture_default_str();

    EightSensorOpts eight;
    CLI::App* eight_cmd =
        app.add_subcommand("eight-sensor", "embedded eight-sensor benchmark report");
    eight_cmd->add_option("--N", eight.atoms, "atoms per sensor for the bound rows")
        ->check(CLI::PositiveNumber)->capture_default_str();
    eight_cmd->add_option("--eta", eight.sensitivity, "phase sensitivity")
        ->capture_default_str();

    IntelOpts intel;
    CLI::App* intel_cmd =
        app.add_subcommand("intel", "Intel Lab mote pipeline");
    intel_cmd->add_option("--N", intel.atoms, "atoms per sensor for quantum rows")
        ->check(CLI::PositiveNumber)->capture_default_str();
    intel_cmd->add_option("--eta", intel.sensitivity, "phase sensitivity")
        ->capture_default_str();
    intel_cmd->add_option("--k", intel.k, "number of spatial clusters")
        ->check(CLI::PositiveNumber)->capture_default_str();
    intel_cmd->add_option("--epochs", intel.epochs, "best-covered epochs to keep")
        ->check(CLI::PositiveNumber)->capture_default_str();
    intel_cmd->add_option("--z-thresh", intel.z_thresh,
                          "window-mote temperature z-score threshold")
        ->capture_default_str();
    intel_cmd->add_option("--wall-margin", intel.wall_margin,
                          "window-mote wall distance in meters")
        ->capture_default_str();
    intel_cmd->add_option("--tolerance", intel.tolerance,
                          "reading interval half-width in degrees C")
        ->capture_default_str();
    intel_cmd->add_flag("--exclude-windows", intel.exclude_windows,
                        "report headline agreement without detected window motes");
    intel_cmd->add_option("--missing-fracs", intel.missing_fracs,
                          "missing-data fractions (comma list)")
        ->capture_default_str();
    intel_cmd->add_option("--visibilities", intel.visibilities,
                          "decoherence curve visibilities (comma list)")
        ->capture_default_str();
    intel_cmd->add_option("--curve-reps", intel.curve_reps,
                          "drop repetitions per missing fraction")
        ->check(CLI::PositiveNumber)->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    RunRecorder rec;
    rec.argv = args;
    rec.seed = global.seed;
    if (bounds_cmd->parsed()) {
        rec.command = "bounds";
        return cmd_bounds(global, bounds, rec);
    }
    if (simulate_cmd->parsed()) {
        rec.command = "simulate";
        return cmd_simulate(global, simulate, rec);
    }
    if (crossover_cmd->parsed()) {
        rec.command = "crossover";
        return cmd_crossover(global, crossover, rec);
    }
    if (eight_cmd->parsed()) {
        rec.command = "eight-sensor";
        return cmd_eight_sensor(global, eight, rec);
    }
    rec.command = "intel";
    return cmd_intel(global, intel, rec);
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        // Manifest replay substitutes the recorded invocation wholesale; it
        // cannot be combined with other flags.
        auto it = std::find(args.begin(), args.end(), "--from-manifest");
        if (it != args.end()) {
            if (args.size() != 2 || it != args.begin()) {
                throw qfuse::InvalidArgument(
                    "--from-manifest FILE must be the only arguments");
            }
            args = manifest_argv(args[1]);
            if (std::find(args.begin(), args.end(), "--from-manifest") != args.end()) {
                throw qfuse::InvalidArgument("manifest replay chains are not allowed");
            }
        }
        return run_cli(args);
    } catch (const qfuse::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const qfuse::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const qfuse::FaultBudgetExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}
