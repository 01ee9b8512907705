#include "qfuse/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "qfuse/bounds.hpp"
#include "qfuse/errors.hpp"
#include "qfuse/fusion.hpp"
#include "qfuse/rng.hpp"
#include "qfuse/stats.hpp"

namespace qfuse {

namespace {

// Stream lane tags for the dataset module's seeded computations.
enum DatasetLane : std::uint64_t {
    kKmeansLane = 11,
    kDropLane = 12,
    kQuantumLane = 13,
};

std::uint64_t lane_key(DatasetLane tag, std::uint64_t a, std::uint64_t b = 0) {
    return (static_cast<std::uint64_t>(tag) << 56) ^ (a << 20) ^ b;
}

bool parse_long(const std::string& token, long& out) {
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

bool parse_double(const std::string& token, double& out) {
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::vector<std::string> split_whitespace(const std::string& line) {
    std::istringstream stream(line);
    std::vector<std::string> tokens;
    std::string token;
    while (stream >> token) {
        tokens.push_back(token);
    }
    return tokens;
}

double dist_sq(double ax, double ay, double bx, double by) {
    const double dx = ax - bx;
    const double dy = ay - by;
    return dx * dx + dy * dy;
}

// Key for per-(cluster, epoch) grouping.
using PairKey = std::pair<int, long>;

// (cluster, epoch) -> (mote, temperature), motes ascending, first clean
// reading per mote wins.
std::map<PairKey, std::vector<std::pair<int, double>>> collect_pair_temps(
    const std::vector<MoteRecord>& records, const ClusterAssignment& assignment,
    const std::vector<long>& epochs, const std::set<int>& exclude) {
    const std::set<long> wanted(epochs.begin(), epochs.end());
    std::map<PairKey, std::map<int, double>> grouped;
    for (const MoteRecord& record : records) {
        if (wanted.count(record.epoch) == 0 || exclude.count(record.mote_id) != 0) {
            continue;
        }
        const auto cluster_it = assignment.cluster_of.find(record.mote_id);
        if (cluster_it == assignment.cluster_of.end()) {
            continue;
        }
        const std::optional<double> temp = clean_temperature(record);
        if (!temp) {
            continue;
        }
        grouped[{cluster_it->second, record.epoch}].emplace(record.mote_id, *temp);
    }
    std::map<PairKey, std::vector<std::pair<int, double>>> result;
    for (const auto& [key, by_mote] : grouped) {
        result[key].assign(by_mote.begin(), by_mote.end());
    }
    return result;
}

int max_overlap_count(const std::vector<Interval>& intervals) {
    return max_overlap_regions(intervals).front().count;
}

} // namespace

std::vector<CrispSensor> eight_sensor_dataset() {
    return {
        {"S1", 4.7, 2.0}, {"S2", 1.6, 1.6},  {"S3", 3.0, 1.5}, {"S4", 1.8, 1.0},
        {"S5", 4.7, 1.0}, {"S6", 1.6, 0.8},  {"S7", 3.0, 0.75}, {"S8", 1.8, 0.5},
    };
}

Interval crisp_interval(const CrispSensor& sensor) {
    return Interval(sensor.center - sensor.half_width, sensor.center + sensor.half_width);
}

std::vector<Interval> crisp_intervals(const std::vector<CrispSensor>& sensors) {
    std::vector<Interval> intervals;
    intervals.reserve(sensors.size());
    for (const CrispSensor& sensor : sensors) {
        intervals.push_back(crisp_interval(sensor));
    }
    return intervals;
}

double range_to_atom_factor(double ratio) {
    if (!std::isfinite(ratio) || ratio <= 0.0) {
        throw InvalidArgument("range_to_atom_factor requires a positive ratio");
    }
    return ratio * ratio;
}

ParsedMotes parse_mote_data(std::istream& in) {
    ParsedMotes result;
    std::string line;
    while (std::getline(in, line)) {
        const std::vector<std::string> tokens = split_whitespace(line);
        if (tokens.empty()) {
            ++result.skipped;
            continue;
        }
        if (tokens.size() < 4 || tokens.size() > 8) {
            ++result.skipped;
            continue;
        }
        MoteRecord record;
        record.date = tokens[0];
        record.time = tokens[1];
        long mote = 0;
        if (!parse_long(tokens[2], record.epoch) || record.epoch < 0 ||
            !parse_long(tokens[3], mote) || mote < 1) {
            ++result.skipped;
            continue;
        }
        record.mote_id = static_cast<int>(mote);

        bool bad = false;
        std::optional<double>* fields[4] = {&record.temperature, &record.humidity,
                                            &record.light, &record.voltage};
        for (std::size_t i = 4; i < tokens.size(); ++i) {
            double value = 0.0;
            if (!parse_double(tokens[i], value)) {
                bad = true;
                break;
            }
            *fields[i - 4] = value;
        }
        if (bad) {
            ++result.skipped;
            continue;
        }
        result.records.push_back(std::move(record));
    }
    return result;
}

ParsedMotes load_mote_data(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open mote data file: " + path);
    }
    return parse_mote_data(in);
}

ParsedLocations parse_mote_locations(std::istream& in) {
    ParsedLocations result;
    std::string line;
    while (std::getline(in, line)) {
        const std::vector<std::string> tokens = split_whitespace(line);
        if (tokens.empty()) {
            ++result.skipped;
            continue;
        }
        long mote = 0;
        double x = 0.0, y = 0.0;
        if (tokens.size() != 3 || !parse_long(tokens[0], mote) || mote < 1 ||
            !parse_double(tokens[1], x) || !parse_double(tokens[2], y)) {
            ++result.skipped;
            continue;
        }
        result.locations.push_back(MoteLocation{static_cast<int>(mote), x, y});
    }
    return result;
}

ParsedLocations load_mote_locations(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open mote location file: " + path);
    }
    return parse_mote_locations(in);
}

std::map<int, std::vector<int>> cluster_members(const ClusterAssignment& assignment) {
    std::map<int, std::vector<int>> members;
    for (const auto& [mote, cluster] : assignment.cluster_of) {
        members[cluster].push_back(mote);
    }
    return members; // map iteration keeps mote ids sorted
}

ClusterAssignment kmeans_clusters(const std::vector<MoteLocation>& locations, int k,
                                  std::uint64_t seed,
                                  std::vector<double>* objective_trace) {
    // Deduplicate by mote id (first occurrence wins) and fix the point
    // order by mote id so the result depends only on the seed.
    std::map<int, std::pair<double, double>> by_mote;
    for (const MoteLocation& loc : locations) {
        if (!std::isfinite(loc.x) || !std::isfinite(loc.y)) {
            throw InvalidArgument("mote locations must be finite");
        }
        by_mote.emplace(loc.mote_id, std::make_pair(loc.x, loc.y));
    }
    const std::size_t n = by_mote.size();
    if (k < 1) {
        throw InvalidArgument("kmeans_clusters requires k >= 1");
    }
    if (static_cast<std::size_t>(k) > n) {
        throw InvalidArgument("kmeans_clusters requires k <= number of motes");
    }
    std::vector<int> mote_ids;
    std::vector<std::pair<double, double>> pts;
    mote_ids.reserve(n);
    pts.reserve(n);
    for (const auto& [mote, xy] : by_mote) {
        mote_ids.push_back(mote);
        pts.push_back(xy);
    }

    SplitMix64 rng(stream_seed(seed, lane_key(kKmeansLane, static_cast<std::uint64_t>(k)), 0));

    // k-means++ seeding: each new centroid is drawn with probability
    // proportional to the squared distance from the ones already chosen.
    std::vector<std::pair<double, double>> centroids;
    centroids.push_back(pts[rng.below(n)]);
    std::vector<double> d2(n, 0.0);
    while (centroids.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = dist_sq(pts[i].first, pts[i].second, centroids[0].first,
                                  centroids[0].second);
            for (std::size_t c = 1; c < centroids.size(); ++c) {
                best = std::min(best, dist_sq(pts[i].first, pts[i].second,
                                              centroids[c].first, centroids[c].second));
            }
            d2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            centroids.push_back(pts[rng.below(n)]); // all remaining points coincide
            continue;
        }
        const double r = rng.uniform01() * total;
        double cum = 0.0;
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            cum += d2[i];
            if (r < cum) {
                pick = i;
                break;
            }
        }
        centroids.push_back(pts[pick]);
    }

    std::vector<int> assign(n, 0);
    if (objective_trace) {
        objective_trace->clear();
    }
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int best_c = 0;
            double best_d = dist_sq(pts[i].first, pts[i].second, centroids[0].first,
                                    centroids[0].second);
            for (int c = 1; c < k; ++c) {
                const double d = dist_sq(pts[i].first, pts[i].second,
                                         centroids[static_cast<std::size_t>(c)].first,
                                         centroids[static_cast<std::size_t>(c)].second);
                if (d < best_d) { // strict: ties keep the lowest index
                    best_d = d;
                    best_c = c;
                }
            }
            objective += best_d;
            if (assign[i] != best_c) {
                assign[i] = best_c;
                changed = true;
            }
        }
        if (objective_trace) {
            objective_trace->push_back(objective);
        }
        if (!changed && iter > 0) {
            break;
        }
        // Recompute centroids; an emptied cluster keeps its previous one.
        std::vector<double> sx(static_cast<std::size_t>(k), 0.0);
        std::vector<double> sy(static_cast<std::size_t>(k), 0.0);
        std::vector<int> cnt(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(assign[i]);
            sx[c] += pts[i].first;
            sy[c] += pts[i].second;
            ++cnt[c];
        }
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (cnt[c] > 0) {
                centroids[c] = {sx[c] / cnt[c], sy[c] / cnt[c]};
            }
        }
    }

    ClusterAssignment result;
    result.centroids = centroids;
    for (std::size_t i = 0; i < n; ++i) {
        result.cluster_of[mote_ids[i]] = assign[i];
    }
    return result;
}

std::optional<double> clean_temperature(const MoteRecord& record) {
    if (record.temperature && *record.temperature >= 0.0 && *record.temperature <= 50.0) {
        return record.temperature;
    }
    return std::nullopt;
}

std::set<int> detect_window_motes(const std::vector<MoteRecord>& records,
                                  const std::vector<MoteLocation>& locations,
                                  double z_thresh, double wall_margin) {
    if (records.empty()) {
        throw InvalidArgument("detect_window_motes requires records");
    }
    std::map<int, std::pair<double, long>> temp_sums; // mote -> (sum, count)
    std::map<int, std::pair<double, double>> position;
    for (const MoteLocation& loc : locations) {
        position.emplace(loc.mote_id, std::make_pair(loc.x, loc.y));
    }
    for (const MoteRecord& record : records) {
        const std::optional<double> temp = clean_temperature(record);
        if (!temp || position.count(record.mote_id) == 0) {
            continue;
        }
        auto& [sum, count] = temp_sums[record.mote_id];
        sum += *temp;
        ++count;
    }
    if (temp_sums.empty()) {
        return {};
    }

    std::vector<double> mote_means;
    mote_means.reserve(temp_sums.size());
    for (const auto& [mote, sum_count] : temp_sums) {
        mote_means.push_back(sum_count.first / static_cast<double>(sum_count.second));
    }
    const double global_mean = mean(mote_means);
    const double spread = sample_stddev(mote_means);

    double min_x = position.begin()->second.first, max_x = min_x;
    double min_y = position.begin()->second.second, max_y = min_y;
    for (const auto& [mote, xy] : position) {
        min_x = std::min(min_x, xy.first);
        max_x = std::max(max_x, xy.first);
        min_y = std::min(min_y, xy.second);
        max_y = std::max(max_y, xy.second);
    }

    std::set<int> flagged;
    std::size_t idx = 0;
    for (const auto& [mote, sum_count] : temp_sums) {
        const double mote_mean = mote_means[idx++];
        const double z = spread > 0.0 ? (mote_mean - global_mean) / spread : 0.0;
        const auto& [x, y] = position.at(mote);
        const double perimeter_distance =
            std::min(std::min(x - min_x, max_x - x), std::min(y - min_y, max_y - y));
        if (perimeter_distance <= wall_margin && z > z_thresh) {
            flagged.insert(mote);
        }
    }
    return flagged;
}

std::vector<long> best_covered_epochs(const std::vector<MoteRecord>& records,
                                      const ClusterAssignment& assignment, int count) {
    if (count < 1) {
        throw InvalidArgument("best_covered_epochs requires count >= 1");
    }
    std::unordered_map<long, std::set<int>> motes_by_epoch;
    for (const MoteRecord& record : records) {
        if (assignment.cluster_of.count(record.mote_id) == 0 ||
            !clean_temperature(record)) {
            continue;
        }
        motes_by_epoch[record.epoch].insert(record.mote_id);
    }
    std::vector<std::pair<long, std::size_t>> coverage;
    coverage.reserve(motes_by_epoch.size());
    for (const auto& [epoch, motes] : motes_by_epoch) {
        coverage.emplace_back(epoch, motes.size());
    }
    std::sort(coverage.begin(), coverage.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second; // more motes first
        }
        return a.first < b.first; // ties prefer the lower epoch
    });
    if (coverage.size() > static_cast<std::size_t>(count)) {
        coverage.resize(static_cast<std::size_t>(count));
    }
    std::vector<long> epochs;
    epochs.reserve(coverage.size());
    for (const auto& [epoch, motes] : coverage) {
        epochs.push_back(epoch);
    }
    std::sort(epochs.begin(), epochs.end());
    return epochs;
}

AgreementReport cluster_agreement(const std::vector<MoteRecord>& records,
                                  const ClusterAssignment& assignment,
                                  const std::vector<long>& epochs,
                                  const std::set<int>& exclude, double tolerance) {
    if (!(tolerance > 0.0)) {
        throw InvalidArgument("cluster_agreement requires a positive tolerance");
    }
    const auto pair_temps = collect_pair_temps(records, assignment, epochs, exclude);

    std::map<int, int> member_count;
    for (const auto& [mote, cluster] : assignment.cluster_of) {
        if (exclude.count(mote) == 0) {
            ++member_count[cluster];
        }
    }

    AgreementReport report;
    double agreement_sum = 0.0;
    double absent_sum = 0.0;
    for (const auto& [key, temps] : pair_temps) {
        const int present = static_cast<int>(temps.size());
        std::vector<Interval> intervals;
        intervals.reserve(temps.size());
        for (const auto& [mote, temp] : temps) {
            intervals.emplace_back(temp - tolerance, temp + tolerance);
        }
        agreement_sum += static_cast<double>(max_overlap_count(intervals)) / present;
        const int members = member_count.at(key.first);
        absent_sum += static_cast<double>(members - present) / members;
        ++report.pairs;
    }
    if (report.pairs > 0) {
        report.agreement_pct = 100.0 * agreement_sum / static_cast<double>(report.pairs);
        report.absent_fraction = absent_sum / static_cast<double>(report.pairs);
    }
    return report;
}

std::vector<ClusterSnr> cluster_snr(const std::vector<MoteRecord>& records,
                                    const ClusterAssignment& assignment, int atoms,
                                    double sensitivity) {
    if (atoms < 1) {
        throw InvalidArgument("cluster_snr requires atoms >= 1");
    }
    const auto members = cluster_members(assignment);
    std::map<int, std::vector<double>> temps_by_cluster;
    for (const MoteRecord& record : records) {
        const auto it = assignment.cluster_of.find(record.mote_id);
        if (it == assignment.cluster_of.end()) {
            continue;
        }
        if (const std::optional<double> temp = clean_temperature(record)) {
            temps_by_cluster[it->second].push_back(*temp);
        }
    }

    std::vector<ClusterSnr> table;
    for (const auto& [cluster, mote_ids] : members) {
        const auto temps_it = temps_by_cluster.find(cluster);
        if (temps_it == temps_by_cluster.end() || temps_it->second.size() < 2) {
            continue;
        }
        const double signal = mean(temps_it->second);
        const double noise = sample_stddev(temps_it->second);
        if (!(signal > 0.0) || !(noise > 0.0)) {
            continue;
        }
        const int m = static_cast<int>(mote_ids.size());
        ClusterSnr row;
        row.cluster = cluster;
        row.sensors = m;
        row.classical_db = 20.0 * std::log10(signal / noise);
        row.sql_db = 20.0 * std::log10(signal / std::sqrt(sql_variance(atoms, sensitivity, m)));
        row.hl_db = 20.0 * std::log10(signal / std::sqrt(hl_variance(atoms, sensitivity, m)));
        row.gain_db = row.hl_db - row.classical_db;
        table.push_back(row);
    }
    return table;
}

DegradationCurves missing_vs_decoherence_curves(
    const std::vector<MoteRecord>& records, const ClusterAssignment& assignment,
    const std::vector<long>& epochs, const std::vector<double>& missing_fracs,
    const std::vector<double>& visibilities, int atoms, std::uint64_t seed,
    double tolerance, int trials, int repetitions) {
    for (double frac : missing_fracs) {
        if (!std::isfinite(frac) || frac < 0.0 || frac >= 1.0) {
            throw InvalidArgument("missing fractions must lie in [0, 1)");
        }
    }
    for (double v : visibilities) {
        if (!std::isfinite(v) || v <= 0.0 || v > 1.0) {
            throw InvalidArgument("visibilities must lie in (0, 1]");
        }
    }
    if (atoms < 1 || trials < 1 || repetitions < 1 || !(tolerance > 0.0)) {
        throw InvalidArgument("missing_vs_decoherence_curves parameter out of range");
    }

    DegradationCurves curves;

    // Classical arm: re-run the overlap agreement with every reporter
    // independently dropped. One uniform per (pair, repetition, mote),
    // shared across fractions, decides survival at every fraction.
    const auto pair_temps = collect_pair_temps(records, assignment, epochs, {});
    std::vector<double> agreement_sum(missing_fracs.size(), 0.0);
    long samples = 0;
    std::uint64_t pair_index = 0;
    std::vector<double> draws;
    std::vector<Interval> intervals;
    for (const auto& [key, temps] : pair_temps) {
        const int present = static_cast<int>(temps.size());
        for (int rep = 0; rep < repetitions; ++rep) {
            SplitMix64 rng(stream_seed(
                seed, lane_key(kDropLane, pair_index, static_cast<std::uint64_t>(rep)), 0));
            draws.clear();
            for (int i = 0; i < present; ++i) {
                draws.push_back(rng.uniform01());
            }
            for (std::size_t fi = 0; fi < missing_fracs.size(); ++fi) {
                intervals.clear();
                for (int i = 0; i < present; ++i) {
                    if (draws[static_cast<std::size_t>(i)] >= missing_fracs[fi]) {
                        const double temp = temps[static_cast<std::size_t>(i)].second;
                        intervals.emplace_back(temp - tolerance, temp + tolerance);
                    }
                }
                const int survivors = static_cast<int>(intervals.size());
                // Local-fusion quorum: fusing needs at least half of the
                // round's reporters; a lost quorum scores zero agreement.
                if (survivors == 0 || 2 * survivors < present) {
                    continue;
                }
                agreement_sum[fi] +=
                    static_cast<double>(max_overlap_count(intervals)) / survivors;
            }
            ++samples;
        }
        ++pair_index;
    }
    for (std::size_t fi = 0; fi < missing_fracs.size(); ++fi) {
        const double pct =
            samples > 0 ? 100.0 * agreement_sum[fi] / static_cast<double>(samples) : 0.0;
        curves.classical.emplace_back(missing_fracs[fi], pct);
    }

    // Quantum arm: entangled fusion over each cluster at visibility V,
    // scored against the V = 1 confidence width it would have had with no
    // decoherence.
    const auto members = cluster_members(assignment);
    const double z = two_sided_z(0.05);
    for (std::size_t vi = 0; vi < visibilities.size(); ++vi) {
        const double v = visibilities[vi];
        double within_sum = 0.0;
        long cluster_count = 0;
        for (const auto& [cluster, mote_ids] : members) {
            const double m = static_cast<double>(mote_ids.size());
            const double sigma_full =
                1.0 / (2.0 * std::sqrt(static_cast<double>(atoms)) * 0.1 * m);
            const double sigma_v = sigma_full / v;
            const double width = z * sigma_full;
            SplitMix64 rng(stream_seed(
                seed, lane_key(kQuantumLane, vi, static_cast<std::uint64_t>(cluster)), 0));
            long within = 0;
            for (int trial = 0; trial < trials; ++trial) {
                if (std::fabs(rng.gaussian(0.0, sigma_v)) <= width) {
                    ++within;
                }
            }
            within_sum += static_cast<double>(within) / static_cast<double>(trials);
            ++cluster_count;
        }
        const double pct =
            cluster_count > 0 ? 100.0 * within_sum / static_cast<double>(cluster_count) : 0.0;
        curves.quantum.emplace_back(v, pct);
    }
    return curves;
}

} // namespace qfuse
