#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qfuse/interval.hpp"

namespace qfuse {

/// One sensor of the embedded crisp benchmark: a center and a symmetric
/// uncertainty half-width.
struct CrispSensor {
    std::string id;
    double center = 0.0;
    double half_width = 0.0;
};

/// The eight published benchmark sensors (two quality tiers of four).
std::vector<CrispSensor> eight_sensor_dataset();

/// [center - half_width, center + half_width].
Interval crisp_interval(const CrispSensor& sensor);
std::vector<Interval> crisp_intervals(const std::vector<CrispSensor>& sensors);

/// Atom-count multiplier needed to shrink a sensor's range by `ratio`:
/// precision scales as 1/sqrt(N), so a k-times narrower range costs k^2
/// more atoms.
double range_to_atom_factor(double ratio);

/// One row of the mote data file. Trailing measurement fields may be
/// absent; sparse rows are tolerated.
struct MoteRecord {
    std::string date;
    std::string time;
    long epoch = 0;
    int mote_id = 0;
    std::optional<double> temperature;
    std::optional<double> humidity;
    std::optional<double> light;
    std::optional<double> voltage;
};

struct ParsedMotes {
    std::vector<MoteRecord> records;
    long skipped = 0;   // malformed lines dropped with a counted warning
};

/// Parse whitespace-separated rows: date time epoch mote_id
/// [temperature [humidity [light [voltage]]]]. Malformed lines are skipped
/// and counted, never fatal; row order is preserved.
ParsedMotes parse_mote_data(std::istream& in);
ParsedMotes load_mote_data(const std::string& path);

/// Mote position on the lab floor, meters.
struct MoteLocation {
    int mote_id = 0;
    double x = 0.0;
    double y = 0.0;
};

struct ParsedLocations {
    std::vector<MoteLocation> locations;
    long skipped = 0;
};

/// Parse whitespace-separated rows: mote_id x y.
ParsedLocations parse_mote_locations(std::istream& in);
ParsedLocations load_mote_locations(const std::string& path);

/// k-means partition of the motes plus the final centroids.
struct ClusterAssignment {
    std::map<int, int> cluster_of;                    // mote_id -> cluster
    std::vector<std::pair<double, double>> centroids; // one per cluster
};

/// Cluster index -> member mote ids, sorted.
std::map<int, std::vector<int>> cluster_members(const ClusterAssignment& assignment);

/// Lloyd's algorithm with k-means++ seeding from the given seed;
/// deterministic, at most 100 iterations. Throws when k exceeds the
/// number of distinct motes. When objective_trace is given it receives the
/// within-cluster sum of squared distances after every iteration.
ClusterAssignment kmeans_clusters(const std::vector<MoteLocation>& locations, int k,
                                  std::uint64_t seed,
                                  std::vector<double>* objective_trace = nullptr);

/// Temperature accepted by the cleaning rule: present and within [0, 50]
/// degrees C (the raw files contain failing-battery readings far outside).
std::optional<double> clean_temperature(const MoteRecord& record);

/// Motes that sit within wall_margin meters of the location bounding-box
/// perimeter AND whose mean temperature z-score against the global mean of
/// per-mote means exceeds z_thresh. Zero temperature variance yields
/// z = 0 for every mote.
std::set<int> detect_window_motes(const std::vector<MoteRecord>& records,
                                  const std::vector<MoteLocation>& locations,
                                  double z_thresh, double wall_margin);

/// The `count` epochs with the most distinct assigned motes reporting a
/// clean temperature; ties prefer the lower epoch. Returned ascending.
std::vector<long> best_covered_epochs(const std::vector<MoteRecord>& records,
                                      const ClusterAssignment& assignment, int count);

struct AgreementReport {
    double agreement_pct = 0.0;   // mean of (max overlap count / present motes)
    double absent_fraction = 0.0; // mean fraction of cluster members not reporting
    long pairs = 0;               // (cluster, epoch) pairs evaluated
};

/// Per-(cluster, epoch) overlap agreement over the selected epochs:
/// present motes' readings become intervals reading +/- tolerance, and the
/// pair's agreement is max_overlap_count / present. Excluded motes are
/// ignored entirely.
AgreementReport cluster_agreement(const std::vector<MoteRecord>& records,
                                  const ClusterAssignment& assignment,
                                  const std::vector<long>& epochs,
                                  const std::set<int>& exclude,
                                  double tolerance = 0.5);

/// One row of the per-cluster SNR table, all values in dB.
struct ClusterSnr {
    int cluster = 0;
    int sensors = 0;        // M, cluster size
    double classical_db = 0.0;
    double sql_db = 0.0;
    double hl_db = 0.0;
    double gain_db = 0.0;   // hl_db - classical_db
};

/// Classical SNR uses the intra-cluster temperature spread as the noise
/// floor; the SQL/HL rows replace it with the fused quantum noise at
/// M = cluster size. Clusters without at least two clean readings, a
/// positive mean, and a positive spread are omitted.
std::vector<ClusterSnr> cluster_snr(const std::vector<MoteRecord>& records,
                                    const ClusterAssignment& assignment, int atoms,
                                    double sensitivity = 0.1);

/// Paired degradation curves: classical agreement under synthetic missing
/// data, and simulated entangled agreement under decoherence.
struct DegradationCurves {
    std::vector<std::pair<double, double>> classical; // (missing_frac, pct)
    std::vector<std::pair<double, double>> quantum;   // (visibility, pct)
};

/// Classical curve: rerun the per-(cluster, epoch) agreement while each
/// present mote is dropped with probability missing_frac; a pair needs at
/// least half of its reporters surviving (the local-fusion quorum rule) or
/// it counts as zero agreement. Drops are nested across fractions via
/// common random numbers, so heavier fractions extend lighter ones' drops
/// instead of resampling them.
/// Quantum curve: fraction of entangled trials whose estimate stays inside
/// the no-fault (V = 1) confidence width when the network visibility is V.
DegradationCurves missing_vs_decoherence_curves(
    const std::vector<MoteRecord>& records, const ClusterAssignment& assignment,
    const std::vector<long>& epochs, const std::vector<double>& missing_fracs,
    const std::vector<double>& visibilities, int atoms, std::uint64_t seed,
    double tolerance = 0.5, int trials = 2000, int repetitions = 32);

} // namespace qfuse
