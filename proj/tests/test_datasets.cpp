#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qfuse/datasets.hpp"
#include "qfuse/errors.hpp"
#include "qfuse/stats.hpp"

using namespace qfuse;

namespace {

MoteRecord make_record(long epoch, int mote, double temp) {
    MoteRecord r;
    r.date = "2004-03-01";
    r.time = "00:00:00.0";
    r.epoch = epoch;
    r.mote_id = mote;
    r.temperature = temp;
    return r;
}

ClusterAssignment manual_assignment(const std::map<int, int>& cluster_of) {
    ClusterAssignment a;
    a.cluster_of = cluster_of;
    return a;
}

} // namespace

TEST_CASE("eight_sensor_dataset carries the published tiers") {
    const std::vector<CrispSensor> sensors = eight_sensor_dataset();
    REQUIRE(sensors.size() == 8);
    CHECK(sensors[0].id == "S1");
    CHECK(sensors[7].id == "S8");

    const Interval s1 = crisp_interval(sensors[0]);
    CHECK(s1.lower == 2.7);
    CHECK(s1.upper == 6.7);
    const Interval s8 = crisp_interval(sensors[7]);
    CHECK(s8.lower == 1.3);
    CHECK(s8.upper == 2.3);

    // The better tier repeats the first tier's centers at half the width.
    for (int i = 0; i < 4; ++i) {
        const auto coarse = static_cast<std::size_t>(i);
        const auto fine = static_cast<std::size_t>(i + 4);
        CHECK(sensors[fine].half_width ==
              doctest::Approx(0.5 * sensors[coarse].half_width).epsilon(1e-12));
    }
    CHECK(crisp_intervals(sensors).size() == 8);
}

TEST_CASE("range_to_atom_factor prices precision quadratically") {
    CHECK(range_to_atom_factor(2.0) == 4.0);
    CHECK(range_to_atom_factor(1.0) == 1.0);
    CHECK(range_to_atom_factor(4.0) == 16.0);
    CHECK(range_to_atom_factor(0.5) == 0.25);
    CHECK_THROWS_AS((void)range_to_atom_factor(0.0), InvalidArgument);
    CHECK_THROWS_AS((void)range_to_atom_factor(-2.0), InvalidArgument);
}

TEST_CASE("parse_mote_data reads the lab file format") {
    std::istringstream in(
        "2004-03-01 00:59:16.02785 1 1 19.9884 37.0933 45.08 2.69964\n"
        "2004-03-01 00:59:20.0 2 7 21.5 40.1 100.0\n"   // no voltage
        "2004-03-01 01:00:00.0 3 9\n"                   // heartbeat, no readings
        "\n"                                            // blank: skipped
        "garbage\n"                                     // too few tokens
        "2004-03-01 00:04:01.0 abc 1 20.0\n"            // bad epoch
        "2004-03-01 00:04:01.0 -2 1 20.0\n"             // negative epoch
        "2004-03-01 00:04:01.0 4 0 20.0\n"              // mote ids start at 1
        "2004-03-01 00:04:01.0 4 2 20.0 1 2 3 9.9\n"    // nine tokens
        "2004-03-01 00:04:01.0 4 2 not-a-number\n");    // bad measurement
    const ParsedMotes parsed = parse_mote_data(in);
    REQUIRE(parsed.records.size() == 3);
    CHECK(parsed.skipped == 7);

    const MoteRecord& first = parsed.records[0];
    CHECK(first.date == "2004-03-01");
    CHECK(first.time == "00:59:16.02785");
    CHECK(first.epoch == 1);
    CHECK(first.mote_id == 1);
    REQUIRE(first.temperature.has_value());
    CHECK(*first.temperature == 19.9884);
    REQUIRE(first.humidity.has_value());
    CHECK(*first.humidity == 37.0933);
    REQUIRE(first.light.has_value());
    CHECK(*first.light == 45.08);
    REQUIRE(first.voltage.has_value());
    CHECK(*first.voltage == 2.69964);

    const MoteRecord& second = parsed.records[1];
    CHECK(second.mote_id == 7);
    CHECK(second.light.has_value());
    CHECK(!second.voltage.has_value());

    const MoteRecord& third = parsed.records[2];
    CHECK(third.epoch == 3);
    CHECK(!third.temperature.has_value());

    // Round-trip: printing a parsed value at full precision and re-parsing
    // it reproduces the same bits.
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", *first.temperature);
    std::istringstream again("2004-03-01 00:59:16.0 1 1 " + std::string(buffer) + "\n");
    const ParsedMotes reparsed = parse_mote_data(again);
    REQUIRE(reparsed.records.size() == 1);
    CHECK(*reparsed.records[0].temperature == *first.temperature);
}

TEST_CASE("load_mote_data reports missing files as IO errors") {
    CHECK_THROWS_AS((void)load_mote_data("/nonexistent/really/data.txt"), IoError);
    CHECK_THROWS_AS((void)load_mote_locations("/nonexistent/really/locs.txt"), IoError);
}

TEST_CASE("parse_mote_locations reads id-x-y rows") {
    std::istringstream in(
        "1 21.5 23.0\n"
        "2 24.5 20.0\n"
        "not a location\n"
        "3 19.0\n"          // missing y
        "0 1.0 2.0\n"       // mote ids start at 1
        "4 1.0 2.0 extra\n");
    const ParsedLocations parsed = parse_mote_locations(in);
    REQUIRE(parsed.locations.size() == 2);
    CHECK(parsed.skipped == 4);
    CHECK(parsed.locations[0].mote_id == 1);
    CHECK(parsed.locations[0].x == 21.5);
    CHECK(parsed.locations[1].y == 20.0);
}

TEST_CASE("kmeans_clusters separates well-spaced blobs") {
    std::vector<MoteLocation> locations;
    int id = 1;
    for (double dx : {0.0, 1.0}) {
        for (double dy : {0.0, 1.0}) {
            locations.push_back({id++, dx, dy});
        }
    }
    for (double dx : {0.0, 1.0}) {
        for (double dy : {0.0, 1.0}) {
            locations.push_back({id++, 100.0 + dx, 100.0 + dy});
        }
    }

    std::vector<double> trace;
    const ClusterAssignment two = kmeans_clusters(locations, 2, 17, &trace);
    CHECK(two.centroids.size() == 2);
    const int near_cluster = two.cluster_of.at(1);
    const int far_cluster = two.cluster_of.at(5);
    CHECK(near_cluster != far_cluster);
    for (int m : {1, 2, 3, 4}) CHECK(two.cluster_of.at(m) == near_cluster);
    for (int m : {5, 6, 7, 8}) CHECK(two.cluster_of.at(m) == far_cluster);

    REQUIRE(!trace.empty());
    for (std::size_t i = 1; i < trace.size(); ++i) {
        CHECK(trace[i] <= trace[i - 1] + 1e-9);
    }
    // Perfect split: within-cluster scatter of a unit square corner set.
    CHECK(trace.back() == doctest::Approx(8.0 * 0.5).epsilon(1e-9));

    // k = 1 collapses onto the centroid of everything.
    const ClusterAssignment one = kmeans_clusters(locations, 1, 17);
    CHECK(one.centroids.size() == 1);
    CHECK(one.centroids[0].first == doctest::Approx(50.5).epsilon(1e-12));
    CHECK(one.centroids[0].second == doctest::Approx(50.5).epsilon(1e-12));

    // k = n gives every mote its own cluster.
    const ClusterAssignment all = kmeans_clusters(locations, 8, 17);
    std::set<int> distinct;
    for (const auto& [mote, cluster] : all.cluster_of) distinct.insert(cluster);
    CHECK(distinct.size() == 8);

    // Determinism in the seed.
    const ClusterAssignment rerun = kmeans_clusters(locations, 2, 17);
    CHECK(rerun.cluster_of == two.cluster_of);
    CHECK(rerun.centroids == two.centroids);

    // Duplicated mote ids collapse to their first location.
    std::vector<MoteLocation> dup = locations;
    dup.push_back({1, 500.0, 500.0});
    const ClusterAssignment deduped = kmeans_clusters(dup, 2, 17);
    CHECK(deduped.cluster_of.size() == 8);
    CHECK(deduped.cluster_of.at(1) == deduped.cluster_of.at(2));

    CHECK_THROWS_AS((void)kmeans_clusters(locations, 9, 17), InvalidArgument);
    CHECK_THROWS_AS((void)kmeans_clusters(locations, 0, 17), InvalidArgument);

    const auto members = cluster_members(two);
    CHECK(members.at(near_cluster) == std::vector<int>{1, 2, 3, 4});
    CHECK(members.at(far_cluster) == std::vector<int>{5, 6, 7, 8});
}

TEST_CASE("clean_temperature keeps plausible lab readings") {
    CHECK(clean_temperature(make_record(1, 1, 20.5)).value() == 20.5);
    CHECK(clean_temperature(make_record(1, 1, 0.0)).value() == 0.0);
    CHECK(clean_temperature(make_record(1, 1, 50.0)).value() == 50.0);
    CHECK(!clean_temperature(make_record(1, 1, 120.0)).has_value());
    CHECK(!clean_temperature(make_record(1, 1, -5.0)).has_value());
    MoteRecord heartbeat = make_record(1, 1, 0.0);
    heartbeat.temperature.reset();
    CHECK(!clean_temperature(heartbeat).has_value());
}

TEST_CASE("detect_window_motes flags warm perimeter sensors") {
    const std::vector<MoteLocation> locations = {
        {1, 0.0, 0.0}, {2, 10.0, 10.0}, {3, 20.0, 0.0}};
    std::vector<MoteRecord> records;
    for (long e = 1; e <= 6; ++e) {
        records.push_back(make_record(e, 1, 20.0));
        records.push_back(make_record(e, 2, 20.2));
        records.push_back(make_record(e, 3, 25.0));   // sun-struck corner mote
    }

    // Only mote 3 runs hot enough to clear the z threshold.
    CHECK(detect_window_motes(records, locations, 1.0, 2.0) == std::set<int>{3});
    // An impossible threshold silences the detector.
    CHECK(detect_window_motes(records, locations, 50.0, 2.0).empty());
    // Zero temperature spread yields z = 0 everywhere.
    std::vector<MoteRecord> flat;
    for (long e = 1; e <= 3; ++e) {
        flat.push_back(make_record(e, 1, 21.0));
        flat.push_back(make_record(e, 3, 21.0));
    }
    CHECK(detect_window_motes(flat, locations, 1.0, 2.0).empty());
    // Motes without a known location are ignored outright.
    std::vector<MoteRecord> unplaced = records;
    for (long e = 1; e <= 6; ++e) unplaced.push_back(make_record(e, 99, 49.0));
    CHECK(detect_window_motes(unplaced, locations, 1.0, 2.0) == std::set<int>{3});

    CHECK_THROWS_AS((void)detect_window_motes({}, locations, 1.0, 2.0), InvalidArgument);
}

TEST_CASE("detect_window_motes needs both heat and a wall seat") {
    // Four cool corner motes plus one hot mote dead center: the z score
    // clears the bar but the location does not.
    const std::vector<MoteLocation> locations = {
        {1, 0.0, 0.0}, {2, 20.0, 0.0}, {3, 0.0, 10.0}, {4, 20.0, 10.0}, {5, 10.0, 5.0}};
    std::vector<MoteRecord> records;
    for (long e = 1; e <= 4; ++e) {
        for (int m : {1, 2, 3, 4}) records.push_back(make_record(e, m, 20.0));
        records.push_back(make_record(e, 5, 25.0));
    }
    CHECK(detect_window_motes(records, locations, 1.0, 2.0).empty());
    // Widening the wall margin to reach the center flips the verdict.
    CHECK(detect_window_motes(records, locations, 1.0, 6.0) == std::set<int>{5});
}

TEST_CASE("best_covered_epochs ranks by distinct clean reporters") {
    const ClusterAssignment assignment = manual_assignment({{1, 0}, {2, 0}, {3, 0}});
    std::vector<MoteRecord> records;
    for (int m : {1, 2, 3}) records.push_back(make_record(1, m, 20.0));
    for (int m : {1, 2}) records.push_back(make_record(2, m, 20.0));
    for (int m : {1, 2}) records.push_back(make_record(3, m, 20.0));
    records.push_back(make_record(4, 1, 20.0));
    for (int m : {1, 2, 3}) records.push_back(make_record(5, m, 20.0));
    // Dirty readings and unassigned motes never count.
    records.push_back(make_record(4, 2, 120.0));
    records.push_back(make_record(4, 99, 20.0));
    // A duplicate reporter is still one mote.
    records.push_back(make_record(4, 1, 20.1));

    CHECK(best_covered_epochs(records, assignment, 2) == std::vector<long>{1, 5});
    CHECK(best_covered_epochs(records, assignment, 3) == std::vector<long>{1, 2, 5});
    CHECK(best_covered_epochs(records, assignment, 99) ==
          std::vector<long>{1, 2, 3, 4, 5});
    CHECK_THROWS_AS((void)best_covered_epochs(records, assignment, 0), InvalidArgument);
}

TEST_CASE("cluster_agreement scores interval consensus per epoch") {
    const ClusterAssignment assignment = manual_assignment({{1, 0}, {2, 0}});

    // Full agreement: readings 0.3 apart share overlap at +/-0.5 tolerance.
    std::vector<MoteRecord> close = {make_record(1, 1, 20.0), make_record(1, 2, 20.3)};
    AgreementReport report = cluster_agreement(close, assignment, {1}, {});
    CHECK(report.pairs == 1);
    CHECK(report.agreement_pct == 100.0);
    CHECK(report.absent_fraction == 0.0);

    // Disjoint intervals: only one of two can sit in the overlap.
    std::vector<MoteRecord> split = {make_record(1, 1, 20.0), make_record(1, 2, 21.5)};
    report = cluster_agreement(split, assignment, {1}, {});
    CHECK(report.agreement_pct == 50.0);

    // Averaged over a clean epoch and a split epoch.
    std::vector<MoteRecord> mixed = close;
    mixed.push_back(make_record(2, 1, 20.0));
    mixed.push_back(make_record(2, 2, 21.5));
    report = cluster_agreement(mixed, assignment, {1, 2}, {});
    CHECK(report.pairs == 2);
    CHECK(report.agreement_pct == 75.0);

    // Excluding the disagreeing mote removes it from membership too.
    report = cluster_agreement(split, assignment, {1}, {2});
    CHECK(report.agreement_pct == 100.0);
    CHECK(report.absent_fraction == 0.0);

    // A mote that never reports counts as absent, not as disagreement.
    const ClusterAssignment trio = manual_assignment({{1, 0}, {2, 0}, {3, 0}});
    report = cluster_agreement(close, trio, {1}, {});
    CHECK(report.agreement_pct == 100.0);
    CHECK(report.absent_fraction == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // Epoch filtering: nothing selected, nothing scored.
    report = cluster_agreement(close, assignment, {7}, {});
    CHECK(report.pairs == 0);
    CHECK(report.agreement_pct == 0.0);

    CHECK_THROWS_AS((void)cluster_agreement(close, assignment, {1}, {}, 0.0),
                    InvalidArgument);
}

TEST_CASE("cluster_snr compares the classical floor against both limits") {
    // One cluster of ten motes; temperatures average 30 with spread 10/9.
    std::map<int, int> cluster_of;
    std::vector<MoteRecord> records;
    for (int m = 1; m <= 10; ++m) {
        cluster_of[m] = 0;
        records.push_back(make_record(1, m, m <= 5 ? 29.0 : 31.0));
    }
    const std::vector<ClusterSnr> table =
        cluster_snr(records, manual_assignment(cluster_of), 1000, 0.1);
    REQUIRE(table.size() == 1);
    const ClusterSnr& row = table[0];
    CHECK(row.sensors == 10);
    const double spread = std::sqrt(10.0 / 9.0);
    CHECK(row.classical_db ==
          doctest::Approx(20.0 * std::log10(30.0 / spread)).epsilon(1e-12));
    // SQL noise at M=10, N=1000, eta=0.1 is exactly 0.05 parameter units.
    CHECK(row.sql_db == doctest::Approx(20.0 * std::log10(30.0 / 0.05)).epsilon(1e-12));
    // Heisenberg buys another factor sqrt(M) of amplitude: +10 log10(M) dB.
    CHECK(row.hl_db - row.sql_db == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(row.gain_db == doctest::Approx(row.hl_db - row.classical_db).epsilon(1e-12));

    // Degenerate clusters are omitted rather than reported as garbage.
    std::map<int, int> sparse = {{1, 0}, {2, 1}, {3, 1}};
    std::vector<MoteRecord> sparse_records = {
        make_record(1, 1, 20.0),                          // single reading
        make_record(1, 2, 25.0), make_record(1, 3, 25.0)  // zero spread
    };
    CHECK(cluster_snr(sparse_records, manual_assignment(sparse), 1000, 0.1).empty());
    CHECK_THROWS_AS((void)cluster_snr(records, manual_assignment(cluster_of), 0, 0.1),
                    InvalidArgument);
}

TEST_CASE("missing_vs_decoherence_curves degrade from their clean baselines") {
    // Four motes in one cluster, identical temperatures over three epochs:
    // agreement is total whenever the survivor quorum holds.
    std::map<int, int> cluster_of;
    std::vector<MoteRecord> records;
    for (int m = 1; m <= 4; ++m) {
        cluster_of[m] = 0;
        for (long e = 1; e <= 3; ++e) records.push_back(make_record(e, m, 20.0));
    }
    const ClusterAssignment assignment = manual_assignment(cluster_of);
    const std::vector<long> epochs = {1, 2, 3};

    const DegradationCurves curves = missing_vs_decoherence_curves(
        records, assignment, epochs, {0.0, 0.15, 0.3, 0.45}, {1.0, 0.7, 0.5, 0.3},
        1000, 9, 0.5, 2000, 16);

    REQUIRE(curves.classical.size() == 4);
    REQUIRE(curves.quantum.size() == 4);

    // No missing data reproduces the undropped agreement exactly.
    CHECK(curves.classical[0].first == 0.0);
    CHECK(curves.classical[0].second == 100.0);
    // Heavier loss can never help.
    for (std::size_t i = 1; i < curves.classical.size(); ++i) {
        CHECK(curves.classical[i].second <= curves.classical[i - 1].second + 1e-12);
    }
    CHECK(curves.classical.back().second < 99.9);
    CHECK(curves.classical.back().second > 40.0);

    // The quantum arm follows the Gaussian containment law
    // P(|N(0, sigma/V)| <= z sigma) = erf(z V / sqrt(2)).
    const double z = two_sided_z(0.05);
    for (const auto& [v, pct] : curves.quantum) {
        const double expected = 100.0 * std::erf(z * v / std::sqrt(2.0));
        CHECK(std::fabs(pct - expected) < 3.5);
    }
    CHECK(std::fabs(curves.quantum[0].second - 95.0) < 1.5);
    for (std::size_t i = 1; i < curves.quantum.size(); ++i) {
        CHECK(curves.quantum[i].second < curves.quantum[i - 1].second);
    }

    // Determinism in the seed.
    const DegradationCurves replay = missing_vs_decoherence_curves(
        records, assignment, epochs, {0.0, 0.15, 0.3, 0.45}, {1.0, 0.7, 0.5, 0.3},
        1000, 9, 0.5, 2000, 16);
    CHECK(replay.classical == curves.classical);
    CHECK(replay.quantum == curves.quantum);

    // Domain validation.
    CHECK_THROWS_AS((void)missing_vs_decoherence_curves(records, assignment, epochs,
                                                        {1.0}, {1.0}, 1000, 9, 0.5,
                                                        100, 4),
                    InvalidArgument);
    CHECK_THROWS_AS((void)missing_vs_decoherence_curves(records, assignment, epochs,
                                                        {0.0}, {0.0}, 1000, 9, 0.5,
                                                        100, 4),
                    InvalidArgument);
    CHECK_THROWS_AS((void)missing_vs_decoherence_curves(records, assignment, epochs,
                                                        {0.0}, {1.0}, 1000, 9, -0.5,
                                                        100, 4),
                    InvalidArgument);
}
