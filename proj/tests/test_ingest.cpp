#include <doctest.h>

#include <sstream>

#include "ctxsense/ingest.hpp"

using namespace ctxsense;

namespace {

std::string imu_file(const std::string& rows) {
    return std::string(kCsvVersionLine) + "\n" + kImuCsvHeader + "\n" + rows;
}

std::string gnss_file(const std::string& rows) {
    return std::string(kCsvVersionLine) + "\n" + kGnssCsvHeader + "\n" + rows;
}

SensorStream constant_stream(std::size_t n, double rate = 100.0) {
    SensorStream s;
    s.nominal_rate = rate;
    for (std::size_t i = 0; i < n; ++i) {
        ImuSample smp;
        smp.t = static_cast<double>(i) / rate;
        smp.accel = {0.0, 0.0, 9.81};
        smp.magn = {40.0, 0.0, 0.0};
        smp.baro = 1013.0;
        s.samples.push_back(smp);
    }
    return s;
}

}  // namespace

TEST_CASE("imu row maps fields directly") {
    std::istringstream in(
        imu_file("1.00,0.1,0.2,9.8,0.01,0.0,0.0,22.0,-5.0,40.0,1013.2\n"));
    const SensorStream s = parse_imu_log(in);
    REQUIRE(s.samples.size() == 1);
    CHECK(s.samples[0].t == 1.00);
    CHECK(s.samples[0].accel.x == 0.1);
    CHECK(s.samples[0].accel.y == 0.2);
    CHECK(s.samples[0].accel.z == 9.8);
    CHECK(s.samples[0].gyro.x == 0.01);
    CHECK(s.samples[0].magn.z == 40.0);
    CHECK(s.samples[0].baro == 1013.2);
}

TEST_CASE("empty imu file is corrupt input") {
    std::istringstream empty("");
    CHECK_THROWS_AS(parse_imu_log(empty), corrupt_input_error);
    std::istringstream headers_only(imu_file(""));
    CHECK_THROWS_AS(parse_imu_log(headers_only), corrupt_input_error);
}

TEST_CASE("missing version line or header is a format error") {
    std::istringstream no_version(std::string(kImuCsvHeader) + "\n1,0,0,9.8,0,0,0,0,0,0,1000\n");
    CHECK_THROWS_AS(parse_imu_log(no_version), format_error);
    std::istringstream bad_header(std::string(kCsvVersionLine) + "\nt,x,y\n");
    CHECK_THROWS_AS(parse_imu_log(bad_header), format_error);
}

TEST_CASE("one bad row in a hundred is skipped and counted") {
    std::string rows;
    for (int i = 0; i < 99; ++i)
        rows += std::to_string(i * 0.01) + ",0,0,9.8,0,0,0,40,0,0,1013\n";
    rows += "garbage,row,here\n";
    std::istringstream in(imu_file(rows));
    const SensorStream s = parse_imu_log(in);
    CHECK(s.samples.size() == 99);
    CHECK(s.bad_rows == 1);
}

TEST_CASE("bad-row ratio above threshold fails") {
    std::string rows = "0.0,0,0,9.8,0,0,0,40,0,0,1013\n";
    for (int i = 0; i < 3; ++i) rows += "nope\n";
    std::istringstream in(imu_file(rows));
    CHECK_THROWS_AS(parse_imu_log(in), corrupt_input_error);
}

TEST_CASE("gnss rows sharing a timestamp form one epoch") {
    std::istringstream in(gnss_file("5.0,G01,30,120,45\n5.0,G07,20,80,30\n5.0,G09,26,200,60\n"));
    const GnssEpochSeries s = parse_gnss_log(in);
    REQUIRE(s.epochs.size() == 1);
    CHECK(s.epochs[0].t == 5.0);
    CHECK(s.epochs[0].obs.size() == 3);
    CHECK(s.epochs[0].obs[1].prn == "G07");
}

TEST_CASE("marker row declares a zero-satellite epoch") {
    std::istringstream in(gnss_file("1.0,G01,30,120,45\n2.0,-,-,-,-\n3.0,G01,31,121,46\n"));
    const GnssEpochSeries s = parse_gnss_log(in);
    REQUIRE(s.epochs.size() == 3);
    CHECK(s.epochs[1].t == 2.0);
    CHECK(s.epochs[1].obs.empty());
}

TEST_CASE("out-of-order gnss rows are re-sorted by time") {
    std::istringstream in(gnss_file("3.0,G01,30,0,10\n1.0,G02,28,0,10\n2.0,G03,33,0,10\n"));
    const GnssEpochSeries s = parse_gnss_log(in);
    REQUIRE(s.epochs.size() == 3);
    CHECK(s.epochs[0].t == 1.0);
    CHECK(s.epochs[1].t == 2.0);
    CHECK(s.epochs[2].t == 3.0);
}

TEST_CASE("vector magnitude") {
    CHECK(magnitude({3.0, 4.0, 0.0}) == 5.0);
    CHECK(magnitude({0.0, 0.0, 0.0}) == 0.0);
    CHECK(magnitude({1.0, 2.0, 2.0}) == 3.0);
}

TEST_CASE("magnitude is rotation invariant") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const Vec3 v{rng.normal(), rng.normal(), rng.normal()};
        // Rotation about z by a random angle followed by a rotation about x.
        const double a = rng.uniform(0.0, 6.283185307179586);
        const double b = rng.uniform(0.0, 6.283185307179586);
        const Vec3 r1{v.x * std::cos(a) - v.y * std::sin(a),
                      v.x * std::sin(a) + v.y * std::cos(a), v.z};
        const Vec3 r2{r1.x, r1.y * std::cos(b) - r1.z * std::sin(b),
                      r1.y * std::sin(b) + r1.z * std::cos(b)};
        CHECK(magnitude(r2) ==
              doctest::Approx(magnitude(v)).epsilon(1e-9));
    }
}

TEST_CASE("segment strides: 75% overlap on 500-sample windows") {
    const SensorStream s = constant_stream(1000);
    const auto windows = segment(s, 5.0, 0.75);  // 500 samples at 100 Hz
    REQUIRE(windows.size() == 5);
    for (std::size_t i = 0; i < windows.size(); ++i) {
        CHECK(windows[i].start_t ==
              doctest::Approx(static_cast<double>(i) * 125.0 / 100.0));
        CHECK(windows[i].length_samples == 500);
    }
}

TEST_CASE("segment strides: 50% training overlap") {
    const SensorStream s = constant_stream(1000);
    const auto windows = segment(s, 5.0, 0.5);
    REQUIRE(windows.size() == 3);
    CHECK(windows[0].start_t == 0.0);
    CHECK(windows[1].start_t == doctest::Approx(2.5));
    CHECK(windows[2].start_t == doctest::Approx(5.0));
}

TEST_CASE("stream shorter than one window yields nothing") {
    const SensorStream s = constant_stream(499);
    CHECK(segment(s, 5.0, 0.75).empty());
}

TEST_CASE("segment count matches the stride formula on gap-free streams") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(400, 3000));
        const double overlap = rng.uniform(0.0, 0.9);
        const SensorStream s = constant_stream(n);
        const auto windows = segment(s, 4.0, overlap);
        const std::size_t L = 400;
        auto stride = static_cast<std::size_t>(
            std::llround(static_cast<double>(L) * (1.0 - overlap)));
        if (stride == 0) stride = 1;
        // brute-force enumeration of valid window starts
        std::size_t expect = 0;
        for (std::size_t start = 0; start + L <= n; start += stride) ++expect;
        CHECK(windows.size() == expect);
    }
}

TEST_CASE("windows straddling a gap are dropped") {
    SensorStream s = constant_stream(1000);
    // Carve a hole: shift the second half by half a second.
    for (std::size_t i = 500; i < s.samples.size(); ++i) s.samples[i].t += 0.5;
    s.detect_discontinuities();
    REQUIRE(s.discontinuities.size() == 1);
    CHECK(s.discontinuities[0] == 499);
    // Stride 100, gap between samples 499 and 500: starts 200, 300 and 400
    // contain the gap and vanish; 0, 100, 500 and 600 survive.
    const auto windows = segment(s, 4.0, 0.75);
    REQUIRE(windows.size() == 4);
    CHECK(windows[0].start_t == doctest::Approx(0.0));
    CHECK(windows[1].start_t == doctest::Approx(1.0));
    CHECK(windows[2].start_t == doctest::Approx(5.5));
    CHECK(windows[3].start_t == doctest::Approx(6.5));
}

TEST_CASE("demean basics") {
    CHECK(demean({1.0, 1.0, 1.0}) == std::vector<double>{0.0, 0.0, 0.0});
    CHECK(demean({1.0, 2.0, 3.0}) == std::vector<double>{-1.0, 0.0, 1.0});
    CHECK_THROWS_AS(demean({}), precondition_error);
}

TEST_CASE("demean leaves at most 1e-12-relative residual mean") {
    Rng rng(3);
    std::vector<double> x(500);
    double max_abs = 0.0;
    for (double& v : x) {
        v = rng.uniform(-50.0, 50.0);
        max_abs = std::max(max_abs, std::abs(v));
    }
    const auto out = demean(x);
    double mean = 0.0;
    for (double v : out) mean += v;
    mean /= static_cast<double>(out.size());
    CHECK(std::abs(mean) <= 1e-12 * max_abs);
}

TEST_CASE("imu csv round-trips exactly") {
    Rng rng(99);
    SensorStream s;
    s.nominal_rate = 100.0;
    for (int i = 0; i < 50; ++i) {
        ImuSample smp;
        smp.t = i * 0.01;
        smp.accel = {rng.normal(), rng.normal(), 9.81 + rng.normal()};
        smp.gyro = {rng.normal(), rng.normal(), rng.normal()};
        smp.magn = {rng.normal(40, 1), rng.normal(20, 1), rng.normal(10, 1)};
        smp.baro = rng.normal(1013, 1);
        s.samples.push_back(smp);
    }
    std::ostringstream out;
    write_imu_log(out, s);
    std::istringstream in(out.str());
    const SensorStream back = parse_imu_log(in);
    REQUIRE(back.samples.size() == s.samples.size());
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
        CHECK(back.samples[i].t == s.samples[i].t);
        CHECK(back.samples[i].accel.x == s.samples[i].accel.x);
        CHECK(back.samples[i].accel.y == s.samples[i].accel.y);
        CHECK(back.samples[i].accel.z == s.samples[i].accel.z);
        CHECK(back.samples[i].gyro.x == s.samples[i].gyro.x);
        CHECK(back.samples[i].magn.y == s.samples[i].magn.y);
        CHECK(back.samples[i].baro == s.samples[i].baro);
    }
}

TEST_CASE("gnss csv round-trips exactly, marker rows included") {
    GnssEpochSeries s;
    s.epochs.push_back({0.0, {{"G01", 41.25, 120.5, 60.25}, {"R12", 33.5, 10.0, 15.0}}});
    s.epochs.push_back({1.0, {}});
    s.epochs.push_back({2.0, {{"G09", 17.125, 350.0, 5.5}}});
    std::ostringstream out;
    write_gnss_log(out, s);
    std::istringstream in(out.str());
    const GnssEpochSeries back = parse_gnss_log(in);
    REQUIRE(back.epochs.size() == 3);
    CHECK(back.epochs[0].obs.size() == 2);
    CHECK(back.epochs[0].obs[0].prn == "G01");
    CHECK(back.epochs[0].obs[0].cn0 == 41.25);
    CHECK(back.epochs[1].obs.empty());
    CHECK(back.epochs[2].obs[0].cn0 == 17.125);
}
