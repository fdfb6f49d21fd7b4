#include <doctest.h>

#include <sstream>

#include "ctxsense/features.hpp"
#include "ctxsense/synth.hpp"

using namespace ctxsense;
using namespace ctxsense::synth;

namespace {

std::vector<Window> recipe_windows(Behavior b, std::size_t count, std::uint64_t seed) {
    // 50% overlap, 4 s windows: count windows need 2*(count+1) seconds.
    const double duration = 2.0 * static_cast<double>(count) + 6.0;
    auto windows = labeled_windows(behavior_recipe(b), duration, 100.0, seed);
    windows.resize(count);
    return windows;
}

}  // namespace

TEST_CASE("labeled windows carry their recipe's category") {
    const auto windows = recipe_windows(Behavior::Running, 5, 99);
    for (const Window& w : windows) {
        REQUIRE(w.label.has_value());
        CHECK(*w.label == "Running");
    }
}

TEST_CASE("walking windows peak near the gait frequency") {
    const SpectralConfig cfg;
    for (const Window& w : recipe_windows(Behavior::Walking, 10, 101)) {
        const auto peak = spectrum_peak(demean(w.accel_mag), cfg);
        CHECK(peak.frequency == doctest::Approx(2.0).epsilon(0.15));
    }
}

TEST_CASE("bus windows put their strongest sub-band in the vibration bands") {
    const SpectralConfig cfg;
    for (const Window& w : recipe_windows(Behavior::MovingBus, 10, 102)) {
        const auto bands = subband_summaries(demean(w.accel_mag), cfg);
        std::size_t best = 0;
        for (std::size_t b = 1; b < bands.size(); ++b)
            if (bands[b].peak_magnitude > bands[best].peak_magnitude) best = b;
        CHECK((best == 2 || best == 3));  // 20-30 or 30-40 Hz
    }
}

TEST_CASE("a silent stationary recipe produces near-zero spread features") {
    SignalRecipe quiet = behavior_recipe(Behavior::Stationary);
    quiet.accel.noise_sigma = 0.0;
    quiet.gyro.noise_sigma = 0.0;
    quiet.magn.noise_sigma = 0.0;
    quiet.baro.noise_sigma = 0.0;
    const SensorStream s = generate_imu(quiet, 10.0, 100.0, 103);
    const auto windows = segment(s, 4.0, 0.5);
    REQUIRE_FALSE(windows.empty());
    CHECK(range_of(windows[0].accel_mag) < 1e-9);
    CHECK(std_dev(windows[0].accel_mag) < 1e-9);
    CHECK(range_of(windows[0].baro) < 1e-9);
}

TEST_CASE("gnss recipes order indoor, intermediate and outdoor") {
    double mean_sum[3] = {0.0, 0.0, 0.0};
    double mean_sum25[3] = {0.0, 0.0, 0.0};
    double mean_sats[3] = {0.0, 0.0, 0.0};
    for (int cls = 0; cls < 3; ++cls) {
        const auto series = generate_gnss(
            environment_recipe(static_cast<Environment>(cls)), 200.0, 200 + cls);
        REQUIRE(series.epochs.size() == 200);
        for (const auto& e : series.epochs) {
            const auto fv = gnss_features(e);
            mean_sats[cls] += fv.values[0];
            mean_sum[cls] += fv.values[1];
            mean_sum25[cls] += fv.values[2];
        }
        mean_sats[cls] /= 200.0;
        mean_sum[cls] /= 200.0;
        mean_sum25[cls] /= 200.0;
    }
    CHECK(mean_sum[0] < mean_sum[1]);
    CHECK(mean_sum[1] < mean_sum[2]);
    CHECK(mean_sats[0] < mean_sats[2]);
    CHECK(mean_sum25[0] == doctest::Approx(0.0).epsilon(1.0));  // deep-indoor signature
    CHECK(mean_sum25[2] > 100.0);
}

TEST_CASE("zero-satellite recipe emits empty epochs with zero features") {
    GnssRecipe zero = environment_recipe(Environment::Indoor);
    zero.sat_count_min = 0;
    zero.sat_count_max = 0;
    const auto series = generate_gnss(zero, 5.0, 300);
    for (const auto& e : series.epochs) {
        CHECK(e.obs.empty());
        CHECK(gnss_features(e).values == std::vector<double>{0.0, 0.0, 0.0});
    }
}

TEST_CASE("identical seeds reproduce identical bytes") {
    const std::vector<ScenarioSegment> script = {
        {Behavior::Walking, Environment::Outdoor, 20.0},
        {Behavior::Stationary, Environment::Intermediate, 15.0},
    };
    std::ostringstream a_imu, a_gnss, a_truth, b_imu, b_gnss, b_truth;
    const ScenarioData a = generate_scenario(script, 777);
    const ScenarioData b = generate_scenario(script, 777);
    write_imu_log(a_imu, a.imu);
    write_imu_log(b_imu, b.imu);
    write_gnss_log(a_gnss, a.gnss);
    write_gnss_log(b_gnss, b.gnss);
    write_truth_csv(a_truth, a.truth);
    write_truth_csv(b_truth, b.truth);
    CHECK(a_imu.str() == b_imu.str());
    CHECK(a_gnss.str() == b_gnss.str());
    CHECK(a_truth.str() == b_truth.str());

    const ScenarioData c = generate_scenario(script, 778);
    std::ostringstream c_imu;
    write_imu_log(c_imu, c.imu);
    CHECK(a_imu.str() != c_imu.str());
}

TEST_CASE("scenario truth echoes the script") {
    const std::vector<ScenarioSegment> script = {
        {Behavior::Walking, Environment::Outdoor, 60.0},
        {Behavior::Stationary, Environment::Indoor, 60.0},
    };
    const ScenarioData data = generate_scenario(script, 5);
    REQUIRE(data.truth.size() == 120);
    CHECK(data.truth[0].behavior == Behavior::Walking);
    CHECK(data.truth[59].behavior == Behavior::Walking);
    CHECK(data.truth[60].behavior == Behavior::Stationary);
    CHECK(data.truth[60].t == 60.0);
    CHECK(data.truth[60].environment == Environment::Indoor);
    CHECK(data.imu.samples.size() == 12000);
    CHECK(data.gnss.epochs.size() == 120);
}

TEST_CASE("moving-vehicle to moving-vehicle scripts are rejected") {
    const std::vector<ScenarioSegment> script = {
        {Behavior::MovingBus, Environment::Outdoor, 30.0},
        {Behavior::MovingDieselTrain, Environment::Outdoor, 30.0},
    };
    CHECK_THROWS_AS(generate_scenario(script, 1), validation_error);

    const std::vector<ScenarioSegment> mended = {
        {Behavior::MovingBus, Environment::Outdoor, 30.0},
        {Behavior::StationaryVehicleEngineOn, Environment::Outdoor, 10.0},
        {Behavior::MovingDieselTrain, Environment::Outdoor, 30.0},
    };
    CHECK_NOTHROW(generate_scenario(mended, 1));

    const std::vector<ScenarioSegment> jump = {
        {Behavior::Running, Environment::Outdoor, 30.0},
        {Behavior::MovingUndergroundTrain, Environment::Outdoor, 30.0},
    };
    CHECK_THROWS_AS(generate_scenario(jump, 1), validation_error);
}

TEST_CASE("every behaviour pair separates by at least three pooled sigmas somewhere") {
    const SpectralConfig cfg;
    const std::size_t per_class = 200;
    std::vector<std::vector<std::vector<double>>> features(kNumBehaviors);

    for (std::size_t b = 0; b < kNumBehaviors; ++b) {
        const auto windows =
            recipe_windows(static_cast<Behavior>(b), per_class, 400 + b);
        for (const Window& w : windows)
            features[b].push_back(
                behaviour_features(w, ClassifierRole::VehicleMotion, cfg).values);
        // Vehicle-role schema spans F1-F16 + all sub-band features, the
        // broadest common view for the audit.
    }

    const std::size_t dims = features[0][0].size();
    for (std::size_t a = 0; a < kNumBehaviors; ++a) {
        for (std::size_t b = a + 1; b < kNumBehaviors; ++b) {
            double best_sep = 0.0;
            for (std::size_t f = 0; f < dims; ++f) {
                double ma = 0.0, mb = 0.0;
                for (const auto& row : features[a]) ma += row[f];
                for (const auto& row : features[b]) mb += row[f];
                ma /= static_cast<double>(per_class);
                mb /= static_cast<double>(per_class);
                double va = 0.0, vb = 0.0;
                for (const auto& row : features[a]) va += (row[f] - ma) * (row[f] - ma);
                for (const auto& row : features[b]) vb += (row[f] - mb) * (row[f] - mb);
                const double pooled =
                    std::sqrt((va + vb) / static_cast<double>(2 * per_class));
                if (pooled > 0.0)
                    best_sep = std::max(best_sep, std::abs(ma - mb) / pooled);
            }
            INFO("pair ", behavior_names()[a], " vs ", behavior_names()[b]);
            CHECK(best_sep >= 3.0);
        }
    }
}
