#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctxsense/behavior.hpp"
#include "ctxsense/common.hpp"
#include "ctxsense/environment.hpp"
#include "ctxsense/ingest.hpp"

namespace ctxsense::synth {

// Deterministic, seeded generators for labeled IMU and GNSS streams. Recipes
// encode only the documented discriminative structure: locomotion
// periodicity at a few Hz, vehicle vibration in the 20-40 Hz band, barometric
// ramps on stairs, and the satellite-count / C/N0 separation between indoor,
// intermediate and outdoor reception.

struct Tone {
    double freq_hz = 0.0;
    double amplitude = 0.0;
};

struct ChannelModel {
    double baseline = 0.0;
    std::vector<Tone> tones;
    double noise_sigma = 0.0;
    double ramp_per_s = 0.0;
};

struct SignalRecipe {
    Behavior category = Behavior::Stationary;
    ChannelModel accel;  // on top of gravity along z
    ChannelModel gyro;   // along x
    ChannelModel magn;   // variation along x over a fixed field
    ChannelModel baro;
};

inline SignalRecipe behavior_recipe(Behavior category) {
    SignalRecipe r;
    r.category = category;
    r.baro = {1013.25, {}, 0.02, 0.0};
    switch (category) {
        case Behavior::Stationary:
            r.accel = {0.0, {}, 0.03, 0.0};
            r.gyro = {0.02, {}, 0.01, 0.0};
            r.magn = {0.0, {}, 0.05, 0.0};
            break;
        case Behavior::Walking:
            r.accel = {0.0, {{2.0, 1.5}}, 0.15, 0.0};
            r.gyro = {1.2, {{2.0, 0.6}}, 0.10, 0.0};
            r.magn = {0.0, {{1.0, 1.5}}, 0.30, 0.0};
            break;
        case Behavior::Running:
            r.accel = {0.0, {{3.0, 3.5}}, 0.30, 0.0};
            r.gyro = {2.5, {{3.0, 1.2}}, 0.20, 0.0};
            r.magn = {0.0, {{1.5, 2.5}}, 0.50, 0.0};
            break;
        case Behavior::AscendingStairs:
            r.accel = {0.0, {{1.6, 1.1}}, 0.15, 0.0};
            r.gyro = {1.0, {{1.6, 0.5}}, 0.10, 0.0};
            r.magn = {0.0, {{0.8, 1.2}}, 0.30, 0.0};
            r.baro = {1013.25, {}, 0.02, -0.06};  // pressure falls while climbing
            break;
        case Behavior::DescendingStairs:
            r.accel = {0.0, {{1.9, 1.8}}, 0.18, 0.0};
            r.gyro = {1.4, {{1.9, 0.7}}, 0.12, 0.0};
            r.magn = {0.0, {{0.95, 1.4}}, 0.30, 0.0};
            r.baro = {1013.25, {}, 0.02, 0.06};
            break;
        case Behavior::StationaryVehicleEngineOn:
            r.accel = {0.0, {{27.0, 0.5}}, 0.10, 0.0};
            r.gyro = {0.05, {{0.3, 0.02}}, 0.02, 0.0};
            r.magn = {0.0, {{0.3, 0.3}}, 0.30, 0.0};
            break;
        case Behavior::MovingDieselTrain:
            r.accel = {0.0, {{24.0, 1.3}, {0.7, 0.5}}, 0.25, 0.0};
            r.gyro = {0.25, {{0.7, 0.10}}, 0.05, 0.0};
            r.magn = {0.0, {{0.4, 1.5}}, 0.80, 0.0};
            r.baro = {1013.25, {}, 0.05, 0.0};
            break;
        case Behavior::MovingBus:
            r.accel = {0.0, {{33.0, 1.1}, {1.3, 0.6}}, 0.25, 0.0};
            r.gyro = {0.45, {{1.3, 0.20}}, 0.08, 0.0};
            r.magn = {0.0, {{0.5, 0.8}}, 0.40, 0.0};
            r.baro = {1013.25, {}, 0.05, 0.0};
            break;
        case Behavior::MovingUndergroundTrain:
            // Electric traction shows up strongly on the magnetometer; tunnel
            // pressure transients make baro noisier than other vehicles.
            r.accel = {0.0, {{36.0, 1.5}, {0.9, 0.35}}, 0.30, 0.0};
            r.gyro = {0.15, {{0.9, 0.05}}, 0.04, 0.0};
            r.magn = {0.0, {{0.6, 5.0}}, 2.00, 0.0};
            r.baro = {1013.25, {}, 0.08, 0.0};
            break;
    }
    return r;
}

struct GnssRecipe {
    Environment cls = Environment::Outdoor;
    int sat_count_min = 0;
    int sat_count_max = 0;
    double cn0_mean = 0.0;
    double cn0_sigma = 0.0;
    double cn0_clip_lo = 0.0;
    double cn0_clip_hi = 0.0;
};

inline GnssRecipe environment_recipe(Environment cls) {
    switch (cls) {
        case Environment::Indoor:
            return {cls, 0, 4, 15.0, 3.0, 5.0, 26.0};
        case Environment::Intermediate:
            return {cls, 4, 8, 32.0, 6.0, 10.0, 45.0};
        case Environment::Outdoor:
            return {cls, 8, 12, 40.0, 4.0, 25.0, 52.0};
    }
    throw precondition_error("unknown environment class");
}

namespace detail {

inline double sample_channel(const ChannelModel& ch, const std::vector<double>& phases,
                             double t, double local_t, Rng& rng) {
    double v = ch.baseline + ch.ramp_per_s * local_t;
    for (std::size_t i = 0; i < ch.tones.size(); ++i)
        v += ch.tones[i].amplitude *
             std::sin(2.0 * 3.14159265358979323846 * ch.tones[i].freq_hz * t + phases[i]);
    if (ch.noise_sigma > 0.0) v += rng.normal(0.0, ch.noise_sigma);
    return v;
}

struct ChannelPhases {
    std::vector<double> accel, gyro, magn, baro;
};

inline ChannelPhases draw_phases(const SignalRecipe& r, Rng& rng) {
    auto draw = [&rng](const ChannelModel& ch) {
        std::vector<double> p(ch.tones.size());
        for (double& v : p) v = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        return p;
    };
    return {draw(r.accel), draw(r.gyro), draw(r.magn), draw(r.baro)};
}

// One IMU sample; `t` drives the oscillators, `local_t` the in-segment ramps.
inline ImuSample make_sample(const SignalRecipe& r, const ChannelPhases& ph, double t,
                             double local_t, double baro_offset, Rng& rng) {
    ImuSample s;
    s.t = t;
    const double az = sample_channel(r.accel, ph.accel, t, local_t, rng);
    s.accel = {rng.normal(0.0, 0.3 * r.accel.noise_sigma),
               rng.normal(0.0, 0.3 * r.accel.noise_sigma), 9.81 + az};
    const double gx = sample_channel(r.gyro, ph.gyro, t, local_t, rng);
    s.gyro = {gx, rng.normal(0.0, 0.3 * r.gyro.noise_sigma),
              rng.normal(0.0, 0.3 * r.gyro.noise_sigma)};
    const double mx = sample_channel(r.magn, ph.magn, t, local_t, rng);
    s.magn = {40.0 + mx, 20.0 + rng.normal(0.0, 0.5 * r.magn.noise_sigma),
              10.0 + rng.normal(0.0, 0.5 * r.magn.noise_sigma)};
    s.baro = baro_offset + sample_channel(r.baro, ph.baro, t, local_t, rng);
    return s;
}

}  // namespace detail

inline SensorStream generate_imu(const SignalRecipe& recipe, double duration_s,
                                 double rate_hz, std::uint64_t seed) {
    if (!(duration_s > 0.0) || !(rate_hz > 0.0))
        throw precondition_error("generate_imu: duration and rate must be positive");
    SensorStream stream;
    stream.nominal_rate = rate_hz;
    Rng rng(seed);
    const auto phases = detail::draw_phases(recipe, rng);
    const auto n = static_cast<std::size_t>(std::llround(duration_s * rate_hz));
    stream.samples.reserve(n);
    const double dt = 1.0 / rate_hz;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        stream.samples.push_back(detail::make_sample(recipe, phases, t, t, 0.0, rng));
    }
    return stream;
}

// Category-labeled training windows straight from a recipe.
inline std::vector<Window> labeled_windows(const SignalRecipe& recipe, double duration_s,
                                           double rate_hz, std::uint64_t seed,
                                           double window_s = 4.0, double overlap = 0.5) {
    const SensorStream stream = generate_imu(recipe, duration_s, rate_hz, seed);
    std::vector<Window> windows = segment(stream, window_s, overlap);
    const std::string& name =
        behavior_names()[static_cast<std::size_t>(recipe.category)];
    for (Window& w : windows) w.label = name;
    return windows;
}

inline GnssEpochSeries generate_gnss(const GnssRecipe& recipe, double duration_s,
                                     std::uint64_t seed, double start_t = 0.0) {
    if (!(duration_s > 0.0)) throw precondition_error("generate_gnss: duration must be positive");
    GnssEpochSeries series;
    Rng rng(seed);
    const auto n = static_cast<std::size_t>(std::llround(duration_s));
    for (std::size_t k = 0; k < n; ++k) {
        GnssEpoch epoch;
        epoch.t = start_t + static_cast<double>(k);
        const auto count = static_cast<int>(
            rng.uniform_int(recipe.sat_count_min, recipe.sat_count_max));
        for (int s = 0; s < count; ++s) {
            SatelliteObs obs;
            obs.prn = "G" + std::to_string(1 + s);
            obs.cn0 = std::clamp(rng.normal(recipe.cn0_mean, recipe.cn0_sigma),
                                 recipe.cn0_clip_lo, recipe.cn0_clip_hi);
            obs.azimuth = rng.uniform(0.0, 360.0);
            obs.elevation = rng.uniform(5.0, 90.0);
            epoch.obs.push_back(obs);
        }
        series.epochs.push_back(std::move(epoch));
    }
    return series;
}

// ---------------------------------------------------------------------------
// Multi-context scenarios
// ---------------------------------------------------------------------------

struct ScenarioSegment {
    Behavior behavior = Behavior::Stationary;
    Environment environment = Environment::Outdoor;
    double duration_s = 0.0;
};

struct TruthEpoch {
    double t = 0.0;
    Behavior behavior = Behavior::Stationary;
    Environment environment = Environment::Outdoor;
};

struct ScenarioData {
    SensorStream imu;
    GnssEpochSeries gnss;
    std::vector<TruthEpoch> truth;  // one row per second
};

inline void validate_script(const std::vector<ScenarioSegment>& script) {
    if (script.empty()) throw validation_error("scenario script is empty");
    for (const auto& seg : script)
        if (!(seg.duration_s >= 1.0))
            throw validation_error("scenario segments must last at least 1 s");
    for (std::size_t i = 0; i + 1 < script.size(); ++i) {
        if (!directly_connected(script[i].behavior, script[i + 1].behavior))
            throw validation_error(
                "impossible direct transition at segment boundary " + std::to_string(i) +
                ": " + behavior_names()[static_cast<std::size_t>(script[i].behavior)] +
                " -> " +
                behavior_names()[static_cast<std::size_t>(script[i + 1].behavior)]);
    }
}

inline ScenarioData generate_scenario(const std::vector<ScenarioSegment>& script,
                                      std::uint64_t seed, double rate_hz = 100.0) {
    validate_script(script);

    ScenarioData out;
    out.imu.nominal_rate = rate_hz;
    const double dt = 1.0 / rate_hz;
    double t0 = 0.0;
    double baro_offset = 0.0;  // altitude drift carries across segments

    for (std::size_t si = 0; si < script.size(); ++si) {
        const ScenarioSegment& seg = script[si];
        const SignalRecipe recipe = behavior_recipe(seg.behavior);
        Rng imu_rng(seed * 1000003ULL + si * 7919ULL + 1);
        const auto phases = detail::draw_phases(recipe, imu_rng);
        const auto n_samples = static_cast<std::size_t>(std::llround(seg.duration_s * rate_hz));
        for (std::size_t i = 0; i < n_samples; ++i) {
            const double local_t = static_cast<double>(i) * dt;
            out.imu.samples.push_back(detail::make_sample(recipe, phases, t0 + local_t,
                                                          local_t, baro_offset, imu_rng));
        }
        baro_offset += recipe.baro.ramp_per_s * seg.duration_s;

        const GnssRecipe gnss_recipe = environment_recipe(seg.environment);
        GnssEpochSeries seg_gnss =
            generate_gnss(gnss_recipe, seg.duration_s, seed * 1000003ULL + si * 7919ULL + 2,
                          t0);
        for (auto& e : seg_gnss.epochs) out.gnss.epochs.push_back(std::move(e));

        const auto n_seconds = static_cast<std::size_t>(std::llround(seg.duration_s));
        for (std::size_t k = 0; k < n_seconds; ++k)
            out.truth.push_back({t0 + static_cast<double>(k), seg.behavior, seg.environment});

        t0 += seg.duration_s;
    }
    out.imu.detect_discontinuities();
    return out;
}

inline void write_truth_csv(std::ostream& os, const std::vector<TruthEpoch>& truth) {
    os << kCsvVersionLine << '\n' << "t,behavior,environment\n";
    for (const TruthEpoch& e : truth)
        os << ctxsense::detail::fmt_double(e.t) << ','
           << behavior_names()[static_cast<std::size_t>(e.behavior)] << ','
           << environment_names()[static_cast<std::size_t>(e.environment)] << '\n';
}

struct TruthSeries {
    std::vector<TruthEpoch> epochs;
};

inline TruthSeries parse_truth_csv(std::istream& in) {
    ctxsense::detail::check_preamble(in, "t,behavior,environment", "truth csv");
    TruthSeries series;
    std::string line;
    while (std::getline(in, line)) {
        const std::string clean = ctxsense::detail::strip_eol(line);
        if (clean.empty() || clean.front() == '#') continue;
        const auto fields = ctxsense::detail::split_csv(clean);
        if (fields.size() != 3) throw corrupt_input_error("truth csv: malformed row");
        TruthEpoch e;
        if (!ctxsense::detail::parse_double(fields[0], e.t))
            throw corrupt_input_error("truth csv: bad timestamp");
        e.behavior = behavior_from_name(std::string(fields[1]));
        e.environment = environment_from_name(std::string(fields[2]));
        series.epochs.push_back(e);
    }
    if (series.epochs.empty()) throw corrupt_input_error("truth csv: no rows");
    return series;
}

}  // namespace ctxsense::synth
