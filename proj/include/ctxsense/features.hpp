#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctxsense/common.hpp"
#include "ctxsense/fft.hpp"
#include "ctxsense/ingest.hpp"

namespace ctxsense {

// ---------------------------------------------------------------------------
// Classifier roles and feature schemas. Ids F1..F36 plus the GNSS triple are
// part of the model-file contract; order is fixed per role.
// ---------------------------------------------------------------------------

enum class ClassifierRole { HumanVehicle, HumanActivity, VehicleMotion, Environment };

inline const char* role_name(ClassifierRole role) {
    switch (role) {
        case ClassifierRole::HumanVehicle: return "human_vehicle";
        case ClassifierRole::HumanActivity: return "human_activity";
        case ClassifierRole::VehicleMotion: return "vehicle_motion";
        case ClassifierRole::Environment: return "environment";
    }
    throw precondition_error("unknown role");
}

inline ClassifierRole role_from_name(const std::string& name) {
    if (name == "human_vehicle") return ClassifierRole::HumanVehicle;
    if (name == "human_activity") return ClassifierRole::HumanActivity;
    if (name == "vehicle_motion") return ClassifierRole::VehicleMotion;
    if (name == "environment") return ClassifierRole::Environment;
    throw format_error("unknown classifier role '" + name + "'");
}

inline std::vector<std::string> feature_schema(ClassifierRole role) {
    std::vector<std::string> ids;
    auto add_range = [&ids](int lo, int hi) {
        for (int i = lo; i <= hi; ++i) ids.push_back("F" + std::to_string(i));
    };
    switch (role) {
        case ClassifierRole::HumanVehicle:
            add_range(1, 16);
            add_range(18, 21);
            break;
        case ClassifierRole::HumanActivity:
            add_range(1, 17);
            add_range(18, 21);
            break;
        case ClassifierRole::VehicleMotion:
            add_range(1, 16);
            add_range(22, 36);
            break;
        case ClassifierRole::Environment:
            ids = {"numSats", "sumCNR", "sumCNR25"};
            break;
    }
    return ids;
}

struct FeatureVector {
    ClassifierRole role = ClassifierRole::HumanVehicle;
    std::vector<double> values;  // ordered per feature_schema(role)
};

// ---------------------------------------------------------------------------
// Time-domain statistics (population forms)
// ---------------------------------------------------------------------------

inline double range_of(const std::vector<double>& series) {
    if (series.empty()) throw precondition_error("range_of: empty series");
    double lo = series[0], hi = series[0];
    for (double v : series) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi - lo;
}

inline double mean_of(const std::vector<double>& series) {
    if (series.empty()) throw precondition_error("mean_of: empty series");
    double s = 0.0;
    for (double v : series) s += v;
    return s / static_cast<double>(series.size());
}

inline double std_dev(const std::vector<double>& series) {
    if (series.empty()) throw precondition_error("std_dev: empty series");
    const double mu = mean_of(series);
    double acc = 0.0;
    for (double v : series) acc += (v - mu) * (v - mu);
    return std::sqrt(acc / static_cast<double>(series.size()));
}

// Third standardized moment; 0 by convention for constant series.
inline double skewness(const std::vector<double>& series) {
    if (series.empty()) throw precondition_error("skewness: empty series");
    const double mu = mean_of(series);
    const double sigma = std_dev(series);
    if (sigma == 0.0) return 0.0;
    double acc = 0.0;
    for (double v : series) acc += (v - mu) * (v - mu) * (v - mu);
    return acc / (static_cast<double>(series.size()) * sigma * sigma * sigma);
}

// Fourth standardized moment, no excess correction; 0 for constant series.
inline double kurtosis(const std::vector<double>& series) {
    if (series.empty()) throw precondition_error("kurtosis: empty series");
    const double mu = mean_of(series);
    const double sigma = std_dev(series);
    if (sigma == 0.0) return 0.0;
    double acc = 0.0;
    for (double v : series) {
        const double d = (v - mu) * (v - mu);
        acc += d * d;
    }
    return acc / (static_cast<double>(series.size()) * sigma * sigma * sigma * sigma);
}

// Fraction of adjacent pairs with opposite signs. Callers demean first: raw
// magnitudes are nonnegative and would never cross zero.
inline double zero_crossing_rate(const std::vector<double>& series) {
    if (series.size() < 2) throw precondition_error("zero_crossing_rate: need >= 2 samples");
    std::size_t crossings = 0;
    for (std::size_t i = 0; i + 1 < series.size(); ++i)
        if (series[i] * series[i + 1] < 0.0) ++crossings;
    return static_cast<double>(crossings) / static_cast<double>(series.size() - 1);
}

// ---------------------------------------------------------------------------
// Frequency-domain features. The estimator is the plain rectangular-window
// periodogram; spectral inputs are expected demeaned. One-sided spectrum,
// bin-centre frequencies in Hz.
// ---------------------------------------------------------------------------

struct SpectralConfig {
    double sample_rate = 100.0;
    std::vector<std::pair<double, double>> sub_bands = {
        {0.0, 10.0}, {10.0, 20.0}, {20.0, 30.0}, {30.0, 40.0}, {40.0, 50.0}};

    void validate() const {
        if (!(sample_rate > 0.0)) throw precondition_error("sample_rate must be positive");
        const double nyquist = sample_rate / 2.0;
        double prev_hi = 0.0;
        for (const auto& [lo, hi] : sub_bands) {
            if (!(lo < hi) || lo < 0.0 || hi > nyquist + 1e-12)
                throw precondition_error("sub-bands must be ordered within [0, Nyquist]");
            if (lo < prev_hi - 1e-12)
                throw precondition_error("sub-bands must not overlap");
            prev_hi = hi;
        }
    }
};

struct SpectrumPeak {
    double magnitude = 0.0;
    double frequency = 0.0;  // Hz
};

namespace detail {

// Bands are [low, high) except the last configured band, which includes its
// upper edge so Nyquist belongs somewhere.
inline bool in_band(double freq, double lo, double hi, bool closes_high) {
    if (closes_high) return freq >= lo - 1e-12 && freq <= hi + 1e-12;
    return freq >= lo - 1e-12 && freq < hi - 1e-12;
}

}  // namespace detail

inline SpectrumPeak spectrum_peak(const std::vector<double>& series,
                                  const SpectralConfig& cfg,
                                  std::optional<std::pair<double, double>> band = {}) {
    if (series.size() < 2) throw precondition_error("spectrum_peak: need >= 2 samples");
    const double nyquist = cfg.sample_rate / 2.0;
    if (band) {
        if (band->first < 0.0 || band->second > nyquist + 1e-12 || !(band->first < band->second))
            throw precondition_error("spectrum_peak: band outside [0, Nyquist]");
    }
    const auto mag = magnitude_spectrum(series);
    const double df = cfg.sample_rate / static_cast<double>(series.size());

    SpectrumPeak best;
    bool found = false;
    for (std::size_t k = 0; k < mag.size(); ++k) {
        const double freq = df * static_cast<double>(k);
        // An explicit band is a closed interval; only the sub-band partition
        // uses half-open edges to keep adjacent bands disjoint.
        if (band && !detail::in_band(freq, band->first, band->second, /*closes_high=*/true))
            continue;
        if (!found || mag[k] > best.magnitude) {  // strict > keeps ties on lower bins
            best = {mag[k], freq};
            found = true;
        }
    }
    if (!found) throw precondition_error("spectrum_peak: band contains no DFT bin");
    return best;
}

// Periodogram S(w_k) = (dt^2 / T) |X_k|^2 at the one-sided DFT frequencies,
// raw per-bin values (no interior-bin doubling).
inline std::vector<double> psd(const std::vector<double>& series, const SpectralConfig& cfg) {
    if (series.empty()) throw precondition_error("psd: empty series");
    const double dt = 1.0 / cfg.sample_rate;
    const double total_time = dt * static_cast<double>(series.size());
    const auto mag = magnitude_spectrum(series);
    std::vector<double> out(mag.size());
    for (std::size_t k = 0; k < mag.size(); ++k)
        out[k] = dt * dt / total_time * mag[k] * mag[k];
    return out;
}

struct SubbandSummary {
    double peak_magnitude = 0.0;
    double psd_sum = 0.0;
};

inline std::vector<SubbandSummary> subband_summaries(const std::vector<double>& series,
                                                     const SpectralConfig& cfg) {
    if (series.size() < 2) throw precondition_error("subband_summaries: need >= 2 samples");
    cfg.validate();
    const auto mag = magnitude_spectrum(series);
    const double dt = 1.0 / cfg.sample_rate;
    const double total_time = dt * static_cast<double>(series.size());
    const double df = cfg.sample_rate / static_cast<double>(series.size());

    std::vector<SubbandSummary> out(cfg.sub_bands.size());
    for (std::size_t b = 0; b < cfg.sub_bands.size(); ++b) {
        const auto [lo, hi] = cfg.sub_bands[b];
        const bool last = b + 1 == cfg.sub_bands.size();
        for (std::size_t k = 0; k < mag.size(); ++k) {
            const double freq = df * static_cast<double>(k);
            if (!detail::in_band(freq, lo, hi, last)) continue;
            out[b].peak_magnitude = std::max(out[b].peak_magnitude, mag[k]);
            out[b].psd_sum += dt * dt / total_time * mag[k] * mag[k];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Per-role feature assembly
// ---------------------------------------------------------------------------

inline FeatureVector behaviour_features(const Window& window, ClassifierRole role,
                                        const SpectralConfig& cfg) {
    if (role == ClassifierRole::Environment)
        throw precondition_error("behaviour_features: environment role uses gnss_features");
    if (window.accel_mag.size() != window.length_samples ||
        window.gyro_mag.size() != window.length_samples ||
        window.magn_mag.size() != window.length_samples ||
        window.baro.size() != window.length_samples || window.length_samples < 2)
        throw precondition_error("behaviour_features: malformed window");

    FeatureVector fv;
    fv.role = role;

    const std::array<const std::vector<double>*, 4> channels = {
        &window.accel_mag, &window.gyro_mag, &window.magn_mag, &window.baro};

    // F1-F16: range, sigma, skewness, kurtosis over acc/gyro/magn/baro.
    for (const auto* ch : channels) fv.values.push_back(range_of(*ch));
    for (const auto* ch : channels) fv.values.push_back(std_dev(*ch));
    for (const auto* ch : channels) fv.values.push_back(skewness(*ch));
    for (const auto* ch : channels) fv.values.push_back(kurtosis(*ch));

    const std::vector<double> acc_dm = demean(window.accel_mag);
    const std::vector<double> gyro_dm = demean(window.gyro_mag);

    if (role == ClassifierRole::HumanActivity)
        fv.values.push_back(zero_crossing_rate(acc_dm));  // F17

    if (role == ClassifierRole::VehicleMotion) {
        // F22-F36: per-band peak magnitudes (acc, gyro) and PSD sums (acc).
        const auto acc_bands = subband_summaries(acc_dm, cfg);
        const auto gyro_bands = subband_summaries(gyro_dm, cfg);
        for (const auto& b : acc_bands) fv.values.push_back(b.peak_magnitude);
        for (const auto& b : gyro_bands) fv.values.push_back(b.peak_magnitude);
        for (const auto& b : acc_bands) fv.values.push_back(b.psd_sum);
    } else {
        // F18-F21: whole-spectrum peak magnitude and its frequency, acc and gyro.
        const SpectrumPeak pa = spectrum_peak(acc_dm, cfg);
        const SpectrumPeak pg = spectrum_peak(gyro_dm, cfg);
        fv.values.push_back(pa.magnitude);
        fv.values.push_back(pg.magnitude);
        fv.values.push_back(pa.frequency);
        fv.values.push_back(pg.frequency);
    }

    return fv;
}

// [numSats, sumCNR, sumCNR25]; the third sums C/N0 strictly above threshold.
inline FeatureVector gnss_features(const GnssEpoch& epoch, double cn0_threshold = 25.0) {
    FeatureVector fv;
    fv.role = ClassifierRole::Environment;
    double sum = 0.0;
    double sum_above = 0.0;
    for (const SatelliteObs& o : epoch.obs) {
        sum += o.cn0;
        if (o.cn0 > cn0_threshold) sum_above += o.cn0;
    }
    fv.values = {static_cast<double>(epoch.obs.size()), sum, sum_above};
    return fv;
}

// ---------------------------------------------------------------------------
// Per-feature z-score normalization, fitted on the training set and stored in
// the model file so inference applies the identical transform.
// ---------------------------------------------------------------------------

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) throw precondition_error("Standardizer::fit: no rows");
        const std::size_t d = rows[0].size();
        Standardizer s;
        s.mean.assign(d, 0.0);
        s.scale.assign(d, 0.0);
        for (const auto& r : rows) {
            if (r.size() != d) throw schema_error("Standardizer::fit: ragged rows");
            for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j];
        }
        for (double& m : s.mean) m /= static_cast<double>(rows.size());
        for (const auto& r : rows)
            for (std::size_t j = 0; j < d; ++j) {
                const double dlt = r[j] - s.mean[j];
                s.scale[j] += dlt * dlt;
            }
        for (double& v : s.scale) {
            v = std::sqrt(v / static_cast<double>(rows.size()));
            if (v < 1e-12) v = 1.0;  // constant feature: pass through centred
        }
        return s;
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        if (x.size() != mean.size()) throw schema_error("Standardizer: dimension mismatch");
        std::vector<double> out(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
        return out;
    }
};

}  // namespace ctxsense
