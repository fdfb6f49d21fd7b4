#pragma once

#include <charconv>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ctxsense/common.hpp"

namespace ctxsense {

inline constexpr const char* kCsvVersionLine = "# ctxsense-v1";
inline constexpr const char* kImuCsvHeader = "t,ax,ay,az,gx,gy,gz,mx,my,mz,p";
inline constexpr const char* kGnssCsvHeader = "t,prn,cn0,az,el";

struct ImuSample {
    double t = 0.0;   // seconds, strictly increasing within a stream
    Vec3 accel;       // m/s^2
    Vec3 gyro;        // rad/s
    Vec3 magn;        // uT
    double baro = 0.0;  // hPa
};

struct SensorStream {
    std::vector<ImuSample> samples;
    double nominal_rate = 100.0;  // Hz
    // Indices i where t[i+1] - t[i] exceeds two nominal sample intervals.
    std::vector<std::size_t> discontinuities;
    std::size_t bad_rows = 0;

    void detect_discontinuities() {
        discontinuities.clear();
        if (nominal_rate <= 0.0) throw precondition_error("nominal_rate must be positive");
        const double limit = 2.0 / nominal_rate;
        for (std::size_t i = 0; i + 1 < samples.size(); ++i)
            if (samples[i + 1].t - samples[i].t > limit) discontinuities.push_back(i);
    }
};

struct SatelliteObs {
    std::string prn;
    double cn0 = 0.0;      // dB-Hz, >= 0
    double azimuth = 0.0;  // deg [0, 360)
    double elevation = 0.0;  // deg [0, 90]
};

struct GnssEpoch {
    double t = 0.0;
    std::vector<SatelliteObs> obs;  // may be empty (deep indoor)
};

struct GnssEpochSeries {
    std::vector<GnssEpoch> epochs;
    std::size_t bad_rows = 0;
};

// One fixed-length segment of per-channel scalar series; the unit of feature
// extraction. Channels hold Eq-style vector magnitudes except baro, which is
// the raw pressure.
struct Window {
    double start_t = 0.0;
    std::size_t length_samples = 0;
    std::vector<double> accel_mag;
    std::vector<double> gyro_mag;
    std::vector<double> magn_mag;
    std::vector<double> baro;
    std::optional<std::string> label;  // training only
};

// ---------------------------------------------------------------------------
// Scalar-series preprocessing
// ---------------------------------------------------------------------------

inline std::vector<double> demean(const std::vector<double>& series) {
    if (series.empty()) throw precondition_error("demean: empty series");
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(series.size());
    std::vector<double> out(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) out[i] = series[i] - mean;
    return out;
}

// ---------------------------------------------------------------------------
// Windowing. Index-based segmentation: stride = L * (1 - overlap) samples,
// trailing partial window dropped, windows straddling a recorded
// discontinuity dropped.
// ---------------------------------------------------------------------------

inline std::vector<Window> segment(const SensorStream& stream, double window_s,
                                   double overlap) {
    if (!(overlap >= 0.0 && overlap < 1.0))
        throw precondition_error("segment: overlap must be in [0, 1)");
    const double samples_f = window_s * stream.nominal_rate;
    const auto length = static_cast<std::size_t>(std::llround(samples_f));
    if (length == 0 || std::abs(samples_f - static_cast<double>(length)) > 1e-9)
        throw precondition_error("segment: window_s * rate must be a positive integer");

    std::vector<Window> out;
    const std::size_t n = stream.samples.size();
    if (n < length) return out;

    auto stride = static_cast<std::size_t>(
        std::llround(static_cast<double>(length) * (1.0 - overlap)));
    if (stride == 0) stride = 1;

    std::size_t next_disc = 0;
    for (std::size_t start = 0; start + length <= n; start += stride) {
        // Skip windows that contain a gap.
        bool broken = false;
        while (next_disc < stream.discontinuities.size() &&
               stream.discontinuities[next_disc] + 1 < start)
            ++next_disc;
        for (std::size_t d = next_disc; d < stream.discontinuities.size(); ++d) {
            const std::size_t idx = stream.discontinuities[d];
            if (idx >= start + length - 1) break;
            if (idx >= start) {
                broken = true;
                break;
            }
        }
        if (broken) continue;

        Window w;
        w.start_t = stream.samples[start].t;
        w.length_samples = length;
        w.accel_mag.reserve(length);
        w.gyro_mag.reserve(length);
        w.magn_mag.reserve(length);
        w.baro.reserve(length);
        for (std::size_t i = start; i < start + length; ++i) {
            const ImuSample& s = stream.samples[i];
            w.accel_mag.push_back(magnitude(s.accel));
            w.gyro_mag.push_back(magnitude(s.gyro));
            w.magn_mag.push_back(magnitude(s.magn));
            w.baro.push_back(s.baro);
        }
        out.push_back(std::move(w));
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV parsing
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(pos));
            break;
        }
        fields.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return fields;
}

inline bool parse_double(std::string_view s, double& out) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    if (s.empty()) return false;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

inline std::string strip_eol(std::string line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    return line;
}

inline void check_preamble(std::istream& in, const char* expected_header,
                           const char* what) {
    std::string line;
    if (!std::getline(in, line)) throw corrupt_input_error(std::string(what) + ": empty file");
    if (strip_eol(line) != kCsvVersionLine)
        throw format_error(std::string(what) + ": missing '" + kCsvVersionLine +
                           "' version line");
    if (!std::getline(in, line))
        throw corrupt_input_error(std::string(what) + ": missing header row");
    if (strip_eol(line) != expected_header)
        throw format_error(std::string(what) + ": unexpected header '" + strip_eol(line) +
                           "'");
}

}  // namespace detail

struct ParseOptions {
    double max_bad_row_ratio = 0.10;
    double nominal_rate = 100.0;
};

inline SensorStream parse_imu_log(std::istream& in, const ParseOptions& opt = {}) {
    detail::check_preamble(in, kImuCsvHeader, "imu log");

    SensorStream stream;
    stream.nominal_rate = opt.nominal_rate;
    std::string line;
    std::size_t total_rows = 0;
    while (std::getline(in, line)) {
        const std::string clean = detail::strip_eol(line);
        if (clean.empty() || clean.front() == '#') continue;
        ++total_rows;
        const auto fields = detail::split_csv(clean);
        double v[11];
        bool ok = fields.size() == 11;
        for (std::size_t i = 0; ok && i < 11; ++i) ok = detail::parse_double(fields[i], v[i]);
        if (!ok) {
            ++stream.bad_rows;
            continue;
        }
        ImuSample s;
        s.t = v[0];
        s.accel = {v[1], v[2], v[3]};
        s.gyro = {v[4], v[5], v[6]};
        s.magn = {v[7], v[8], v[9]};
        s.baro = v[10];
        stream.samples.push_back(s);
    }
    if (total_rows == 0) throw corrupt_input_error("imu log: no data rows");
    if (static_cast<double>(stream.bad_rows) >
        opt.max_bad_row_ratio * static_cast<double>(total_rows))
        throw corrupt_input_error("imu log: bad-row ratio above threshold (" +
                                  std::to_string(stream.bad_rows) + "/" +
                                  std::to_string(total_rows) + ")");
    std::stable_sort(stream.samples.begin(), stream.samples.end(),
                     [](const ImuSample& a, const ImuSample& b) { return a.t < b.t; });
    stream.detect_discontinuities();
    return stream;
}

inline GnssEpochSeries parse_gnss_log(std::istream& in, const ParseOptions& opt = {}) {
    detail::check_preamble(in, kGnssCsvHeader, "gnss log");

    struct Row {
        double t;
        std::optional<SatelliteObs> obs;  // nullopt: zero-satellite marker row
    };
    std::vector<Row> rows;
    std::string line;
    std::size_t total_rows = 0;
    std::size_t bad_rows = 0;
    while (std::getline(in, line)) {
        const std::string clean = detail::strip_eol(line);
        if (clean.empty() || clean.front() == '#') continue;
        ++total_rows;
        const auto fields = detail::split_csv(clean);
        if (fields.size() != 5) {
            ++bad_rows;
            continue;
        }
        double t;
        if (!detail::parse_double(fields[0], t)) {
            ++bad_rows;
            continue;
        }
        if (fields[1] == "-") {
            rows.push_back({t, std::nullopt});
            continue;
        }
        SatelliteObs obs;
        obs.prn = std::string(fields[1]);
        if (!detail::parse_double(fields[2], obs.cn0) ||
            !detail::parse_double(fields[3], obs.azimuth) ||
            !detail::parse_double(fields[4], obs.elevation) || obs.cn0 < 0.0) {
            ++bad_rows;
            continue;
        }
        rows.push_back({t, std::move(obs)});
    }
    if (total_rows == 0) throw corrupt_input_error("gnss log: no data rows");
    if (static_cast<double>(bad_rows) > opt.max_bad_row_ratio * static_cast<double>(total_rows))
        throw corrupt_input_error("gnss log: bad-row ratio above threshold");

    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.t < b.t; });

    GnssEpochSeries series;
    series.bad_rows = bad_rows;
    for (auto& row : rows) {
        if (series.epochs.empty() || series.epochs.back().t != row.t) {
            series.epochs.push_back(GnssEpoch{row.t, {}});
        }
        if (row.obs) series.epochs.back().obs.push_back(std::move(*row.obs));
    }
    return series;
}

// ---------------------------------------------------------------------------
// CSV writing. %.17g keeps doubles round-trip exact, which the parse/serialize
// identity and the byte-determinism contract both rely on.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline void write_imu_log(std::ostream& out, const SensorStream& stream) {
    out << kCsvVersionLine << '\n' << kImuCsvHeader << '\n';
    for (const ImuSample& s : stream.samples) {
        out << detail::fmt_double(s.t) << ',' << detail::fmt_double(s.accel.x) << ','
            << detail::fmt_double(s.accel.y) << ',' << detail::fmt_double(s.accel.z) << ','
            << detail::fmt_double(s.gyro.x) << ',' << detail::fmt_double(s.gyro.y) << ','
            << detail::fmt_double(s.gyro.z) << ',' << detail::fmt_double(s.magn.x) << ','
            << detail::fmt_double(s.magn.y) << ',' << detail::fmt_double(s.magn.z) << ','
            << detail::fmt_double(s.baro) << '\n';
    }
}

inline void write_gnss_log(std::ostream& out, const GnssEpochSeries& series) {
    out << kCsvVersionLine << '\n' << kGnssCsvHeader << '\n';
    for (const GnssEpoch& e : series.epochs) {
        if (e.obs.empty()) {
            out << detail::fmt_double(e.t) << ",-,-,-,-\n";
            continue;
        }
        for (const SatelliteObs& o : e.obs) {
            out << detail::fmt_double(e.t) << ',' << o.prn << ','
                << detail::fmt_double(o.cn0) << ',' << detail::fmt_double(o.azimuth) << ','
                << detail::fmt_double(o.elevation) << '\n';
        }
    }
}

}  // namespace ctxsense
