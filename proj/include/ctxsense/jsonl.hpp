#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctxsense/pipeline.hpp"

namespace ctxsense {

// One JSON object per second on the output stream. Field order is fixed via
// ordered_json so identical runs emit identical bytes.

inline nlohmann::ordered_json record_to_json(const EpochRecord& rec) {
    nlohmann::ordered_json j;
    j["t"] = rec.t;
    if (rec.has_behavior) {
        nlohmann::ordered_json b;
        b["raw"] = rec.behavior_raw;
        b["filtered"] = rec.behavior_filtered;
        b["groups"] = rec.behavior_groups;
        b["argmax"] = rec.behavior_argmax;
        b["p_stat"] = rec.p_stat;
        j["behavior"] = std::move(b);
    } else {
        j["behavior"] = nullptr;
    }
    if (rec.has_environment) {
        nlohmann::ordered_json e;
        e["mode"] = rec.environment_mode;
        e["svm"] = rec.env_svm;
        e["emission"] = rec.env_emission;
        e["belief"] = rec.env_belief;
        e["argmax"] = rec.env_argmax;
        e["p_stat_used"] = rec.p_stat_used;
        j["environment"] = std::move(e);
    } else {
        j["environment"] = nullptr;
    }
    return j;
}

inline void write_records_jsonl(std::ostream& os, const std::vector<EpochRecord>& records) {
    for (const EpochRecord& rec : records) os << record_to_json(rec).dump() << '\n';
}

inline EpochRecord record_from_json(const nlohmann::json& j) {
    EpochRecord rec;
    rec.t = j.at("t").get<double>();
    if (!j.at("behavior").is_null()) {
        const auto& b = j.at("behavior");
        rec.has_behavior = true;
        rec.behavior_raw = b.at("raw").get<std::vector<double>>();
        rec.behavior_filtered = b.at("filtered").get<std::vector<double>>();
        rec.behavior_groups = b.at("groups").get<std::vector<double>>();
        rec.behavior_argmax = b.at("argmax").get<std::string>();
        rec.p_stat = b.at("p_stat").get<double>();
    }
    if (!j.at("environment").is_null()) {
        const auto& e = j.at("environment");
        rec.has_environment = true;
        rec.environment_mode = e.at("mode").get<std::string>();
        rec.env_svm = e.at("svm").get<std::vector<double>>();
        rec.env_emission = e.at("emission").get<std::vector<double>>();
        rec.env_belief = e.at("belief").get<std::vector<double>>();
        rec.env_argmax = e.at("argmax").get<std::string>();
        rec.p_stat_used = e.at("p_stat_used").get<double>();
    }
    return rec;
}

inline std::vector<EpochRecord> read_records_jsonl(std::istream& in) {
    std::vector<EpochRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw format_error("run output line " + std::to_string(line_no) + ": " +
                               e.what());
        }
    }
    return records;
}

}  // namespace ctxsense
