#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctxsense/common.hpp"
#include "ctxsense/pipeline.hpp"
#include "ctxsense/synth.hpp"

namespace ctxsense {

// Metrics at the 1 Hz output clock: argmax labels against the truth
// timeline, plus the per-transition response delay in epochs.

struct ClassMetrics {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    std::size_t support = 0;
};

struct ConfusionReport {
    std::vector<std::string> labels;
    Mat counts;  // rows = truth, columns = prediction
    double accuracy = 0.0;
    std::vector<ClassMetrics> per_class;
    std::size_t total = 0;
};

struct TransitionDelay {
    double at_t = 0.0;
    std::string to_label;
    double delay_epochs = 0.0;
    bool matched = false;  // false: capped at the segment length
};

struct EvalReport {
    ConfusionReport behavior;     // 9-way
    ConfusionReport groups;       // 5-way
    ConfusionReport environment;  // 3-way
    std::vector<TransitionDelay> behavior_delays;
    std::vector<TransitionDelay> environment_delays;
    double mean_behavior_delay = 0.0;
    double mean_environment_delay = 0.0;
    double mean_delay = 0.0;  // over all transitions of both streams
};

namespace eval_detail {

inline ConfusionReport make_confusion(const std::vector<std::string>& labels,
                                      const std::vector<std::pair<std::size_t, std::size_t>>&
                                          truth_pred) {
    ConfusionReport rep;
    rep.labels = labels;
    rep.counts = Mat(labels.size(), labels.size());
    std::size_t correct = 0;
    for (const auto& [truth, pred] : truth_pred) {
        rep.counts(truth, pred) += 1.0;
        if (truth == pred) ++correct;
    }
    rep.total = truth_pred.size();
    rep.accuracy = rep.total == 0
                       ? 0.0
                       : static_cast<double>(correct) / static_cast<double>(rep.total);
    for (std::size_t c = 0; c < labels.size(); ++c) {
        ClassMetrics m;
        m.label = labels[c];
        double row_sum = 0.0, col_sum = 0.0;
        for (std::size_t k = 0; k < labels.size(); ++k) {
            row_sum += rep.counts(c, k);
            col_sum += rep.counts(k, c);
        }
        m.support = static_cast<std::size_t>(row_sum);
        m.recall = row_sum > 0.0 ? rep.counts(c, c) / row_sum : 0.0;
        m.precision = col_sum > 0.0 ? rep.counts(c, c) / col_sum : 0.0;
        rep.per_class.push_back(std::move(m));
    }
    return rep;
}

// Response delay per truth change: epochs until the prediction stream first
// matches the new truth label, capped at the next change of the same stream.
template <typename TruthLabelFn, typename PredLookupFn>
inline std::vector<TransitionDelay> transition_delays(
    const std::vector<synth::TruthEpoch>& truth, TruthLabelFn truth_label,
    PredLookupFn pred_at, double first_pred_t, double last_pred_t) {
    std::vector<TransitionDelay> delays;
    for (std::size_t i = 1; i < truth.size(); ++i) {
        if (truth_label(truth[i]) == truth_label(truth[i - 1])) continue;
        const double tau = truth[i].t;
        if (tau < first_pred_t || tau > last_pred_t) continue;  // unmeasurable

        double next_change = truth.back().t + 1.0;
        for (std::size_t k = i + 1; k < truth.size(); ++k) {
            if (truth_label(truth[k]) != truth_label(truth[i])) {
                next_change = truth[k].t;
                break;
            }
        }

        TransitionDelay d;
        d.at_t = tau;
        d.to_label = truth_label(truth[i]);
        d.delay_epochs = next_change - tau;  // cap when never matched
        for (double t = tau; t < next_change && t <= last_pred_t; t += 1.0) {
            const std::optional<std::string> pred = pred_at(t);
            if (pred && *pred == d.to_label) {
                d.delay_epochs = t - tau;
                d.matched = true;
                break;
            }
        }
        delays.push_back(std::move(d));
    }
    return delays;
}

inline double mean_delay(const std::vector<TransitionDelay>& delays) {
    if (delays.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& d : delays) sum += d.delay_epochs;
    return sum / static_cast<double>(delays.size());
}

}  // namespace eval_detail

inline EvalReport evaluate(const std::vector<EpochRecord>& records,
                           const synth::TruthSeries& truth) {
    if (truth.epochs.empty()) throw precondition_error("evaluate: empty truth");
    if (records.empty()) throw alignment_error("evaluate: no run records");

    std::map<long long, const synth::TruthEpoch*> truth_map;
    for (const auto& e : truth.epochs)
        truth_map[static_cast<long long>(std::llround(e.t))] = &e;

    std::map<long long, const EpochRecord*> record_map;
    for (const auto& r : records)
        record_map[static_cast<long long>(std::llround(r.t))] = &r;

    std::vector<std::pair<std::size_t, std::size_t>> beh_pairs, grp_pairs, env_pairs;
    std::size_t aligned = 0;
    for (const auto& [sec, rec] : record_map) {
        const auto it = truth_map.find(sec);
        if (it == truth_map.end()) continue;
        ++aligned;
        const synth::TruthEpoch& te = *it->second;
        if (rec->has_behavior) {
            const auto pred = static_cast<std::size_t>(behavior_from_name(rec->behavior_argmax));
            const auto tr = static_cast<std::size_t>(te.behavior);
            beh_pairs.push_back({tr, pred});
            grp_pairs.push_back(
                {static_cast<std::size_t>(behavior_group(te.behavior)),
                 static_cast<std::size_t>(behavior_group(static_cast<Behavior>(pred)))});
        }
        if (rec->has_environment && rec->environment_mode == "pedestrian") {
            env_pairs.push_back(
                {static_cast<std::size_t>(te.environment),
                 static_cast<std::size_t>(environment_from_name(rec->env_argmax))});
        }
    }
    if (aligned == 0) throw alignment_error("evaluate: record and truth timelines do not overlap");

    EvalReport rep;
    {
        std::vector<std::string> labels(behavior_names().begin(), behavior_names().end());
        rep.behavior = eval_detail::make_confusion(labels, beh_pairs);
    }
    {
        std::vector<std::string> labels(behavior_group_names().begin(),
                                        behavior_group_names().end());
        rep.groups = eval_detail::make_confusion(labels, grp_pairs);
    }
    {
        std::vector<std::string> labels(environment_names().begin(), environment_names().end());
        rep.environment = eval_detail::make_confusion(labels, env_pairs);
    }

    const double first_t = records.front().t;
    const double last_t = records.back().t;
    rep.behavior_delays = eval_detail::transition_delays(
        truth.epochs,
        [](const synth::TruthEpoch& e) {
            return behavior_names()[static_cast<std::size_t>(e.behavior)];
        },
        [&](double t) -> std::optional<std::string> {
            const auto it = record_map.find(static_cast<long long>(std::llround(t)));
            if (it == record_map.end() || !it->second->has_behavior) return std::nullopt;
            return it->second->behavior_argmax;
        },
        first_t, last_t);
    rep.environment_delays = eval_detail::transition_delays(
        truth.epochs,
        [](const synth::TruthEpoch& e) {
            return environment_names()[static_cast<std::size_t>(e.environment)];
        },
        [&](double t) -> std::optional<std::string> {
            const auto it = record_map.find(static_cast<long long>(std::llround(t)));
            if (it == record_map.end() || !it->second->has_environment) return std::nullopt;
            return it->second->env_argmax;
        },
        first_t, last_t);

    rep.mean_behavior_delay = eval_detail::mean_delay(rep.behavior_delays);
    rep.mean_environment_delay = eval_detail::mean_delay(rep.environment_delays);
    std::vector<TransitionDelay> all = rep.behavior_delays;
    all.insert(all.end(), rep.environment_delays.begin(), rep.environment_delays.end());
    rep.mean_delay = eval_detail::mean_delay(all);
    return rep;
}

}  // namespace ctxsense
