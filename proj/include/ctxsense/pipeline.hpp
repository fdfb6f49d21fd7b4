#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctxsense/behavior.hpp"
#include "ctxsense/common.hpp"
#include "ctxsense/environment.hpp"
#include "ctxsense/features.hpp"
#include "ctxsense/ingest.hpp"
#include "ctxsense/model_io.hpp"
#include "ctxsense/synth.hpp"

namespace ctxsense {

enum class PipelineMode { Pedestrian, Vehicle, Auto };

inline const char* pipeline_mode_name(PipelineMode m) {
    switch (m) {
        case PipelineMode::Pedestrian: return "pedestrian";
        case PipelineMode::Vehicle: return "vehicle";
        case PipelineMode::Auto: return "auto";
    }
    throw precondition_error("unknown mode");
}

inline PipelineMode pipeline_mode_from_name(const std::string& s) {
    if (s == "pedestrian") return PipelineMode::Pedestrian;
    if (s == "vehicle") return PipelineMode::Vehicle;
    if (s == "auto") return PipelineMode::Auto;
    throw format_error("unknown mode '" + s + "'");
}

struct PipelineConfig {
    double window_s = 4.0;
    double overlap = 0.75;        // run-time stride, one output per second
    double train_overlap = 0.5;   // training windows
    double sample_rate = 100.0;
    double alpha = 0.5;
    double cn0_threshold = 25.0;
    double beta = 1.0;
    KernelSpec kernel{KernelKind::Rbf, 0.0};  // gamma 0: derived from data
    Routing routing = Routing::Soft;
    PipelineMode mode = PipelineMode::Pedestrian;
    HmmParams hmm3 = HmmParams::pedestrian_defaults();
    HmmParams hmm2 = HmmParams::vehicle_defaults();
    std::uint64_t seed = 1;
    double calibration_fraction = 0.3;
    double holdout_fraction = 0.3;
    std::size_t mode_hysteresis = 5;

    SpectralConfig spectral() const {
        SpectralConfig cfg;
        cfg.sample_rate = sample_rate;
        return cfg;
    }
};

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainReport {
    double human_vehicle_accuracy = 0.0;
    double human_activity_accuracy = 0.0;
    double vehicle_motion_accuracy = 0.0;
    double environment3_accuracy = 0.0;
    double environment2_accuracy = 0.0;
    std::size_t windows_used = 0;
    std::size_t epochs_used = 0;
};

namespace pipeline_detail {

// Label a window only when every second it covers carries one behaviour.
inline std::optional<Behavior> window_label(const Window& w, double window_s,
                                            const std::map<long long, synth::TruthEpoch>& truth) {
    const auto first = static_cast<long long>(std::floor(w.start_t + 1e-9));
    const auto last = static_cast<long long>(std::floor(w.start_t + window_s - 1e-6));
    std::optional<Behavior> label;
    for (long long s = first; s <= last; ++s) {
        const auto it = truth.find(s);
        if (it == truth.end()) return std::nullopt;
        if (!label) label = it->second.behavior;
        else if (*label != it->second.behavior) return std::nullopt;
    }
    return label;
}

inline std::map<long long, synth::TruthEpoch> truth_by_second(const synth::TruthSeries& t) {
    std::map<long long, synth::TruthEpoch> m;
    for (const auto& e : t.epochs) m[static_cast<long long>(std::llround(e.t))] = e;
    return m;
}

// Deterministic per-class holdout split.
inline void split_indices(const std::vector<int>& labels, std::size_t num_classes,
                          double holdout_fraction, std::uint64_t seed,
                          std::vector<std::size_t>& train, std::vector<std::size_t>& held) {
    std::vector<std::vector<std::size_t>> by_class(num_classes);
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    for (std::size_t c = 0; c < num_classes; ++c) {
        auto& pool = by_class[c];
        Rng rng(seed ^ (0xc0ffee00ULL + c));
        for (std::size_t k = pool.size(); k > 1; --k)
            std::swap(pool[k - 1], pool[static_cast<std::size_t>(
                                       rng.uniform_int(0, static_cast<std::int64_t>(k) - 1))]);
        std::size_t n_held =
            static_cast<std::size_t>(holdout_fraction * static_cast<double>(pool.size()));
        if (n_held >= pool.size()) n_held = pool.size() > 1 ? pool.size() - 1 : 0;
        for (std::size_t k = 0; k < pool.size(); ++k)
            (k < n_held ? held : train).push_back(pool[k]);
    }
    std::sort(train.begin(), train.end());
    std::sort(held.begin(), held.end());
}

struct EnsembleFit {
    OneVsOneEnsemble ensemble;
    Standardizer standardizer;
    double holdout_accuracy = 0.0;
};

inline EnsembleFit fit_ensemble(const std::vector<std::vector<double>>& x,
                                const std::vector<int>& labels,
                                const std::vector<std::string>& classes,
                                const PipelineConfig& cfg,
                                const std::vector<double>& prior_override) {
    std::vector<std::size_t> train_idx, held_idx;
    split_indices(labels, classes.size(), cfg.holdout_fraction, cfg.seed, train_idx, held_idx);

    std::vector<std::vector<double>> train_x;
    std::vector<int> train_y;
    for (std::size_t i : train_idx) {
        train_x.push_back(x[i]);
        train_y.push_back(labels[i]);
    }

    EnsembleFit fit;
    fit.standardizer = Standardizer::fit(train_x);
    for (auto& row : train_x) row = fit.standardizer.apply(row);

    KernelSpec kernel = cfg.kernel;
    if (kernel.kind == KernelKind::Rbf && kernel.gamma <= 0.0)
        kernel.gamma = default_rbf_gamma(train_x);

    EnsembleOptions opt;
    opt.beta = cfg.beta;
    opt.calibration_fraction = cfg.calibration_fraction;
    opt.split_seed = cfg.seed;
    opt.prior_override = prior_override;
    fit.ensemble = train_ensemble(train_x, train_y, classes, kernel, opt);

    std::size_t correct = 0;
    for (std::size_t i : held_idx) {
        const auto post = ensemble_posterior(fit.ensemble, fit.standardizer.apply(x[i]));
        if (argmax_index(post) == static_cast<std::size_t>(labels[i])) ++correct;
    }
    fit.holdout_accuracy =
        held_idx.empty() ? 1.0 : static_cast<double>(correct) / static_cast<double>(held_idx.size());
    return fit;
}

}  // namespace pipeline_detail

inline ModelBundle train_models(const SensorStream& imu, const GnssEpochSeries& gnss,
                                const synth::TruthSeries& truth, const PipelineConfig& cfg,
                                TrainReport* report = nullptr) {
    const auto truth_map = pipeline_detail::truth_by_second(truth);
    const SpectralConfig spectral = cfg.spectral();

    // ---- behaviour windows -------------------------------------------------
    std::vector<Window> windows = segment(imu, cfg.window_s, cfg.train_overlap);
    std::vector<std::size_t> counts(kNumBehaviors, 0);

    std::vector<std::vector<double>> hv_x, human_x, vehicle_x;
    std::vector<int> hv_y, human_y, vehicle_y;
    std::size_t windows_used = 0;
    for (const Window& w : windows) {
        const auto label = pipeline_detail::window_label(w, cfg.window_s, truth_map);
        if (!label) continue;
        ++windows_used;
        const auto cat = static_cast<std::size_t>(*label);
        ++counts[cat];
        hv_x.push_back(behaviour_features(w, ClassifierRole::HumanVehicle, spectral).values);
        hv_y.push_back(is_human(*label) ? 0 : 1);
        if (is_human(*label)) {
            human_x.push_back(
                behaviour_features(w, ClassifierRole::HumanActivity, spectral).values);
            human_y.push_back(static_cast<int>(cat));
        } else {
            vehicle_x.push_back(
                behaviour_features(w, ClassifierRole::VehicleMotion, spectral).values);
            vehicle_y.push_back(static_cast<int>(cat - kNumHumanBehaviors));
        }
    }
    for (std::size_t c = 0; c < kNumBehaviors; ++c)
        if (counts[c] == 0)
            throw precondition_error("training corpus missing behaviour category " +
                                     behavior_names()[c]);

    ModelBundle model;
    model.window_s = cfg.window_s;
    model.sample_rate = cfg.sample_rate;
    model.cn0_threshold = cfg.cn0_threshold;

    // ---- human-vehicle tree ------------------------------------------------
    std::vector<std::size_t> hv_train, hv_held;
    pipeline_detail::split_indices(hv_y, 2, cfg.holdout_fraction, cfg.seed, hv_train, hv_held);
    {
        std::vector<std::vector<double>> tx;
        std::vector<int> ty;
        for (std::size_t i : hv_train) {
            tx.push_back(hv_x[i]);
            ty.push_back(hv_y[i]);
        }
        model.human_vehicle = train_tree(tx, ty, 2, TreeOptions{12, 2});
    }
    double hv_acc = 1.0;
    if (!hv_held.empty()) {
        std::size_t correct = 0;
        for (std::size_t i : hv_held)
            if (argmax_index(tree_classify(model.human_vehicle, hv_x[i])) ==
                static_cast<std::size_t>(hv_y[i]))
                ++correct;
        hv_acc = static_cast<double>(correct) / static_cast<double>(hv_held.size());
    }

    // ---- branch ensembles --------------------------------------------------
    std::vector<std::string> human_classes(behavior_names().begin(),
                                           behavior_names().begin() + kNumHumanBehaviors);
    std::vector<std::string> vehicle_classes(behavior_names().begin() + kNumHumanBehaviors,
                                             behavior_names().end());
    auto human_fit = pipeline_detail::fit_ensemble(human_x, human_y, human_classes, cfg, {});
    auto vehicle_fit =
        pipeline_detail::fit_ensemble(vehicle_x, vehicle_y, vehicle_classes, cfg, {});
    model.human_activity = std::move(human_fit.ensemble);
    model.human_std = std::move(human_fit.standardizer);
    model.vehicle_motion = std::move(vehicle_fit.ensemble);
    model.vehicle_std = std::move(vehicle_fit.standardizer);

    // ---- environment ensembles ----------------------------------------------
    std::vector<std::vector<double>> env_x;
    std::vector<int> env_y;
    for (const GnssEpoch& e : gnss.epochs) {
        const auto it = truth_map.find(static_cast<long long>(std::llround(e.t)));
        if (it == truth_map.end()) continue;
        env_x.push_back(gnss_features(e, cfg.cn0_threshold).values);
        env_y.push_back(static_cast<int>(it->second.environment));
    }
    std::vector<std::size_t> env_counts(3, 0);
    for (int y : env_y) ++env_counts[static_cast<std::size_t>(y)];
    for (std::size_t c = 0; c < 3; ++c)
        if (env_counts[c] == 0)
            throw precondition_error("training corpus missing environment category " +
                                     environment_names()[c]);

    auto env3_fit = pipeline_detail::fit_ensemble(
        env_x, env_y, environment_class_names(EnvironmentMode::Pedestrian), cfg,
        cfg.hmm3.class_priors);
    model.environment3 = std::move(env3_fit.ensemble);
    model.env3_std = std::move(env3_fit.standardizer);

    std::vector<std::vector<double>> env2_x;
    std::vector<int> env2_y;
    for (std::size_t i = 0; i < env_x.size(); ++i) {
        if (env_y[i] == static_cast<int>(Environment::Intermediate)) continue;
        env2_x.push_back(env_x[i]);
        env2_y.push_back(env_y[i] == static_cast<int>(Environment::Indoor) ? 0 : 1);
    }
    auto env2_fit = pipeline_detail::fit_ensemble(
        env2_x, env2_y, environment_class_names(EnvironmentMode::Vehicle), cfg,
        cfg.hmm2.class_priors);
    model.environment2 = std::move(env2_fit.ensemble);
    model.env2_std = std::move(env2_fit.standardizer);

    if (report) {
        report->human_vehicle_accuracy = hv_acc;
        report->human_activity_accuracy = human_fit.holdout_accuracy;
        report->vehicle_motion_accuracy = vehicle_fit.holdout_accuracy;
        report->environment3_accuracy = env3_fit.holdout_accuracy;
        report->environment2_accuracy = env2_fit.holdout_accuracy;
        report->windows_used = windows_used;
        report->epochs_used = env_x.size();
    }
    return model;
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

struct EpochRecord {
    double t = 0.0;

    bool has_behavior = false;
    std::vector<double> behavior_raw;       // 9, pre-connectivity
    std::vector<double> behavior_filtered;  // 9, post-connectivity
    std::vector<double> behavior_groups;    // 5, from the filtered posterior
    std::string behavior_argmax;
    double p_stat = 0.0;

    bool has_environment = false;
    std::string environment_mode;
    std::vector<double> env_svm;       // pre-HMM posterior
    std::vector<double> env_emission;  // Bayes-rule emission weights
    std::vector<double> env_belief;    // post-HMM
    std::string env_argmax;
    double p_stat_used = 0.0;
};

namespace pipeline_detail {

struct EnvFilter {
    EnvFilter(const OneVsOneEnsemble* e, const Standardizer* s, const HmmParams* h)
        : ensemble(e), standardizer(s), hmm(h) {}

    const OneVsOneEnsemble* ensemble;
    const Standardizer* standardizer;
    const HmmParams* hmm;
    std::vector<double> belief;
    bool started = false;

    struct Step {
        std::vector<double> posterior, emission, belief;
    };

    Step step(const GnssEpoch& epoch, double cn0_threshold, double p_stat) {
        Step s;
        const FeatureVector fv = gnss_features(epoch, cn0_threshold);
        s.posterior = ensemble_posterior(*ensemble, standardizer->apply(fv.values));
        s.emission = emission_from_posterior(s.posterior, hmm->class_priors);
        if (!started) {
            belief = s.emission;
            for (std::size_t i = 0; i < belief.size(); ++i) belief[i] *= hmm->initial[i];
            normalize_in_place(belief);
            started = true;
        } else {
            belief = hmm_forward_step(belief, s.emission,
                                      associated_transition(p_stat, hmm->base_transition));
        }
        s.belief = belief;
        return s;
    }
};

}  // namespace pipeline_detail

inline std::vector<EpochRecord> run_pipeline(const ModelBundle& model,
                                             const SensorStream* imu,
                                             const GnssEpochSeries* gnss,
                                             const PipelineConfig& cfg) {
    if (!imu && !gnss) throw precondition_error("run_pipeline: no input streams");
    if (imu && std::abs(imu->nominal_rate - model.sample_rate) > 1e-9)
        throw model_error("run_pipeline: stream rate differs from the model's rate");

    // Feature semantics are tied to the window the model was trained on.
    SpectralConfig spectral;
    spectral.sample_rate = model.sample_rate;
    const BehaviorModels behavior_models = model.behavior_models();

    pipeline_detail::EnvFilter env3(&model.environment3, &model.env3_std, &cfg.hmm3);
    pipeline_detail::EnvFilter env2(&model.environment2, &model.env2_std, &cfg.hmm2);

    std::vector<EpochRecord> records;

    // Environment-only run: GNSS clock, p_stat = 0 (general-case transitions).
    if (!imu) {
        for (const GnssEpoch& epoch : gnss->epochs) {
            EpochRecord rec;
            rec.t = epoch.t;
            rec.has_environment = true;
            const bool vehicle = cfg.mode == PipelineMode::Vehicle;
            auto& filt = vehicle ? env2 : env3;
            const auto step = filt.step(epoch, model.cn0_threshold, 0.0);
            rec.environment_mode = vehicle ? "vehicle" : "pedestrian";
            rec.env_svm = step.posterior;
            rec.env_emission = step.emission;
            rec.env_belief = step.belief;
            rec.env_argmax =
                environment_class_names(vehicle ? EnvironmentMode::Vehicle
                                                : EnvironmentMode::Pedestrian)
                    [argmax_index(step.belief)];
            rec.p_stat_used = 0.0;
            records.push_back(std::move(rec));
        }
        return records;
    }

    // Behaviour (and optionally joint) run on the window clock.
    const std::vector<Window> windows = segment(*imu, model.window_s, cfg.overlap);
    BehaviorFilterState filter = BehaviorFilterState::uniform(cfg.alpha);

    std::size_t gnss_cursor = 0;
    PipelineMode active = cfg.mode == PipelineMode::Auto ? PipelineMode::Pedestrian : cfg.mode;
    std::size_t switch_streak = 0;

    for (const Window& w : windows) {
        EpochRecord rec;
        rec.t = w.start_t + model.window_s;
        rec.has_behavior = true;

        const auto hv = behaviour_features(w, ClassifierRole::HumanVehicle, spectral);
        const auto hum = behaviour_features(w, ClassifierRole::HumanActivity, spectral);
        const auto veh = behaviour_features(w, ClassifierRole::VehicleMotion, spectral);
        rec.behavior_raw = hierarchical_classify(
            behavior_models, hv.values, model.human_std.apply(hum.values),
            model.vehicle_std.apply(veh.values), cfg.routing);
        rec.behavior_filtered = connectivity_step(filter, rec.behavior_raw);
        rec.behavior_groups = group_posterior(rec.behavior_filtered);
        rec.behavior_argmax = behavior_names()[argmax_index(rec.behavior_filtered)];
        rec.p_stat = stationary_probability(rec.behavior_filtered);

        if (gnss) {
            while (gnss_cursor < gnss->epochs.size() &&
                   gnss->epochs[gnss_cursor].t < rec.t - 0.5)
                ++gnss_cursor;
            if (gnss_cursor < gnss->epochs.size() &&
                std::abs(gnss->epochs[gnss_cursor].t - rec.t) <= 0.5) {
                const GnssEpoch& epoch = gnss->epochs[gnss_cursor];

                if (cfg.mode == PipelineMode::Auto) {
                    const auto grp = argmax_index(rec.behavior_groups);
                    const PipelineMode want = grp == 0 ? PipelineMode::Pedestrian
                                                       : PipelineMode::Vehicle;
                    if (want != active) {
                        if (++switch_streak >= cfg.mode_hysteresis) {
                            active = want;
                            switch_streak = 0;
                        }
                    } else {
                        switch_streak = 0;
                    }
                }

                const bool vehicle = active == PipelineMode::Vehicle;
                // Both filters track every epoch so an auto-mode switch
                // resumes a warm belief instead of restarting from pi.
                const auto step3 = env3.step(epoch, model.cn0_threshold, rec.p_stat);
                const auto step2 = env2.step(epoch, model.cn0_threshold, rec.p_stat);
                const auto& step = vehicle ? step2 : step3;

                rec.has_environment = true;
                rec.environment_mode = vehicle ? "vehicle" : "pedestrian";
                rec.env_svm = step.posterior;
                rec.env_emission = step.emission;
                rec.env_belief = step.belief;
                rec.env_argmax =
                    environment_class_names(vehicle ? EnvironmentMode::Vehicle
                                                    : EnvironmentMode::Pedestrian)
                        [argmax_index(step.belief)];
                rec.p_stat_used = rec.p_stat;
                ++gnss_cursor;
            }
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace ctxsense
