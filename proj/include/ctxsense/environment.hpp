#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ctxsense/common.hpp"
#include "ctxsense/ensemble.hpp"
#include "ctxsense/features.hpp"

namespace ctxsense {

// ---------------------------------------------------------------------------
// Environment categories. Pedestrian mode uses all three states; vehicle mode
// drops Intermediate.
// ---------------------------------------------------------------------------

enum class Environment : int { Indoor = 0, Intermediate = 1, Outdoor = 2 };

inline const std::array<std::string, 3>& environment_names() {
    static const std::array<std::string, 3> names = {"Indoor", "Intermediate", "Outdoor"};
    return names;
}

inline Environment environment_from_name(const std::string& name) {
    const auto& names = environment_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<Environment>(i);
    throw format_error("unknown environment category '" + name + "'");
}

enum class EnvironmentMode { Pedestrian, Vehicle };

inline std::vector<std::string> environment_class_names(EnvironmentMode mode) {
    if (mode == EnvironmentMode::Pedestrian) return {"Indoor", "Intermediate", "Outdoor"};
    return {"Indoor", "Outdoor"};
}

// ---------------------------------------------------------------------------
// HMM parameters. The base transition matrix is column-stochastic: column =
// previous state, row = next state. Indoor and Outdoor do not connect
// directly; the zero entries are deliberate and must stay exact.
// ---------------------------------------------------------------------------

struct HmmParams {
    std::vector<double> initial;      // pi
    std::vector<double> class_priors; // P(S_i) for the emission Bayes step
    Mat base_transition;              // A0

    static HmmParams pedestrian_defaults() {
        HmmParams p;
        p.initial = {0.4, 0.2, 0.4};
        p.class_priors = {0.4, 0.2, 0.4};
        p.base_transition = Mat(3, 3);
        const double t[3][3] = {
            {2.0 / 3.0, 1.0 / 3.0, 0.0},
            {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
            {0.0, 1.0 / 3.0, 2.0 / 3.0},
        };
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t c = 0; c < 3; ++c) p.base_transition(r, c) = t[r][c];
        return p;
    }

    // Two-state variant: Intermediate mass of the pedestrian matrix folded
    // proportionally into its neighbours.
    static HmmParams vehicle_defaults() {
        HmmParams p;
        p.initial = {0.5, 0.5};
        p.class_priors = {0.5, 0.5};
        p.base_transition = Mat(2, 2);
        p.base_transition(0, 0) = 2.0 / 3.0;
        p.base_transition(0, 1) = 1.0 / 3.0;
        p.base_transition(1, 0) = 1.0 / 3.0;
        p.base_transition(1, 1) = 2.0 / 3.0;
        return p;
    }

    std::size_t num_states() const { return initial.size(); }
};

inline constexpr double kProbFloor = 1e-9;

// Bayes-rule emission weights: w_i proportional to posterior_i / prior_i,
// normalized. Inputs clamp at the probability floor before the ratio.
inline std::vector<double> emission_from_posterior(const std::vector<double>& posterior,
                                                   const std::vector<double>& priors) {
    if (posterior.size() != priors.size() || posterior.empty())
        throw precondition_error("emission_from_posterior: size mismatch");
    std::vector<double> w(posterior.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = std::max(posterior[i], kProbFloor) / std::max(priors[i], kProbFloor);
    normalize_in_place(w);
    return w;
}

// A = p_stat * I + (1 - p_stat) * A0. Stationary users keep their environment.
inline Mat associated_transition(double p_stat, const Mat& base) {
    if (!(p_stat >= 0.0 && p_stat <= 1.0))
        throw precondition_error("associated_transition: p_stat in [0,1]");
    Mat a(base.rows(), base.cols());
    for (std::size_t r = 0; r < base.rows(); ++r)
        for (std::size_t c = 0; c < base.cols(); ++c)
            a(r, c) = (r == c ? p_stat : 0.0) + (1.0 - p_stat) * base(r, c);
    return a;
}

// belief'(j) proportional to emission(j) * sum_i A(j <- i) belief(i)
inline std::vector<double> hmm_forward_step(const std::vector<double>& belief,
                                            const std::vector<double>& emission,
                                            const Mat& transition) {
    if (belief.size() != emission.size() || transition.rows() != belief.size() ||
        transition.cols() != belief.size())
        throw precondition_error("hmm_forward_step: dimension mismatch");
    std::vector<double> predicted = transition.apply(belief);
    double total = 0.0;
    for (std::size_t j = 0; j < predicted.size(); ++j) {
        predicted[j] *= emission[j];
        total += predicted[j];
    }
    if (!(total > 0.0)) throw precondition_error("hmm_forward_step: zero total mass");
    for (double& v : predicted) v /= total;
    return predicted;
}

// Maximum a posteriori state path, log domain, time-varying transition
// matrices allowed (transitions[k-1] connects epoch k-1 to epoch k). Ties
// break toward the lower state index.
inline std::vector<std::size_t> viterbi_decode(
    const std::vector<std::vector<double>>& emissions, const std::vector<double>& initial,
    const std::vector<Mat>& transitions) {
    if (emissions.empty()) throw precondition_error("viterbi_decode: empty sequence");
    const std::size_t T = emissions.size();
    const std::size_t S = initial.size();
    if (transitions.size() + 1 < T)
        throw precondition_error("viterbi_decode: need T-1 transition matrices");

    auto safe_log = [](double v) {
        return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> score(T, std::vector<double>(S));
    std::vector<std::vector<std::size_t>> back(T, std::vector<std::size_t>(S, 0));
    for (std::size_t s = 0; s < S; ++s)
        score[0][s] = safe_log(initial[s]) + safe_log(emissions[0][s]);

    for (std::size_t k = 1; k < T; ++k) {
        const Mat& a = transitions[k - 1];
        for (std::size_t j = 0; j < S; ++j) {
            double best = -std::numeric_limits<double>::infinity();
            std::size_t best_i = 0;
            for (std::size_t i = 0; i < S; ++i) {
                const double cand = score[k - 1][i] + safe_log(a(j, i));
                if (cand > best) {  // strict keeps the lowest index on ties
                    best = cand;
                    best_i = i;
                }
            }
            score[k][j] = best + safe_log(emissions[k][j]);
            back[k][j] = best_i;
        }
    }

    std::size_t last = 0;
    for (std::size_t s = 1; s < S; ++s)
        if (score[T - 1][s] > score[T - 1][last]) last = s;

    std::vector<std::size_t> path(T);
    path[T - 1] = last;
    for (std::size_t k = T - 1; k > 0; --k) path[k - 1] = back[k][path[k]];
    return path;
}

// ---------------------------------------------------------------------------
// Full per-epoch environment chain: GNSS features -> SVM posterior -> Bayes
// emission -> behaviour-associated transition -> forward step.
// ---------------------------------------------------------------------------

struct EnvironmentEpochResult {
    double t = 0.0;
    std::vector<double> svm_posterior;
    std::vector<double> emission;
    std::vector<double> belief;
    double p_stat_used = 0.0;
};

struct EnvironmentSequenceResult {
    std::vector<EnvironmentEpochResult> epochs;
    std::vector<std::size_t> viterbi_path;  // offline decode over the same emissions
};

inline EnvironmentSequenceResult detect_environment_sequence(
    const GnssEpochSeries& series, const OneVsOneEnsemble& ensemble,
    const Standardizer& standardizer, const HmmParams& hmm, double cn0_threshold = 25.0,
    const std::vector<double>* p_stat_stream = nullptr) {
    const std::size_t S = hmm.num_states();
    if (ensemble.classes.size() != S)
        throw model_error("detect_environment_sequence: ensemble/HMM state mismatch");
    if (p_stat_stream && p_stat_stream->size() != series.epochs.size())
        throw alignment_error("detect_environment_sequence: p_stat stream length mismatch");

    EnvironmentSequenceResult result;
    std::vector<std::vector<double>> emissions;
    std::vector<Mat> transitions;
    std::vector<double> belief;

    for (std::size_t k = 0; k < series.epochs.size(); ++k) {
        const GnssEpoch& epoch = series.epochs[k];
        EnvironmentEpochResult r;
        r.t = epoch.t;
        r.p_stat_used = p_stat_stream ? (*p_stat_stream)[k] : 0.0;

        const FeatureVector fv = gnss_features(epoch, cn0_threshold);
        r.svm_posterior = ensemble_posterior(ensemble, standardizer.apply(fv.values));
        r.emission = emission_from_posterior(r.svm_posterior, hmm.class_priors);
        emissions.push_back(r.emission);

        if (k == 0) {
            belief = r.emission;
            for (std::size_t s = 0; s < S; ++s) belief[s] *= hmm.initial[s];
            normalize_in_place(belief);
        } else {
            const Mat a = associated_transition(r.p_stat_used, hmm.base_transition);
            transitions.push_back(a);
            belief = hmm_forward_step(belief, r.emission, a);
        }
        r.belief = belief;
        result.epochs.push_back(std::move(r));
    }

    if (!result.epochs.empty())
        result.viterbi_path = viterbi_decode(emissions, hmm.initial, transitions);
    return result;
}

}  // namespace ctxsense
