#pragma once

#include <array>
#include <string>
#include <vector>

#include "ctxsense/common.hpp"
#include "ctxsense/ensemble.hpp"
#include "ctxsense/tree.hpp"

namespace ctxsense {

// ---------------------------------------------------------------------------
// Behaviour categories: five human activities and four vehicle motions, with
// a five-group view {H, V, U, T, B} for connectivity.
// ---------------------------------------------------------------------------

enum class Behavior : int {
    Stationary = 0,
    Walking,
    Running,
    AscendingStairs,
    DescendingStairs,
    StationaryVehicleEngineOn,
    MovingDieselTrain,
    MovingBus,
    MovingUndergroundTrain,
};

inline constexpr std::size_t kNumBehaviors = 9;
inline constexpr std::size_t kNumHumanBehaviors = 5;

enum class BehaviorGroup : int { H = 0, V, U, T, B };

inline constexpr std::size_t kNumBehaviorGroups = 5;

inline const std::array<std::string, kNumBehaviors>& behavior_names() {
    static const std::array<std::string, kNumBehaviors> names = {
        "Stationary",
        "Walking",
        "Running",
        "AscendingStairs",
        "DescendingStairs",
        "StationaryVehicleEngineOn",
        "MovingDieselTrain",
        "MovingBus",
        "MovingUndergroundTrain",
    };
    return names;
}

inline Behavior behavior_from_name(const std::string& name) {
    const auto& names = behavior_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<Behavior>(i);
    throw format_error("unknown behaviour category '" + name + "'");
}

inline bool is_human(Behavior b) {
    return static_cast<std::size_t>(b) < kNumHumanBehaviors;
}

inline BehaviorGroup behavior_group(Behavior b) {
    switch (b) {
        case Behavior::StationaryVehicleEngineOn: return BehaviorGroup::V;
        case Behavior::MovingUndergroundTrain: return BehaviorGroup::U;
        case Behavior::MovingDieselTrain: return BehaviorGroup::T;
        case Behavior::MovingBus: return BehaviorGroup::B;
        default: return BehaviorGroup::H;
    }
}

inline const std::array<std::string, kNumBehaviorGroups>& behavior_group_names() {
    static const std::array<std::string, kNumBehaviorGroups> names = {"H", "V", "U", "T",
                                                                      "B"};
    return names;
}

// Collapse a 9-way posterior to the {H, V, U, T, B} group view.
inline std::vector<double> group_posterior(const std::vector<double>& p) {
    if (p.size() != kNumBehaviors) throw precondition_error("group_posterior: need 9 entries");
    std::vector<double> g(kNumBehaviorGroups, 0.0);
    for (std::size_t i = 0; i < kNumBehaviors; ++i)
        g[static_cast<std::size_t>(behavior_group(static_cast<Behavior>(i)))] += p[i];
    return g;
}

// ---------------------------------------------------------------------------
// Connection likelihoods: permitted direct transitions 0.9, unlikely ones
// 0.1, expanded from the five groups to the full nine categories.
// ---------------------------------------------------------------------------

inline Mat group_connection_matrix() {
    // Row = current group, column = previous group; symmetric.
    constexpr double table[kNumBehaviorGroups][kNumBehaviorGroups] = {
        //        H    V    U    T    B
        /* H */ {0.9, 0.9, 0.1, 0.1, 0.1},
        /* V */ {0.9, 0.9, 0.9, 0.9, 0.9},
        /* U */ {0.1, 0.9, 0.9, 0.1, 0.1},
        /* T */ {0.1, 0.9, 0.1, 0.9, 0.1},
        /* B */ {0.1, 0.9, 0.1, 0.1, 0.9},
    };
    Mat m(kNumBehaviorGroups, kNumBehaviorGroups);
    for (std::size_t r = 0; r < kNumBehaviorGroups; ++r)
        for (std::size_t c = 0; c < kNumBehaviorGroups; ++c) m(r, c) = table[r][c];
    return m;
}

inline Mat connection_matrix() {
    const Mat groups = group_connection_matrix();
    Mat m(kNumBehaviors, kNumBehaviors);
    for (std::size_t r = 0; r < kNumBehaviors; ++r)
        for (std::size_t c = 0; c < kNumBehaviors; ++c)
            m(r, c) = groups(
                static_cast<std::size_t>(behavior_group(static_cast<Behavior>(r))),
                static_cast<std::size_t>(behavior_group(static_cast<Behavior>(c))));
    return m;
}

inline bool directly_connected(Behavior a, Behavior b) {
    const Mat groups = group_connection_matrix();
    return groups(static_cast<std::size_t>(behavior_group(a)),
                  static_cast<std::size_t>(behavior_group(b))) > 0.5;
}

// ---------------------------------------------------------------------------
// Hierarchical classification: human-vehicle split, then the branch
// subclassifier; soft routing multiplies branch and subclass probabilities.
// ---------------------------------------------------------------------------

struct BehaviorModels {
    DecisionTreeModel human_vehicle;  // class 0 = human, 1 = vehicle
    OneVsOneEnsemble human_activity;  // 5 classes, Behavior order
    OneVsOneEnsemble vehicle_motion;  // 4 classes, Behavior order
};

enum class Routing { Soft, Hard };

inline std::vector<double> hierarchical_classify(const BehaviorModels& models,
                                                 const std::vector<double>& hv_features,
                                                 const std::vector<double>& human_features,
                                                 const std::vector<double>& vehicle_features,
                                                 Routing routing = Routing::Soft) {
    if (models.human_vehicle.nodes.empty() || models.human_activity.pairwise.empty() ||
        models.vehicle_motion.pairwise.empty())
        throw model_error("hierarchical_classify: missing model");

    std::vector<double> branch = tree_classify(models.human_vehicle, hv_features);
    if (branch.size() != 2) throw model_error("human-vehicle classifier must be binary");
    if (routing == Routing::Hard) {
        const std::size_t top = argmax_index(branch);
        branch = {top == 0 ? 1.0 : 0.0, top == 0 ? 0.0 : 1.0};
    }

    const std::vector<double> human_post =
        ensemble_posterior(models.human_activity, human_features);
    const std::vector<double> vehicle_post =
        ensemble_posterior(models.vehicle_motion, vehicle_features);
    if (human_post.size() != kNumHumanBehaviors ||
        vehicle_post.size() != kNumBehaviors - kNumHumanBehaviors)
        throw model_error("hierarchical_classify: subclassifier size mismatch");

    std::vector<double> out(kNumBehaviors);
    for (std::size_t i = 0; i < kNumHumanBehaviors; ++i)
        out[i] = branch[0] * human_post[i];
    for (std::size_t i = 0; i < vehicle_post.size(); ++i)
        out[kNumHumanBehaviors + i] = branch[1] * vehicle_post[i];
    return out;
}

// ---------------------------------------------------------------------------
// Connectivity filter
// ---------------------------------------------------------------------------

// x_smoothed = alpha * z + (1 - alpha) * x_prev
inline std::vector<double> smooth(const std::vector<double>& z,
                                  const std::vector<double>& x_prev, double alpha) {
    if (z.size() != x_prev.size())
        throw precondition_error("smooth: category sets differ");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw precondition_error("smooth: alpha in [0,1]");
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        out[i] = alpha * z[i] + (1.0 - alpha) * x_prev[i];
    return out;
}

// Minimum-norm transfer matrix mapping x_prev onto x_cur: x_cur * pinv(x_prev),
// with the vector pseudoinverse x^T / (x^T x). Satisfies Omega * x_prev = x_cur.
inline Mat transfer_matrix(const std::vector<double>& x_cur,
                           const std::vector<double>& x_prev) {
    if (x_cur.size() != x_prev.size())
        throw precondition_error("transfer_matrix: dimension mismatch");
    double norm_sq = 0.0;
    for (double v : x_prev) norm_sq += v * v;
    if (!(norm_sq > 0.0))
        throw precondition_error("transfer_matrix: previous estimate is zero");
    Mat omega(x_cur.size(), x_prev.size());
    for (std::size_t r = 0; r < x_cur.size(); ++r)
        for (std::size_t c = 0; c < x_prev.size(); ++c)
            omega(r, c) = x_cur[r] * x_prev[c] / norm_sq;
    return omega;
}

struct BehaviorFilterState {
    std::vector<double> estimate;  // posterior over the 9 categories
    double alpha = 0.5;
    Mat connection = connection_matrix();

    static BehaviorFilterState uniform(double alpha = 0.5) {
        BehaviorFilterState s;
        s.alpha = alpha;
        s.estimate.assign(kNumBehaviors, 1.0 / static_cast<double>(kNumBehaviors));
        return s;
    }
};

// One filter step: smooth, build the transfer matrix, mask it with the
// connection likelihoods, re-apply to the previous estimate, normalize.
// (Omega o C) * x_prev collapses to x_smoothed_i * sum_j C_ij x_prev_j^2 / |x_prev|^2,
// which is what the expanded product evaluates to.
inline std::vector<double> connectivity_step(BehaviorFilterState& state,
                                             const std::vector<double>& z) {
    const std::vector<double>& prev = state.estimate;
    if (z.size() != prev.size())
        throw precondition_error("connectivity_step: category sets differ");

    const std::vector<double> smoothed = smooth(z, prev, state.alpha);

    double norm_sq = 0.0;
    for (double v : prev) norm_sq += v * v;
    if (!(norm_sq > 0.0)) throw precondition_error("connectivity_step: degenerate state");

    std::vector<double> masked(prev.size());
    double total = 0.0;
    for (std::size_t i = 0; i < prev.size(); ++i) {
        double weighted = 0.0;
        for (std::size_t j = 0; j < prev.size(); ++j)
            weighted += state.connection(i, j) * prev[j] * prev[j];
        masked[i] = smoothed[i] * weighted / norm_sq;
        total += masked[i];
    }
    if (!(total > 0.0)) throw precondition_error("connectivity_step: zero likelihood mass");
    for (double& v : masked) v /= total;

    state.estimate = masked;
    return masked;
}

// Combined probability of the stationary-human and stationary-vehicle
// categories; drives the environment transition association.
inline double stationary_probability(const std::vector<double>& posterior) {
    if (posterior.size() != kNumBehaviors)
        throw precondition_error("stationary_probability: need 9 entries");
    return posterior[static_cast<std::size_t>(Behavior::Stationary)] +
           posterior[static_cast<std::size_t>(Behavior::StationaryVehicleEngineOn)];
}

}  // namespace ctxsense
