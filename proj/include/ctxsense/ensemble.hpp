#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ctxsense/common.hpp"
#include "ctxsense/svm.hpp"

namespace ctxsense {

// ---------------------------------------------------------------------------
// Pairwise coupling. mu[i][j] holds P(class i | class i or j, x) for i < j;
// posteriors follow 1 / [sum_{j != i} 1/mu_ij - (L-2)], then normalize.
// ---------------------------------------------------------------------------

inline std::vector<double> couple_pairwise(const Mat& mu) {
    const std::size_t L = mu.rows();
    if (L < 2 || mu.cols() != L) throw precondition_error("couple_pairwise: need LxL, L >= 2");
    constexpr double eps = 1e-6;

    std::vector<double> posterior(L);
    for (std::size_t i = 0; i < L; ++i) {
        double denom = -(static_cast<double>(L) - 2.0);
        for (std::size_t j = 0; j < L; ++j) {
            if (j == i) continue;
            const double mu_ij = i < j ? mu(i, j) : 1.0 - mu(j, i);
            denom += 1.0 / std::clamp(mu_ij, eps, 1.0 - eps);
        }
        posterior[i] = 1.0 / denom;
    }
    normalize_in_place(posterior);
    return posterior;
}

// ---------------------------------------------------------------------------
// One-versus-one ensemble: L(L-1)/2 Platt-calibrated binary SVMs.
// ---------------------------------------------------------------------------

struct OneVsOneEnsemble {
    std::vector<std::string> classes;
    std::vector<double> class_priors;
    // models indexed by pair (i, j), i < j, in lexicographic order; the
    // binary model's +1 label is class i.
    std::vector<SvmBinaryModel> pairwise;

    std::size_t pair_index(std::size_t i, std::size_t j) const {
        // offset of (i, j) with i < j in row-major upper-triangular order
        const std::size_t L = classes.size();
        return i * L - i * (i + 1) / 2 + (j - i - 1);
    }
};

struct EnsembleOptions {
    double beta = 1.0;
    // Fraction of each pair subset held out for Platt calibration; pairs
    // smaller than min_split_size calibrate on the training set itself.
    double calibration_fraction = 0.3;
    std::size_t min_split_size = 20;
    std::uint64_t split_seed = 1;
    std::vector<double> prior_override;  // empty: training frequencies
    SmoOptions smo;
};

inline OneVsOneEnsemble train_ensemble(const std::vector<std::vector<double>>& x,
                                       const std::vector<int>& labels,
                                       const std::vector<std::string>& classes,
                                       const KernelSpec& kernel,
                                       const EnsembleOptions& opt = {}) {
    const std::size_t L = classes.size();
    if (L < 2) throw precondition_error("train_ensemble: need >= 2 classes");
    if (x.size() != labels.size() || x.empty())
        throw precondition_error("train_ensemble: bad training set");

    std::vector<std::vector<std::size_t>> by_class(L);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= L)
            throw precondition_error("train_ensemble: label out of range");
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (std::size_t c = 0; c < L; ++c)
        if (by_class[c].empty())
            throw precondition_error("train_ensemble: class '" + classes[c] +
                                     "' has no examples");

    OneVsOneEnsemble ens;
    ens.classes = classes;
    if (!opt.prior_override.empty()) {
        if (opt.prior_override.size() != L)
            throw precondition_error("train_ensemble: prior override size mismatch");
        ens.class_priors = normalized(opt.prior_override);
    } else {
        ens.class_priors.resize(L);
        for (std::size_t c = 0; c < L; ++c)
            ens.class_priors[c] =
                static_cast<double>(by_class[c].size()) / static_cast<double>(x.size());
    }

    for (std::size_t i = 0; i < L; ++i) {
        for (std::size_t j = i + 1; j < L; ++j) {
            // A pair with a class below min_split_size calibrates on its own
            // training set; otherwise each class donates a held-out slice.
            const bool same_set = by_class[i].size() < opt.min_split_size ||
                                  by_class[j].size() < opt.min_split_size;
            auto split_class = [&](std::size_t cls, std::vector<std::size_t>& fit,
                                   std::vector<std::size_t>& cal) {
                std::vector<std::size_t> pool = by_class[cls];
                Rng rng(opt.split_seed ^ (0x51ed2700ULL + i * 131 + j * 997 + cls));
                for (std::size_t k = pool.size(); k > 1; --k)
                    std::swap(pool[k - 1],
                              pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(k) - 1))]);
                std::size_t n_cal = same_set ? 0
                                             : static_cast<std::size_t>(
                                                   opt.calibration_fraction *
                                                   static_cast<double>(pool.size()));
                if (n_cal >= pool.size()) n_cal = pool.size() - 1;
                cal.insert(cal.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_cal));
                fit.insert(fit.end(), pool.begin() + static_cast<std::ptrdiff_t>(n_cal), pool.end());
            };
            std::vector<std::size_t> fit_idx, cal_idx;
            split_class(i, fit_idx, cal_idx);
            split_class(j, fit_idx, cal_idx);
            if (cal_idx.empty()) cal_idx = fit_idx;

            std::vector<std::vector<double>> pair_x;
            std::vector<int> pair_y;
            pair_x.reserve(fit_idx.size());
            for (std::size_t k : fit_idx) {
                pair_x.push_back(x[k]);
                pair_y.push_back(labels[k] == static_cast<int>(i) ? 1 : -1);
            }
            SvmBinaryModel model = train_svm(pair_x, pair_y, kernel, opt.beta, opt.smo);

            std::vector<double> decisions;
            std::vector<int> cal_y;
            decisions.reserve(cal_idx.size());
            for (std::size_t k : cal_idx) {
                decisions.push_back(svm_decision(model, x[k]));
                cal_y.push_back(labels[k] == static_cast<int>(i) ? 1 : -1);
            }
            model.platt = fit_platt(decisions, cal_y);
            ens.pairwise.push_back(std::move(model));
        }
    }
    return ens;
}

inline std::vector<double> ensemble_posterior(const OneVsOneEnsemble& ens,
                                              const std::vector<double>& x) {
    const std::size_t L = ens.classes.size();
    if (ens.pairwise.size() != L * (L - 1) / 2)
        throw model_error("ensemble_posterior: wrong number of pairwise models");
    Mat mu(L, L, 0.5);
    for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = i + 1; j < L; ++j)
            mu(i, j) = platt_prob(ens.pairwise[ens.pair_index(i, j)], x);
    return couple_pairwise(mu);
}

}  // namespace ctxsense
