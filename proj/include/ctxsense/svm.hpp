#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ctxsense/common.hpp"

namespace ctxsense {

// ---------------------------------------------------------------------------
// Kernels. The feature map is never materialized; everything flows through
// kernel evaluations.
// ---------------------------------------------------------------------------

enum class KernelKind { Linear, Rbf };

struct KernelSpec {
    KernelKind kind = KernelKind::Rbf;
    double gamma = 1.0;  // rbf only, > 0

    void validate() const {
        if (kind == KernelKind::Rbf && !(gamma > 0.0 && std::isfinite(gamma)))
            throw precondition_error("rbf kernel requires finite positive gamma");
    }
};

inline double kernel_eval(const KernelSpec& k, const std::vector<double>& a,
                          const std::vector<double>& b) {
    if (a.size() != b.size()) throw schema_error("kernel_eval: schema mismatch");
    if (k.kind == KernelKind::Linear) {
        double dot = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
        return dot;
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::exp(-k.gamma * d2);
}

// ---------------------------------------------------------------------------
// Platt sigmoid calibration: P(y=+1 | f) = 1 / (1 + exp(A f + B)).
// ---------------------------------------------------------------------------

struct PlattParams {
    double a = 0.0;
    double b = 0.0;
};

inline double platt_prob(const PlattParams& p, double decision) {
    const double t = p.a * decision + p.b;
    if (t >= 0.0) {
        const double e = std::exp(-t);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(t));
}

struct PlattOptions {
    // Prior-corrected targets keep the likelihood bounded on separable
    // decision sets; raw targets are the printed (y+1)/2 form.
    bool prior_corrected_targets = true;
    std::size_t max_iterations = 200;
    double gradient_tolerance = 1e-6;
};

// Newton iteration with backtracking on the negative log-likelihood.
inline PlattParams fit_platt(const std::vector<double>& decisions,
                             const std::vector<int>& labels,
                             const PlattOptions& opt = {}) {
    if (decisions.size() != labels.size() || decisions.empty())
        throw precondition_error("fit_platt: decisions/labels size mismatch");
    std::size_t n_pos = 0, n_neg = 0;
    for (int y : labels) (y > 0 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw precondition_error("fit_platt: both labels must be present");

    const double t_pos = opt.prior_corrected_targets
                             ? (static_cast<double>(n_pos) + 1.0) / (static_cast<double>(n_pos) + 2.0)
                             : 1.0;
    const double t_neg = opt.prior_corrected_targets
                             ? 1.0 / (static_cast<double>(n_neg) + 2.0)
                             : 0.0;

    const std::size_t n = decisions.size();
    std::vector<double> target(n);
    for (std::size_t i = 0; i < n; ++i) target[i] = labels[i] > 0 ? t_pos : t_neg;

    auto objective = [&](double a, double b) {
        double val = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = a * decisions[i] + b;
            // t_i*t + log(1+exp(-t)) evaluated without overflow
            if (t >= 0.0)
                val += target[i] * t + std::log1p(std::exp(-t));
            else
                val += (target[i] - 1.0) * t + std::log1p(std::exp(t));
        }
        return val;
    };

    double a = 0.0;
    double b = std::log((static_cast<double>(n_neg) + 1.0) / (static_cast<double>(n_pos) + 1.0));
    double fval = objective(a, b);

    for (std::size_t iter = 0; iter < opt.max_iterations; ++iter) {
        double g_a = 0.0, g_b = 0.0;
        double h_aa = 1e-12, h_bb = 1e-12, h_ab = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = a * decisions[i] + b;
            double p, q;  // p = P(y=+1|f), q = 1 - p
            if (t >= 0.0) {
                const double e = std::exp(-t);
                p = e / (1.0 + e);
                q = 1.0 / (1.0 + e);
            } else {
                const double e = std::exp(t);
                p = 1.0 / (1.0 + e);
                q = e / (1.0 + e);
            }
            const double d1 = target[i] - p;
            g_a += decisions[i] * d1;
            g_b += d1;
            const double d2 = p * q;
            h_aa += decisions[i] * decisions[i] * d2;
            h_bb += d2;
            h_ab += decisions[i] * d2;
        }
        if (std::max(std::abs(g_a), std::abs(g_b)) < opt.gradient_tolerance)
            return {a, b};

        const double det = h_aa * h_bb - h_ab * h_ab;
        const double step_a = -(h_bb * g_a - h_ab * g_b) / det;
        const double step_b = -(h_aa * g_b - h_ab * g_a) / det;

        double stepsize = 1.0;
        bool moved = false;
        while (stepsize >= 1e-10) {
            const double na = a + stepsize * step_a;
            const double nb = b + stepsize * step_b;
            const double nf = objective(na, nb);
            if (nf < fval + 1e-4 * stepsize * (g_a * step_a + g_b * step_b)) {
                a = na;
                b = nb;
                fval = nf;
                moved = true;
                break;
            }
            stepsize *= 0.5;
        }
        if (!moved)
            throw convergence_error("fit_platt: line search failed",
                                    std::max(std::abs(g_a), std::abs(g_b)));
    }
    throw convergence_error("fit_platt: Newton iteration cap reached",
                            std::numeric_limits<double>::quiet_NaN());
}

// ---------------------------------------------------------------------------
// Soft-margin binary SVM trained by two-variable sequential pairwise
// optimization. Dual: max sum a_i - 1/2 sum a_i a_j y_i y_j K_ij subject to
// 0 <= a_i <= beta and sum a_i y_i = 0.
// ---------------------------------------------------------------------------

struct SvmBinaryModel {
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> coefficients;  // alpha_i * y_i, nonzero entries only
    double bias = 0.0;
    KernelSpec kernel;
    double regularization = 1.0;  // beta
    PlattParams platt;

    // training diagnostics
    std::size_t iterations = 0;
    double kkt_residual = 0.0;
};

inline double svm_decision(const SvmBinaryModel& m, const std::vector<double>& x) {
    double f = m.bias;
    for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
        if (m.support_vectors[i].size() != x.size())
            throw schema_error("svm_decision: schema mismatch");
        f += m.coefficients[i] * kernel_eval(m.kernel, x, m.support_vectors[i]);
    }
    return f;
}

inline double platt_prob(const SvmBinaryModel& m, const std::vector<double>& x) {
    return platt_prob(m.platt, svm_decision(m, x));
}

struct SmoOptions {
    double kkt_tolerance = 1e-3;
    std::size_t max_pair_updates = 100000;
    // Full kernel matrix cached up to this many examples; larger sets fall
    // back to recomputing the two active rows per update.
    std::size_t cache_limit = 2500;
};

inline SvmBinaryModel train_svm(const std::vector<std::vector<double>>& x,
                                const std::vector<int>& y, const KernelSpec& kernel,
                                double beta, const SmoOptions& opt = {}) {
    kernel.validate();
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw precondition_error("train_svm: bad training set");
    if (!(beta > 0.0)) throw precondition_error("train_svm: beta must be positive");
    bool has_pos = false, has_neg = false;
    for (int yi : y) {
        if (yi == 1) has_pos = true;
        else if (yi == -1) has_neg = true;
        else throw precondition_error("train_svm: labels must be +1/-1");
    }
    if (!has_pos || !has_neg)
        throw precondition_error("train_svm: both classes must be present");

    const bool cache = n <= opt.cache_limit;
    std::vector<double> kmat;
    if (cache) {
        kmat.resize(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j)
                kmat[i * n + j] = kmat[j * n + i] = kernel_eval(kernel, x[i], x[j]);
    }
    auto krow = [&](std::size_t i, std::vector<double>& row) {
        if (cache) {
            std::copy(kmat.begin() + static_cast<std::ptrdiff_t>(i * n),
                      kmat.begin() + static_cast<std::ptrdiff_t>((i + 1) * n), row.begin());
        } else {
            for (std::size_t j = 0; j < n; ++j) row[j] = kernel_eval(kernel, x[i], x[j]);
        }
    };

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, 1.0);  // dW/da_i = 1 - y_i sum_j a_j y_j K_ij
    std::vector<double> row_i(n), row_j(n);

    // Box limits expressed on y*alpha: y=+1 gives [0, beta], y=-1 gives [-beta, 0].
    auto upper = [beta](int yi) { return yi > 0 ? beta : 0.0; };
    auto lower = [beta](int yi) { return yi > 0 ? 0.0 : -beta; };

    std::size_t iter = 0;
    double residual = 0.0;
    bool converged = false;
    while (iter < opt.max_pair_updates) {
        std::size_t i = n, j = n;
        double up_max = -std::numeric_limits<double>::infinity();
        double low_min = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            const double ya = y[k] * alpha[k];
            const double yg = y[k] * grad[k];
            if (ya < upper(y[k]) && yg > up_max) {
                up_max = yg;
                i = k;
            }
            if (ya > lower(y[k]) && yg < low_min) {
                low_min = yg;
                j = k;
            }
        }
        residual = up_max - low_min;
        if (i == n || j == n || residual <= opt.kkt_tolerance) {
            converged = true;
            break;
        }

        krow(i, row_i);
        krow(j, row_j);
        const double eta = row_i[i] + row_j[j] - 2.0 * row_i[j];
        double step = std::min(upper(y[i]) - y[i] * alpha[i], y[j] * alpha[j] - lower(y[j]));
        if (eta > 1e-12) step = std::min(step, residual / eta);
        if (!(step > 0.0)) {
            converged = true;  // numerically pinned at a bound
            break;
        }

        alpha[i] += y[i] * step;
        alpha[j] -= y[j] * step;
        for (std::size_t k = 0; k < n; ++k)
            grad[k] += step * y[k] * (row_j[k] - row_i[k]);
        ++iter;
    }
    if (!converged)
        throw convergence_error("train_svm: pair-update cap reached, KKT residual " +
                                    std::to_string(residual),
                                residual);

    // Bias from free support vectors: y_k * grad_k equals b for 0 < a < beta.
    double bias_sum = 0.0;
    std::size_t bias_count = 0;
    const double bound_eps = 1e-8 * beta;
    for (std::size_t k = 0; k < n; ++k) {
        if (alpha[k] > bound_eps && alpha[k] < beta - bound_eps) {
            bias_sum += y[k] * grad[k];
            ++bias_count;
        }
    }
    double bias;
    if (bias_count > 0) {
        bias = bias_sum / static_cast<double>(bias_count);
    } else {
        double up_max = -std::numeric_limits<double>::infinity();
        double low_min = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            const double ya = y[k] * alpha[k];
            const double yg = y[k] * grad[k];
            if (ya < upper(y[k])) up_max = std::max(up_max, yg);
            if (ya > lower(y[k])) low_min = std::min(low_min, yg);
        }
        bias = 0.5 * (up_max + low_min);
    }

    SvmBinaryModel model;
    model.kernel = kernel;
    model.regularization = beta;
    model.bias = bias;
    model.iterations = iter;
    model.kkt_residual = std::max(residual, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        if (alpha[k] > 0.0) {
            model.support_vectors.push_back(x[k]);
            model.coefficients.push_back(alpha[k] * y[k]);
        }
    }
    return model;
}

// Default rbf width, 1 / (num_features * mean per-feature variance).
inline double default_rbf_gamma(const std::vector<std::vector<double>>& x) {
    if (x.empty() || x[0].empty()) throw precondition_error("default_rbf_gamma: no data");
    const std::size_t d = x[0].size();
    double total_var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (const auto& row : x) mean += row[j];
        mean /= static_cast<double>(x.size());
        double var = 0.0;
        for (const auto& row : x) var += (row[j] - mean) * (row[j] - mean);
        total_var += var / static_cast<double>(x.size());
    }
    const double mean_var = total_var / static_cast<double>(d);
    if (mean_var < 1e-12) return 1.0 / static_cast<double>(d);
    return 1.0 / (static_cast<double>(d) * mean_var);
}

}  // namespace ctxsense
