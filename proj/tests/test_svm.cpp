#include <doctest.h>

#include "ctxsense/svm.hpp"
#include "oracles.hpp"

using namespace ctxsense;

namespace {

struct Instance {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
};

Instance random_instance(Rng& rng, std::size_t n) {
    Instance inst;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = i % 2 == 0 ? 1 : -1;
        inst.x.push_back({rng.normal(label * 1.2, 1.0), rng.normal(-label * 0.7, 1.0)});
        inst.y.push_back(label);
    }
    return inst;
}

std::vector<std::vector<double>> gram(const KernelSpec& k, const Instance& inst) {
    const std::size_t n = inst.x.size();
    std::vector<std::vector<double>> g(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g[i][j] = kernel_eval(k, inst.x[i], inst.x[j]);
    return g;
}

void check_dual_feasible(const SvmBinaryModel& m) {
    double sum = 0.0;
    for (double c : m.coefficients) {
        const double alpha = std::abs(c);
        CHECK(alpha >= 0.0);
        CHECK(alpha <= m.regularization + 1e-9);
        sum += c;  // c = alpha * y
    }
    CHECK(std::abs(sum) < 1e-8);
}

}  // namespace

TEST_CASE("kernel evaluations") {
    const KernelSpec rbf{KernelKind::Rbf, 0.5};
    const KernelSpec lin{KernelKind::Linear, 0.0};
    CHECK(kernel_eval(rbf, {1.0, 2.0}, {1.0, 2.0}) == 1.0);
    CHECK(kernel_eval(lin, {1.0, 2.0}, {3.0, 4.0}) == 11.0);
    CHECK(kernel_eval(rbf, {1.0, 0.0}, {0.0, 0.0}) == doctest::Approx(std::exp(-0.5)));
    CHECK_THROWS_AS(kernel_eval(lin, {1.0}, {1.0, 2.0}), schema_error);
}

TEST_CASE("maximum-margin solution on a separable pair") {
    const std::vector<std::vector<double>> x = {{0.0, 1.0}, {0.0, -1.0}};
    const std::vector<int> y = {1, -1};
    const KernelSpec lin{KernelKind::Linear, 0.0};
    const SvmBinaryModel m = train_svm(x, y, lin, 10.0);

    // Analytic optimum: f(x) = x2, both points on the margin.
    CHECK(m.support_vectors.size() == 2);
    CHECK(std::abs(m.bias) < 1e-3);
    CHECK(svm_decision(m, {0.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(svm_decision(m, {0.0, -1.0}) == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(svm_decision(m, {5.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-3));
    check_dual_feasible(m);
}

TEST_CASE("duplicating the data leaves the decision function unchanged") {
    // Separable fixture: every multiplier stays interior, so the
    // maximum-margin hyperplane is unchanged by repetition.
    Rng rng(21);
    Instance inst;
    for (int i = 0; i < 8; ++i) {
        const int label = i % 2 == 0 ? 1 : -1;
        inst.x.push_back({rng.normal(label * 4.0, 0.5), rng.normal(label * 3.0, 0.5)});
        inst.y.push_back(label);
    }
    const KernelSpec lin{KernelKind::Linear, 0.0};
    SmoOptions tight;
    tight.kkt_tolerance = 1e-5;
    const SvmBinaryModel base = train_svm(inst.x, inst.y, lin, 10.0, tight);

    Instance dup = inst;
    for (int rep = 0; rep < 4; ++rep) {
        dup.x.insert(dup.x.end(), inst.x.begin(), inst.x.end());
        dup.y.insert(dup.y.end(), inst.y.begin(), inst.y.end());
    }
    const SvmBinaryModel five = train_svm(dup.x, dup.y, lin, 10.0, tight);
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<double> probe = {rng.normal(0.0, 2.0), rng.normal(0.0, 2.0)};
        CHECK(svm_decision(base, probe) ==
              doctest::Approx(svm_decision(five, probe)).epsilon(1e-3));
    }
}

TEST_CASE("well-separated gaussian blobs train to zero error") {
    Rng rng(22);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 100; ++i) {
        x.push_back({rng.normal(6.0, 1.0), rng.normal(0.0, 1.0)});
        y.push_back(1);
        x.push_back({rng.normal(-6.0, 1.0), rng.normal(0.0, 1.0)});
        y.push_back(-1);
    }
    const SvmBinaryModel m = train_svm(x, y, KernelSpec{KernelKind::Rbf, 0.25}, 1.0);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if ((svm_decision(m, x[i]) > 0.0) == (y[i] > 0)) ++correct;
    CHECK(correct == x.size());
    check_dual_feasible(m);
}

TEST_CASE("decision expansion by hand") {
    SvmBinaryModel m;
    m.kernel = {KernelKind::Linear, 0.0};
    m.support_vectors = {{1.0}, {-1.0}};
    m.coefficients = {0.5, -0.5};
    m.bias = 0.0;
    CHECK(svm_decision(m, {2.0}) == doctest::Approx(2.0));
    CHECK(svm_decision(m, {0.0}) == doctest::Approx(0.0));
}

TEST_CASE("free support vectors sit on the margin after training") {
    Rng rng(23);
    const Instance inst = random_instance(rng, 40);
    const KernelSpec rbf{KernelKind::Rbf, 0.5};
    const double beta = 2.0;
    const SvmBinaryModel m = train_svm(inst.x, inst.y, rbf, beta);
    std::size_t free_svs = 0;
    for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
        const double alpha = std::abs(m.coefficients[i]);
        if (alpha > 1e-6 && alpha < beta - 1e-6) {
            const double yf = (m.coefficients[i] > 0 ? 1.0 : -1.0) *
                              svm_decision(m, m.support_vectors[i]);
            CHECK(yf == doctest::Approx(1.0).epsilon(5e-3));
            ++free_svs;
        }
    }
    CHECK(free_svs > 0);
}

TEST_CASE("smo agrees with the exhaustive active-set oracle on small instances") {
    Rng rng(24);
    const KernelSpec lin{KernelKind::Linear, 0.0};
    const KernelSpec rbf{KernelKind::Rbf, 0.7};
    SmoOptions tight;
    tight.kkt_tolerance = 1e-4;  // comparison headroom below the 1e-3 bound
    int verified = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(6, 9));
        const Instance inst = random_instance(rng, n);
        for (const KernelSpec& k : {lin, rbf}) {
            for (double beta : {0.5, 10.0}) {
                const auto g = gram(k, inst);
                const auto ref = oracle::brute_force_svm_dual(g, inst.y, beta);
                REQUIRE(ref.found);
                if (!ref.has_free) continue;  // bias interval would be ambiguous
                const SvmBinaryModel m = train_svm(inst.x, inst.y, k, beta, tight);
                check_dual_feasible(m);
                for (std::size_t i = 0; i < inst.x.size(); ++i) {
                    double ref_f = ref.bias;
                    for (std::size_t j = 0; j < inst.x.size(); ++j)
                        ref_f += ref.alpha[j] * inst.y[j] * g[i][j];
                    CHECK(std::abs(svm_decision(m, inst.x[i]) - ref_f) <= 1e-3);
                }
                ++verified;
            }
        }
    }
    CHECK(verified >= 20);
}

TEST_CASE("single-class input is rejected") {
    const std::vector<std::vector<double>> x = {{0.0}, {1.0}};
    CHECK_THROWS_AS(train_svm(x, {1, 1}, KernelSpec{KernelKind::Linear, 0.0}, 1.0),
                    precondition_error);
}

TEST_CASE("platt fit on symmetric separable decisions") {
    std::vector<double> f;
    std::vector<int> y;
    for (int i = 0; i < 50; ++i) {
        f.push_back(1.0);
        y.push_back(1);
        f.push_back(-1.0);
        y.push_back(-1);
    }
    const PlattParams p = fit_platt(f, y);
    CHECK(p.a < 0.0);
    CHECK(std::abs(p.b) < 1e-6);
    CHECK(platt_prob(p, 0.0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("platt probability evaluations") {
    const PlattParams p{-2.0, 0.0};
    CHECK(platt_prob(p, 1.0) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
    CHECK(platt_prob(p, 0.0) == doctest::Approx(0.5));
    // Monotone for a < 0.
    double prev = 0.0;
    for (double f = -3.0; f <= 3.0; f += 0.25) {
        const double v = platt_prob(p, f);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("platt recovers known sigmoid parameters from sampled data") {
    Rng rng(25);
    const double true_a = -2.0, true_b = 0.3;
    std::vector<double> f(5000);
    std::vector<int> y(5000);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = rng.uniform(-4.0, 4.0);
        const double p = 1.0 / (1.0 + std::exp(true_a * f[i] + true_b));
        y[i] = rng.uniform() < p ? 1 : -1;
    }
    const PlattParams p = fit_platt(f, y);
    CHECK(p.a == doctest::Approx(true_a).epsilon(0.05));
    CHECK(p.b == doctest::Approx(true_b).epsilon(0.35));
}

TEST_CASE("platt calibration preserves the decision ranking") {
    Rng rng(26);
    const Instance inst = random_instance(rng, 60);
    const SvmBinaryModel base = train_svm(inst.x, inst.y, KernelSpec{KernelKind::Rbf, 0.5}, 1.0);
    std::vector<double> decisions;
    for (const auto& row : inst.x) decisions.push_back(svm_decision(base, row));
    const PlattParams p = fit_platt(decisions, inst.y);
    REQUIRE(p.a < 0.0);
    for (std::size_t i = 0; i + 1 < decisions.size(); ++i)
        for (std::size_t j = i + 1; j < decisions.size(); ++j)
            if (decisions[i] < decisions[j])
                CHECK(platt_prob(p, decisions[i]) < platt_prob(p, decisions[j]));
}

TEST_CASE("platt requires both labels") {
    CHECK_THROWS_AS(fit_platt({1.0, 2.0}, {1, 1}), precondition_error);
}
