#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "aed/baselines.hpp"
#include "aed/rng.hpp"

using namespace aed;
using Catch::Approx;

namespace {

FeatureMatrix matrix_from(const std::vector<std::vector<double>>& rows) {
    FeatureMatrix m;
    m.rows = rows.size();
    m.cols = rows.front().size();
    for (const auto& r : rows) m.values.insert(m.values.end(), r.begin(), r.end());
    return m;
}

/// Separable 2-D point cloud with the requested margin around x0 = 0.
std::pair<FeatureMatrix, std::vector<int>> separable_2d(std::size_t n, double margin, std::uint64_t seed) {
    FeatureMatrix X;
    X.rows = n;
    X.cols = 2;
    X.values.resize(2 * n);
    std::vector<int> y(n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = i % 2 == 0 ? 1 : 0;
        const double sign = y[i] == 1 ? 1.0 : -1.0;
        X.row(i)[0] = sign * (margin / 2.0 + rng.uniform());
        X.row(i)[1] = rng.uniform(-1.0, 1.0);
    }
    return {X, y};
}

}  // namespace

TEST_CASE("naive Bayes symmetric posterior", "[nb]") {
    auto X = matrix_from({{-1}, {-1}, {1}, {1}});
    const std::vector<int> y{0, 0, 1, 1};
    auto model = nb_fit(X, y);

    const double q0 = 0.0;
    auto post = nb_predict(model, &q0);
    REQUIRE(post[0] == Approx(0.5).margin(1e-12));
    REQUIRE(post[1] == Approx(0.5).margin(1e-12));

    const double q1 = 1.0;
    auto post1 = nb_predict(model, &q1);
    REQUIRE(post1[1] > 0.99);
}

TEST_CASE("naive Bayes sufficient statistics ignore duplication", "[nb]") {
    auto X = matrix_from({{-1, 2}, {0, 1}, {1, -1}, {2, 0}});
    const std::vector<int> y{0, 0, 1, 1};
    auto a = nb_fit(X, y);

    auto X2 = matrix_from({{-1, 2}, {0, 1}, {1, -1}, {2, 0}, {-1, 2}, {0, 1}, {1, -1}, {2, 0}});
    const std::vector<int> y2{0, 0, 1, 1, 0, 0, 1, 1};
    auto b = nb_fit(X2, y2);
    REQUIRE(a.mean == b.mean);
    REQUIRE(a.var == b.var);
    REQUIRE(a.priors == b.priors);
}

TEST_CASE("naive Bayes is invariant to consistent affine rescaling", "[nb]") {
    Rng rng(41);
    FeatureMatrix X;
    X.rows = 40;
    X.cols = 3;
    X.values.resize(120);
    std::vector<int> y(40);
    for (std::size_t i = 0; i < 40; ++i) {
        y[i] = rng.bernoulli(0.5) ? 1 : 0;
        for (std::size_t j = 0; j < 3; ++j)
            X.row(i)[j] = rng.normal() + (y[i] == 1 ? 1.0 : -1.0) * (j + 1) * 0.3;
    }
    const std::vector<double> scale{2.0, 0.5, 10.0};
    const std::vector<double> shift{3.0, -1.0, 100.0};
    FeatureMatrix Xs = X;
    for (std::size_t i = 0; i < X.rows; ++i)
        for (std::size_t j = 0; j < 3; ++j) Xs.row(i)[j] = X.row(i)[j] * scale[j] + shift[j];

    auto m = nb_fit(X, y);
    auto ms = nb_fit(Xs, y);
    Rng qr(42);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> q(3), qs(3);
        for (std::size_t j = 0; j < 3; ++j) {
            q[j] = qr.uniform(-2.0, 2.0);
            qs[j] = q[j] * scale[j] + shift[j];
        }
        auto p = nb_predict(m, q.data());
        auto p2 = nb_predict(ms, qs.data());
        REQUIRE(p[1] == Approx(p2[1]).margin(1e-9));
    }
}

TEST_CASE("naive Bayes rejects single-class data", "[nb]") {
    auto X = matrix_from({{1}, {2}});
    REQUIRE_THROWS_AS(nb_fit(X, {1, 1}), data_error);
}

TEST_CASE("forest on constant labels predicts that label exactly", "[rf]") {
    auto X = matrix_from({{0, 1}, {1, 0}, {0.5, 0.5}});
    const std::vector<int> y{0, 0, 0};
    RfConfig cfg;
    cfg.n_trees = 5;
    auto model = rf_fit(X, y, cfg, 3);
    for (std::size_t i = 0; i < X.rows; ++i) {
        auto p = rf_predict(model, X.row(i));
        REQUIRE(p[0] == 1.0);
        REQUIRE(p[1] == 0.0);
    }
}

TEST_CASE("forest shatters the XOR quadrants", "[rf]") {
    auto X = matrix_from({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    const std::vector<int> y{0, 1, 1, 0};
    RfConfig cfg;
    cfg.n_trees = 101;
    auto model = rf_fit(X, y, cfg, 7);
    for (std::size_t i = 0; i < 4; ++i) {
        auto p = rf_predict(model, X.row(i));
        const int pred = p[1] >= p[0] ? 1 : 0;
        REQUIRE(pred == y[i]);
    }
}

TEST_CASE("a fully grown single tree memorizes its training points", "[rf]") {
    Rng rng(51);
    FeatureMatrix X;
    X.rows = 30;
    X.cols = 4;
    X.values.resize(120);
    std::vector<int> y(30);
    for (std::size_t i = 0; i < 30; ++i) {
        y[i] = rng.bernoulli(0.5) ? 1 : 0;
        for (std::size_t j = 0; j < 4; ++j) X.row(i)[j] = rng.uniform(-1.0, 1.0);
    }
    auto tree = tree_fit(X, y, 2, 4, 9);
    for (std::size_t i = 0; i < X.rows; ++i) {
        const auto& frac = tree.predict(X.row(i));
        REQUIRE(frac[static_cast<std::size_t>(y[i])] == 1.0);  // pure leaf
    }
}

TEST_CASE("forests are deterministic given the seed", "[rf]") {
    auto [X, y] = separable_2d(40, 0.2, 53);
    RfConfig cfg;
    cfg.n_trees = 11;
    auto a = rf_fit(X, y, cfg, 5);
    auto b = rf_fit(X, y, cfg, 5);
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t t = 0; t < a.trees.size(); ++t) {
        REQUIRE(a.trees[t].nodes.size() == b.trees[t].nodes.size());
        for (std::size_t n = 0; n < a.trees[t].nodes.size(); ++n) {
            REQUIRE(a.trees[t].nodes[n].feature == b.trees[t].nodes[n].feature);
            REQUIRE(a.trees[t].nodes[n].threshold == b.trees[t].nodes[n].threshold);
        }
    }
}

TEST_CASE("svm kernel identities", "[svm]") {
    SvmModel m;
    m.dim = 3;
    m.cfg.kernel = SvmKernel::rbf;
    const std::vector<double> x{0.3, -0.7, 2.0};
    for (double gamma : {0.01, 1.0, 50.0}) {
        m.cfg.gamma = gamma;
        REQUIRE(m.kernel(x.data(), x.data()) == 1.0);
    }
    m.cfg.kernel = SvmKernel::linear;
    REQUIRE(m.kernel(x.data(), x.data()) == Approx(0.09 + 0.49 + 4.0));
}

TEST_CASE("symmetric two-point problem", "[svm]") {
    auto X = matrix_from({{1.0}, {-1.0}});
    const std::vector<int> y{0, 1};  // +1 at x=-1, -1 at x=+1
    SvmConfig cfg;
    cfg.C = 1.0;
    cfg.gamma = 1.0;
    auto model = svm_fit(X, y, cfg);
    const double at_pos = model.decision(X.row(0));
    const double at_neg = model.decision(X.row(1));
    REQUIRE(at_pos < 0.0);
    REQUIRE(at_neg > 0.0);
    const double zero = 0.0;
    REQUIRE(std::abs(model.decision(&zero)) < 1e-9);  // boundary at 0 by symmetry
}

TEST_CASE("separable problem reaches full training accuracy with clean KKT", "[svm]") {
    auto [X, y] = separable_2d(50, 0.5, 61);
    SvmConfig cfg;
    cfg.C = 10.0;
    cfg.gamma = 1.0;
    auto [model, alpha] = svm_fit_with_alpha(X, y, cfg);
    REQUIRE(model.converged);

    std::size_t correct = 0;
    for (std::size_t i = 0; i < X.rows; ++i) {
        const double f = model.decision(X.row(i));
        correct += (f >= 0.0) == (y[i] == 1) ? 1 : 0;
    }
    REQUIRE(correct == X.rows);
    REQUIRE(svm_kkt_violation(model, X, y, alpha) <= cfg.tol + 1e-9);

    // dual feasibility
    double sum_ay = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        REQUIRE(alpha[i] >= 0.0);
        REQUIRE(alpha[i] <= cfg.C + 1e-12);
        sum_ay += alpha[i] * (y[i] == 1 ? 1.0 : -1.0);
    }
    REQUIRE(std::abs(sum_ay) <= 1e-6);
}

TEST_CASE("probability outputs are distributions for all baselines", "[baselines]") {
    auto [X, y] = separable_2d(30, 0.3, 71);

    auto nb = nb_fit(X, y);
    RfConfig rfc;
    rfc.n_trees = 15;
    auto rf = rf_fit(X, y, rfc, 11);
    SvmConfig svc;
    svc.gamma = 1.0;
    auto svm = svm_fit(X, y, svc);

    Rng rng(72);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> q{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        for (auto p : {nb_predict(nb, q.data()), rf_predict(rf, q.data()), svm.predict_proba(q.data())}) {
            REQUIRE(p[0] >= 0.0);
            REQUIRE(p[1] >= 0.0);
            REQUIRE(std::abs(p[0] + p[1] - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("platt probabilities are monotone in the decision value", "[svm]") {
    auto [X, y] = separable_2d(40, 0.4, 81);
    SvmConfig cfg;
    cfg.gamma = 1.0;
    auto model = svm_fit(X, y, cfg);
    Rng rng(82);
    double prev_f = -1e9, prev_p = -1.0;
    std::vector<std::pair<double, double>> pairs;
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> q{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        pairs.emplace_back(model.decision(q.data()), model.predict_proba(q.data())[1]);
    }
    std::sort(pairs.begin(), pairs.end());
    for (const auto& [f, p] : pairs) {
        if (prev_p >= 0.0) REQUIRE(p >= prev_p - 1e-12);
        prev_f = f;
        prev_p = p;
    }
    (void)prev_f;
}

TEST_CASE("iteration cap reports non-convergence but returns a model", "[svm]") {
    auto [X, y] = separable_2d(40, 0.05, 91);
    // overlap the classes to make the problem non-trivial
    for (std::size_t i = 0; i < X.rows; i += 3) X.row(i)[0] = -X.row(i)[0];
    SvmConfig cfg;
    cfg.gamma = 0.5;
    cfg.C = 10.0;
    cfg.max_steps = 3;
    auto model = svm_fit(X, y, cfg);
    REQUIRE_FALSE(model.converged);
    const double q[2] = {0.1, 0.2};
    auto p = model.predict_proba(q);
    REQUIRE(std::abs(p[0] + p[1] - 1.0) < 1e-9);
}

TEST_CASE("svm requires both classes", "[svm]") {
    auto X = matrix_from({{1.0}, {2.0}});
    REQUIRE_THROWS_AS(svm_fit(X, {1, 1}, SvmConfig{}), data_error);
}
