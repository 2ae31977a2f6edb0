#include "doctest.h"

#include "qbc/divergence.hpp"
#include "qbc/pinching.hpp"
#include "qbc/random.hpp"

#include <cmath>

using namespace qbc;

TEST_CASE("relative entropy") {
    Rng rng(1);
    Mat r = random_density(3, rng);
    CHECK(std::abs(relative_entropy(r, r)) <= 1e-10);
    double kl = 0.5 * std::log2(0.5 / 0.9) + 0.5 * std::log2(0.5 / 0.1);
    CHECK(std::abs(relative_entropy(diag({0.5, 0.5}), diag({0.9, 0.1})) - kl) <= 1e-12);
    CHECK(std::isinf(relative_entropy(diag({1, 0}), diag({0, 1}))));
}

TEST_CASE("Petz and sandwiched Renyi basics") {
    Rng rng(2);
    Mat r = random_density(3, rng);
    for (double a : {0.2, 0.5, 0.9, 1.5, 3.0}) {
        CHECK(std::abs(petz_renyi(r, r, a)) <= 1e-10);
        CHECK(std::abs(sandwiched_renyi(r, r, a)) <= 1e-10);
    }
    std::vector<double> p{0.2, 0.5, 0.3}, q{0.4, 0.4, 0.2};
    for (double a : {0.3, 0.7, 1.5, 2.5}) {
        double c = classical_renyi(p, q, a);
        CHECK(std::abs(petz_renyi(diag(p), diag(q), a) - c) <= 1e-12);
        // commuting pair: sandwiched collapses to Petz
        Mat u = random_unitary(3, rng);
        Mat rp = u * diag(p) * u.adjoint(), sq = u * diag(q) * u.adjoint();
        CHECK(std::abs(sandwiched_renyi(rp, sq, a) - petz_renyi(rp, sq, a)) <= 1e-10);
    }
    CHECK_THROWS_AS(RenyiOrder(1.0), ValidationError);
    CHECK(std::isinf(petz_renyi(diag({0.5, 0.5}), diag({1, 0}), 1.5)));
    CHECK(std::isfinite(petz_renyi(diag({0.5, 0.5}), diag({1, 0}), 0.5)));
}

TEST_CASE("Renyi divergences approach the relative entropy near alpha = 1") {
    Rng rng(3);
    for (int k = 0; k < 30; ++k) {
        Mat r = random_density(3, rng), s = random_density(3, rng);
        double d = relative_entropy(r, s);
        for (double a : {0.9999, 1.0001}) {
            CHECK(std::abs(petz_renyi(r, s, a) - d) <= 1e-3);
            CHECK(std::abs(sandwiched_renyi(r, s, a) - d) <= 1e-3);
        }
    }
}

TEST_CASE("sandwiched does not exceed Petz (numerically established ordering)") {
    Rng rng(4);
    for (int k = 0; k < 200; ++k) {
        int d = 2 + k % 3;
        Mat r = random_density(d, rng), s = random_density(d, rng);
        for (double a : {0.1, 0.3, 0.5, 0.7, 0.9, 1.3, 2.0})
            CHECK(sandwiched_renyi(r, s, a) <= petz_renyi(r, s, a) + 1e-9);
    }
}

TEST_CASE("data processing under pinching and monotonicity in alpha") {
    Rng rng(5);
    for (int k = 0; k < 40; ++k) {
        int d = 2 + k % 3;
        Mat r = random_density(d, rng), s = random_density(d, rng);
        auto m = pinching_from(random_density(d, rng));
        Mat er = pinch(m, r), es = pinch(m, s);
        for (double a : {0.3, 0.6, 0.9, 1.5, 2.0}) {
            CHECK(petz_renyi(er, es, a) <= petz_renyi(r, s, a) + 1e-9);
            if (a >= 0.5) CHECK(sandwiched_renyi(er, es, a) <= sandwiched_renyi(r, s, a) + 1e-9);
        }
        double prev_p = -1, prev_s = -1;
        for (double a : {0.2, 0.4, 0.6, 0.8, 1.2, 1.6, 2.0}) {
            double dp = petz_renyi(r, s, a), ds = sandwiched_renyi(r, s, a);
            CHECK(dp >= prev_p - 1e-9);
            CHECK(ds >= prev_s - 1e-9);
            CHECK(dp >= -1e-12);
            prev_p = dp;
            prev_s = ds;
        }
    }
}

TEST_CASE("dmax") {
    Rng rng(6);
    Mat r = random_density(3, rng);
    CHECK(std::abs(dmax(r, r)) <= 1e-9);
    CHECK(std::abs(dmax(diag({1, 0}), diag({0.5, 0.5})) - 1.0) <= 1e-12);
    Mat s = random_density(3, rng);
    double v = dmax(r, s);
    CHECK(min_eigenvalue(std::exp2(v) * s - r) >= -1e-9);
    CHECK(std::isinf(dmax(diag({0.5, 0.5}), diag({1, 0}))));
}

TEST_CASE("classical smooth dmax") {
    std::vector<double> p{0.6, 0.3, 0.1}, q{0.2, 0.3, 0.5};
    CHECK(smooth_dmax_classical(p, q, 0.0) == doctest::Approx(classical_dmax(p, q)).epsilon(1e-15));
    CHECK(smooth_dmax_classical(q, q, 0.3) == 0.0);
    double prev = 1e9;
    for (double e : {0.0, 0.05, 0.1, 0.2, 0.4, 0.8}) {
        auto r = smooth_dmax_classical_ex(p, q, e);
        CHECK(r.value <= prev + 1e-15);
        prev = r.value;
        double s = 0;
        for (double x : r.p_tilde) s += x;
        CHECK(std::abs(s - 1.0) <= 1e-12);
        CHECK(classical_purified_distance(r.p_tilde, p) <= e + 1e-12);
        CHECK(classical_dmax(r.p_tilde, q) <= r.value + 1e-12);
    }
    CHECK_THROWS_AS(smooth_dmax_classical(p, q, 1.0), ValidationError);

    // exhaustive grid over the simplex at step 0.001 within the purified-distance ball
    const double eps = 0.1;
    double best = 1e9;
    for (int a = 0; a <= 1000; ++a)
        for (int b = 0; a + b <= 1000; ++b) {
            std::vector<double> t{a / 1000.0, b / 1000.0, (1000 - a - b) / 1000.0};
            if (classical_purified_distance(t, p) > eps) continue;
            best = std::min(best, classical_dmax(t, q));
        }
    double got = smooth_dmax_classical(p, q, eps);
    CHECK(got <= classical_dmax(p, q));
    CHECK(got >= best - 1e-6);
}
