#include "doctest.h"

#include "qbc/divergence.hpp"
#include "qbc/lemmas.hpp"
#include "qbc/pinching.hpp"
#include "qbc/random.hpp"

#include <cmath>

using namespace qbc;

TEST_CASE("hayashi_nagaoka scalar and boundary cases") {
    Mat S = Mat::Constant(1, 1, 0.5), T = Mat::Constant(1, 1, 0.25);
    auto c = certify_hayashi_nagaoka(S, T);
    CHECK(c.lhs == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(c.rhs == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(c.margin == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
    CHECK(c.passed);

    auto z = certify_hayashi_nagaoka(identity(3), Mat::Zero(3, 3));
    CHECK(std::abs(z.margin) < 1e-12);
    CHECK(z.passed);

    // both zero: the inverse root vanishes and lhs = I, rhs = 2I
    auto k = certify_hayashi_nagaoka(Mat::Zero(2, 2), Mat::Zero(2, 2));
    CHECK(k.margin == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(certify_hayashi_nagaoka(2.0 * identity(2), Mat::Zero(2, 2)), ValidationError);
    CHECK_THROWS_AS(certify_hayashi_nagaoka(identity(2), -identity(2)), ValidationError);
}

TEST_CASE("hypothesis_testing against a diagonal oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 4;
        auto p = random_pmf(d, rng), q = random_pmf(d, rng);
        double M = std::ldexp(1.0, trial % 7 - 2);
        double alpha = 0.1 + 0.1 * (trial % 9);
        double lhs = 0, rhs = 0;
        for (int i = 0; i < d; ++i) {
            if (p[i] >= M * q[i])
                lhs += M * q[i];
            else
                lhs += p[i];
            rhs += std::pow(p[i], 1.0 - alpha) * std::pow(q[i], alpha);
        }
        rhs *= std::pow(M, alpha);
        auto c = certify_hypothesis_testing(diag(p), diag(q), M, alpha);
        CHECK(c.lhs == doctest::Approx(lhs).epsilon(1e-10));
        CHECK(c.rhs == doctest::Approx(rhs).epsilon(1e-10));
        CHECK(c.passed);
    }
    Rng r2(3);
    Mat rho = random_density(3, r2);
    auto c = certify_hypothesis_testing(rho, rho, 2.0, 0.5);
    CHECK(c.lhs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.rhs == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("petz_to_sandwich on commuting pairs is exact up to nu^alpha") {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        auto p = random_pmf(4, rng);
        std::vector<double> q = {0.1, 0.1, 0.4, 0.4};
        double alpha = 0.1 + 0.1 * (trial % 9);
        Mat w = random_unitary(4, rng);
        Mat rho = w * diag(p) * w.adjoint(), sigma = w * diag(q) * w.adjoint();
        auto c = certify_petz_to_sandwich(rho, sigma, alpha);
        CHECK(c.rhs == doctest::Approx(std::pow(2.0, alpha) * c.lhs).epsilon(1e-10));
        CHECK(c.passed);
    }
}

TEST_CASE("union_bound on commuting projectors against a diagonal oracle") {
    std::vector<double> p = {0.1, 0.2, 0.3, 0.4};
    std::vector<std::vector<double>> masks = {{1, 1, 0, 1}, {1, 0, 1, 1}, {1, 1, 1, 0}};
    std::vector<Mat> ops;
    for (auto& m : masks) ops.push_back(diag(m));
    double keep = 0.1;  // only index 0 survives all three
    double rhs = 0.3 + 0.2 + 0.4;
    auto c = certify_union_bound(ops, diag(p));
    CHECK(c.lhs == doctest::Approx(1.0 - keep).epsilon(1e-12));
    CHECK(c.rhs == doctest::Approx(rhs).epsilon(1e-12));
    CHECK(c.passed);
}

TEST_CASE("nested proposition with trivial U and V reduces to a blockwise pinching") {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Mat> cond = {random_density(2, rng), random_density(2, rng)};
        auto px = random_pmf(2, rng);
        CqState s = make_cq({{"U", 1}, {"V", 1}, {"X", 2}}, px, cond);
        double alpha = 0.3;
        auto certs = certify_nested_pinching_proposition(s, alpha);
        REQUIRE(certs.size() == 2);
        Mat rb = s.average();
        PinchingMap m = pinching_from(rb);
        double lhs = 0;
        for (int x = 0; x < 2; ++x) lhs += px[x] * petz_q(pinch(m, cond[x]), rb, 1.0 - alpha);
        CHECK(certs[0].lhs == doctest::Approx(lhs).epsilon(1e-10));
        CHECK(certs[0].passed);
        CHECK(certs[1].passed);
    }
    CqState bad = make_cq({{"U", 1}, {"X", 1}}, {1.0}, {identity(2) / 2.0});
    CHECK_THROWS_AS(certify_nested_pinching_proposition(bad, 0.5), ValidationError);
}

TEST_CASE("lemma sweeps pass and are reproducible") {
    for (const auto& id : lemma_ids()) {
        int trials = id == "nested_pinching_proposition" ? 40 : 100;
        auto rep = sweep_lemma(id, trials, 7);
        INFO(id << " min margin " << rep.min_margin);
        CHECK(rep.passed());
        CHECK(rep.min_margin >= -kCertificateTol);
        auto again = lemma_instance(id, 7, 3);
        auto first = lemma_instance(id, 7, 3);
        REQUIRE(again.size() == first.size());
        CHECK(again[0].instance_digest == first[0].instance_digest);
        CHECK(again[0].margin == first[0].margin);
    }
    auto a = sweep_lemma("petz_to_sandwich", 20, 9, kCertificateTol, 1);
    auto b = sweep_lemma("petz_to_sandwich", 20, 9, kCertificateTol, 3);
    for (std::size_t i = 0; i < a.certificates.size(); ++i) CHECK(a.certificates[i].margin == b.certificates[i].margin);
    CHECK(suite_lemmas("lemmas").size() == 4);
    CHECK_THROWS_AS(suite_lemmas("nope"), ValidationError);
}

TEST_CASE("certificate pass flag honours the tolerance") {
    CHECK(make_certificate("x", "", 0, 0, -5e-10, 1e-9).passed);
    CHECK_FALSE(make_certificate("x", "", 0, 0, -2e-9, 1e-9).passed);
}
