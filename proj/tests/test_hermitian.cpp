#include "doctest.h"

#include "qbc/hermitian.hpp"
#include "qbc/random.hpp"

#include <cmath>

using namespace qbc;

namespace {

// Closed form for qubits: F^2 = tr(rho sigma) + 2 sqrt(det rho det sigma).
double qubit_fidelity(const Mat& r, const Mat& s) {
    double f2 = (r * s).trace().real() + 2.0 * std::sqrt(std::max(0.0, r.determinant().real() * s.determinant().real()));
    return std::sqrt(f2);
}

}  // namespace

TEST_CASE("spectral clusters degenerate and distinct eigenvalues") {
    auto sd = spectral(identity(2));
    REQUIRE(sd.spaces.size() == 1);
    CHECK(sd.spaces[0].value == doctest::Approx(1.0));
    CHECK(sd.spaces[0].multiplicity == 2);

    auto sd2 = spectral(diag({0.7, 0.3}));
    REQUIRE(sd2.spaces.size() == 2);
    CHECK(sd2.spaces[0].value == doctest::Approx(0.3));
    CHECK(sd2.spaces[1].value == doctest::Approx(0.7));
}

TEST_CASE("spectral invariants on random Hermitian matrices") {
    for (int seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        Mat h = random_hermitian(4, rng);
        auto sd = spectral(h);
        Mat sum = Mat::Zero(4, 4);
        for (std::size_t i = 0; i < sd.spaces.size(); ++i) {
            sum += sd.spaces[i].projector;
            for (std::size_t j = i + 1; j < sd.spaces.size(); ++j)
                CHECK(op_norm(sd.spaces[i].projector * sd.spaces[j].projector) <= 1e-10);
            if (i > 0) CHECK(!same_eigenvalue(sd.spaces[i - 1].value, sd.spaces[i].value, sd.cluster_tol));
        }
        CHECK((sum - identity(4)).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((sd.reconstruct() - h).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("spectral rejects non-Hermitian input") {
    Mat a = Mat::Zero(2, 2);
    a(0, 1) = 1.0;
    CHECK_THROWS_AS(spectral(a), ValidationError);
}

TEST_CASE("matrix_power") {
    Mat p = matrix_power(diag({4, 1}), 0.5);
    CHECK((p - diag({2, 1})).cwiseAbs().maxCoeff() <= 1e-12);
    Rng rng(3);
    for (int k = 0; k < 20; ++k) {
        Mat r = random_density(3, rng);
        CHECK((matrix_power(r, 1.0) - r).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((matrix_power(r, 0.3) * matrix_power(r, 0.7) - r).cwiseAbs().maxCoeff() <= 1e-9);
    }
    Mat def = random_density(3, rng, 2);
    auto pr = matrix_power_ex(def, -0.5);
    CHECK(pr.pseudo_inverse);
    CHECK((matrix_power(def, 0.0) - support_projector(def)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::abs(matrix_power(def, 0.0).trace().real() - 2.0) <= 1e-10);
}

TEST_CASE("positive_part_projector") {
    CHECK((positive_part_projector(2.0 * identity(2), identity(2)) - identity(2)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(positive_part_projector(Mat::Zero(2, 2), identity(2)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((positive_part_projector(diag({2, 0.5}), identity(2)) - diag({1, 0})).cwiseAbs().maxCoeff() <= 1e-12);
    Rng rng(5);
    for (int k = 0; k < 20; ++k) {
        Mat t = random_hermitian(4, rng), o = random_hermitian(4, rng);
        Mat p = positive_part_projector(t, o);
        CHECK((p * p - p).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(op_norm(p * (t - o) - (t - o) * p) <= 1e-9);
    }
}

TEST_CASE("fidelity and purified distance") {
    Mat z0 = diag({1, 0}), z1 = diag({0, 1});
    CHECK(fidelity(z0, z1) == doctest::Approx(0.0));
    CHECK(purified_distance(z0, z1) == doctest::Approx(1.0));
    Rng rng(11);
    for (int k = 0; k < 50; ++k) {
        Mat r = random_density(2, rng), s = random_density(2, rng), t = random_density(2, rng);
        CHECK(purified_distance(r, r) <= 1e-7);
        CHECK(std::abs(fidelity(r, s) - qubit_fidelity(r, s)) <= 1e-9);
        CHECK(purified_distance(r, t) <= purified_distance(r, s) + purified_distance(s, t) + 1e-9);
    }
}

TEST_CASE("partial trace and kron") {
    CHECK((kron(identity(2), identity(2)) - identity(4)).cwiseAbs().maxCoeff() == 0.0);
    Rng rng(2);
    Mat r = random_density(2, rng), s = random_density(3, rng);
    Mat rs = kron(r, s);
    CHECK((partial_trace(rs, {2, 3}, {0}) - r).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((partial_trace(rs, {2, 3}, {1}) - s).cwiseAbs().maxCoeff() <= 1e-12);
    Mat x = random_density(12, rng);
    for (auto keep : std::vector<std::vector<int>>{{0}, {1}, {2}, {0, 2}, {1, 2}, {}})
        CHECK(std::abs(partial_trace(x, {2, 3, 2}, keep).trace() - x.trace()) <= 1e-12);
    CHECK_THROWS_AS(partial_trace(x, {2, 2}, {0}), ValidationError);
}

TEST_CASE("dimension cap") {
    CHECK_NOTHROW(check_dim_cap(256));
    CHECK_THROWS_AS(check_dim_cap(257), ValidationError);
}
