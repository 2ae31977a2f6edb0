#include "doctest.h"

#include "qbc/mutual_info.hpp"
#include "qbc/random.hpp"

#include <cmath>

using namespace qbc;

namespace {

CqState random_cq(Rng& rng, std::vector<ClassicalRegister> regs, int dB) {
    int n = 1;
    for (const auto& r : regs) n *= r.size;
    std::vector<Mat> cond;
    for (int t = 0; t < n; ++t) cond.push_back(random_density(dB, rng));
    return make_cq(std::move(regs), random_pmf(n, rng), std::move(cond));
}

// Sandwiched objective for a qubit sigma given by a Bloch vector, closed-form 2x2 algebra.
double qubit_down_objective(const std::vector<double>& w, const std::vector<Mat>& rho, double x, double y, double z,
                            double alpha) {
    double r = std::sqrt(x * x + y * y + z * z);
    const double s = (1.0 - alpha) / (2.0 * alpha);
    Mat pauli = Mat::Zero(2, 2);
    Mat sig_s;
    if (r < 1e-15) {
        sig_s = std::pow(0.5, s) * identity(2);
    } else {
        pauli(0, 0) = z;
        pauli(1, 1) = -z;
        pauli(0, 1) = cplx(x, -y);
        pauli(1, 0) = cplx(x, y);
        Mat pp = 0.5 * (identity(2) + pauli / r), pm = 0.5 * (identity(2) - pauli / r);
        double lp = 0.5 * (1 + r), lm = 0.5 * (1 - r);
        if (lm <= 1e-12 && alpha > 1) return kInf;  // support of rho leaves supp(sigma)
        sig_s = std::pow(lp, s) * pp + (lm > 0 ? std::pow(lm, s) : 0.0) * pm;
    }
    double q = 0;
    for (std::size_t a = 0; a < w.size(); ++a) {
        Mat m = sig_s * rho[a] * sig_s;
        double tr = m.trace().real(), det = m.determinant().real();
        double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
        double m1 = tr / 2 + disc, m2 = std::max(0.0, tr / 2 - disc);
        q += w[a] * (std::pow(m1, alpha) + (m2 > 0 ? std::pow(m2, alpha) : 0.0));
    }
    return std::log2(q) / (alpha - 1.0);
}

}  // namespace

TEST_CASE("Shannon mutual information") {
    Rng rng(1);
    Mat r = random_density(2, rng);
    CqState prod = make_cq({{"X", 2}}, {0.3, 0.7}, {r, r});
    CHECK(std::abs(shannon_mi(prod, {{"X"}})) <= 1e-12);

    CqState bits = classical_state({{"A", 2}, {"B", 2}}, {0.5, 0, 0, 0.5});
    CHECK(std::abs(shannon_mi(bits, {{"A"}, {"B"}}) - 1.0) <= 1e-12);

    CqState s = random_cq(rng, {{"X", 3}}, 2);
    double holevo = 0;
    for (int x = 0; x < 3; ++x) holevo += s.pmf[x] * relative_entropy(s.cond[x], s.average());
    CHECK(std::abs(shannon_mi(s, {{"X"}}) - holevo) <= 1e-10);

    CqState uv = random_cq(rng, {{"U", 2}, {"V", 2}}, 2);
    CHECK(shannon_mi(uv, {{"U", "V"}}) >= shannon_mi(uv, {{"U"}}) - 1e-10);
    CHECK_THROWS_AS(shannon_mi(uv, {{"U"}, {}, {"U"}}), ValidationError);
}

TEST_CASE("Renyi mutual information, up arrow") {
    Rng rng(2);
    Mat r = random_density(2, rng);
    CqState prod = make_cq({{"X", 2}}, {0.3, 0.7}, {r, r});
    CHECK(std::abs(renyi_mi_up(prod, {"X"}, 0.7, true)) <= 1e-12);

    CqState s = random_cq(rng, {{"U", 2}, {"X", 2}}, 2);
    auto s2 = tensor_power(s, 2);
    for (double a : {0.6, 0.8, 1.5}) {
        double one = renyi_mi_up(s, {"U", "X"}, a, true);
        double two = renyi_mi_up(s2, {"U_1", "X_1", "U_2", "X_2"}, a, true);
        CHECK(std::abs(two - 2 * one) <= 1e-7);
    }

    // classical joint: Renyi divergence of p_XY against p_X p_Y
    std::vector<double> pxy{0.1, 0.2, 0.3, 0.4};
    CqState c = make_cq({{"X", 2}}, {0.3, 0.7}, {diag({1.0 / 3, 2.0 / 3}), diag({3.0 / 7, 4.0 / 7})});
    std::vector<double> prod_q{0.3 * 0.4, 0.3 * 0.6, 0.7 * 0.4, 0.7 * 0.6};
    for (double a : {0.5, 1.5})
        CHECK(std::abs(renyi_mi_up(c, {"X"}, a, false) - classical_renyi(pxy, prod_q, a)) <= 1e-12);
}

TEST_CASE("Renyi mutual information, down arrow") {
    Rng rng(3);
    Mat r = random_density(2, rng);
    CqState prod = make_cq({{"X", 2}}, {0.3, 0.7}, {r, r});
    auto d0 = renyi_mi_down(prod, {"X"}, {}, 0.7);
    CHECK(std::abs(d0.value) <= 1e-10);
    CHECK((d0.sigma[0] - r).cwiseAbs().maxCoeff() <= 1e-6);

    CqState s = random_cq(rng, {{"X", 3}}, 2);
    CqState su = random_cq(rng, {{"U", 1}, {"X", 3}}, 2);
    su.pmf = s.pmf;
    su.cond = s.cond;
    for (double a : {0.4, 0.8, 1.5}) {
        auto un = renyi_mi_down(s, {"X"}, {}, a);
        auto co = renyi_mi_down(su, {"X"}, {"U"}, a);
        CHECK(un.converged);
        CHECK(std::abs(un.value - co.value) <= 1e-8);
        CHECK(un.value <= renyi_mi_up(s, {"X"}, a, true) + 1e-9);
    }

    // qubit Bloch-ball grid oracle at step 0.05 (the acceptance run uses 0.02)
    std::vector<double> w(s.pmf);
    for (double a : {0.5, 1.5}) {
        double grid = 1e9;
        for (double x = -1; x <= 1 + 1e-12; x += 0.05)
            for (double y = -1; y <= 1 + 1e-12; y += 0.05)
                for (double z = -1; z <= 1 + 1e-12; z += 0.05)
                    if (x * x + y * y + z * z <= 1 + 1e-12) grid = std::min(grid, qubit_down_objective(w, s.cond, x, y, z, a));
        double got = renyi_mi_down(s, {"X"}, {}, a).value;
        CHECK(got <= grid + 1e-9);
        CHECK(got >= grid - 1e-2);
    }
}

TEST_CASE("Renyi mutual informations approach Shannon near alpha = 1") {
    Rng rng(4);
    CqState s = random_cq(rng, {{"U", 2}, {"X", 2}}, 2);
    double i = shannon_mi(s, {{"X"}, {}, {"U"}});
    double iu = shannon_mi(s, {{"U", "X"}});
    for (double a : {0.9999, 1.0001}) {
        CHECK(std::abs(renyi_mi_up(s, {"U", "X"}, a, true) - iu) <= 1e-3);
        CHECK(std::abs(renyi_mi_up(s, {"U", "X"}, a, false) - iu) <= 1e-3);
        CHECK(std::abs(renyi_mi_down(s, {"X"}, {"U"}, a).value - i) <= 1e-3);
    }
}

TEST_CASE("classical conditional I_max") {
    // Markov chain U - V - X
    std::vector<double> pv{0.4, 0.6};
    std::vector<std::vector<double>> pu{{0.3, 0.7}, {0.8, 0.2}}, px{{0.5, 0.5}, {0.1, 0.9}};
    std::vector<double> pmf;
    for (int u = 0; u < 2; ++u)
        for (int v = 0; v < 2; ++v)
            for (int x = 0; x < 2; ++x) pmf.push_back(pv[v] * pu[v][u] * px[v][x]);
    CqState m = classical_state({{"U", 2}, {"V", 2}, {"X", 2}}, pmf);
    for (double e : {0.0, 0.1}) CHECK(std::abs(imax_conditional_classical(m, {"U"}, {"X"}, {"V"}, e)) <= 1e-12);

    Rng rng(5);
    CqState g = classical_state({{"U", 2}, {"V", 2}, {"X", 2}}, random_pmf(8, rng));
    double i = shannon_mi(g, {{"U"}, {"X"}, {"V"}});
    double d0 = imax_conditional_classical(g, {"U"}, {"X"}, {"V"}, 0.0);
    CHECK(d0 >= i - 1e-12);
    auto g2 = tensor_power(g, 2);
    double two = imax_conditional_classical(g2, {"U_1", "U_2"}, {"X_1", "X_2"}, {"V_1", "V_2"}, 0.05) / 2;
    CHECK(two >= i - 0.5);
    CHECK(two <= d0 + 1);
    CHECK_THROWS_AS(imax_conditional_classical(make_cq({{"U", 1}}, {1.0}, {identity(2) / 2.0}), {"U"}, {}, {}, 0.0),
                    ValidationError);
}
