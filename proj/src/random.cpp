#include "qbc/random.hpp"

#include <stdexcept>

namespace qbc {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Mat random_ginibre(int rows, int cols, Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Mat g(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) g(i, j) = cplx(n(rng), n(rng));
    return g;
}

Mat random_unitary(int d, Rng& rng) {
    Mat g = random_ginibre(d, d, rng);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    Mat r = qr.matrixQR();
    for (int j = 0; j < d; ++j) {
        double a = std::abs(r(j, j));
        if (a > 0) q.col(j) *= r(j, j) / a;
    }
    return q;
}

Mat random_hermitian(int d, Rng& rng) {
    Mat g = random_ginibre(d, d, rng);
    return hermitize(g);
}

Mat random_density(int d, Rng& rng, int rank) {
    if (rank <= 0 || rank > d) rank = d;
    Mat g = random_ginibre(d, rank, rng);
    Mat rho = g * g.adjoint();
    rho /= rho.trace().real();
    return hermitize(rho);
}

Mat random_pure(int d, Rng& rng) { return random_density(d, rng, 1); }

Mat random_density_with_spectrum(const std::vector<double>& spec, Rng& rng) {
    const int d = static_cast<int>(spec.size());
    Mat u = random_unitary(d, rng);
    return hermitize(u * diag(spec) * u.adjoint());
}

std::vector<double> random_pmf(int n, Rng& rng) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> p(n);
    double s = 0;
    for (auto& x : p) s += (x = e(rng));
    for (auto& x : p) x /= s;
    return p;
}

int sample_index(const std::vector<double>& pmf, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double r = u(rng), c = 0;
    int last = -1;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        if (pmf[i] <= 0) continue;
        c += pmf[i];
        last = static_cast<int>(i);
        if (r < c) return last;
    }
    if (last < 0) throw std::invalid_argument("sample_index: empty pmf");
    return last;
}

}  // namespace qbc
