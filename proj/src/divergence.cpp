#include "qbc/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qbc {

RenyiOrder::RenyiOrder(double a) : alpha(a) {
    if (!(a > 0) || a == 1.0 || !std::isfinite(a)) throw ValidationError("Renyi order must lie in (0,1) or (1,inf)");
}

namespace {

struct Eig {
    Vec val;
    Mat vec;
};

Eig eig(const Mat& h) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(h));
    return {es.eigenvalues(), es.eigenvectors()};
}

Mat apply(const Eig& e, double t, double tol) {
    Vec f(e.val.size());
    for (int i = 0; i < e.val.size(); ++i) f(i) = e.val(i) <= tol ? 0.0 : std::pow(e.val(i), t);
    return e.vec * f.asDiagonal() * e.vec.adjoint();
}

double kernel_weight(const Eig& s, const Mat& rho, double tol) {
    double w = 0;
    for (int i = 0; i < s.val.size(); ++i)
        if (s.val(i) <= tol) w += std::real((s.vec.col(i).adjoint() * rho * s.vec.col(i))(0, 0));
    return w;
}

template <class Q>
double renyi_from_q(const Mat& rho, const Mat& sigma, double alpha, double tol, Q q) {
    RenyiOrder check(alpha);
    (void)check;
    if (std::abs(alpha - 1.0) < kNearOneWindow) {
        double d = relative_entropy(rho, sigma, tol);
        if (!std::isfinite(d)) return kInf;
        double up = std::log2(q(rho, sigma, 1.0 + kNearOneStep, tol)) / kNearOneStep;
        double dn = std::log2(q(rho, sigma, 1.0 - kNearOneStep, tol)) / -kNearOneStep;
        return d + (alpha - 1.0) * (up - dn) / (2.0 * kNearOneStep);
    }
    double v = q(rho, sigma, alpha, tol);
    if (!std::isfinite(v)) return kInf;
    if (v <= 0) return kInf;  // orthogonal supports at alpha < 1
    return std::log2(v) / (alpha - 1.0);
}

}  // namespace

bool support_contained(const Mat& rho, const Mat& sigma, double tol) {
    return kernel_weight(eig(sigma), rho, tol) <= tol;
}

double petz_q(const Mat& rho, const Mat& sigma, double alpha, double tol) {
    Eig s = eig(sigma);
    if (alpha > 1 && kernel_weight(s, rho, tol) > tol) return kInf;
    Eig r = eig(rho);
    // tr rho^a sigma^{1-a} = sum_ij r_i^a s_j^{1-a} |<r_i|s_j>|^2, stable for small eigenvalues
    Mat o = r.vec.adjoint() * s.vec;
    double q = 0;
    for (int i = 0; i < r.val.size(); ++i) {
        if (r.val(i) <= tol) continue;
        double ri = std::pow(r.val(i), alpha);
        for (int j = 0; j < s.val.size(); ++j) {
            if (s.val(j) <= tol) continue;
            q += ri * std::pow(s.val(j), 1.0 - alpha) * std::norm(o(i, j));
        }
    }
    return q;
}

double sandwiched_q(const Mat& rho, const Mat& sigma, double alpha, double tol) {
    Eig s = eig(sigma);
    if (alpha > 1 && kernel_weight(s, rho, tol) > tol) return kInf;
    Eig r = eig(rho);
    // singular values of rho^{1/2} sigma^{(1-a)/2a}, formed as a graded matrix in the two eigenbases
    const double e = (1.0 - alpha) / (2.0 * alpha);
    Mat m = r.vec.adjoint() * s.vec;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) {
            double a = r.val(i) <= tol ? 0.0 : std::sqrt(r.val(i));
            double b = s.val(j) <= tol ? 0.0 : std::pow(s.val(j), e);
            m(i, j) *= a * b;
        }
    Eigen::JacobiSVD<Mat> svd(m);
    double out = 0;
    const Vec& sv = svd.singularValues();
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > 0) out += std::pow(sv(i), 2.0 * alpha);
    return out;
}

double relative_entropy(const Mat& rho, const Mat& sigma, double tol) {
    Eig s = eig(sigma);
    if (kernel_weight(s, rho, tol) > tol) return kInf;
    Eig r = eig(rho);
    double a = 0;
    for (int i = 0; i < r.val.size(); ++i)
        if (r.val(i) > tol) a += r.val(i) * std::log2(r.val(i));
    Vec f(s.val.size());
    for (int i = 0; i < s.val.size(); ++i) f(i) = s.val(i) <= tol ? 0.0 : std::log2(s.val(i));
    Mat logs = s.vec * f.asDiagonal() * s.vec.adjoint();
    return a - (rho * logs).trace().real();
}

double petz_renyi(const Mat& rho, const Mat& sigma, double alpha, double tol) {
    return renyi_from_q(rho, sigma, alpha, tol, [](const Mat& r, const Mat& s, double a, double t) {
        return petz_q(r, s, a, t);
    });
}

double sandwiched_renyi(const Mat& rho, const Mat& sigma, double alpha, double tol) {
    return renyi_from_q(rho, sigma, alpha, tol, [](const Mat& r, const Mat& s, double a, double t) {
        return sandwiched_q(r, s, a, t);
    });
}

double dmax(const Mat& rho, const Mat& sigma, double tol) {
    Eig s = eig(sigma);
    if (kernel_weight(s, rho, tol) > tol) return kInf;
    Mat w = apply(s, -0.5, tol);
    double lmax = max_eigenvalue(w * rho * w);
    return lmax > 0 ? std::log2(lmax) : -kInf;
}

double classical_kl(const std::vector<double>& p, const std::vector<double>& q) {
    double d = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0) continue;
        if (q[i] <= 0) return kInf;
        d += p[i] * std::log2(p[i] / q[i]);
    }
    return d;
}

double classical_renyi(const std::vector<double>& p, const std::vector<double>& q, double alpha) {
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0) continue;
        if (q[i] <= 0) {
            if (alpha > 1) return kInf;
            continue;
        }
        s += std::pow(p[i], alpha) * std::pow(q[i], 1.0 - alpha);
    }
    if (s <= 0) return kInf;
    return std::log2(s) / (alpha - 1.0);
}

double classical_dmax(const std::vector<double>& p, const std::vector<double>& q) {
    double r = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0) continue;
        if (q[i] <= 0) return kInf;
        r = std::max(r, p[i] / q[i]);
    }
    return std::log2(r);
}

double tv_budget(double eps) { return 1.0 - std::sqrt(1.0 - eps * eps); }

double classical_purified_distance(const std::vector<double>& p, const std::vector<double>& q) {
    double f = 0, sp = 0, sq = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        f += std::sqrt(std::max(p[i], 0.0) * std::max(q[i], 0.0));
        sp += p[i];
        sq += q[i];
    }
    f += std::sqrt(std::max(0.0, 1.0 - sp) * std::max(0.0, 1.0 - sq));
    f = std::min(f, 1.0);
    return std::sqrt(std::max(0.0, 1.0 - f * f));
}

SmoothDmaxResult smooth_dmax_classical_ex(const std::vector<double>& p, const std::vector<double>& q, double eps) {
    if (!(eps >= 0) || eps >= 1) throw ValidationError("smooth_dmax_classical: eps must lie in [0,1)");
    if (p.size() != q.size()) throw ValidationError("smooth_dmax_classical: size mismatch");
    const double delta = tv_budget(eps);
    double c0 = 0;  // mass where q = 0, which must be removed entirely
    std::vector<std::pair<double, std::size_t>> ratios;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0) continue;
        if (q[i] <= 0)
            c0 += p[i];
        else
            ratios.push_back({p[i] / q[i], i});
    }
    if (c0 > delta) return {kInf, p};
    std::sort(ratios.begin(), ratios.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    auto excess = [&](double lam) {
        double g = c0;
        for (const auto& [r, i] : ratios)
            if (r > lam) g += p[i] - lam * q[i];
        return g;
    };
    double lam = 1.0;
    if (excess(1.0) > delta) {
        // g is linear between consecutive ratios; the top-k set S gives
        // lambda = (c0 + P_S - delta) / Q_S on [r_{k+1}, r_k].
        double ps = 0, qs = 0;
        for (std::size_t k = 0; k < ratios.size(); ++k) {
            ps += p[ratios[k].second];
            qs += q[ratios[k].second];
            double cand = (c0 + ps - delta) / qs;
            double lo = k + 1 < ratios.size() ? ratios[k + 1].first : 0.0;
            if (cand >= lo && cand <= ratios[k].first) {
                lam = cand;
                break;
            }
        }
        lam = std::max(lam, 1.0);
    }
    std::vector<double> pt(p.size(), 0.0);
    double removed = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double cap = q[i] > 0 ? lam * q[i] : 0.0;
        pt[i] = std::min(std::max(p[i], 0.0), cap);
        removed += std::max(p[i], 0.0) - pt[i];
    }
    for (std::size_t i = 0; i < p.size() && removed > 0; ++i) {
        if (q[i] <= 0) continue;
        double room = lam * q[i] - pt[i];
        if (room <= 0) continue;
        double add = std::min(room, removed);
        pt[i] += add;
        removed -= add;
    }
    return {std::log2(lam), pt};
}

double smooth_dmax_classical(const std::vector<double>& p, const std::vector<double>& q, double eps) {
    return smooth_dmax_classical_ex(p, q, eps).value;
}

}  // namespace qbc
