// Relative entropy, Petz and sandwiched Renyi divergences, max-relative
// entropy and a classical smooth max-relative entropy. Logs are base 2;
// +infinity is returned for support violations.
#pragma once

#include "qbc/hermitian.hpp"

#include <limits>
#include <vector>

namespace qbc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNearOneWindow = 1e-4;
inline constexpr double kNearOneStep = 1e-3;

struct RenyiOrder {
    double alpha;
    explicit RenyiOrder(double a);
    // Range where the sandwiched quantity is additive and data-processing holds.
    bool sandwiched_regime() const { return (alpha >= 0.5 && alpha < 1) || alpha > 1; }
};

// tr(P_ker(sigma) rho) <= tol
bool support_contained(const Mat& rho, const Mat& sigma, double tol = kClusterTol);

// tr rho^a sigma^{1-a}; +inf for a > 1 when supp rho is not inside supp sigma.
double petz_q(const Mat& rho, const Mat& sigma, double alpha, double tol = kClusterTol);
// tr (sigma^{(1-a)/2a} rho sigma^{(1-a)/2a})^a; same support convention.
double sandwiched_q(const Mat& rho, const Mat& sigma, double alpha, double tol = kClusterTol);

double relative_entropy(const Mat& rho, const Mat& sigma, double tol = kClusterTol);
double petz_renyi(const Mat& rho, const Mat& sigma, double alpha, double tol = kClusterTol);
double sandwiched_renyi(const Mat& rho, const Mat& sigma, double alpha, double tol = kClusterTol);
double dmax(const Mat& rho, const Mat& sigma, double tol = kClusterTol);

// Classical divergences on probability vectors.
double classical_kl(const std::vector<double>& p, const std::vector<double>& q);
double classical_renyi(const std::vector<double>& p, const std::vector<double>& q, double alpha);
double classical_dmax(const std::vector<double>& p, const std::vector<double>& q);

// Ball radius eps in purified distance converted to a total-variation budget
// delta = 1 - sqrt(1 - eps^2): any normalized p' with TV(p', p) <= delta has
// F(p', p) >= 1 - delta and hence purified distance at most eps.
double tv_budget(double eps);

struct SmoothDmaxResult {
    double value;               // log2 of the clipping level
    std::vector<double> p_tilde;  // the witnessing smoothed distribution
};

// Upper bound on min D_max(p'||q) over normalized p' within purified distance eps of p:
// clip the largest likelihood ratios p/q down to a level lambda >= 1 while the clipped
// mass stays within tv_budget(eps), then move that mass onto entries below lambda*q.
SmoothDmaxResult smooth_dmax_classical_ex(const std::vector<double>& p, const std::vector<double>& q, double eps);
double smooth_dmax_classical(const std::vector<double>& p, const std::vector<double>& q, double eps);

// Purified distance between classical distributions (normalized or not).
double classical_purified_distance(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace qbc
