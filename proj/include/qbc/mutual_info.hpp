// Shannon and Renyi mutual informations of cq-states.
#pragma once

#include "qbc/cq_state.hpp"
#include "qbc/divergence.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qbc {

struct MiRequest {
    std::vector<std::string> left;
    std::vector<std::string> right;  // classical right side; empty means the quantum system B
    std::vector<std::string> conditioning;
    bool right_quantum() const { return right.empty(); }
};

// H(registers) plus, when with_quantum, the conditional entropy sum_r p(r) S(rho_r).
double joint_entropy(const CqState& s, const std::vector<std::string>& regs, bool with_quantum);

double shannon_mi(const CqState& s, const MiRequest& req);

// Divergence between block-diagonal operators sharing weights w:
// D(sum_a w_a |a><a| (x) rho_a || sum_a w_a |a><a| (x) sigma_a).
double block_divergence(const std::vector<double>& w, const std::vector<Mat>& rho, const std::vector<Mat>& sigma,
                        double alpha, bool sandwiched, double tol = kClusterTol);
double block_relative_entropy(const std::vector<double>& w, const std::vector<Mat>& rho,
                              const std::vector<Mat>& sigma, double tol = kClusterTol);

// I_alpha^up (Petz) or I~_alpha^up (sandwiched) of left registers against B.
double renyi_mi_up(const CqState& s, const std::vector<std::string>& left, double alpha, bool sandwiched);

struct DownOptions {
    std::uint64_t seed = 1;
    int restarts = 5;
    double objective_tol = 1e-9;
    int max_iterations = 2000;
    int workers = 1;
};

struct DownResult {
    double value;
    std::vector<Mat> sigma;      // optimizer per conditioning block (one block when unconditional)
    bool converged;
    double gradient_norm;        // largest final gradient norm over blocks
    double objective_delta;      // largest final objective change over blocks
    int iterations;              // total over blocks and restarts
};

// I~_alpha^down(left; B | conditioning): minimum over sigma^{C-B} with the
// classical marginal fixed, solved independently per conditioning block.
DownResult renyi_mi_down(const CqState& s, const std::vector<std::string>& left,
                         const std::vector<std::string>& conditioning, double alpha, const DownOptions& opt = {});

// Per-block objective: (1/(alpha-1)) log sum_a w_a Q~_alpha(rho_a || sigma).
double down_block_objective(const std::vector<double>& w, const std::vector<Mat>& rho, const Mat& sigma,
                            double alpha);

// I_max^eps(U;X|V) = D_max^eps(p_{UVX} || p_{U|V} p_{X|V} p_V) for an all-classical state.
double imax_conditional_classical(const CqState& s, const std::vector<std::string>& u,
                                  const std::vector<std::string>& x, const std::vector<std::string>& v, double eps);

}  // namespace qbc
