// Numerical certificates for the operator inequalities and bound lemmas.
#pragma once

#include "qbc/cq_state.hpp"
#include "qbc/hermitian.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qbc {

inline constexpr double kCertificateTol = 1e-9;

struct Certificate {
    std::string lemma_id;
    std::string instance_digest;
    double lhs = 0;
    double rhs = 0;
    double margin = 0;
    bool passed = false;
    double tolerance = kCertificateTol;
};

Certificate make_certificate(std::string id, std::string digest, double lhs, double rhs, double margin,
                             double tol = kCertificateTol);

// min-eig of 2(I-S)+4T - [I - (S+T)^{-1/2} S (S+T)^{-1/2}], inverse root on the support.
Certificate certify_hayashi_nagaoka(const Mat& S, const Mat& T, double tol = kCertificateTol);

// Pi = {E_sigma(rho) >= M sigma}; lhs = tr(I-Pi)rho + M tr Pi sigma;
// rhs = M^alpha 2^{-alpha D_{1-alpha}(E_sigma(rho)||sigma)}.
Certificate certify_hypothesis_testing(const Mat& rho, const Mat& sigma, double M, double alpha,
                                       double tol = kCertificateTol);

// rhs = nu^alpha 2^{-alpha D~_{1-alpha}(rho||sigma)}, lhs = 2^{-alpha D_{1-alpha}(E_sigma(rho)||sigma)}.
Certificate certify_petz_to_sandwich(const Mat& rho, const Mat& sigma, double alpha, double tol = kCertificateTol);

// Traced form: Re tr(I - T_0 T_1 ... T_k) rho <= sum_i tr(I - T_i) rho.
Certificate certify_union_bound(const std::vector<Mat>& ops, const Mat& rho, double tol = kCertificateTol);

// Pinching inequality as a certificate: min-eig of nu E_sigma(rho) - rho.
Certificate certify_pinching_inequality(const Mat& rho, const Mat& sigma, double tol = kCertificateTol);

// Both inequalities of the nested-pinching proposition on a state with registers U, V, X:
//   2^{-aD_{1-a}(E2(rho)||E1(rho^{UX-V-B}))} <= nu2^a 2^{-aD~_{1-a}(rho||E1(rho^{UX-V-B}))}
//   2^{-aD_{1-a}(E3(rho)||E2(rho^{UV-X-B}))} <= nu3^a 2^{-aD~_{1-a}(rho||E2(rho^{UV-X-B}))}
// with nu2, nu3 the largest per-key eigenvalue counts of the defining operators.
std::vector<Certificate> certify_nested_pinching_proposition(const CqState& state, double alpha,
                                                             double tol = kCertificateTol);

// Seeded random sweeps; instance i of (lemma, seed) is regenerated from its digest fields.
struct SweepReport {
    std::string lemma_id;
    int instances = 0;
    double min_margin = 0;
    int failures = 0;
    double tolerance = kCertificateTol;
    std::vector<Certificate> certificates;
    bool passed() const { return failures == 0; }
};

const std::vector<std::string>& lemma_ids();
std::vector<std::string> suite_lemmas(const std::string& suite);  // lemmas | pinching | all
// Certificates for instance `index` of a sweep (the nested proposition yields two).
std::vector<Certificate> lemma_instance(const std::string& lemma_id, std::uint64_t seed, int index,
                                        double tol = kCertificateTol);
SweepReport sweep_lemma(const std::string& lemma_id, int trials, std::uint64_t seed, double tol = kCertificateTol,
                        int workers = 1);

}  // namespace qbc
