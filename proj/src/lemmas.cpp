#include "qbc/lemmas.hpp"

#include "qbc/divergence.hpp"
#include "qbc/pinching.hpp"
#include "qbc/random.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

namespace qbc {

Certificate make_certificate(std::string id, std::string digest, double lhs, double rhs, double margin, double tol) {
    Certificate c;
    c.lemma_id = std::move(id);
    c.instance_digest = std::move(digest);
    c.lhs = lhs;
    c.rhs = rhs;
    c.margin = margin;
    c.tolerance = tol;
    c.passed = std::isfinite(margin) ? margin >= -tol : margin > 0;
    return c;
}

namespace {

void require_effect(const Mat& op, const char* what) {
    require_hermitian(op, what);
    double lo = min_eigenvalue(op);
    double hi = max_eigenvalue(op);
    if (lo < -1e-10 || hi > 1.0 + 1e-10) throw ValidationError(std::string(what) + ": not between 0 and I");
}

void require_psd(const Mat& op, const char* what) {
    require_hermitian(op, what);
    if (min_eigenvalue(op) < -1e-10) throw ValidationError(std::string(what) + ": not positive semidefinite");
}

double re_trace(const Mat& a) { return a.trace().real(); }

}  // namespace

Certificate certify_hayashi_nagaoka(const Mat& S, const Mat& T, double tol) {
    if (S.rows() != T.rows()) throw ValidationError("certify_hayashi_nagaoka: dimension mismatch");
    require_effect(S, "certify_hayashi_nagaoka: S");
    require_psd(T, "certify_hayashi_nagaoka: T");
    const int d = static_cast<int>(S.rows());
    Mat w = matrix_power(hermitize(S + T), -0.5);
    Mat lhs = identity(d) - w * S * w;
    Mat rhs = 2.0 * (identity(d) - S) + 4.0 * T;
    double margin = min_eigenvalue(hermitize(rhs - lhs));
    return make_certificate("hayashi_nagaoka", {}, max_eigenvalue(hermitize(lhs)), min_eigenvalue(hermitize(rhs)),
                            margin, tol);
}

Certificate certify_hypothesis_testing(const Mat& rho, const Mat& sigma, double M, double alpha, double tol) {
    require_density(rho, "certify_hypothesis_testing: rho");
    require_density(sigma, "certify_hypothesis_testing: sigma");
    if (!(M > 0)) throw ValidationError("certify_hypothesis_testing: M must be positive");
    if (!(alpha > 0 && alpha < 1)) throw ValidationError("certify_hypothesis_testing: alpha must lie in (0,1)");
    Mat pr = pinch(pinching_from(sigma), rho);
    Mat pi = positive_part_projector(pr, M * sigma);
    const int d = static_cast<int>(rho.rows());
    double lhs = re_trace((identity(d) - pi) * rho) + M * re_trace(pi * sigma);
    double rhs = std::pow(M, alpha) * petz_q(pr, sigma, 1.0 - alpha);
    return make_certificate("hypothesis_testing", {}, lhs, rhs, rhs - lhs, tol);
}

Certificate certify_petz_to_sandwich(const Mat& rho, const Mat& sigma, double alpha, double tol) {
    require_density(rho, "certify_petz_to_sandwich: rho");
    require_density(sigma, "certify_petz_to_sandwich: sigma");
    if (!(alpha > 0 && alpha < 1)) throw ValidationError("certify_petz_to_sandwich: alpha must lie in (0,1)");
    PinchingMap m = pinching_from(sigma);
    double lhs = petz_q(pinch(m, rho), sigma, 1.0 - alpha);
    double rhs = std::pow(static_cast<double>(m.count()), alpha) * sandwiched_q(rho, sigma, 1.0 - alpha);
    return make_certificate("petz_to_sandwich", {}, lhs, rhs, rhs - lhs, tol);
}

Certificate certify_union_bound(const std::vector<Mat>& ops, const Mat& rho, double tol) {
    require_density(rho, "certify_union_bound: rho");
    const int d = static_cast<int>(rho.rows());
    Mat prod = identity(d);
    double rhs = 0;
    for (const Mat& t : ops) {
        if (t.rows() != d) throw ValidationError("certify_union_bound: dimension mismatch");
        require_effect(t, "certify_union_bound: operator");
        prod = prod * t;
        rhs += re_trace((identity(d) - t) * rho);
    }
    double lhs = re_trace((identity(d) - prod) * rho);
    return make_certificate("union_bound", {}, lhs, rhs, rhs - lhs, tol);
}

Certificate certify_pinching_inequality(const Mat& rho, const Mat& sigma, double tol) {
    require_psd(rho, "certify_pinching_inequality: rho");
    require_hermitian(sigma, "certify_pinching_inequality: sigma");
    auto r = verify_pinching_inequality(rho, sigma);
    return make_certificate("pinching_inequality", {}, 0.0, static_cast<double>(r.nu), r.margin, tol);
}

std::vector<Certificate> certify_nested_pinching_proposition(const CqState& state, double alpha, double tol) {
    if (!(alpha > 0 && alpha < 1)) throw ValidationError("certify_nested_pinching_proposition: alpha must lie in (0,1)");
    for (const char* r : {"U", "V", "X"})
        if (!state.has(r)) throw ValidationError(std::string("certify_nested_pinching_proposition: missing register ") + r);
    NestedPinchingFamily fam = build_nested(state, Scenario::multilevel);
    Mat rho = embed(state);
    std::vector<Certificate> out;
    const double beta = 1.0 - alpha;
    for (const char* name : {"E2", "E3"}) {
        int lvl = fam.level(name);
        // E2 pinches w.r.t. E1(rho^{UX-V-B}), E3 w.r.t. E2(rho^{UV-X-B})
        Mat sigma = fam.embedded_reference(lvl);
        double nu = fam.max_count(lvl);
        double lhs = petz_q(fam.pinch_embedded(lvl, rho), sigma, beta);
        double rhs = std::pow(nu, alpha) * sandwiched_q(rho, sigma, beta);
        out.push_back(make_certificate(std::string("nested_pinching_") + name, {}, lhs, rhs, rhs - lhs, tol));
    }
    return out;
}

const std::vector<std::string>& lemma_ids() {
    static const std::vector<std::string> ids = {"hayashi_nagaoka",     "union_bound",
                                                 "hypothesis_testing",  "petz_to_sandwich",
                                                 "pinching_inequality", "nested_pinching_proposition"};
    return ids;
}

std::vector<std::string> suite_lemmas(const std::string& suite) {
    if (suite == "lemmas") return {"hayashi_nagaoka", "union_bound", "hypothesis_testing", "petz_to_sandwich"};
    if (suite == "pinching") return {"pinching_inequality", "nested_pinching_proposition"};
    if (suite == "all") return lemma_ids();
    for (const auto& id : lemma_ids())
        if (id == suite) return {id};
    throw ValidationError("unknown suite or lemma: " + suite);
}

namespace {

// Density with occasional eigenvalue degeneracies and rank deficiency.
Mat structured_density(int d, Rng& rng) {
    std::uniform_int_distribution<int> kind(0, 3);
    switch (kind(rng)) {
        case 0: {
            std::uniform_int_distribution<int> levels(1, std::max(1, d - 1));
            int k = levels(rng);
            std::vector<double> vals(k);
            std::uniform_real_distribution<double> u(0.1, 1.0);
            for (auto& v : vals) v = u(rng);
            std::vector<double> spec(d);
            std::uniform_int_distribution<int> pick(0, k - 1);
            double s = 0;
            for (auto& x : spec) s += (x = vals[pick(rng)]);
            for (auto& x : spec) x /= s;
            return random_density_with_spectrum(spec, rng);
        }
        case 1: {
            std::uniform_int_distribution<int> rk(1, d);
            return random_density(d, rng, rk(rng));
        }
        default:
            return random_density(d, rng);
    }
}

Mat random_effect(int d, Rng& rng) {
    std::uniform_int_distribution<int> kind(0, 2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> spec(d);
    int k = kind(rng);
    for (auto& x : spec) x = k == 0 ? (u(rng) < 0.5 ? 0.0 : 1.0) : u(rng);
    Mat w = random_unitary(d, rng);
    std::vector<double> s(spec);
    return hermitize(w * diag(s) * w.adjoint());
}

std::string digest(const std::string& id, std::uint64_t seed, int index, int d, const std::string& extra = {}) {
    std::ostringstream os;
    os << id << ":seed=" << seed << ":i=" << index << ":d=" << d;
    if (!extra.empty()) os << ":" << extra;
    return os.str();
}

const double kAlphas[] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

}  // namespace

std::vector<Certificate> lemma_instance(const std::string& id, std::uint64_t seed, int index, double tol) {
    std::uint64_t lemma_salt = 0;
    for (char c : id) lemma_salt = lemma_salt * 131 + static_cast<unsigned char>(c);
    Rng rng(derive_seed(derive_seed(seed, lemma_salt), static_cast<std::uint64_t>(index)));
    std::uniform_int_distribution<int> alpha_pick(0, 8);
    std::vector<Certificate> out;
    if (id == "hayashi_nagaoka") {
        int d = std::uniform_int_distribution<int>(1, 6)(rng);
        Mat S = random_effect(d, rng);
        double scale = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
        Mat T = scale * structured_density(d, rng);
        out.push_back(certify_hayashi_nagaoka(S, T, tol));
        out.back().instance_digest = digest(id, seed, index, d);
    } else if (id == "union_bound") {
        int d = std::uniform_int_distribution<int>(2, 6)(rng);
        int k = std::uniform_int_distribution<int>(2, 4)(rng);
        Mat w = random_unitary(d, rng);
        std::vector<Mat> ops;
        for (int j = 0; j < k; ++j) {
            std::vector<double> mask(d);
            for (auto& m : mask) m = std::uniform_int_distribution<int>(0, 3)(rng) == 0 ? 0.0 : 1.0;
            ops.push_back(hermitize(w * diag(mask) * w.adjoint()));
        }
        Mat rho = structured_density(d, rng);
        out.push_back(certify_union_bound(ops, rho, tol));
        out.back().instance_digest = digest(id, seed, index, d, "k=" + std::to_string(k));
    } else if (id == "hypothesis_testing") {
        int d = std::uniform_int_distribution<int>(2, 4)(rng);
        double alpha = kAlphas[alpha_pick(rng)];
        int e = std::uniform_int_distribution<int>(-4, 8)(rng);
        double M = std::ldexp(1.0, e);
        Mat rho = structured_density(d, rng);
        Mat sigma = structured_density(d, rng);
        out.push_back(certify_hypothesis_testing(rho, sigma, M, alpha, tol));
        std::ostringstream ex;
        ex << "alpha=" << alpha << ":M=2^" << e;
        out.back().instance_digest = digest(id, seed, index, d, ex.str());
    } else if (id == "petz_to_sandwich") {
        int d = std::uniform_int_distribution<int>(2, 5)(rng);
        double alpha = kAlphas[alpha_pick(rng)];
        Mat rho = structured_density(d, rng);
        Mat sigma = structured_density(d, rng);
        out.push_back(certify_petz_to_sandwich(rho, sigma, alpha, tol));
        std::ostringstream ex;
        ex << "alpha=" << alpha;
        out.back().instance_digest = digest(id, seed, index, d, ex.str());
    } else if (id == "pinching_inequality") {
        int d = std::uniform_int_distribution<int>(2, 6)(rng);
        Mat rho = structured_density(d, rng);
        Mat sigma = structured_density(d, rng);
        out.push_back(certify_pinching_inequality(rho, sigma, tol));
        out.back().instance_digest = digest(id, seed, index, d);
    } else if (id == "nested_pinching_proposition") {
        int du = std::uniform_int_distribution<int>(1, 2)(rng);
        int dv = std::uniform_int_distribution<int>(1, 2)(rng);
        int dx = std::uniform_int_distribution<int>(1, 3)(rng);
        int dB = 2;
        double alpha = kAlphas[alpha_pick(rng)];
        int n = du * dv * dx;
        std::vector<Mat> cond;
        for (int t = 0; t < n; ++t) cond.push_back(structured_density(dB, rng));
        CqState s = make_cq({{"U", du}, {"V", dv}, {"X", dx}}, random_pmf(n, rng), cond);
        std::ostringstream ex;
        ex << "alpha=" << alpha << ":U=" << du << ":V=" << dv << ":X=" << dx;
        for (auto& c : certify_nested_pinching_proposition(s, alpha, tol)) {
            c.instance_digest = digest(id, seed, index, dB, ex.str());
            out.push_back(std::move(c));
        }
    } else {
        throw ValidationError("unknown lemma: " + id);
    }
    return out;
}

SweepReport sweep_lemma(const std::string& id, int trials, std::uint64_t seed, double tol, int workers) {
    if (trials < 0) throw ValidationError("sweep_lemma: negative trial count");
    SweepReport rep;
    rep.lemma_id = id;
    rep.instances = trials;
    rep.tolerance = tol;
    std::vector<std::vector<Certificate>> per(trials);
    workers = std::max(1, std::min(workers, std::max(1, trials)));
    if (workers == 1) {
        for (int i = 0; i < trials; ++i) per[i] = lemma_instance(id, seed, i, tol);
    } else {
        std::vector<std::future<void>> fs;
        for (int w = 0; w < workers; ++w)
            fs.push_back(std::async(std::launch::async, [&, w] {
                for (int i = w; i < trials; i += workers) per[i] = lemma_instance(id, seed, i, tol);
            }));
        for (auto& f : fs) f.get();
    }
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (auto& v : per)
        for (auto& c : v) {
            rep.min_margin = std::min(rep.min_margin, c.margin);
            if (!c.passed) ++rep.failures;
            rep.certificates.push_back(std::move(c));
        }
    return rep;
}

}  // namespace qbc
