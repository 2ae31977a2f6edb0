// Acceptance run: one PASS/FAIL line per criterion with pinned tolerances.
// Criteria listed in kKnownFailures are expected to fail; the exit status counts
// unexpected outcomes in either direction.
#include "qbc/code_sim.hpp"
#include "qbc/divergence.hpp"
#include "qbc/lemmas.hpp"
#include "qbc/mutual_info.hpp"
#include "qbc/pinching.hpp"
#include "qbc/rate_region.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <string>

using namespace qbc;

namespace {

const std::map<int, const char*> kKnownFailures = {
    {2, "the stated three-degraded region is a strict subset of the eliminated system on sampler seed 2"},
};

struct Outcome {
    bool pass = false;
    std::string detail;
};

int unexpected = 0;

void report(int id, const char* title, const std::function<Outcome()>& run) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o = run();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    auto known = kKnownFailures.find(id);
    const bool expected_fail = known != kKnownFailures.end();
    std::printf("[%s] %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
    if (expected_fail && !o.pass) std::printf("       known failure: %s\n", known->second);
    if (expected_fail && o.pass) std::printf("       listed as a known failure but passed\n");
    if (o.pass == expected_fail) ++unexpected;
    std::fflush(stdout);
}

void info(const std::string& text) {
    std::printf("[INFO]    %s\n", text.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// Density matrix whose spectrum repeats values with probability one half.
Mat maybe_degenerate(int d, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < 0.5) return random_density(d, rng, 1 + static_cast<int>(u(rng) * d));
    std::vector<double> levels;
    const int distinct = 1 + static_cast<int>(u(rng) * (d - 1));
    std::vector<double> vals;
    for (int i = 0; i < distinct; ++i) vals.push_back(0.05 + u(rng));
    for (int i = 0; i < d; ++i) levels.push_back(vals[i % distinct]);
    double tot = 0;
    for (double v : levels) tot += v;
    for (double& v : levels) v /= tot;
    return random_density_with_spectrum(levels, rng);
}

int uniform_int(int lo, int hi, Rng& rng) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// ---- oracles

// Classical Renyi divergence of order a between pmfs (base 2).
double renyi_oracle(const std::vector<double>& p, const std::vector<double>& q, double a) {
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0) s += std::pow(p[i], a) * std::pow(q[i], 1 - a);
    return std::log2(s) / (a - 1);
}

// Sandwiched objective for a qubit sigma with Bloch vector (x, y, z), closed-form 2x2 algebra.
double qubit_down_objective(const std::vector<double>& w, const std::vector<Mat>& rho, double x, double y, double z,
                            double alpha) {
    const double r = std::sqrt(x * x + y * y + z * z);
    const double s = (1.0 - alpha) / (2.0 * alpha);
    Mat sig_s;
    if (r < 1e-15) {
        sig_s = std::pow(0.5, s) * identity(2);
    } else {
        Mat pauli = Mat::Zero(2, 2);
        pauli(0, 0) = z;
        pauli(1, 1) = -z;
        pauli(0, 1) = std::complex<double>(x, -y);
        pauli(1, 0) = std::complex<double>(x, y);
        Mat pp = 0.5 * (identity(2) + pauli / r), pm = 0.5 * (identity(2) - pauli / r);
        const double lp = 0.5 * (1 + r), lm = 0.5 * (1 - r);
        if (lm <= 1e-12 && alpha > 1) return kInf;
        sig_s = std::pow(lp, s) * pp + (lm > 0 ? std::pow(lm, s) : 0.0) * pm;
    }
    double q = 0;
    for (std::size_t a = 0; a < w.size(); ++a) {
        Mat m = sig_s * rho[a] * sig_s;
        const double tr = m.trace().real(), det = m.determinant().real();
        const double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
        const double m1 = tr / 2 + disc, m2 = std::max(0.0, tr / 2 - disc);
        q += w[a] * (std::pow(m1, alpha) + (m2 > 0 ? std::pow(m2, alpha) : 0.0));
    }
    return std::log2(q) / (alpha - 1.0);
}

Mat bloch_pure(double th, double ph) {
    Eigen::VectorXcd v(2);
    v << std::cos(th / 2), std::polar(std::sin(th / 2), ph);
    return v * v.adjoint();
}

// Qubit channel with B2 a depolarized copy of B1 and B3 at half the polar angle.
BroadcastChannel structured_qubit_channel() {
    BroadcastChannel ch;
    ch.input_size = 4;
    ch.dims = {2, 2, 2};
    const double th[4] = {0, M_PI, M_PI / 2, M_PI / 2}, ph[4] = {0, 0, 0, M_PI};
    for (int x = 0; x < 4; ++x) {
        Mat b1 = bloch_pure(th[x], ph[x]);
        Mat b2 = 0.8 * b1 + 0.2 * identity(2) / 2.0;
        Mat b3 = bloch_pure(th[x] * 0.5, ph[x]);
        ch.outputs.push_back(kron(std::vector<Mat>{b1, b2, b3}));
    }
    return ch;
}

// U uniform bit, V = U w.p. 0.9, X = V w.p. 0.8 and 2 + V otherwise.
DistributionWithMap structured_distribution() {
    DistributionWithMap d;
    d.dist.registers = {{"U", 2}, {"V", 2}, {"X", 4}};
    d.dist.pmf.assign(16, 0.0);
    for (int u = 0; u < 2; ++u)
        for (int v = 0; v < 2; ++v)
            for (int x = 0; x < 4; ++x) {
                const double pv = v == u ? 0.9 : 0.1;
                const double px = x == v ? 0.8 : (x == 2 + v ? 0.2 : 0.0);
                d.dist.pmf[(u * 2 + v) * 4 + x] = 0.5 * pv * px;
            }
    d.xmap = register_map(d.dist, "X");
    return d;
}

// ---- criteria

Outcome fm_marton() {
    Outcome o{true, ""};
    double worst = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        auto smp = sample_instance("marton", seed);
        AtomTable t(smp.channel, smp.dist.dist, smp.dist.xmap);
        auto r = reproduce_final_region("marton_prelim", "marton_final", t);
        worst = std::max(worst, r.seconds);
        o.pass = o.pass && r.equal && r.seconds <= 10.0;
        o.detail += fmt("seed %d %s; ", static_cast<int>(seed), r.equal ? "equal" : "differs");
    }
    o.detail += fmt("max %.2f s (limit 10 s)", worst);
    return o;
}

Outcome fm_nested_families() {
    Outcome o{true, ""};
    const std::pair<const char*, const char*> fams[] = {
        {"multilevel", "multilevel"}, {"general2", "two-degraded"}, {"general3", "three-degraded"}};
    double worst = 0;
    std::string fm_form;
    for (const auto& [fam, name] : fams) {
        o.detail += std::string(name) + ":";
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            auto smp = sample_instance(fam, seed);
            AtomTable t(smp.channel, smp.dist.dist, smp.dist.xmap);
            auto [pre, fin] = fm_pair(fam);
            auto r = reproduce_final_region(pre, fin, t);
            worst = std::max(worst, r.seconds);
            o.pass = o.pass && r.equal && r.seconds <= 60.0;
            o.detail += r.equal ? " =" : (r.final_in_fm ? " strict-subset" : " differs");
            if (std::string(fam) == "general3") {
                auto f = reproduce_final_region("general3_prelim", "general3_final_fm", t);
                fm_form += fmt(" seed %d %s", static_cast<int>(seed), f.equal ? "equal" : "differs");
            }
        }
        o.detail += "; ";
    }
    o.detail += fmt("max %.2f s (limit 60 s)", worst);
    info("criterion 2, three-degraded region with I(V2;B2) in the last inequality:" + fm_form);
    return o;
}

Outcome special_case_collapse() {
    int ok = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        Rng rng(derive_seed(3000, seed));
        auto ch = degraded_channel(3, 2, rng);
        auto d = random_superposition_distribution(2, 3, rng);
        AtomTable t(ch, d.dist, d.xmap);
        ok += superposition_collapse(t);
    }
    return {ok == 3, fmt("%d/3 instances equal", ok)};
}

Outcome pinching_inequality() {
    Rng rng(4000);
    double worst = kInf;
    for (int i = 0; i < 1000; ++i) {
        const int d = uniform_int(2, 6, rng);
        Mat rho = random_density(d, rng, uniform_int(1, d, rng));
        Mat sigma = maybe_degenerate(d, rng);
        worst = std::min(worst, verify_pinching_inequality(rho, sigma).margin);
    }
    return {worst >= -1e-9, fmt("min eigenvalue of nu E(rho) - rho = %.3e over 1000 pairs (tol -1e-9)", worst)};
}

Outcome hypothesis_testing() {
    Rng rng(5000);
    double worst = kInf;
    int cases = 0;
    for (int i = 0; i < 500; ++i) {
        const int d = uniform_int(2, 5, rng);
        Mat rho = random_density(d, rng, uniform_int(1, d, rng));
        Mat sigma = maybe_degenerate(d, rng);
        for (int k = -4; k <= 8; ++k)
            for (int a = 1; a <= 9; ++a) {
                auto c = certify_hypothesis_testing(rho, sigma, std::ldexp(1.0, k), a / 10.0);
                worst = std::min(worst, c.rhs - c.lhs);
                ++cases;
            }
    }
    return {worst >= -1e-9, fmt("min rhs - lhs = %.3e over %d cases (tol -1e-9)", worst, cases)};
}

Outcome petz_sandwich_nested() {
    Rng rng(6000);
    double w1 = kInf, w2 = kInf;
    for (int i = 0; i < 500; ++i) {
        const int d = uniform_int(2, 5, rng);
        Mat rho = random_density(d, rng, uniform_int(1, d, rng));
        Mat sigma = maybe_degenerate(d, rng);
        w1 = std::min(w1, certify_petz_to_sandwich(rho, sigma, uniform_int(1, 9, rng) / 10.0).margin);
    }
    for (int i = 0; i < 500; ++i) {
        auto ch = random_channel(3, {2}, rng);
        auto dist = random_multilevel_distribution(2, 2, 3, rng);
        CqState s = channel_to_cqstate(ch, {0}, dist.dist, dist.xmap);
        for (const auto& c : certify_nested_pinching_proposition(s, uniform_int(1, 9, rng) / 10.0))
            w2 = std::min(w2, c.margin);
    }
    return {w1 >= -1e-9 && w2 >= -1e-9,
            fmt("Petz to sandwiched min margin %.3e, nested proposition min margin %.3e, 500 each (tol -1e-9)", w1, w2)};
}

Outcome hayashi_nagaoka() {
    Rng rng(7000);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = kInf;
    for (int i = 0; i < 500; ++i) {
        const int d = uniform_int(1, 8, rng);
        Mat s = random_density(d, rng, uniform_int(1, d, rng));
        s *= u(rng) / max_eigenvalue(s);
        Mat t = random_density(d, rng, uniform_int(1, d, rng)) * (4.0 * u(rng));
        if (i % 10 == 0) t = Mat::Zero(d, d);
        worst = std::min(worst, certify_hayashi_nagaoka(s, t).margin);
    }
    return {worst >= -1e-9, fmt("min operator margin %.3e over 500 pairs (tol -1e-9)", worst)};
}

Outcome additivity() {
    Rng rng(8000);
    double up = 0, down = 0;
    for (int i = 0; i < 50; ++i) {
        std::vector<Mat> cond;
        for (int t = 0; t < 4; ++t) cond.push_back(random_density(2, rng));
        CqState s = make_cq({{"U", 2}, {"X", 2}}, random_pmf(4, rng), cond);
        CqState s2 = tensor_power(s, 2);
        for (double a : {0.6, 0.8, 1.5}) {
            up = std::max(up, std::abs(renyi_mi_up(s2, {"U_1", "X_1", "U_2", "X_2"}, a, true) -
                                       2 * renyi_mi_up(s, {"U", "X"}, a, true)));
            down = std::max(down, std::abs(renyi_mi_down(s2, {"X_1", "X_2"}, {"U_1", "U_2"}, a).value -
                                           2 * renyi_mi_down(s, {"X"}, {"U"}, a).value));
        }
    }
    return {up <= 1e-7 && down <= 1e-7,
            fmt("max |I(2) - 2 I(1)|: up %.3e, conditional down %.3e over 50 states (tol 1e-7)", up, down)};
}

Outcome continuity() {
    Rng rng(9000);
    double petz = 0, sand = 0;
    for (int i = 0; i < 100; ++i) {
        const int d = uniform_int(2, 4, rng);
        Mat rho = random_density(d, rng), sigma = random_density(d, rng);
        const double D = relative_entropy(rho, sigma);
        for (double a : {1 - 1e-4, 1 + 1e-4}) {
            petz = std::max(petz, std::abs(petz_renyi(rho, sigma, a) - D));
            sand = std::max(sand, std::abs(sandwiched_renyi(rho, sigma, a) - D));
        }
    }
    return {petz <= 1e-3 && sand <= 1e-3,
            fmt("max |D_a - D| %.3e, max |D~_a - D| %.3e at a = 1 +- 1e-4 over 100 pairs (tol 1e-3)", petz, sand)};
}

Outcome classical_reduction() {
    Rng rng(10000);
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
        const int nx = uniform_int(2, 4, rng), ny = uniform_int(2, 4, rng);
        auto px = random_pmf(nx, rng);
        std::vector<std::vector<double>> W;
        BroadcastChannel ch;
        ch.input_size = nx;
        ch.dims = {ny};
        for (int x = 0; x < nx; ++x) {
            W.push_back(random_pmf(ny, rng));
            ch.outputs.push_back(diag(W.back()));
        }
        JointDistribution jd;
        jd.registers = {{"X", nx}};
        jd.pmf = px;
        CqState s = channel_to_cqstate(ch, {0}, jd, register_map(jd, "X"));
        std::vector<double> pxy, prod, py(ny, 0.0);
        for (int x = 0; x < nx; ++x)
            for (int y = 0; y < ny; ++y) py[y] += px[x] * W[x][y];
        double shannon = 0;
        for (int x = 0; x < nx; ++x)
            for (int y = 0; y < ny; ++y) {
                pxy.push_back(px[x] * W[x][y]);
                prod.push_back(px[x] * py[y]);
                if (pxy.back() > 0) shannon += pxy.back() * std::log2(pxy.back() / prod.back());
            }
        worst = std::max(worst, std::abs(shannon_mi(s, {{"X"}}) - shannon));
        for (double a : {0.5, 0.8, 1.5, 2.0}) {
            const double up = renyi_oracle(pxy, prod, a);
            worst = std::max(worst, std::abs(renyi_mi_up(s, {"X"}, a, false) - up));
            worst = std::max(worst, std::abs(renyi_mi_up(s, {"X"}, a, true) - up));
            double sib = 0;
            for (int y = 0; y < ny; ++y) {
                double in = 0;
                for (int x = 0; x < nx; ++x) in += px[x] * std::pow(W[x][y], a);
                sib += std::pow(in, 1 / a);
            }
            worst = std::max(worst, std::abs(renyi_mi_down(s, {"X"}, {}, a).value - a / (a - 1) * std::log2(sib)));
        }
    }
    return {worst <= 1e-10, fmt("max deviation from the classical formulas %.3e over 20 channels (tol 1e-10)", worst)};
}

Outcome eigenvalue_counts() {
    Rng rng(11000);
    bool ok = true;
    std::string counts;
    Mat base = random_density(2, rng);
    for (int n = 1; n <= 8; ++n) {
        long long c = tensor_power_count(eigenvalues(base), n, 1e-9);
        ok = ok && c <= n + 1;
        counts += fmt("%lld ", c);
    }
    auto ch = random_channel(2, {2}, rng);
    auto dist = random_multilevel_distribution(2, 2, 2, rng);
    CqState s = channel_to_cqstate(ch, {0}, dist.dist, dist.xmap);
    CountOptions opt;
    opt.tol = 1e-9;
    CountReport rep = check_count_bounds(s, 3, opt);
    std::string lines;
    bool nu1 = false;
    for (const auto& l : rep.lines) {
        lines += fmt("%s %lld/%.0f%s ", l.name.c_str(), l.observed, l.bound, l.exhaustive ? "" : " (sampled)");
        if (l.name == "nu1") nu1 = l.within() && l.exhaustive;
        ok = ok && l.within();
    }
    ok = ok && nu1;
    return {ok, "qubit tensor-power counts n=1..8: " + counts + "(bound n+1); n=3 cq-state: " + lines + "(tol 1e-9)"};
}

Outcome down_oracle() {
    Rng rng(12000);
    double worst = 0;
    for (int i = 0; i < 10; ++i) {
        std::vector<Mat> rho;
        for (int x = 0; x < 3; ++x) rho.push_back(random_density(2, rng));
        auto w = random_pmf(3, rng);
        CqState s = make_cq({{"X", 3}}, w, rho);
        for (double a : {0.5, 1.5}) {
            double grid = kInf;
            const int steps = 100;  // step 0.02 on [-1, 1]
            for (int ix = 0; ix <= steps; ++ix)
                for (int iy = 0; iy <= steps; ++iy)
                    for (int iz = 0; iz <= steps; ++iz) {
                        const double x = -1 + 0.02 * ix, y = -1 + 0.02 * iy, z = -1 + 0.02 * iz;
                        if (x * x + y * y + z * z <= 1 + 1e-12)
                            grid = std::min(grid, qubit_down_objective(w, rho, x, y, z, a));
                    }
            worst = std::max(worst, std::abs(renyi_mi_down(s, {"X"}, {}, a).value - grid));
        }
    }
    return {worst <= 1e-3, fmt("max |optimizer - grid| %.3e over 10 instances, a in {0.5, 1.5} (tol 1e-3)", worst)};
}

Outcome simulator_soundness() {
    auto ch = structured_qubit_channel();
    auto d = structured_distribution();
    bool ok = true;
    std::string detail;
    const double configs[][3] = {{1, 0, 0}, {0, 0, 1}};
    for (const auto& c : configs) {
        CodebookSpec spec;
        spec.scenario = "multilevel_2deg";
        spec.rates = {{"R0", c[0]}, {"S1", c[1]}, {"S2", c[2]}};
        spec.dist = d.dist;
        spec.xmap = d.xmap;
        const int words = spec.size("m0") * spec.size("s1") * spec.size("s2");
        BoundOptions bo;
        bo.with_renyi_mi = false;
        auto bounds = analytic_bound(spec, ch, 0.3, bo);
        MonteCarloOptions mo;
        mo.trials = 1000;
        mo.master_seed = 13;
        auto mc = monte_carlo(spec, ch, mo);
        ok = ok && words <= 8 && mc.min_residual >= -1e-9;
        detail += fmt("rates (%g,%g,%g) %d codewords:", c[0], c[1], c[2], words);
        for (int k = 0; k < 3; ++k) {
            const auto& st = mc.receivers[k];
            const bool within = st.mean <= bounds[k].petz + 3 * st.std_error + mc.failure_fraction;
            ok = ok && within;
            detail += fmt(" B%d %.3f+-%.3f <= %.3f%s", k + 1, st.mean, st.std_error, bounds[k].petz,
                          bounds[k].petz_vacuous ? " (vacuous)" : "");
        }
        detail += fmt(", min residual %.1e; ", mc.min_residual);
    }
    // non-unique relabeling at B3: permuting the in-bin index s1
    CodebookSpec spec;
    spec.scenario = "multilevel_2deg";
    spec.rates = {{"R0", 1}, {"S1", 1}, {"S2", 0}};
    spec.dist = d.dist;
    spec.xmap = d.xmap;
    int exact = 0, total = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        spec.seed = derive_seed(1300, seed);
        auto cb = generate_codebook(spec);
        auto base = average_error_exact(cb, ch, build_povms(cb, spec, ch));
        for (std::uint64_t p = 1; p <= 3; ++p) {
            auto q = permute_index(cb, spec, "s1", p);
            auto e = average_error_exact(q, ch, build_povms(q, spec, ch));
            exact += e[2] == base[2];
            ++total;
        }
    }
    ok = ok && exact == total;
    detail += fmt("s1 relabeling at B3 exact in %d/%d", exact, total);
    return {ok, detail + " (alpha 0.3, 1000 trials, 3 SE, residual tol -1e-9)"};
}

Outcome converse_coherence_check() {
    double worst = kInf;
    int contained = 0, reverse = 0;
    for (std::uint64_t i = 0; i < 50; ++i) {
        Rng rng(derive_seed(14000, i));
        auto ch = degraded_channel(3, 2, rng);
        auto d = double_markov_distribution(2, 2, 2, 3, rng, 0.3);
        AtomTable t(ch, d.dist, d.xmap);
        auto rep = converse_coherence(t);
        worst = std::min(worst, rep.data_processing_margin);
        contained += rep.converse_in_reduced;
        reverse += rep.reduced_in_converse;
    }
    info(fmt("criterion 14, reduced achievable instance inside the converse instance: %d/50", reverse));
    return {worst >= -1e-9 && contained == 50,
            fmt("min I(U;B2) - [I(V2;B2) - I(V2;B1|U)] = %.3e (tol -1e-9); converse instance inside the reduced "
                "region %d/50",
                worst, contained)};
}

}  // namespace

int main() {
    std::printf("qbc acceptance\n");
    report(1, "FM reproduction, Marton region", fm_marton);
    report(2, "FM reproduction, multilevel and general regions", fm_nested_families);
    report(3, "special-case collapse U = V", special_case_collapse);
    report(4, "pinching inequality", pinching_inequality);
    report(5, "hypothesis-testing lemma", hypothesis_testing);
    report(6, "Petz to sandwiched and nested pinching", petz_sandwich_nested);
    report(7, "Hayashi-Nagaoka", hayashi_nagaoka);
    report(8, "additivity", additivity);
    report(9, "alpha -> 1 continuity", continuity);
    report(10, "classical reduction", classical_reduction);
    report(11, "eigenvalue counts", eigenvalue_counts);
    report(12, "down-arrow optimizer against a Bloch grid", down_oracle);
    report(13, "simulator soundness", simulator_soundness);
    report(14, "converse coherence", converse_coherence_check);
    std::printf("unexpected outcomes: %d\n", unexpected);
    return unexpected == 0 ? 0 : 1;
}
