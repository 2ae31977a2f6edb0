#include "qbc/mutual_info.hpp"

#include "qbc/random.hpp"

#include <gsl/gsl_blas.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <set>

namespace qbc {

namespace {

std::vector<std::string> unite(std::initializer_list<const std::vector<std::string>*> parts) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto* p : parts)
        for (const auto& n : *p)
            if (seen.insert(n).second) out.push_back(n);
    return out;
}

void check_disjoint(const MiRequest& req) {
    std::set<std::string> seen;
    for (const auto* p : {&req.left, &req.right, &req.conditioning})
        for (const auto& n : *p)
            if (!seen.insert(n).second) throw ValidationError("mutual information: register sets overlap at '" + n + "'");
}

double shannon(const std::vector<double>& p) {
    double h = 0;
    for (double x : p)
        if (x > 0) h -= x * std::log2(x);
    return h;
}

struct Blocks {
    std::vector<double> pc;                     // p(c)
    std::vector<std::vector<double>> w;         // p(a|c)
    std::vector<std::vector<Mat>> rho;          // rho_{ac}
};

Blocks blocks_of(const CqState& s, const std::vector<std::string>& left, const std::vector<std::string>& cond) {
    std::vector<std::string> all = unite({&cond, &left});
    CqState m = marginal(s, all, true);
    auto cpos = m.positions(cond);
    auto apos = m.positions(left);
    const int nc = sub_count(m, cpos), na = sub_count(m, apos);
    Blocks b;
    b.pc.assign(nc, 0.0);
    b.w.assign(nc, std::vector<double>(na, 0.0));
    b.rho.assign(nc, std::vector<Mat>(na, Mat::Identity(m.dB, m.dB) / m.dB));
    for (int t = 0; t < m.num_tuples(); ++t) {
        auto tp = m.tuple(t);
        int c = sub_index(m, cpos, project_tuple(tp, cpos));
        int a = sub_index(m, apos, project_tuple(tp, apos));
        b.pc[c] += m.pmf[t];
        b.w[c][a] = m.pmf[t];
        b.rho[c][a] = m.cond[t];
    }
    for (int c = 0; c < nc; ++c)
        if (b.pc[c] > 0)
            for (auto& x : b.w[c]) x /= b.pc[c];
    return b;
}

}  // namespace

double joint_entropy(const CqState& s, const std::vector<std::string>& regs, bool with_quantum) {
    CqState m = marginal(s, regs, with_quantum);
    double h = shannon(m.pmf);
    if (with_quantum)
        for (int t = 0; t < m.num_tuples(); ++t)
            if (m.pmf[t] > 0) h += m.pmf[t] * entropy(m.cond[t]);
    return h;
}

double shannon_mi(const CqState& s, const MiRequest& req) {
    check_disjoint(req);
    const bool q = req.right_quantum();
    auto ac = unite({&req.left, &req.conditioning});
    auto bc = unite({&req.right, &req.conditioning});
    auto abc = unite({&req.left, &req.right, &req.conditioning});
    return joint_entropy(s, ac, false) + joint_entropy(s, bc, q) - joint_entropy(s, abc, q) -
           joint_entropy(s, req.conditioning, false);
}

double block_relative_entropy(const std::vector<double>& w, const std::vector<Mat>& rho,
                              const std::vector<Mat>& sigma, double tol) {
    double d = 0;
    for (std::size_t a = 0; a < w.size(); ++a) {
        if (w[a] <= 0) continue;
        double x = relative_entropy(rho[a], sigma[a], tol);
        if (!std::isfinite(x)) return kInf;
        d += w[a] * x;
    }
    return d;
}

double block_divergence(const std::vector<double>& w, const std::vector<Mat>& rho, const std::vector<Mat>& sigma,
                        double alpha, bool sandwiched, double tol) {
    RenyiOrder check(alpha);
    (void)check;
    auto q_at = [&](double a) {
        double q = 0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i] <= 0) continue;
            double v = sandwiched ? sandwiched_q(rho[i], sigma[i], a, tol) : petz_q(rho[i], sigma[i], a, tol);
            if (!std::isfinite(v)) return kInf;
            q += w[i] * v;
        }
        return q;
    };
    auto d_at = [&](double a) {
        double q = q_at(a);
        if (!std::isfinite(q) || q <= 0) return kInf;
        return std::log2(q) / (a - 1.0);
    };
    if (std::abs(alpha - 1.0) < kNearOneWindow) {
        double d = block_relative_entropy(w, rho, sigma, tol);
        if (!std::isfinite(d)) return kInf;
        return d + (alpha - 1.0) * (d_at(1.0 + kNearOneStep) - d_at(1.0 - kNearOneStep)) / (2.0 * kNearOneStep);
    }
    return d_at(alpha);
}

double renyi_mi_up(const CqState& s, const std::vector<std::string>& left, double alpha, bool sandwiched) {
    CqState m = marginal(s, left, true);
    Mat rb = m.average();
    std::vector<Mat> sig(m.num_tuples(), rb);
    return block_divergence(m.pmf, m.cond, sig, alpha, sandwiched);
}

double down_block_objective(const std::vector<double>& w, const std::vector<Mat>& rho, const Mat& sigma,
                            double alpha) {
    double q = 0;
    for (std::size_t a = 0; a < w.size(); ++a) {
        if (w[a] <= 0) continue;
        double v = sandwiched_q(rho[a], sigma, alpha);
        if (!std::isfinite(v)) return kInf;
        q += w[a] * v;
    }
    if (q <= 0) return kInf;
    return std::log2(q) / (alpha - 1.0);
}

namespace {

Mat sigma_from(const gsl_vector* x, int d) {
    Mat l = Mat::Zero(d, d);
    int k = 0;
    for (int i = 0; i < d; ++i) l(i, i) = gsl_vector_get(x, k++);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < i; ++j) {
            double re = gsl_vector_get(x, k++);
            double im = gsl_vector_get(x, k++);
            l(i, j) = cplx(re, im);
        }
    Mat s = l * l.adjoint();
    double tr = s.trace().real();
    return hermitize(s / tr);
}

std::vector<double> params_from(const Mat& sigma) {
    const int d = static_cast<int>(sigma.rows());
    Mat reg = hermitize(sigma) + 1e-9 * Mat::Identity(d, d);
    Eigen::LLT<Mat> llt(reg);
    Mat l = llt.matrixL();
    std::vector<double> p;
    for (int i = 0; i < d; ++i) p.push_back(l(i, i).real());
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < i; ++j) {
            p.push_back(l(i, j).real());
            p.push_back(l(i, j).imag());
        }
    return p;
}

struct Problem {
    const std::vector<double>* w;
    const std::vector<Mat>* rho;
    double alpha;
    int d;
    long evals = 0;
};

double obj_f(const gsl_vector* x, void* params) {
    auto* p = static_cast<Problem*>(params);
    ++p->evals;
    double v = down_block_objective(*p->w, *p->rho, sigma_from(x, p->d), p->alpha);
    return std::isfinite(v) ? v : 1e300;
}

void obj_df(const gsl_vector* x, void* params, gsl_vector* g) {
    const std::size_t n = x->size;
    gsl_vector* y = gsl_vector_alloc(n);
    gsl_vector_memcpy(y, x);
    for (std::size_t i = 0; i < n; ++i) {
        double xi = gsl_vector_get(x, i);
        double h = 1e-6 * std::max(1.0, std::abs(xi));
        gsl_vector_set(y, i, xi + h);
        double fp = obj_f(y, params);
        gsl_vector_set(y, i, xi - h);
        double fm = obj_f(y, params);
        gsl_vector_set(y, i, xi);
        gsl_vector_set(g, i, (fp - fm) / (2 * h));
    }
    gsl_vector_free(y);
}

void obj_fdf(const gsl_vector* x, void* params, double* f, gsl_vector* g) {
    *f = obj_f(x, params);
    obj_df(x, params, g);
}

struct RunResult {
    double value;
    Mat sigma;
    double grad_norm;
    double delta;
    int iterations;
    bool converged;
};

RunResult minimize_block(const std::vector<double>& w, const std::vector<Mat>& rho, double alpha, const Mat& start,
                         const DownOptions& opt) {
    const int d = static_cast<int>(start.rows());
    Problem prob{&w, &rho, alpha, d};
    auto p0 = params_from(start);
    const std::size_t n = p0.size();
    gsl_vector* x = gsl_vector_alloc(n);
    for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x, i, p0[i]);
    gsl_multimin_function_fdf fn{&obj_f, &obj_df, &obj_fdf, n, &prob};
    gsl_multimin_fdfminimizer* m = gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n);
    gsl_multimin_fdfminimizer_set(m, &fn, x, 0.01, 0.1);
    double prev = m->f, delta = kInf;
    int it = 0;
    int small = 0;
    for (; it < opt.max_iterations; ++it) {
        int status = gsl_multimin_fdfminimizer_iterate(m);
        delta = std::abs(prev - m->f);
        prev = m->f;
        if (status) break;  // no further progress along the search direction
        if (gsl_multimin_test_gradient(m->gradient, 1e-9) == GSL_SUCCESS) break;
        small = delta < opt.objective_tol ? small + 1 : 0;
        if (small >= 3) break;
    }
    RunResult r;
    r.value = m->f;
    r.sigma = sigma_from(m->x, d);
    r.grad_norm = gsl_blas_dnrm2(m->gradient);
    r.delta = delta;
    r.iterations = it;
    r.converged = r.grad_norm <= 1e-5 || delta <= opt.objective_tol;
    gsl_multimin_fdfminimizer_free(m);
    gsl_vector_free(x);
    return r;
}

}  // namespace

DownResult renyi_mi_down(const CqState& s, const std::vector<std::string>& left,
                         const std::vector<std::string>& conditioning, double alpha, const DownOptions& opt) {
    RenyiOrder check(alpha);
    (void)check;
    MiRequest req{left, {}, conditioning};
    check_disjoint(req);
    if (std::abs(alpha - 1.0) < kNearOneWindow) {
        DownResult up = renyi_mi_down(s, left, conditioning, 1.0 + kNearOneStep, opt);
        DownResult dn = renyi_mi_down(s, left, conditioning, 1.0 - kNearOneStep, opt);
        DownResult r = up;
        double i1 = shannon_mi(s, req);
        r.value = i1 + (alpha - 1.0) * (up.value - dn.value) / (2.0 * kNearOneStep);
        r.converged = up.converged && dn.converged;
        r.iterations = up.iterations + dn.iterations;
        return r;
    }
    gsl_set_error_handler_off();
    Blocks b = blocks_of(s, left, conditioning);
    const int d = s.dB;
    DownResult out{0, {}, true, 0, 0, 0};
    double q = 0;
    for (std::size_t c = 0; c < b.pc.size(); ++c) {
        Mat rc = Mat::Zero(d, d);
        for (std::size_t a = 0; a < b.w[c].size(); ++a) rc += b.w[c][a] * b.rho[c][a];
        if (b.pc[c] <= 0) {
            out.sigma.push_back(Mat::Identity(d, d) / d);
            continue;
        }
        if (d == 1) {
            out.sigma.push_back(Mat::Identity(1, 1));
            q += b.pc[c];
            continue;
        }
        std::vector<Mat> starts{rc};
        Rng rng(derive_seed(opt.seed, c));
        for (int k = 1; k < opt.restarts; ++k) starts.push_back(random_density(d, rng));
        std::vector<RunResult> runs(starts.size());
        if (opt.workers > 1) {
            std::vector<std::future<RunResult>> fut;
            for (const auto& st : starts)
                fut.push_back(std::async(std::launch::async, [&, st] { return minimize_block(b.w[c], b.rho[c], alpha, st, opt); }));
            for (std::size_t k = 0; k < fut.size(); ++k) runs[k] = fut[k].get();
        } else {
            for (std::size_t k = 0; k < starts.size(); ++k) runs[k] = minimize_block(b.w[c], b.rho[c], alpha, starts[k], opt);
        }
        // The marginal itself is always a candidate, so the result never exceeds the up-arrow value.
        RunResult best{down_block_objective(b.w[c], b.rho[c], rc, alpha), rc, 0, 0, 0, true};
        for (const auto& r : runs) {
            out.iterations += r.iterations;
            if (r.value < best.value) best = r;
        }
        bool conv = std::any_of(runs.begin(), runs.end(), [&](const RunResult& r) {
            return r.converged && r.value <= best.value + 1e-7;
        });
        out.converged = out.converged && conv;
        out.gradient_norm = std::max(out.gradient_norm, best.grad_norm);
        out.objective_delta = std::max(out.objective_delta, best.delta);
        out.sigma.push_back(best.sigma);
        // back to the Q scale: Q_c = 2^{(alpha-1) D_c}
        q += b.pc[c] * std::exp2((alpha - 1.0) * best.value);
    }
    out.value = q > 0 ? std::log2(q) / (alpha - 1.0) : kInf;
    return out;
}

double imax_conditional_classical(const CqState& s, const std::vector<std::string>& u,
                                  const std::vector<std::string>& x, const std::vector<std::string>& v, double eps) {
    if (s.dB != 1) throw ValidationError("imax_conditional_classical: non-classical input");
    auto all = unite({&u, &v, &x});
    CqState m = marginal(s, all, false);
    auto up = m.positions(u), vp = m.positions(v), xp = m.positions(x);
    std::vector<int> uv = up, vx = vp;
    uv.insert(uv.end(), vp.begin(), vp.end());
    vx.insert(vx.end(), xp.begin(), xp.end());
    std::sort(uv.begin(), uv.end());
    std::sort(vx.begin(), vx.end());
    std::map<std::vector<int>, double> puv, pvx, pv;
    for (int t = 0; t < m.num_tuples(); ++t) {
        auto tp = m.tuple(t);
        puv[project_tuple(tp, uv)] += m.pmf[t];
        pvx[project_tuple(tp, vx)] += m.pmf[t];
        pv[project_tuple(tp, vp)] += m.pmf[t];
    }
    std::vector<double> p(m.num_tuples()), q(m.num_tuples());
    for (int t = 0; t < m.num_tuples(); ++t) {
        auto tp = m.tuple(t);
        p[t] = m.pmf[t];
        double den = pv[project_tuple(tp, vp)];
        q[t] = den > 0 ? puv[project_tuple(tp, uv)] * pvx[project_tuple(tp, vx)] / den : 0.0;
    }
    return smooth_dmax_classical(p, q, eps);
}

}  // namespace qbc
