#include "qbc/pinching.hpp"

#include "qbc/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace qbc {

PinchingMap pinching_from(const Mat& sigma, double tol, std::string source) {
    auto sd = spectral(hermitize(sigma), tol);
    PinchingMap m;
    m.source = std::move(source);
    for (auto& s : sd.spaces) {
        m.projectors.push_back(std::move(s.projector));
        m.values.push_back(s.value);
    }
    return m;
}

Mat pinch(const PinchingMap& map, const Mat& x) {
    if (x.rows() != map.dim() || x.cols() != map.dim()) throw ValidationError("pinch: dimension mismatch");
    if (map.count() == 1) return x;
    Mat out = Mat::Zero(x.rows(), x.cols());
    for (const auto& p : map.projectors) out += p * x * p;
    return out;
}

int distinct_eigenvalue_count(const Mat& op, double tol) {
    return static_cast<int>(spectral(hermitize(op), tol).spaces.size());
}

const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::marton: return "marton";
        case Scenario::multilevel: return "multilevel";
        case Scenario::general_two: return "general_two";
        case Scenario::three_degraded: return "three_degraded";
    }
    return "?";
}

NestedPinchingFamily::NestedPinchingFamily(CqState state, double tol) : state_(std::move(state)), tol_(tol) {}

int NestedPinchingFamily::add_level(const std::string& name, const std::vector<std::string>& conditioning,
                                    int parent) {
    if (parent < -1 || parent >= levels()) throw ValidationError("nested pinching: bad parent level");
    if (parent == -1 && !conditioning.empty())
        throw ValidationError("nested pinching: root level takes no conditioning registers");
    Level l;
    l.name = name;
    l.cond = state_.positions(conditioning);
    l.parent = parent;
    std::vector<int> key = parent >= 0 ? levels_[parent].key : std::vector<int>{};
    key.insert(key.end(), l.cond.begin(), l.cond.end());
    std::sort(key.begin(), key.end());
    key.erase(std::unique(key.begin(), key.end()), key.end());
    l.key = std::move(key);
    levels_.push_back(std::move(l));
    return levels() - 1;
}

int NestedPinchingFamily::level(const std::string& name) const {
    for (int i = 0; i < levels(); ++i)
        if (levels_[i].name == name) return i;
    throw ValidationError("nested pinching: unknown level '" + name + "'");
}

std::shared_ptr<const NestedPinchingFamily::Entry> NestedPinchingFamily::entry(int lv,
                                                                               const std::vector<int>& t) const {
    const Level& l = levels_.at(lv);
    const int key = sub_index(state_, l.key, project_tuple(t, l.key));
    {
        std::lock_guard<std::mutex> g(memo_->mu);
        auto it = memo_->table.find({lv, key});
        if (it != memo_->table.end()) return it->second;
    }
    Mat rho = conditional_average(state_, l.cond, project_tuple(t, l.cond)).rho;
    auto e = std::make_shared<Entry>();
    e->reference = l.parent >= 0 ? pinch(l.parent, t, rho) : rho;
    e->map = pinching_from(e->reference, tol_, l.name);
    std::lock_guard<std::mutex> g(memo_->mu);
    auto [it, inserted] = memo_->table.emplace(std::make_pair(lv, key), std::move(e));
    return it->second;
}

Mat NestedPinchingFamily::pinch(int lv, const std::vector<int>& t, const Mat& x) const {
    return qbc::pinch(entry(lv, t)->map, x);
}

const Mat& NestedPinchingFamily::reference(int lv, const std::vector<int>& t) const {
    return entry(lv, t)->reference;
}

int NestedPinchingFamily::count(int lv, const std::vector<int>& t) const { return entry(lv, t)->map.count(); }

int NestedPinchingFamily::max_count(int lv) const {
    int best = 0;
    for (int t = 0; t < state_.num_tuples(); ++t)
        if (state_.pmf[t] > 0) best = std::max(best, count(lv, state_.tuple(t)));
    return best;
}

Mat NestedPinchingFamily::pinch_embedded(int lv, const Mat& x) const {
    const int n = state_.num_tuples(), d = state_.dB;
    if (x.rows() != n * d || x.cols() != n * d) throw ValidationError("pinch_embedded: dimension mismatch");
    const auto& key = levels_.at(lv).key;
    Mat out = Mat::Zero(x.rows(), x.cols());
    std::vector<std::vector<int>> keys(n);
    for (int t = 0; t < n; ++t) keys[t] = project_tuple(state_.tuple(t), key);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (keys[a] != keys[b]) continue;
            Mat blk = x.block(a * d, b * d, d, d);
            if (blk.cwiseAbs().maxCoeff() == 0.0) continue;
            out.block(a * d, b * d, d, d) = pinch(lv, state_.tuple(a), blk);
        }
    return out;
}

Mat NestedPinchingFamily::embedded_reference(int lv) const {
    const int n = state_.num_tuples(), d = state_.dB;
    Mat out = Mat::Zero(n * d, n * d);
    for (int t = 0; t < n; ++t)
        if (state_.pmf[t] > 0) out.block(t * d, t * d, d, d) = state_.pmf[t] * reference(lv, state_.tuple(t));
    return out;
}

std::size_t NestedPinchingFamily::memo_size() const {
    std::lock_guard<std::mutex> g(memo_->mu);
    return memo_->table.size();
}

NestedPinchingFamily build_nested(const CqState& state, Scenario scenario, double tol) {
    NestedPinchingFamily f(state, tol);
    switch (scenario) {
        case Scenario::multilevel: {
            int e = f.add_level("E", {}, -1);
            int e1 = f.add_level("E1", {"U"}, e);
            int e2 = f.add_level("E2", {"V"}, e1);
            f.add_level("E3", {"X"}, e2);
            break;
        }
        case Scenario::marton: {
            int e = f.add_level("E", {}, -1);
            f.add_level("E1", {"U0"}, e);
            break;
        }
        case Scenario::general_two:
        case Scenario::three_degraded: {
            int e = f.add_level("E", {}, -1);
            int e1 = f.add_level("E1", {"U"}, e);
            f.add_level("E2", {"V2"}, e1);
            f.add_level("E3", {"V3"}, e1);
            f.add_level("E4", {"V2", "V3"}, e1);
            break;
        }
    }
    return f;
}

PinchingInequalityReport verify_pinching_inequality(const Mat& rho, const Mat& sigma, double tol) {
    if (rho.rows() != sigma.rows()) throw ValidationError("verify_pinching_inequality: dimension mismatch");
    auto m = pinching_from(sigma, tol);
    Mat diff = static_cast<double>(m.count()) * pinch(m, rho) - rho;
    return {min_eigenvalue(diff), m.count()};
}

long long tensor_power_count(const Vec& ev, int n, double tol) {
    const int d = static_cast<int>(ev.size());
    std::vector<double> vals;
    std::vector<int> k(d, 0);
    // enumerate compositions k_0+...+k_{d-1} = n
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == d - 1) {
            k[i] = left;
            double v = 1.0;
            for (int j = 0; j < d; ++j) v *= std::pow(std::max(ev(j), 0.0), k[j]);
            vals.push_back(v);
            return;
        }
        for (int c = 0; c <= left; ++c) {
            k[i] = c;
            rec(i + 1, left - c);
        }
    };
    rec(0, n);
    std::sort(vals.begin(), vals.end());
    long long count = vals.empty() ? 0 : 1;
    for (std::size_t i = 1; i < vals.size(); ++i)
        if (!same_eigenvalue(vals[i - 1], vals[i], tol)) ++count;
    return count;
}

bool CountReport::all_within() const {
    return std::all_of(lines.begin(), lines.end(), [](const CountLine& l) { return l.within(); });
}

namespace {

// Sequences of length n over an alphabet with pmf: all of them, or a sample.
std::vector<std::vector<int>> sequences(const std::vector<double>& pmf, int n, int cap, Rng& rng, bool& exhaustive) {
    const int a = static_cast<int>(pmf.size());
    double total = std::pow(static_cast<double>(a), n);
    std::vector<std::vector<int>> out;
    if (total <= cap) {
        exhaustive = true;
        std::vector<int> s(n, 0);
        for (long long idx = 0; idx < static_cast<long long>(total); ++idx) {
            long long r = idx;
            for (int i = n - 1; i >= 0; --i) {
                s[i] = static_cast<int>(r % a);
                r /= a;
            }
            out.push_back(s);
        }
    } else {
        exhaustive = false;
        for (int j = 0; j < cap; ++j) {
            std::vector<int> s(n);
            for (auto& x : s) x = sample_index(pmf, rng);
            out.push_back(s);
        }
    }
    return out;
}

}  // namespace

CountReport check_count_bounds(const CqState& s, int n, const CountOptions& opt) {
    if (n < 1) throw ValidationError("check_count_bounds: n must be >= 1");
    CountReport rep;
    rep.n = n;
    rep.dB = s.dB;
    rep.tol = opt.tol;
    std::vector<std::string> present;
    for (const auto& r : {opt.u_register, opt.v_register, opt.x_register})
        if (s.has(r)) present.push_back(r);
    CqState m = marginal(s, present, true);
    auto size_of = [&](const std::string& r) { return m.has(r) ? m.registers[m.position(r)].size : 1; };
    rep.dU = size_of(opt.u_register);
    rep.dV = size_of(opt.v_register);
    rep.dX = size_of(opt.x_register);
    const double np1 = n + 1.0;
    const double e = (s.dB + 2.0) * (s.dB - 1.0) / 2.0;

    Mat rhoB = m.average();
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(rhoB));
    const Vec lam = es.eigenvalues();
    const Mat V = es.eigenvectors();
    rep.lines.push_back({"nu", tensor_power_count(lam, n, opt.tol), std::pow(np1, s.dB - 1.0), 1, true});

    double dim = std::pow(static_cast<double>(s.dB), n);
    if (dim > opt.dim_cap) return rep;  // full-matrix counts need d_B^n within the cap

    const int D = static_cast<int>(dim);
    // product eigenbasis labels of (rho^B)^{(x)n}
    std::vector<double> prod(D);
    for (int b = 0; b < D; ++b) {
        double v = 1.0;
        int r = b;
        for (int i = 0; i < n; ++i) {
            v *= std::max(lam(r % s.dB), 0.0);
            r /= s.dB;
        }
        prod[b] = v;
    }
    std::vector<int> order(D);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return prod[a] < prod[b]; });
    std::vector<int> label(D, 0);
    for (int i = 1; i < D; ++i)
        label[order[i]] = label[order[i - 1]] + (same_eigenvalue(prod[order[i - 1]], prod[order[i]], opt.tol) ? 0 : 1);

    auto in_basis = [&](const Mat& rho) -> Mat { return V.adjoint() * rho * V; };
    auto cond_given = [&](const std::vector<std::string>& regs, const std::vector<int>& vals) {
        std::vector<int> pos;
        std::vector<int> v;
        for (std::size_t i = 0; i < regs.size(); ++i)
            if (m.has(regs[i])) {
                pos.push_back(m.position(regs[i]));
                v.push_back(vals[i]);
            }
        return in_basis(conditional_average(m, pos, v).rho);
    };
    auto seq_op = [&](const std::vector<Mat>& per_symbol, const std::vector<int>& seq) {
        std::vector<Mat> f;
        for (int x : seq) f.push_back(per_symbol[x]);
        return kron(f);
    };

    Rng rng(opt.seed);
    // joint alphabet over (u, v, x) in the marginal's register order U, V, X
    const int dUV = rep.dU * rep.dV, dUVX = dUV * rep.dX;
    std::vector<double> pu(rep.dU, 0.0), puv(dUV, 0.0), puvx(dUVX, 0.0);
    std::vector<Mat> rho_u(rep.dU), rho_v(rep.dV), rho_vx(rep.dV * rep.dX);
    for (int u = 0; u < rep.dU; ++u) rho_u[u] = cond_given({opt.u_register}, {u});
    for (int v = 0; v < rep.dV; ++v) rho_v[v] = cond_given({opt.v_register}, {v});
    for (int v = 0; v < rep.dV; ++v)
        for (int x = 0; x < rep.dX; ++x) rho_vx[v * rep.dX + x] = cond_given({opt.v_register, opt.x_register}, {v, x});
    for (int t = 0; t < m.num_tuples(); ++t) {
        auto tp = m.tuple(t);
        int u = m.has(opt.u_register) ? tp[m.position(opt.u_register)] : 0;
        int v = m.has(opt.v_register) ? tp[m.position(opt.v_register)] : 0;
        int x = m.has(opt.x_register) ? tp[m.position(opt.x_register)] : 0;
        pu[u] += m.pmf[t];
        puv[u * rep.dV + v] += m.pmf[t];
        puvx[(u * rep.dV + v) * rep.dX + x] += m.pmf[t];
    }

    std::map<std::vector<int>, PinchingMap> level1;
    auto level1_map = [&](const std::vector<int>& useq) -> const PinchingMap& {
        auto it = level1.find(useq);
        if (it != level1.end()) return it->second;
        Mat y = seq_op(rho_u, useq);
        for (int i = 0; i < D; ++i)
            for (int j = 0; j < D; ++j)
                if (label[i] != label[j]) y(i, j) = 0;
        return level1.emplace(useq, pinching_from(y, opt.tol)).first->second;
    };

    {
        bool ex;
        auto seqs = sequences(pu, n, opt.max_sequences, rng, ex);
        long long best = 0;
        for (const auto& us : seqs) best = std::max<long long>(best, level1_map(us).count());
        rep.lines.push_back({"nu1", best, std::pow(np1, rep.dU * e), static_cast<long long>(seqs.size()), ex});
    }
    {
        bool ex;
        auto seqs = sequences(puv, n, opt.max_sequences, rng, ex);
        long long best = 0;
        for (const auto& s2 : seqs) {
            std::vector<int> us(n), vs(n);
            for (int i = 0; i < n; ++i) {
                us[i] = s2[i] / rep.dV;
                vs[i] = s2[i] % rep.dV;
            }
            Mat y = pinch(level1_map(us), seq_op(rho_v, vs));
            best = std::max<long long>(best, distinct_eigenvalue_count(y, opt.tol));
        }
        rep.lines.push_back({"nu2", best, std::pow(np1, rep.dV * rep.dU * e), static_cast<long long>(seqs.size()), ex});
    }
    {
        bool ex;
        auto seqs = sequences(puvx, n, opt.max_sequences, rng, ex);
        long long best = 0;
        for (const auto& s3 : seqs) {
            std::vector<int> us(n), vxs(n);
            for (int i = 0; i < n; ++i) {
                us[i] = s3[i] / (rep.dV * rep.dX);
                vxs[i] = s3[i] % (rep.dV * rep.dX);
            }
            Mat y = pinch(level1_map(us), seq_op(rho_vx, vxs));
            best = std::max<long long>(best, distinct_eigenvalue_count(y, opt.tol));
        }
        rep.lines.push_back(
            {"nu3", best, std::pow(np1, rep.dX * rep.dV * rep.dU * e), static_cast<long long>(seqs.size()), ex});
    }
    return rep;
}

}  // namespace qbc
