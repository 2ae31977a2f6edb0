#include "qbc/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qbc {

int SpectralDecomposition::dim() const {
    return spaces.empty() ? 0 : static_cast<int>(spaces.front().projector.rows());
}

Mat SpectralDecomposition::reconstruct() const {
    Mat out = Mat::Zero(dim(), dim());
    for (const auto& s : spaces) out += s.value * s.projector;
    return out;
}

bool is_hermitian(const Mat& h, double tol) {
    if (h.rows() != h.cols()) return false;
    return (h - h.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

void require_hermitian(const Mat& h, const char* what) {
    if (h.rows() != h.cols()) throw ValidationError(std::string(what) + ": matrix is not square");
    if (h.rows() == 0) throw ValidationError(std::string(what) + ": empty matrix");
    if (!is_hermitian(h)) throw ValidationError(std::string(what) + ": matrix is not Hermitian");
}

Mat hermitize(const Mat& a) { return 0.5 * (a + a.adjoint()); }

bool same_eigenvalue(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

namespace {

Eigen::SelfAdjointEigenSolver<Mat> solve(const Mat& h) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(h));
    if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
    return es;
}

}  // namespace

SpectralDecomposition spectral(const Mat& h, double cluster_tol) {
    require_hermitian(h, "spectral");
    if (!(cluster_tol > 0)) throw ValidationError("spectral: cluster_tol must be positive");
    auto es = solve(h);
    const Vec& ev = es.eigenvalues();
    const Mat& u = es.eigenvectors();
    SpectralDecomposition out;
    out.cluster_tol = cluster_tol;
    const int n = static_cast<int>(ev.size());
    int start = 0;
    for (int i = 1; i <= n; ++i) {
        if (i < n && same_eigenvalue(ev(i - 1), ev(i), cluster_tol)) continue;
        const int m = i - start;
        Mat block = u.middleCols(start, m);
        double mean = ev.segment(start, m).mean();
        out.spaces.push_back({mean, block * block.adjoint(), m});
        start = i;
    }
    return out;
}

Vec eigenvalues(const Mat& h) { return solve(h).eigenvalues(); }
double min_eigenvalue(const Mat& h) { return eigenvalues(h).minCoeff(); }
double max_eigenvalue(const Mat& h) { return eigenvalues(h).maxCoeff(); }

PowerResult matrix_power_ex(const Mat& rho, double t, double tol) {
    auto es = solve(rho);
    const Vec& ev = es.eigenvalues();
    const Mat& u = es.eigenvectors();
    Vec f(ev.size());
    bool deficient = false;
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) <= tol) {
            f(i) = 0.0;
            deficient = true;
        } else {
            f(i) = t == 0.0 ? 1.0 : std::pow(ev(i), t);
        }
    }
    PowerResult r;
    r.op = u * f.asDiagonal() * u.adjoint();
    r.pseudo_inverse = deficient && t < 0;
    return r;
}

Mat matrix_power(const Mat& rho, double t, double tol) { return matrix_power_ex(rho, t, tol).op; }

Mat support_projector(const Mat& rho, double tol) { return matrix_power(rho, 0.0, tol); }

Mat log2m(const Mat& rho, double tol) {
    auto es = solve(rho);
    const Vec& ev = es.eigenvalues();
    Vec f(ev.size());
    for (int i = 0; i < ev.size(); ++i) f(i) = ev(i) <= tol ? 0.0 : std::log2(ev(i));
    return es.eigenvectors() * f.asDiagonal() * es.eigenvectors().adjoint();
}

Mat positive_part_projector(const Mat& t, const Mat& o, double tol) {
    if (t.rows() != o.rows() || t.cols() != o.cols())
        throw ValidationError("positive_part_projector: dimension mismatch");
    auto es = solve(t - o);
    const Vec& ev = es.eigenvalues();
    const Mat& u = es.eigenvectors();
    int first = 0;
    while (first < ev.size() && ev(first) < 0 && !same_eigenvalue(ev(first), 0.0, tol)) ++first;
    const int m = static_cast<int>(ev.size()) - first;
    Mat block = u.rightCols(m);
    return block * block.adjoint();
}

double trace_norm(const Mat& w) {
    if (w.rows() == w.cols() && is_hermitian(w, 1e-13)) return eigenvalues(w).cwiseAbs().sum();
    Eigen::JacobiSVD<Mat> svd(w);
    return svd.singularValues().sum();
}

double fidelity(const Mat& rho, const Mat& sigma) {
    Mat a = matrix_power(rho, 0.5, 0.0) * matrix_power(sigma, 0.5, 0.0);
    Eigen::JacobiSVD<Mat> svd(a);
    return std::min(1.0, svd.singularValues().sum());
}

double purified_distance(const Mat& rho, const Mat& sigma) {
    double f = fidelity(rho, sigma);
    return std::sqrt(std::max(0.0, 1.0 - f * f));
}

double entropy(const Mat& rho, double tol) {
    Vec ev = eigenvalues(rho);
    double s = 0.0;
    for (int i = 0; i < ev.size(); ++i)
        if (ev(i) > tol) s -= ev(i) * std::log2(ev(i));
    return s;
}

bool is_density(const Mat& rho, double tol) {
    if (!is_hermitian(rho)) return false;
    if (std::abs(rho.trace() - 1.0) > tol) return false;
    return min_eigenvalue(rho) >= -tol;
}

void require_density(const Mat& rho, const char* what) {
    require_hermitian(rho, what);
    if (std::abs(rho.trace() - 1.0) > 1e-10)
        throw ValidationError(std::string(what) + ": trace is not 1");
    if (min_eigenvalue(rho) < -1e-10)
        throw ValidationError(std::string(what) + ": not positive semidefinite");
}

Mat partial_trace(const Mat& op, const std::vector<int>& dims, const std::vector<int>& keep) {
    long long total = 1;
    for (int d : dims) {
        if (d < 1) throw ValidationError("partial_trace: nonpositive subsystem dim");
        total *= d;
    }
    if (total != op.rows() || op.rows() != op.cols())
        throw ValidationError("partial_trace: dims do not factor the operator dimension");
    const int k = static_cast<int>(dims.size());
    std::vector<bool> kept(k, false);
    for (int i : keep) {
        if (i < 0 || i >= k) throw ValidationError("partial_trace: keep index out of range");
        kept[i] = true;
    }
    int dk = 1;
    for (int i = 0; i < k; ++i)
        if (kept[i]) dk *= dims[i];
    // strides of the full index and of the kept / traced sub-indices
    std::vector<long long> stride(k, 1);
    for (int i = k - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];
    std::vector<int> kept_idx, tr_idx;
    for (int i = 0; i < k; ++i) (kept[i] ? kept_idx : tr_idx).push_back(i);
    auto offsets = [&](const std::vector<int>& idx) {
        long long n = 1;
        for (int i : idx) n *= dims[i];
        std::vector<long long> off(n, 0);
        for (long long a = 0; a < n; ++a) {
            long long rem = a, o = 0;
            for (int j = static_cast<int>(idx.size()) - 1; j >= 0; --j) {
                int i = idx[j];
                o += (rem % dims[i]) * stride[i];
                rem /= dims[i];
            }
            off[a] = o;
        }
        return off;
    };
    auto ko = offsets(kept_idx);
    auto to = offsets(tr_idx);
    Mat out = Mat::Zero(dk, dk);
    for (int r = 0; r < dk; ++r)
        for (int c = 0; c < dk; ++c) {
            cplx s = 0;
            for (long long t : to) s += op(ko[r] + t, ko[c] + t);
            out(r, c) = s;
        }
    return out;
}

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Mat kron(const std::vector<Mat>& ops) {
    if (ops.empty()) return Mat::Identity(1, 1);
    Mat out = ops.front();
    for (std::size_t i = 1; i < ops.size(); ++i) out = kron(out, ops[i]);
    return out;
}

Mat identity(int d) { return Mat::Identity(d, d); }

Mat diag(const std::vector<double>& v) {
    Mat out = Mat::Zero(v.size(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out(i, i) = v[i];
    return out;
}

double op_norm(const Mat& a) {
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

void check_dim_cap(long long dim, int cap) {
    if (dim > cap)
        throw ValidationError("dimension " + std::to_string(dim) + " exceeds cap " + std::to_string(cap));
}

}  // namespace qbc
