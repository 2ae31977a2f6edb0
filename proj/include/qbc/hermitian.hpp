// Dense Hermitian operators at small dimension: clustered spectra, powers,
// positive-part projectors, distances, partial traces.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbc {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;

inline constexpr double kClusterTol = 1e-9;
inline constexpr double kHermitianTol = 1e-12;
inline constexpr int kDefaultDimCap = 256;

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Eigenspace {
    double value;
    Mat projector;
    int multiplicity;
};

struct SpectralDecomposition {
    std::vector<Eigenspace> spaces;  // ascending eigenvalues
    double cluster_tol = kClusterTol;

    int dim() const;
    Mat reconstruct() const;
};

// Result of a matrix power; pseudo_inverse is set when t < 0 on a rank-deficient input.
struct PowerResult {
    Mat op;
    bool pseudo_inverse = false;
};

bool is_hermitian(const Mat& h, double tol = kHermitianTol);
void require_hermitian(const Mat& h, const char* what);
Mat hermitize(const Mat& a);

// True when |a-b| <= tol*max(1,|a|,|b|).
bool same_eigenvalue(double a, double b, double tol = kClusterTol);

SpectralDecomposition spectral(const Mat& h, double cluster_tol = kClusterTol);
Vec eigenvalues(const Mat& h);
double min_eigenvalue(const Mat& h);
double max_eigenvalue(const Mat& h);

// Power on the support; eigenvalues at or below tol count as zero.
PowerResult matrix_power_ex(const Mat& rho, double t, double tol = kClusterTol);
Mat matrix_power(const Mat& rho, double t, double tol = kClusterTol);
Mat support_projector(const Mat& rho, double tol = kClusterTol);
Mat log2m(const Mat& rho, double tol = kClusterTol);

// {T >= O}: sum of eigenprojectors of T-O with eigenvalue >= 0.
Mat positive_part_projector(const Mat& t, const Mat& o, double tol = kClusterTol);

double trace_norm(const Mat& w);
double fidelity(const Mat& rho, const Mat& sigma);
double purified_distance(const Mat& rho, const Mat& sigma);
double entropy(const Mat& rho, double tol = kClusterTol);

bool is_density(const Mat& rho, double tol = 1e-10);
void require_density(const Mat& rho, const char* what);

Mat partial_trace(const Mat& op, const std::vector<int>& dims, const std::vector<int>& keep);
Mat kron(const Mat& a, const Mat& b);
Mat kron(const std::vector<Mat>& ops);
Mat identity(int d);
Mat diag(const std::vector<double>& v);
double op_norm(const Mat& a);  // largest singular value

void check_dim_cap(long long dim, int cap = kDefaultDimCap);

}  // namespace qbc
