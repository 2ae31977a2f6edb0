// Pinching maps, nested pinching families and eigenvalue-count checks.
#pragma once

#include "qbc/cq_state.hpp"
#include "qbc/hermitian.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace qbc {

struct PinchingMap {
    std::vector<Mat> projectors;
    std::vector<double> values;  // eigenvalue of the defining operator on each projector
    std::string source;

    int count() const { return static_cast<int>(projectors.size()); }
    int dim() const { return projectors.empty() ? 0 : static_cast<int>(projectors.front().rows()); }
};

PinchingMap pinching_from(const Mat& sigma, double tol = kClusterTol, std::string source = {});
Mat pinch(const PinchingMap& map, const Mat& x);
int distinct_eigenvalue_count(const Mat& op, double tol = kClusterTol);

enum class Scenario { marton, multilevel, general_two, three_degraded };
const char* scenario_name(Scenario s);

// Levels of pinchings indexed by classical keys. A level with conditioning
// registers C and parent P is defined, for a tuple t, by the operator
// E_{P|t}(rho_{t|C}), where rho_{t|C} averages rho over tuples agreeing with
// t on C. The root level (no parent, empty C) uses rho^B. Maps are built
// lazily and memoized per key; access is thread-safe.
class NestedPinchingFamily {
public:
    struct Entry {
        Mat reference;
        PinchingMap map;
    };

    explicit NestedPinchingFamily(CqState state, double tol = kClusterTol);

    int add_level(const std::string& name, const std::vector<std::string>& conditioning, int parent);
    int level(const std::string& name) const;
    int levels() const { return static_cast<int>(levels_.size()); }
    const std::string& level_name(int level) const { return levels_.at(level).name; }
    const std::vector<int>& key_positions(int level) const { return levels_.at(level).key; }
    const std::vector<int>& conditioning_positions(int level) const { return levels_.at(level).cond; }
    const CqState& state() const { return state_; }
    double tol() const { return tol_; }

    std::shared_ptr<const Entry> entry(int level, const std::vector<int>& tuple) const;
    Mat pinch(int level, const std::vector<int>& tuple, const Mat& x) const;
    const Mat& reference(int level, const std::vector<int>& tuple) const;
    int count(int level, const std::vector<int>& tuple) const;
    int max_count(int level) const;  // over tuples of positive probability

    // Apply sum_k |k><k| (x) E_{level|k} to an operator on the embedded space.
    Mat pinch_embedded(int level, const Mat& x) const;
    // sum_t p(t) |t><t| (x) reference(level, t): the operator whose pinching the level is.
    Mat embedded_reference(int level) const;

    std::size_t memo_size() const;

private:
    struct Level {
        std::string name;
        std::vector<int> cond;
        std::vector<int> key;
        int parent;
    };
    CqState state_;
    double tol_;
    std::vector<Level> levels_;
    struct Memo {
        std::mutex mu;
        std::map<std::pair<int, int>, std::shared_ptr<const Entry>> table;
    };
    std::shared_ptr<Memo> memo_ = std::make_shared<Memo>();
};

// Standard level layout per scenario:
//   multilevel (U,V,X):          E, E1{U}, E2{V}<-E1, E3{X}<-E2
//   marton (U0,...):             E, E1{U0}
//   general_two / three_degraded (U,V2,V3,X):
//                                E, E1{U}, E2{V2}<-E1, E3{V3}<-E1, E4{V2,V3}<-E1
NestedPinchingFamily build_nested(const CqState& state, Scenario scenario, double tol = kClusterTol);

struct PinchingInequalityReport {
    double margin;  // min eigenvalue of nu*E_sigma(rho) - rho
    int nu;
};
PinchingInequalityReport verify_pinching_inequality(const Mat& rho, const Mat& sigma, double tol = kClusterTol);

struct CountOptions {
    std::string u_register = "U";
    std::string v_register = "V";
    std::string x_register = "X";
    int max_sequences = 256;  // exhaustive up to this many sequences, sampled above
    std::uint64_t seed = 1;
    double tol = kClusterTol;
    int dim_cap = kDefaultDimCap;
};

struct CountLine {
    std::string name;    // nu, nu1, nu2, nu3
    long long observed;  // max count over the examined sequences
    double bound;
    long long sequences;
    bool exhaustive;
    bool within() const { return static_cast<double>(observed) <= bound; }
};

struct CountReport {
    int n;
    int dB, dU, dV, dX;
    double tol;
    std::vector<CountLine> lines;
    bool all_within() const;
};

// Counts of distinct eigenvalues of (rho^B)^{(x)n} (from the multiset of
// products, any n), E(rho_{u^n}), E_{1|u^n}(rho_{v^n}) and E_{1|u^n}(rho_{v^n x^n})
// (full matrices, d_B^n within the cap) against the polynomial bounds.
CountReport check_count_bounds(const CqState& s, int n, const CountOptions& opt = {});

// Distinct values among all products of n eigenvalues of rho.
long long tensor_power_count(const Vec& eigenvalues, int n, double tol = kClusterTol);

}  // namespace qbc
