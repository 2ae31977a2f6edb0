// Exact-rational inequality systems, Fourier-Motzkin elimination and exact LP.
#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qbc {

using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational, boost::multiprecision::et_off>;

inline constexpr int kQuantizationBits = 40;

// Round to the nearest multiple of 2^-40.
Rational quantize(double value);
double to_double(const Rational& r);
std::string to_string(const Rational& r);
Rational parse_rational(const std::string& text);  // "a", "-a/b" or a decimal literal

// sum_v coeffs[v] * v <= rhs
struct LinearInequality {
    std::map<std::string, Rational> coeffs;
    Rational rhs;
    std::string tag;

    bool is_tautology() const;  // no nonzero coefficient
    Rational coeff(const std::string& v) const;
};

struct InequalitySystem {
    std::vector<std::string> variables;
    std::vector<LinearInequality> inequalities;
    bool infeasible = false;  // set when an elimination proves the system empty

    void add_variable(const std::string& v);
    bool has_variable(const std::string& v) const;
    void add(LinearInequality ineq);
    void add_le(std::map<std::string, Rational> coeffs, Rational rhs, std::string tag = {});
    void add_ge(std::map<std::string, Rational> coeffs, Rational rhs, std::string tag = {});
    void add_eq(std::map<std::string, Rational> coeffs, Rational rhs, std::string tag = {});
    void add_nonnegativity(const std::vector<std::string>& vars);
    void validate() const;  // every referenced variable is declared
};

using Point = std::map<std::string, Rational>;

bool satisfies(const InequalitySystem& s, const Point& p);

struct LpResult {
    enum class Status { optimal, unbounded, infeasible };
    Status status = Status::infeasible;
    Rational value;
    Point point;  // an optimal vertex when optimal, a feasible point when unbounded
};

// Exact simplex (two phases, Bland's rule); variables are free.
LpResult lp_max(const InequalitySystem& s, const std::map<std::string, Rational>& objective);
bool feasible(const InequalitySystem& s);

// Substitute fixed values for some variables; they leave the variable list.
InequalitySystem fix_variables(const InequalitySystem& s, const Point& values);
// Replace variable `v` by an affine expression in (possibly new) variables.
InequalitySystem substitute(const InequalitySystem& s, const std::string& v,
                            const std::map<std::string, Rational>& expr, const Rational& constant = 0);
InequalitySystem rename_variables(const InequalitySystem& s, const std::map<std::string, std::string>& names);

// Scale to a canonical representative, drop tautologies and duplicates.
InequalitySystem normalize(const InequalitySystem& s);
// Remove every inequality implied by the others (exact LP).
InequalitySystem remove_redundant(const InequalitySystem& s);

struct FmStats {
    int steps = 0;
    int max_intermediate = 0;  // largest system after combination, before pruning
    int lp_calls = 0;
};

// Exact projection onto the remaining variables with pruning after every step.
InequalitySystem fm_eliminate(const InequalitySystem& s, const std::vector<std::string>& drop,
                              FmStats* stats = nullptr);

// Throws ValidationError when a system is unbounded or variable sets differ.
// contains(a, b) is true iff a is a subset of b.
bool contains(const InequalitySystem& a, const InequalitySystem& b);
bool polytope_equal(const InequalitySystem& a, const InequalitySystem& b);
bool is_bounded(const InequalitySystem& s);

// One inequality per line: "vars: a b c" header, then "3/2*a - b <= 1/4 # tag".
std::string to_text(const InequalitySystem& s);
InequalitySystem parse_system(const std::string& text);

}  // namespace qbc
