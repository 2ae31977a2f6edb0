#include "doctest.h"

#include "qbc/hermitian.hpp"
#include "qbc/polyhedra.hpp"
#include "qbc/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace qbc;

namespace {

Rational R(long long n, long long d = 1) { return Rational(n) / Rational(d); }

InequalitySystem square() {
    InequalitySystem s;
    s.variables = {"x", "y"};
    s.add_nonnegativity({"x", "y"});
    s.add_le({{"x", R(1)}}, R(1));
    s.add_le({{"y", R(1)}}, R(1));
    return s;
}

InequalitySystem triangle() {
    InequalitySystem s;
    s.variables = {"x", "y"};
    s.add_nonnegativity({"x", "y"});
    s.add_le({{"x", R(1)}, {"y", R(1)}}, R(1));
    return s;
}

// Random bounded system: box [-2,2]^k plus `extra` random cuts with small integer data.
InequalitySystem random_system(const std::vector<std::string>& vars, int extra, Rng& rng) {
    InequalitySystem s;
    s.variables = vars;
    for (const auto& v : vars) {
        s.add_le({{v, R(1)}}, R(2));
        s.add_ge({{v, R(1)}}, R(-2));
    }
    std::uniform_int_distribution<int> c(-4, 4), b(1, 8);
    for (int i = 0; i < extra; ++i) {
        std::map<std::string, Rational> co;
        for (const auto& v : vars) co[v] = R(c(rng));
        s.add_le(co, R(b(rng), 2));
    }
    return s;
}

// Floating vertex-enumeration oracle for max c.x over a 3-variable system.
double brute_force_max(const InequalitySystem& s, const std::vector<double>& c) {
    const auto& q = s.inequalities;
    const int m = static_cast<int>(q.size());
    double best = -1e300;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            for (int k = j + 1; k < m; ++k) {
                Eigen::Matrix3d a;
                Eigen::Vector3d b;
                int rows[3] = {i, j, k};
                for (int r = 0; r < 3; ++r) {
                    for (int v = 0; v < 3; ++v) a(r, v) = to_double(q[rows[r]].coeff(s.variables[v]));
                    b(r) = to_double(q[rows[r]].rhs);
                }
                if (std::abs(a.determinant()) < 1e-12) continue;
                Eigen::Vector3d x = a.lu().solve(b);
                bool ok = true;
                for (const auto& ineq : q) {
                    double lhs = 0;
                    for (int v = 0; v < 3; ++v) lhs += to_double(ineq.coeff(s.variables[v])) * x(v);
                    if (lhs > to_double(ineq.rhs) + 1e-9) ok = false;
                }
                if (ok) best = std::max(best, c[0] * x(0) + c[1] * x(1) + c[2] * x(2));
            }
    return best;
}

}  // namespace

TEST_CASE("rational quantization and parsing") {
    CHECK(quantize(0.5) == R(1, 2));
    CHECK(quantize(-3.0) == R(-3));
    Rational t = quantize(1.0 / 3.0);
    CHECK(std::abs(to_double(t) - 1.0 / 3.0) <= std::ldexp(1.0, -41));
    CHECK(boost::multiprecision::denominator(Rational(t * Rational(1LL << 40))) == 1);
    CHECK(quantize(0.1) == quantize(0.1));
    CHECK(parse_rational("3/4") == R(3, 4));
    CHECK(parse_rational("-0.125") == R(-1, 8));
    CHECK(parse_rational("2") == R(2));
    CHECK_THROWS_AS(parse_rational("x"), ValidationError);
    CHECK_THROWS_AS(quantize(std::nan("")), ValidationError);
}

TEST_CASE("lp_max examples") {
    InequalitySystem s;
    s.variables = {"x"};
    s.add_le({{"x", R(1)}}, R(3));
    s.add_ge({{"x", R(1)}}, R(0));
    auto r = lp_max(s, {{"x", R(1)}});
    REQUIRE(r.status == LpResult::Status::optimal);
    CHECK(r.value == R(3));
    CHECK(r.point.at("x") == R(3));

    InequalitySystem bad;
    bad.variables = {"x"};
    bad.add_le({{"x", R(1)}}, R(0));
    bad.add_le({{"x", R(-1)}}, R(-1));
    CHECK(lp_max(bad, {{"x", R(1)}}).status == LpResult::Status::infeasible);

    InequalitySystem open;
    open.variables = {"x", "y"};
    open.add_le({{"x", R(1)}}, R(1));
    CHECK(lp_max(open, {{"y", R(1)}}).status == LpResult::Status::unbounded);
    CHECK(lp_max(open, {{"x", R(-1)}}).status == LpResult::Status::unbounded);
    CHECK(lp_max(open, {{"x", R(2)}}).value == R(2));
}

TEST_CASE("lp_max matches a floating vertex-enumeration oracle") {
    Rng rng(2024);
    std::uniform_int_distribution<int> c(-5, 5);
    int compared = 0;
    for (int trial = 0; trial < 60; ++trial) {
        auto s = random_system({"a", "b", "d"}, 4, rng);
        std::vector<double> obj = {double(c(rng)), double(c(rng)), double(c(rng))};
        auto r = lp_max(s, {{"a", R(obj[0])}, {"b", R(obj[1])}, {"d", R(obj[2])}});
        double oracle = brute_force_max(s, obj);
        if (oracle < -1e299) {
            CHECK(r.status == LpResult::Status::infeasible);
            continue;
        }
        REQUIRE(r.status == LpResult::Status::optimal);
        CHECK(std::abs(to_double(r.value) - oracle) <= 1e-9);
        CHECK(satisfies(s, r.point));
        Rational at = R(obj[0]) * r.point.at("a") + R(obj[1]) * r.point.at("b") + R(obj[2]) * r.point.at("d");
        CHECK(at == r.value);
        ++compared;
    }
    CHECK(compared > 20);
}

TEST_CASE("fm_eliminate examples") {
    InequalitySystem s;
    s.variables = {"x", "y"};
    s.add_le({{"y", R(1)}}, R(1));
    s.add_le({{"x", R(1)}, {"y", R(-1)}}, R(0));
    auto p = fm_eliminate(s, {"y"});
    REQUIRE(p.inequalities.size() == 1);
    CHECK(p.variables == std::vector<std::string>{"x"});
    CHECK(p.inequalities[0].coeff("x") == R(1));
    CHECK(p.inequalities[0].rhs == R(1));

    InequalitySystem t = square();
    t.add_variable("z");
    t.add_nonnegativity({"z"});
    auto q = fm_eliminate(t, {"z"});
    CHECK(q.inequalities.size() == 4);
    CHECK(polytope_equal(q, square()));

    // equality substitution: R = S1 + S2, S1 <= 1, S2 <= 2, S >= 0 gives 0 <= R <= 3
    InequalitySystem e;
    e.variables = {"R", "S1", "S2"};
    e.add_eq({{"R", R(1)}, {"S1", R(-1)}, {"S2", R(-1)}}, R(0));
    e.add_le({{"S1", R(1)}}, R(1));
    e.add_le({{"S2", R(1)}}, R(2));
    e.add_nonnegativity({"S1", "S2"});
    auto er = fm_eliminate(e, {"S1", "S2"});
    InequalitySystem want;
    want.variables = {"R"};
    want.add_nonnegativity({"R"});
    want.add_le({{"R", R(1)}}, R(3));
    CHECK(polytope_equal(er, want));
    CHECK(er.inequalities.size() == 2);

    InequalitySystem empty;
    empty.variables = {"x", "y"};
    empty.add_le({{"x", R(1)}, {"y", R(1)}}, R(-1));
    empty.add_nonnegativity({"x", "y"});
    auto ee = fm_eliminate(empty, {"y"});
    CHECK(ee.infeasible);
    CHECK_THROWS_AS(fm_eliminate(empty, {"nope"}), ValidationError);
}

TEST_CASE("containment and equality") {
    CHECK(polytope_equal(square(), square()));
    CHECK(contains(triangle(), square()));
    CHECK_FALSE(contains(square(), triangle()));
    InequalitySystem open;
    open.variables = {"x", "y"};
    open.add_nonnegativity({"x", "y"});
    CHECK_THROWS_AS(contains(open, square()), ValidationError);
    InequalitySystem other;
    other.variables = {"x", "z"};
    CHECK_THROWS_AS(contains(other, square()), ValidationError);
}

TEST_CASE("fm_eliminate soundness on sampled points and order insensitivity") {
    Rng rng(77);
    for (int trial = 0; trial < 3; ++trial) {
        auto s = random_system({"x", "y", "z", "w"}, 5, rng);
        if (!feasible(s)) continue;
        auto proj = fm_eliminate(s, {"z", "w"});
        auto proj2 = fm_eliminate(s, {"w", "z"});
        CHECK(polytope_equal(proj, proj2));
        // bounding box of the projection
        Rational lo[2], hi[2];
        const char* names[2] = {"x", "y"};
        for (int k = 0; k < 2; ++k) {
            hi[k] = lp_max(proj, {{names[k], R(1)}}).value;
            lo[k] = -lp_max(proj, {{names[k], R(-1)}}).value;
        }
        int inside = 0, outside = 0;
        std::uniform_int_distribution<int> u(0, 1024);
        for (int it = 0; it < 20000 && (inside < 200 || outside < 200); ++it) {
            Point p;
            for (int k = 0; k < 2; ++k) {
                Rational span = hi[k] - lo[k] + R(1);
                p[names[k]] = lo[k] - R(1, 2) + span * R(u(rng), 1024);
            }
            bool in = satisfies(proj, p);
            if (in && inside >= 200) continue;
            if (!in && outside >= 200) continue;
            bool lifts = feasible(fix_variables(s, p));
            CHECK(lifts == in);
            (in ? inside : outside)++;
        }
        CHECK(inside == 200);
        CHECK(outside == 200);
    }
}

TEST_CASE("text serialization round trip") {
    InequalitySystem s = triangle();
    s.add_le({{"x", R(3, 2)}, {"y", R(-1, 3)}}, R(-1, 4), "cut");
    std::string text = to_text(s);
    auto back = parse_system(text);
    CHECK(to_text(back) == text);
    CHECK(back.inequalities.back().tag == "cut");
    CHECK(polytope_equal(back, s));
    CHECK_THROWS_AS(parse_system("vars: x\nx + q <= 1\n"), ValidationError);
    CHECK_THROWS_AS(parse_system("x <= 1\n"), ValidationError);
}
