#include "qbc/io.hpp"

#include "qbc/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qbc {

#ifndef QBC_VERSION
#define QBC_VERSION "0.0.0"
#endif

const char* version() { return QBC_VERSION; }

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError(path + ": cannot open file");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError(path + ": cannot write file");
    out << text;
}

namespace {

const Json& field(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw InputError(path + ": expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw InputError(path + "." + key + ": missing");
    return *it;
}

int int_of(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) throw InputError(path + ": expected an integer");
    return j.get<int>();
}

double number_of(const Json& j, const std::string& path) {
    if (!j.is_number()) throw InputError(path + ": expected a number");
    return j.get<double>();
}

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

std::vector<ClassicalRegister> registers_from(const Json& j, const std::string& path) {
    if (!j.is_array()) throw InputError(path + ": expected an array");
    std::vector<ClassicalRegister> regs;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = at(path, i);
        ClassicalRegister r;
        const Json& name = field(j[i], "name", p);
        if (!name.is_string()) throw InputError(p + ".name: expected a string");
        r.name = name.get<std::string>();
        r.size = int_of(field(j[i], "size", p), p + ".size");
        if (r.size < 1) throw InputError(p + ".size: must be >= 1");
        for (const auto& q : regs)
            if (q.name == r.name) throw InputError(p + ".name: duplicate register '" + r.name + "'");
        regs.push_back(r);
    }
    return regs;
}

std::vector<double> pmf_from(const Json& j, const std::string& path, std::size_t expected, double tol) {
    if (!j.is_array()) throw InputError(path + ": expected an array");
    if (j.size() != expected)
        throw InputError(path + ": expected " + std::to_string(expected) + " entries, got " + std::to_string(j.size()));
    std::vector<double> p;
    double total = 0;
    for (std::size_t i = 0; i < j.size(); ++i) {
        double v = number_of(j[i], at(path, i));
        if (v < 0) throw InputError(at(path, i) + ": negative probability");
        p.push_back(v);
        total += v;
    }
    if (std::abs(total - 1.0) > tol) throw InputError(path + ": probabilities sum to " + std::to_string(total));
    return p;
}

Json registers_to_json(const std::vector<ClassicalRegister>& regs) {
    Json out = Json::array();
    for (const auto& r : regs) out.push_back({{"name", r.name}, {"size", r.size}});
    return out;
}

}  // namespace

Mat matrix_from_json(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw InputError(path + ": expected a nonempty array of rows");
    const std::size_t n = j.size();
    Mat m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        const std::string pr = at(path, r);
        if (!j[r].is_array() || j[r].size() != n)
            throw InputError(pr + ": expected a row of " + std::to_string(n) + " entries");
        for (std::size_t c = 0; c < n; ++c) {
            const Json& e = j[r][c];
            const std::string pe = at(pr, c);
            if (e.is_number()) {
                m(r, c) = {e.get<double>(), 0.0};
            } else if (e.is_array() && e.size() == 2) {
                m(r, c) = {number_of(e[0], at(pe, 0)), number_of(e[1], at(pe, 1))};
            } else {
                throw InputError(pe + ": expected a number or an [re, im] pair");
            }
        }
    }
    return m;
}

Json matrix_to_json(const Mat& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(row);
    }
    return rows;
}

void check_density(const Mat& m, const std::string& path, double tol) {
    const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (asym > tol) throw InputError(path + ": not Hermitian (max asymmetry " + std::to_string(asym) + ")");
    const double tr = m.trace().real();
    if (std::abs(tr - 1.0) > tol) throw InputError(path + ": trace " + std::to_string(tr) + " is not 1");
    const double me = min_eigenvalue(hermitize(m));
    if (me < -tol) throw InputError(path + ": not positive semidefinite (min eigenvalue " + std::to_string(me) + ")");
}

BroadcastChannel channel_from_json(const Json& j, double tol) {
    const std::string root = "channel";
    BroadcastChannel ch;
    const Json& dims = field(j, "dims", root);
    if (!dims.is_array() || dims.empty()) throw InputError(root + ".dims: expected a nonempty array");
    int total = 1;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        int d = int_of(dims[i], at(root + ".dims", i));
        if (d < 1) throw InputError(at(root + ".dims", i) + ": must be >= 1");
        ch.dims.push_back(d);
        total *= d;
    }
    const bool joint = j.contains("outputs"), product = j.contains("product");
    if (joint == product) throw InputError(root + ": exactly one of 'outputs' or 'product' is required");
    if (joint) {
        const Json& outs = j["outputs"];
        if (!outs.is_array() || outs.empty()) throw InputError(root + ".outputs: expected a nonempty array");
        for (std::size_t x = 0; x < outs.size(); ++x) {
            const std::string p = at(root + ".outputs", x);
            Mat m = matrix_from_json(outs[x], p);
            if (m.rows() != total) throw InputError(p + ": dimension " + std::to_string(m.rows()) + ", expected " +
                                                    std::to_string(total));
            check_density(m, p, tol);
            ch.outputs.push_back(m);
        }
    } else {
        const Json& outs = j["product"];
        if (!outs.is_array() || outs.empty()) throw InputError(root + ".product: expected a nonempty array");
        for (std::size_t x = 0; x < outs.size(); ++x) {
            const std::string p = at(root + ".product", x);
            if (!outs[x].is_array() || outs[x].size() != ch.dims.size())
                throw InputError(p + ": expected one matrix per receiver");
            std::vector<Mat> parts;
            for (std::size_t k = 0; k < ch.dims.size(); ++k) {
                Mat m = matrix_from_json(outs[x][k], at(p, k));
                if (m.rows() != ch.dims[k]) throw InputError(at(p, k) + ": dimension does not match dims");
                check_density(m, at(p, k), tol);
                parts.push_back(m);
            }
            ch.outputs.push_back(kron(parts));
        }
    }
    ch.input_size = static_cast<int>(ch.outputs.size());
    if (j.contains("input_size") && int_of(j["input_size"], root + ".input_size") != ch.input_size)
        throw InputError(root + ".input_size: does not match the number of outputs");
    return ch;
}

Json channel_to_json(const BroadcastChannel& ch) {
    Json outs = Json::array();
    for (const auto& m : ch.outputs) outs.push_back(matrix_to_json(m));
    return {{"dims", ch.dims}, {"outputs", outs}};
}

DistributionWithMap distribution_from_json(const Json& j, double tol) {
    const std::string root = "distribution";
    DistributionWithMap d;
    d.dist.registers = registers_from(field(j, "registers", root), root + ".registers");
    std::size_t n = 1;
    for (const auto& r : d.dist.registers) n *= static_cast<std::size_t>(r.size);
    d.dist.pmf = pmf_from(field(j, "pmf", root), root + ".pmf", n, tol);
    if (j.contains("xmap")) {
        const Json& xm = j["xmap"];
        if (!xm.is_array() || xm.size() != n)
            throw InputError(root + ".xmap: expected " + std::to_string(n) + " entries");
        for (std::size_t i = 0; i < n; ++i) {
            int x = int_of(xm[i], at(root + ".xmap", i));
            if (x < 0) throw InputError(at(root + ".xmap", i) + ": negative input symbol");
            d.xmap.push_back(x);
        }
    } else {
        std::string xr = "X";
        if (j.contains("x_register")) {
            if (!j["x_register"].is_string()) throw InputError(root + ".x_register: expected a string");
            xr = j["x_register"].get<std::string>();
        }
        bool found = false;
        for (const auto& r : d.dist.registers) found = found || r.name == xr;
        if (!found) throw InputError(root + ": no 'xmap' and no register named '" + xr + "'");
        d.xmap = register_map(d.dist, xr);
    }
    return d;
}

Json distribution_to_json(const DistributionWithMap& d) {
    return {{"registers", registers_to_json(d.dist.registers)}, {"pmf", d.dist.pmf}, {"xmap", d.xmap}};
}

CqState cqstate_from_json(const Json& j, double tol) {
    const std::string root = "cqstate";
    if (j.is_object() && j.contains("state")) {
        Mat m = matrix_from_json(j["state"], root + ".state");
        check_density(m, root + ".state", tol);
        return make_cq({}, {1.0}, {m});
    }
    auto regs = registers_from(field(j, "registers", root), root + ".registers");
    std::size_t n = 1;
    for (const auto& r : regs) n *= static_cast<std::size_t>(r.size);
    auto pmf = pmf_from(field(j, "pmf", root), root + ".pmf", n, tol);
    const Json& st = field(j, "states", root);
    if (!st.is_array() || st.size() != n) throw InputError(root + ".states: expected " + std::to_string(n) + " matrices");
    std::vector<Mat> cond;
    for (std::size_t t = 0; t < n; ++t) {
        Mat m = matrix_from_json(st[t], at(root + ".states", t));
        if (!cond.empty() && m.rows() != cond.front().rows())
            throw InputError(at(root + ".states", t) + ": dimension differs from the first state");
        check_density(m, at(root + ".states", t), tol);
        cond.push_back(m);
    }
    return make_cq(regs, pmf, cond);
}

Json rational_to_json(const Rational& r) { return to_string(r); }

Json system_to_json(const InequalitySystem& s) {
    Json ineqs = Json::array();
    for (const auto& q : s.inequalities) {
        Json coeffs = Json::object();
        for (const auto& [v, c] : q.coeffs)
            if (c != 0) coeffs[v] = rational_to_json(c);
        ineqs.push_back({{"coeffs", coeffs}, {"rhs", rational_to_json(q.rhs)}, {"tag", q.tag}});
    }
    return {{"variables", s.variables}, {"inequalities", ineqs}, {"infeasible", s.infeasible}};
}

Json atoms_to_json(const std::vector<AtomValue>& atoms) {
    Json out = Json::array();
    for (const auto& a : atoms)
        out.push_back({{"atom", a.expr.key()}, {"value", a.value}, {"rational", rational_to_json(a.rational)}});
    return out;
}

std::vector<Point> polygon_vertices(const InequalitySystem& s) {
    if (s.variables.size() != 2) throw ValidationError("polygon_vertices: system must have exactly two variables");
    if (s.infeasible || !feasible(s)) return {};
    if (!is_bounded(s)) throw ValidationError("polygon_vertices: system is unbounded");
    const std::string& x = s.variables[0];
    const std::string& y = s.variables[1];
    std::vector<Point> pts;
    const auto& q = s.inequalities;
    for (std::size_t i = 0; i < q.size(); ++i)
        for (std::size_t k = i + 1; k < q.size(); ++k) {
            const Rational a = q[i].coeff(x), b = q[i].coeff(y), c = q[k].coeff(x), d = q[k].coeff(y);
            const Rational det = a * d - b * c;
            if (det == 0) continue;
            Point p{{x, (q[i].rhs * d - b * q[k].rhs) / det}, {y, (a * q[k].rhs - q[i].rhs * c) / det}};
            if (!satisfies(s, p)) continue;
            if (std::find(pts.begin(), pts.end(), p) == pts.end()) pts.push_back(p);
        }
    if (pts.size() < 3) {
        std::sort(pts.begin(), pts.end(), [&](const Point& u, const Point& v) {
            return u.at(x) != v.at(x) ? u.at(x) < v.at(x) : u.at(y) < v.at(y);
        });
        return pts;
    }
    // counter-clockwise around the exact centroid of the vertex set, starting at the lowest-leftmost point
    Rational cx = 0, cy = 0;
    for (const auto& p : pts) {
        cx += p.at(x);
        cy += p.at(y);
    }
    cx /= static_cast<long>(pts.size());
    cy /= static_cast<long>(pts.size());
    auto angle = [&](const Point& p) { return std::atan2(to_double(p.at(y) - cy), to_double(p.at(x) - cx)); };
    auto start = *std::min_element(pts.begin(), pts.end(), [&](const Point& u, const Point& v) {
        return u.at(y) != v.at(y) ? u.at(y) < v.at(y) : u.at(x) < v.at(x);
    });
    const double a0 = angle(start);
    auto rel = [&](const Point& p) {
        double t = angle(p) - a0;
        while (t < 0) t += 2 * M_PI;
        return p == start ? 0.0 : t;
    };
    std::sort(pts.begin(), pts.end(), [&](const Point& u, const Point& v) { return rel(u) < rel(v); });
    return pts;
}

}  // namespace qbc
