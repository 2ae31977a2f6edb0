#include "qbc/polyhedra.hpp"

#include "qbc/hermitian.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <sstream>

namespace qbc {

Rational quantize(double value) {
    if (!std::isfinite(value)) throw ValidationError("quantize: non-finite value");
    double scaled = std::nearbyint(std::ldexp(value, kQuantizationBits));
    if (std::abs(scaled) >= 9007199254740992.0) throw ValidationError("quantize: value out of range");
    Rational r(static_cast<long long>(scaled));
    return r / Rational(boost::multiprecision::mpz_int(1) << kQuantizationBits);
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::string to_string(const Rational& r) { return r.str(); }

Rational parse_rational(const std::string& raw) {
    std::string t;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    if (t.empty()) throw ValidationError("parse_rational: empty literal");
    try {
        auto dot = t.find('.');
        if (dot == std::string::npos && t.find_first_of("eE") == std::string::npos) {
            if (t.find_first_not_of("0123456789+-/") != std::string::npos) throw ValidationError("parse_rational: bad literal " + raw);
            // strip leading zeros of numerator and denominator
            auto slash = t.find('/');
            auto strip = [](std::string x) {
                bool neg = !x.empty() && (x[0] == '-' || x[0] == '+');
                std::string sign = neg && x[0] == '-' ? "-" : "";
                if (neg) x = x.substr(1);
                if (x.empty()) throw ValidationError("parse_rational: bad literal");
                x.erase(0, std::min(x.find_first_not_of('0'), x.size() - 1));
                return sign + x;
            };
            if (slash == std::string::npos) return Rational(boost::multiprecision::mpz_int(strip(t)));
            boost::multiprecision::mpz_int den(strip(t.substr(slash + 1)));
            if (den == 0) throw ValidationError("parse_rational: zero denominator");
            return Rational(boost::multiprecision::mpz_int(strip(t.substr(0, slash))), den);
        }
        if (t.find_first_of("eE") != std::string::npos) throw ValidationError("parse_rational: exponent form unsupported");
        bool neg = !t.empty() && t[0] == '-';
        std::string digits = t.substr(neg || t[0] == '+' ? 1 : 0);
        dot = digits.find('.');
        std::string ip = digits.substr(0, dot), fp = digits.substr(dot + 1);
        if ((ip + fp).empty() || (ip + fp).find_first_not_of("0123456789") != std::string::npos) throw ValidationError("parse_rational: bad literal " + raw);
        std::string all = ip + fp;
        all.erase(0, std::min(all.find_first_not_of('0'), all.size() - 1));  // a leading 0 would read as octal
        boost::multiprecision::mpz_int num(all);
        boost::multiprecision::mpz_int den = boost::multiprecision::pow(boost::multiprecision::mpz_int(10),
                                                                        static_cast<unsigned>(fp.size()));
        Rational r(num, den);
        return neg ? Rational(-r) : r;
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception&) {
        throw ValidationError("parse_rational: bad literal " + raw);
    }
}

bool LinearInequality::is_tautology() const {
    for (const auto& [v, c] : coeffs)
        if (c != 0) return false;
    return true;
}

Rational LinearInequality::coeff(const std::string& v) const {
    auto it = coeffs.find(v);
    return it == coeffs.end() ? Rational(0) : it->second;
}

void InequalitySystem::add_variable(const std::string& v) {
    if (!has_variable(v)) variables.push_back(v);
}

bool InequalitySystem::has_variable(const std::string& v) const {
    return std::find(variables.begin(), variables.end(), v) != variables.end();
}

void InequalitySystem::add(LinearInequality ineq) {
    for (const auto& [v, c] : ineq.coeffs)
        if (!has_variable(v)) throw ValidationError("inequality references undeclared variable " + v);
    inequalities.push_back(std::move(ineq));
}

void InequalitySystem::add_le(std::map<std::string, Rational> coeffs, Rational rhs, std::string tag) {
    add({std::move(coeffs), std::move(rhs), std::move(tag)});
}

void InequalitySystem::add_ge(std::map<std::string, Rational> coeffs, Rational rhs, std::string tag) {
    for (auto& [v, c] : coeffs) c = -c;
    add({std::move(coeffs), -rhs, std::move(tag)});
}

void InequalitySystem::add_eq(std::map<std::string, Rational> coeffs, Rational rhs, std::string tag) {
    add_le(coeffs, rhs, tag);
    add_ge(std::move(coeffs), std::move(rhs), std::move(tag));
}

void InequalitySystem::add_nonnegativity(const std::vector<std::string>& vars) {
    for (const auto& v : vars) add_ge({{v, Rational(1)}}, Rational(0), "nonnegativity");
}

void InequalitySystem::validate() const {
    std::set<std::string> seen;
    for (const auto& v : variables)
        if (!seen.insert(v).second) throw ValidationError("duplicate variable " + v);
    for (const auto& q : inequalities)
        for (const auto& [v, c] : q.coeffs)
            if (!seen.count(v)) throw ValidationError("inequality references undeclared variable " + v);
}

bool satisfies(const InequalitySystem& s, const Point& p) {
    if (s.infeasible) return false;
    for (const auto& q : s.inequalities) {
        Rational lhs = 0;
        for (const auto& [v, c] : q.coeffs) {
            auto it = p.find(v);
            if (it == p.end()) throw ValidationError("satisfies: point lacks variable " + v);
            lhs += c * it->second;
        }
        if (lhs > q.rhs) return false;
    }
    return true;
}

namespace {

using Row = std::vector<Rational>;

// Dense tableau simplex for max c.y, A y = b, y >= 0, b >= 0.
class Simplex {
public:
    Simplex(std::vector<Row> a, Row b, int structural) : m_(static_cast<int>(a.size())), n_(structural) {
        // columns: structural, then one artificial per row, then rhs
        cols_ = n_ + m_;
        t_.assign(m_, Row(cols_ + 1, Rational(0)));
        basis_.resize(m_);
        for (int i = 0; i < m_; ++i) {
            for (int j = 0; j < n_; ++j) t_[i][j] = a[i][j];
            t_[i][n_ + i] = 1;
            t_[i][cols_] = b[i];
            basis_[i] = n_ + i;
        }
    }

    enum class Outcome { optimal, unbounded, infeasible };

    Outcome solve(const Row& c) {
        Row c1(cols_, Rational(0));
        for (int j = n_; j < cols_; ++j) c1[j] = -1;
        run(c1, true);
        if (obj_[cols_] < 0) return Outcome::infeasible;
        drive_out_artificials();
        Row c2(cols_, Rational(0));
        for (int j = 0; j < n_; ++j) c2[j] = c[j];
        return run(c2, false) ? Outcome::optimal : Outcome::unbounded;
    }

    Rational value() const { return obj_[cols_]; }

    Row primal() const {
        Row y(n_, Rational(0));
        for (int i = 0; i < m_; ++i)
            if (basis_[i] < n_) y[basis_[i]] = t_[i][cols_];
        return y;
    }

private:
    int m_, n_, cols_;
    std::vector<Row> t_;
    std::vector<int> basis_;
    Row obj_;

    void reset_objective(const Row& c) {
        obj_.assign(cols_ + 1, Rational(0));
        for (int j = 0; j < cols_; ++j) obj_[j] = -c[j];
        for (int i = 0; i < m_; ++i) {
            const Rational& cb = c[basis_[i]];
            if (cb == 0) continue;
            for (int j = 0; j <= cols_; ++j)
                if (t_[i][j] != 0) obj_[j] += cb * t_[i][j];
        }
    }

    void pivot(int r, int col) {
        Rational p = t_[r][col];
        for (int j = 0; j <= cols_; ++j)
            if (t_[r][j] != 0) t_[r][j] /= p;
        auto eliminate = [&](Row& row) {
            Rational f = row[col];
            if (f == 0) return;
            for (int j = 0; j <= cols_; ++j)
                if (t_[r][j] != 0) row[j] -= f * t_[r][j];
        };
        for (int i = 0; i < m_; ++i)
            if (i != r) eliminate(t_[i]);
        eliminate(obj_);
        basis_[r] = col;
    }

    // Returns false when unbounded. Artificial columns may enter only in phase one.
    bool run(const Row& c, bool phase_one) {
        reset_objective(c);
        const int limit = phase_one ? cols_ : n_;
        while (true) {
            int enter = -1;
            for (int j = 0; j < limit; ++j)
                if (obj_[j] < 0) {
                    enter = j;
                    break;
                }
            if (enter < 0) return true;
            int leave = -1;
            Rational best;
            for (int i = 0; i < m_; ++i) {
                if (t_[i][enter] <= 0) continue;
                Rational ratio = t_[i][cols_] / t_[i][enter];
                if (leave < 0 || ratio < best || (ratio == best && basis_[i] < basis_[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
    }

    void drive_out_artificials() {
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < n_) continue;
            for (int j = 0; j < n_; ++j)
                if (t_[i][j] != 0) {
                    pivot(i, j);
                    break;
                }
            // otherwise the row is redundant; its artificial stays basic at zero
        }
        // forbid artificials from re-entering by zeroing their columns in non-basic position
        for (int j = n_; j < cols_; ++j) {
            bool basic = false;
            for (int i = 0; i < m_; ++i) basic |= basis_[i] == j;
            if (!basic)
                for (int i = 0; i < m_; ++i) t_[i][j] = 0;
        }
    }
};

std::string coeff_key(const std::map<std::string, Rational>& c) {
    std::string k;
    for (const auto& [v, x] : c) {
        k += v;
        k += '=';
        k += x.str();
        k += ';';
    }
    return k;
}

InequalitySystem infeasible_marker(const std::vector<std::string>& vars) {
    InequalitySystem out;
    out.variables = vars;
    out.infeasible = true;
    out.inequalities.push_back({{}, Rational(-1), "infeasible"});
    return out;
}

std::map<std::string, Rational> negate(const std::map<std::string, Rational>& c) {
    std::map<std::string, Rational> out;
    for (const auto& [v, x] : c) out[v] = -x;
    return out;
}

std::atomic<int> g_lp_calls{0};

}  // namespace

LpResult lp_max(const InequalitySystem& s, const std::map<std::string, Rational>& objective) {
    ++g_lp_calls;
    LpResult res;
    if (s.infeasible) return res;
    for (const auto& [v, c] : objective)
        if (!s.has_variable(v) && c != 0) throw ValidationError("lp_max: objective references unknown variable " + v);
    const int n = static_cast<int>(s.variables.size());
    const int m = static_cast<int>(s.inequalities.size());
    std::map<std::string, int> idx;
    for (int j = 0; j < n; ++j) idx[s.variables[j]] = j;
    // y = (x+, x-, slack)
    const int structural = 2 * n + m;
    std::vector<Row> a(m, Row(structural, Rational(0)));
    Row b(m);
    for (int i = 0; i < m; ++i) {
        const auto& q = s.inequalities[i];
        bool flip = q.rhs < 0;
        for (const auto& [v, c] : q.coeffs) {
            auto it = idx.find(v);
            if (it == idx.end()) throw ValidationError("lp_max: undeclared variable " + v);
            a[i][it->second] = flip ? Rational(-c) : c;
            a[i][n + it->second] = flip ? c : Rational(-c);
        }
        a[i][2 * n + i] = flip ? -1 : 1;
        b[i] = flip ? Rational(-q.rhs) : q.rhs;
    }
    Row c(structural, Rational(0));
    for (const auto& [v, x] : objective) {
        if (x == 0) continue;
        c[idx.at(v)] = x;
        c[n + idx.at(v)] = -x;
    }
    Simplex sx(std::move(a), std::move(b), structural);
    auto out = sx.solve(c);
    if (out == Simplex::Outcome::infeasible) return res;
    Row y = sx.primal();
    for (int j = 0; j < n; ++j) res.point[s.variables[j]] = y[j] - y[n + j];
    if (out == Simplex::Outcome::unbounded) {
        res.status = LpResult::Status::unbounded;
        return res;
    }
    res.status = LpResult::Status::optimal;
    res.value = sx.value();
    return res;
}

bool feasible(const InequalitySystem& s) { return lp_max(s, {}).status != LpResult::Status::infeasible; }

InequalitySystem fix_variables(const InequalitySystem& s, const Point& values) {
    InequalitySystem out;
    out.infeasible = s.infeasible;
    for (const auto& v : s.variables)
        if (!values.count(v)) out.variables.push_back(v);
    for (const auto& q : s.inequalities) {
        LinearInequality r{{}, q.rhs, q.tag};
        for (const auto& [v, c] : q.coeffs) {
            auto it = values.find(v);
            if (it != values.end())
                r.rhs -= c * it->second;
            else
                r.coeffs[v] = c;
        }
        out.inequalities.push_back(std::move(r));
    }
    return out;
}

InequalitySystem substitute(const InequalitySystem& s, const std::string& v, const std::map<std::string, Rational>& expr,
                            const Rational& constant) {
    if (!s.has_variable(v)) throw ValidationError("substitute: unknown variable " + v);
    InequalitySystem out;
    out.infeasible = s.infeasible;
    for (const auto& w : s.variables)
        if (w != v) out.variables.push_back(w);
    for (const auto& [w, c] : expr) {
        if (w == v) throw ValidationError("substitute: expression references the substituted variable");
        out.add_variable(w);
    }
    for (const auto& q : s.inequalities) {
        LinearInequality r = q;
        auto it = r.coeffs.find(v);
        if (it != r.coeffs.end()) {
            Rational c = it->second;
            r.coeffs.erase(it);
            for (const auto& [w, e] : expr) r.coeffs[w] += c * e;
            r.rhs -= c * constant;
        }
        out.inequalities.push_back(std::move(r));
    }
    return out;
}

InequalitySystem rename_variables(const InequalitySystem& s, const std::map<std::string, std::string>& names) {
    auto map = [&](const std::string& v) {
        auto it = names.find(v);
        return it == names.end() ? v : it->second;
    };
    InequalitySystem out;
    out.infeasible = s.infeasible;
    for (const auto& v : s.variables) out.add_variable(map(v));
    for (const auto& q : s.inequalities) {
        LinearInequality r{{}, q.rhs, q.tag};
        for (const auto& [v, c] : q.coeffs) r.coeffs[map(v)] += c;
        out.inequalities.push_back(std::move(r));
    }
    return out;
}

InequalitySystem normalize(const InequalitySystem& s) {
    if (s.infeasible) return infeasible_marker(s.variables);
    InequalitySystem out;
    out.variables = s.variables;
    std::map<std::string, std::size_t> seen;
    for (const auto& q : s.inequalities) {
        LinearInequality r{{}, q.rhs, q.tag};
        for (const auto& [v, c] : q.coeffs)
            if (c != 0) r.coeffs[v] = c;
        if (r.coeffs.empty()) {
            if (r.rhs < 0) return infeasible_marker(s.variables);
            continue;
        }
        // scale so the largest absolute coefficient is 1
        Rational scale = 0;
        for (const auto& [v, c] : r.coeffs) scale = std::max(scale, Rational(abs(c)));
        for (auto& [v, c] : r.coeffs) c /= scale;
        r.rhs /= scale;
        std::string key = coeff_key(r.coeffs);
        auto it = seen.find(key);
        if (it == seen.end()) {
            seen[key] = out.inequalities.size();
            out.inequalities.push_back(std::move(r));
        } else if (r.rhs < out.inequalities[it->second].rhs) {
            out.inequalities[it->second] = std::move(r);
        }
    }
    return out;
}

InequalitySystem remove_redundant(const InequalitySystem& in) {
    InequalitySystem s = normalize(in);
    if (s.infeasible) return s;
    if (!feasible(s)) return infeasible_marker(s.variables);
    std::vector<bool> keep(s.inequalities.size(), true);
    for (std::size_t i = 0; i < s.inequalities.size(); ++i) {
        InequalitySystem rest;
        rest.variables = s.variables;
        for (std::size_t j = 0; j < s.inequalities.size(); ++j)
            if (j != i && keep[j]) rest.inequalities.push_back(s.inequalities[j]);
        auto r = lp_max(rest, s.inequalities[i].coeffs);
        if (r.status == LpResult::Status::optimal && r.value <= s.inequalities[i].rhs) keep[i] = false;
    }
    InequalitySystem out;
    out.variables = s.variables;
    for (std::size_t i = 0; i < s.inequalities.size(); ++i)
        if (keep[i]) out.inequalities.push_back(s.inequalities[i]);
    return out;
}

InequalitySystem fm_eliminate(const InequalitySystem& in, const std::vector<std::string>& drop, FmStats* stats) {
    in.validate();
    for (const auto& v : drop)
        if (!in.has_variable(v)) throw ValidationError("fm_eliminate: unknown variable " + v);
    const int lp_before = g_lp_calls;
    InequalitySystem cur = normalize(in);
    for (const auto& v : drop) {
        std::vector<std::string> vars;
        for (const auto& w : cur.variables)
            if (w != v) vars.push_back(w);
        if (cur.infeasible) {
            cur = infeasible_marker(vars);
            continue;
        }
        InequalitySystem next;
        next.variables = vars;
        // an equality pair containing v allows exact substitution
        int eq_i = -1, eq_j = -1;
        for (std::size_t i = 0; i < cur.inequalities.size() && eq_i < 0; ++i) {
            const auto& qi = cur.inequalities[i];
            if (qi.coeff(v) == 0) continue;
            auto neg = negate(qi.coeffs);
            for (std::size_t j = i + 1; j < cur.inequalities.size(); ++j) {
                const auto& qj = cur.inequalities[j];
                if (qj.rhs == -qi.rhs && qj.coeffs == neg) {
                    eq_i = static_cast<int>(i);
                    eq_j = static_cast<int>(j);
                    break;
                }
            }
        }
        if (eq_i >= 0) {
            const auto& e = cur.inequalities[eq_i];
            Rational av = e.coeff(v);
            std::map<std::string, Rational> expr;
            for (const auto& [w, c] : e.coeffs)
                if (w != v) expr[w] = -c / av;
            Rational constant = e.rhs / av;
            InequalitySystem rest;
            rest.variables = cur.variables;
            for (int i = 0; i < static_cast<int>(cur.inequalities.size()); ++i)
                if (i != eq_i && i != eq_j) rest.inequalities.push_back(cur.inequalities[i]);
            next = substitute(rest, v, expr, constant);
            next.variables = vars;
        } else {
            std::vector<const LinearInequality*> pos, neg;
            for (const auto& q : cur.inequalities) {
                Rational c = q.coeff(v);
                if (c > 0)
                    pos.push_back(&q);
                else if (c < 0)
                    neg.push_back(&q);
                else
                    next.inequalities.push_back(q);
            }
            for (const auto* p : pos)
                for (const auto* n : neg) {
                    Rational cp = p->coeff(v), cn = -n->coeff(v);
                    LinearInequality r{{}, p->rhs / cp + n->rhs / cn, "fm"};
                    for (const auto& [w, c] : p->coeffs)
                        if (w != v) r.coeffs[w] += c / cp;
                    for (const auto& [w, c] : n->coeffs)
                        if (w != v) r.coeffs[w] += c / cn;
                    next.inequalities.push_back(std::move(r));
                }
        }
        if (stats) {
            ++stats->steps;
            stats->max_intermediate = std::max(stats->max_intermediate, static_cast<int>(next.inequalities.size()));
        }
        cur = remove_redundant(next);
    }
    if (stats) stats->lp_calls += g_lp_calls - lp_before;
    return cur;
}

namespace {

void require_same_variables(const InequalitySystem& a, const InequalitySystem& b) {
    std::set<std::string> va(a.variables.begin(), a.variables.end()), vb(b.variables.begin(), b.variables.end());
    if (va != vb) throw ValidationError("polytope comparison: variable sets differ");
}

}  // namespace

bool is_bounded(const InequalitySystem& s) {
    if (s.infeasible) return true;
    for (const auto& v : s.variables)
        for (int sign : {1, -1}) {
            auto r = lp_max(s, {{v, Rational(sign)}});
            if (r.status == LpResult::Status::unbounded) return false;
        }
    return true;
}

bool contains(const InequalitySystem& a, const InequalitySystem& b) {
    require_same_variables(a, b);
    if (!is_bounded(a) || !is_bounded(b)) throw ValidationError("polytope comparison: unbounded system");
    if (a.infeasible || !feasible(a)) return true;
    if (b.infeasible) return false;
    for (const auto& q : b.inequalities) {
        auto r = lp_max(a, q.coeffs);
        if (r.status != LpResult::Status::optimal || r.value > q.rhs) return false;
    }
    return true;
}

bool polytope_equal(const InequalitySystem& a, const InequalitySystem& b) { return contains(a, b) && contains(b, a); }

std::string to_text(const InequalitySystem& s) {
    std::ostringstream os;
    os << "vars:";
    for (const auto& v : s.variables) os << ' ' << v;
    os << '\n';
    if (s.infeasible) {
        os << "infeasible\n";
        return os.str();
    }
    for (const auto& q : s.inequalities) {
        bool first = true;
        for (const auto& v : s.variables) {
            Rational c = q.coeff(v);
            if (c == 0) continue;
            if (first)
                os << (c < 0 ? "-" : "");
            else
                os << (c < 0 ? " - " : " + ");
            os << Rational(abs(c)).str() << '*' << v;
            first = false;
        }
        if (first) os << '0';
        os << " <= " << q.rhs.str();
        if (!q.tag.empty()) os << " # " << q.tag;
        os << '\n';
    }
    return os.str();
}

InequalitySystem parse_system(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    InequalitySystem s;
    int lineno = 0;
    bool header = false;
    auto fail = [&](const std::string& msg) {
        throw ValidationError("parse_system: line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(is, line)) {
        ++lineno;
        auto trim = [](std::string x) {
            auto b = x.find_first_not_of(" \t\r");
            auto e = x.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : x.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        if (!header) {
            if (line.rfind("vars:", 0) != 0) fail("expected 'vars:' header");
            std::istringstream vs(line.substr(5));
            std::string v;
            while (vs >> v) s.add_variable(v);
            header = true;
            continue;
        }
        if (line == "infeasible") {
            s = infeasible_marker(s.variables);
            continue;
        }
        std::string tag;
        auto hash = line.find('#');
        if (hash != std::string::npos) {
            tag = trim(line.substr(hash + 1));
            line = trim(line.substr(0, hash));
        }
        auto le = line.find("<=");
        if (le == std::string::npos) fail("missing '<='");
        std::string lhs = line.substr(0, le), rhs = line.substr(le + 2);
        LinearInequality q;
        q.tag = tag;
        try {
            q.rhs = parse_rational(rhs);
        } catch (const ValidationError& e) {
            fail(e.what());
        }
        // split lhs into signed terms
        std::vector<std::string> terms;
        std::string cur;
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            char c = lhs[i];
            if ((c == '+' || c == '-') && !trim(cur).empty()) {
                terms.push_back(trim(cur));
                cur.clear();
            }
            if (c != ' ') cur += c;
        }
        if (!trim(cur).empty()) terms.push_back(trim(cur));
        for (auto term : terms) {
            if (term == "0") continue;
            Rational sign = 1;
            if (term[0] == '+' || term[0] == '-') {
                if (term[0] == '-') sign = -1;
                term = term.substr(1);
            }
            Rational coef = 1;
            std::string var = term;
            auto star = term.find('*');
            if (star != std::string::npos) {
                try {
                    coef = parse_rational(term.substr(0, star));
                } catch (const ValidationError& e) {
                    fail(e.what());
                }
                var = term.substr(star + 1);
            }
            if (!s.has_variable(var)) fail("undeclared variable " + var);
            q.coeffs[var] += sign * coef;
        }
        s.inequalities.push_back(std::move(q));
    }
    if (!header) throw ValidationError("parse_system: empty input");
    return s;
}

}  // namespace qbc
