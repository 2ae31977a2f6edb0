#include "qbc/rate_region.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <future>
#include <set>
#include <sstream>

namespace qbc {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_names(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',') {
            std::string t = trim(cur);
            if (!t.empty()) out.push_back(t);
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

bool is_receiver_name(const std::string& s) {
    return s.size() >= 2 && s[0] == 'B' &&
           std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::string join(const std::vector<std::string>& v, const char* sep = ",") {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
    return out;
}

std::string format_order(double a) {
    std::ostringstream os;
    os.precision(17);
    os << a;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------- atoms

std::string AtomExpr::key() const {
    std::string head;
    switch (kind) {
        case Kind::shannon_mi: head = "I"; break;
        case Kind::renyi_up: head = "Iup[" + format_order(order) + "]"; break;
        case Kind::renyi_down: head = "Idown[" + format_order(order) + "]"; break;
    }
    std::string r = receiver >= 0 ? "B" + std::to_string(receiver + 1) : join(sorted_unique(right));
    std::string out = head + "(" + join(sorted_unique(left)) + ";" + r;
    if (!cond.empty()) out += "|" + join(sorted_unique(cond));
    return out + ")";
}

AtomExpr parse_atom(const std::string& text) {
    const std::string t = trim(text);
    auto fail = [&](const std::string& why) { return ValidationError("atom '" + t + "': " + why); };
    AtomExpr e;
    std::size_t open = t.find('(');
    if (open == std::string::npos || t.back() != ')') throw fail("expected NAME(...)");
    std::string head = trim(t.substr(0, open));
    if (head == "I") {
        e.kind = AtomExpr::Kind::shannon_mi;
    } else if ((head.rfind("Iup[", 0) == 0 || head.rfind("Idown[", 0) == 0) && head.back() == ']') {
        e.kind = head[1] == 'u' ? AtomExpr::Kind::renyi_up : AtomExpr::Kind::renyi_down;
        std::string num = head.substr(head.find('[') + 1, head.size() - head.find('[') - 2);
        try {
            std::size_t used = 0;
            e.order = std::stod(num, &used);
            if (used != num.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw fail("bad order '" + num + "'");
        }
        if (!(e.order > 0) || e.order == 1.0 || !std::isfinite(e.order)) throw fail("order must be positive and not 1");
    } else {
        throw fail("unknown atom kind '" + head + "'");
    }
    std::string body = t.substr(open + 1, t.size() - open - 2);
    std::size_t semi = body.find(';');
    if (semi == std::string::npos) throw fail("missing ';'");
    std::string rest = body.substr(semi + 1);
    std::size_t bar = rest.find('|');
    e.left = split_names(body.substr(0, semi));
    auto right = split_names(bar == std::string::npos ? rest : rest.substr(0, bar));
    if (bar != std::string::npos) e.cond = split_names(rest.substr(bar + 1));
    if (e.left.empty() || right.empty()) throw fail("empty side");
    if (right.size() == 1 && is_receiver_name(right[0])) {
        e.receiver = std::stoi(right[0].substr(1)) - 1;
        if (e.receiver < 0) throw fail("receivers are numbered from B1");
    } else {
        for (const auto& r : right)
            if (is_receiver_name(r)) throw fail("a receiver cannot be combined with classical registers");
        e.right = right;
    }
    if (e.kind != AtomExpr::Kind::shannon_mi && e.receiver < 0) throw fail("Renyi atoms need a receiver");
    if (e.kind == AtomExpr::Kind::renyi_up && !e.cond.empty()) throw fail("Iup takes no conditioning");
    return e;
}

AtomTable::AtomTable(BroadcastChannel channel, JointDistribution dist, std::vector<int> xmap,
                     std::map<std::string, std::string> aliases, DownOptions down)
    : channel_(std::move(channel)),
      dist_(std::move(dist)),
      xmap_(std::move(xmap)),
      aliases_(std::move(aliases)),
      down_(down) {
    channel_.validate();
    dist_.validate();
    if (static_cast<int>(xmap_.size()) != dist_.num_tuples()) throw ValidationError("map: not total over tuples");
    for (int x : xmap_)
        if (x < 0 || x >= channel_.input_size) throw ValidationError("map: value out of range");
    bool has_x = std::any_of(dist_.registers.begin(), dist_.registers.end(),
                             [](const ClassicalRegister& r) { return r.name == "X"; });
    if (has_x) {
        joint_ = dist_;
        auto direct = register_map(dist_, "X");
        if (direct != xmap_) throw ValidationError("map: X register disagrees with the input map");
    } else {
        joint_.registers = dist_.registers;
        joint_.registers.push_back({"X", channel_.input_size});
        joint_.pmf.assign(static_cast<std::size_t>(dist_.num_tuples()) * channel_.input_size, 0.0);
        for (int t = 0; t < dist_.num_tuples(); ++t)
            joint_.pmf[static_cast<std::size_t>(t) * channel_.input_size + xmap_[t]] = dist_.pmf[t];
    }
}

std::string AtomTable::alias(const std::string& reg) const {
    auto it = aliases_.find(reg);
    return it == aliases_.end() ? reg : it->second;
}

AtomTable AtomTable::with_aliases(std::map<std::string, std::string> aliases) const {
    return AtomTable(channel_, dist_, xmap_, std::move(aliases), down_);
}

AtomExpr AtomTable::resolve(const AtomExpr& e) const {
    AtomExpr r = e;
    auto map_all = [&](std::vector<std::string>& v) {
        for (auto& s : v) s = alias(s);
        v = sorted_unique(v);
    };
    map_all(r.left);
    map_all(r.right);
    map_all(r.cond);
    auto drop_cond = [&](std::vector<std::string>& v) {
        v.erase(std::remove_if(v.begin(), v.end(),
                               [&](const std::string& s) {
                                   return std::find(r.cond.begin(), r.cond.end(), s) != r.cond.end();
                               }),
                v.end());
    };
    drop_cond(r.left);
    drop_cond(r.right);
    return r;
}

const CqState& AtomTable::receiver_state(int receiver) {
    if (receiver < 0 || receiver >= channel_.receivers())
        throw ValidationError("atom: receiver B" + std::to_string(receiver + 1) + " not in channel");
    {
        std::lock_guard<std::mutex> lock(cache_->mu);
        auto it = cache_->states.find(receiver);
        if (it != cache_->states.end()) return *it->second;
    }
    auto st = std::make_unique<CqState>(channel_to_cqstate(channel_, {receiver}, joint_, register_map(joint_, "X")));
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto& slot = cache_->states[receiver];
    if (!slot) slot = std::move(st);
    return *slot;
}

double AtomTable::evaluate(const AtomExpr& e) {
    if (e.left.empty() || (e.receiver < 0 && e.right.empty())) return 0.0;
    for (const auto* side : {&e.left, &e.right, &e.cond})
        for (const auto& r : *side)
            if (std::none_of(joint_.registers.begin(), joint_.registers.end(),
                             [&](const ClassicalRegister& c) { return c.name == r; }))
                throw ValidationError("atom " + e.key() + ": unknown register '" + r + "'");
    if (e.receiver < 0) {
        for (const auto& r : e.right)
            if (std::find(e.left.begin(), e.left.end(), r) != e.left.end())
                throw ValidationError("atom " + e.key() + ": overlapping sides");
        return shannon_mi(classical_state(joint_.registers, joint_.pmf), MiRequest{e.left, e.right, e.cond});
    }
    const CqState& s = receiver_state(e.receiver);
    switch (e.kind) {
        case AtomExpr::Kind::shannon_mi: return shannon_mi(s, MiRequest{e.left, {}, e.cond});
        case AtomExpr::Kind::renyi_up: return renyi_mi_up(s, e.left, e.order, true);
        case AtomExpr::Kind::renyi_down: return renyi_mi_down(s, e.left, e.cond, e.order, down_).value;
    }
    return 0.0;
}

const AtomValue& AtomTable::get(const std::string& expr) { return get(parse_atom(expr)); }

const AtomValue& AtomTable::get(const AtomExpr& expr) {
    const std::string key = expr.key();
    {
        std::lock_guard<std::mutex> lock(cache_->mu);
        auto it = cache_->atoms.find(key);
        if (it != cache_->atoms.end()) return *it->second;
    }
    const AtomExpr resolved = resolve(expr);
    auto v = std::make_unique<AtomValue>();
    v->expr = expr;
    v->value = evaluate(resolved);
    v->rational = quantize(v->value);
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto& slot = cache_->atoms[key];
    if (!slot) slot = std::move(v);
    return *slot;
}

std::vector<AtomValue> AtomTable::entries() const {
    std::lock_guard<std::mutex> lock(cache_->mu);
    std::vector<AtomValue> out;
    for (const auto& [k, v] : cache_->atoms) out.push_back(*v);
    return out;
}

// ---------------------------------------------------------------- Markov

double markov_gap(const JointDistribution& dist, const MarkovChain& chain) {
    auto b = sorted_unique(chain.b);
    auto strip = [&](std::vector<std::string> v) {
        v = sorted_unique(v);
        v.erase(std::remove_if(v.begin(), v.end(),
                               [&](const std::string& s) { return std::binary_search(b.begin(), b.end(), s); }),
                v.end());
        return v;
    };
    auto a = strip(chain.a), c = strip(chain.c);
    if (a.empty() || c.empty()) return 0.0;
    for (const auto& r : a)
        if (std::binary_search(c.begin(), c.end(), r)) throw ValidationError("Markov chain: register '" + r + "' on both ends");
    CqState s = classical_state(dist.registers, dist.pmf);
    auto pa = s.positions(a), pb = s.positions(b), pc = s.positions(c);
    const int na = sub_count(s, pa), nb = sub_count(s, pb), nc = sub_count(s, pc);
    std::vector<double> abc(static_cast<std::size_t>(na) * nb * nc, 0.0);
    for (int t = 0; t < s.num_tuples(); ++t) {
        auto tup = s.tuple(t);
        int ia = sub_index(s, pa, project_tuple(tup, pa));
        int ib = sub_index(s, pb, project_tuple(tup, pb));
        int ic = sub_index(s, pc, project_tuple(tup, pc));
        abc[(static_cast<std::size_t>(ia) * nb + ib) * nc + ic] += s.pmf[t];
    }
    double gap = 0;
    for (int j = 0; j < nb; ++j) {
        double pbj = 0;
        std::vector<double> pab(na, 0.0), pbc(nc, 0.0);
        for (int i = 0; i < na; ++i)
            for (int k = 0; k < nc; ++k) {
                double p = abc[(static_cast<std::size_t>(i) * nb + j) * nc + k];
                pbj += p;
                pab[i] += p;
                pbc[k] += p;
            }
        for (int i = 0; i < na; ++i)
            for (int k = 0; k < nc; ++k)
                gap = std::max(gap, std::abs(abc[(static_cast<std::size_t>(i) * nb + j) * nc + k] * pbj - pab[i] * pbc[k]));
    }
    return gap;
}

void check_markov(const JointDistribution& dist, const std::vector<MarkovChain>& chains, double tol) {
    for (const auto& ch : chains) {
        double gap = markov_gap(dist, ch);
        if (gap > tol) {
            std::ostringstream os;
            os << "Markov constraint " << join(ch.a) << " - " << join(ch.b) << " - " << join(ch.c)
               << " violated: p(" << join(ch.a) << "," << join(ch.b) << "," << join(ch.c) << ") p(" << join(ch.b)
               << ") != p(" << join(ch.a) << "," << join(ch.b) << ") p(" << join(ch.b) << "," << join(ch.c)
               << "), gap " << gap << " > " << tol;
            throw MarkovViolation(os.str());
        }
    }
}

// ---------------------------------------------------------------- templates

namespace {

// Split at top-level '+'/'-' (outside brackets) into signed terms.
std::vector<std::pair<int, std::string>> signed_terms(const std::string& s, const std::string& ctx) {
    std::vector<std::pair<int, std::string>> out;
    int depth = 0, sign = 1;
    std::string cur;
    auto flush = [&] {
        std::string t = trim(cur);
        if (t.empty()) throw ValidationError("template '" + ctx + "': empty term");
        out.emplace_back(sign, t);
        cur.clear();
    };
    bool any = false;
    for (char c : s) {
        if (c == '(' || c == '[') ++depth;
        if (c == ')' || c == ']') --depth;
        if (depth == 0 && (c == '+' || c == '-')) {
            if (!trim(cur).empty()) {
                flush();
            } else if (any) {
                throw ValidationError("template '" + ctx + "': dangling operator");
            }
            sign = c == '-' ? -1 : 1;
            any = true;
            continue;
        }
        cur += c;
        any = true;
    }
    flush();
    return out;
}

// "2*R0", "2R0", "1/2*R0", "R0" -> (coeff, name)
std::pair<Rational, std::string> coeff_and_name(const std::string& term, const std::string& ctx) {
    std::size_t star = term.find('*');
    if (star != std::string::npos) return {parse_rational(trim(term.substr(0, star))), trim(term.substr(star + 1))};
    std::size_t i = 0;
    while (i < term.size() && (std::isdigit(static_cast<unsigned char>(term[i])) || term[i] == '/' || term[i] == '.')) ++i;
    if (i == 0) return {Rational(1), term};
    if (i == term.size()) return {parse_rational(term), ""};
    if (term[i] == '(') throw ValidationError("template '" + ctx + "': write coefficients of atoms as c*ATOM");
    return {parse_rational(term.substr(0, i)), trim(term.substr(i))};
}

}  // namespace

InequalityTemplate parse_template(const std::string& text) {
    InequalityTemplate t;
    t.text = text;
    std::size_t pos;
    std::string op;
    if ((pos = text.find("<=")) != std::string::npos) {
        t.rel = InequalityTemplate::Rel::le;
        op = "<=";
    } else if ((pos = text.find(">=")) != std::string::npos) {
        t.rel = InequalityTemplate::Rel::ge;
        op = ">=";
    } else if ((pos = text.find('=')) != std::string::npos) {
        t.rel = InequalityTemplate::Rel::eq;
        op = "=";
    } else {
        throw ValidationError("template '" + text + "': no relation");
    }
    std::string lhs = text.substr(0, pos), rhs = text.substr(pos + op.size());
    if (t.rel != InequalityTemplate::Rel::eq && rhs.find('=') != std::string::npos)
        throw ValidationError("template '" + text + "': more than one relation");
    for (auto& [sign, term] : signed_terms(lhs, text)) {
        auto [c, name] = coeff_and_name(term, text);
        if (name.empty()) {
            if (c != 0) throw ValidationError("template '" + text + "': constants belong on the right");
            continue;
        }
        if (name.find('(') != std::string::npos) throw ValidationError("template '" + text + "': atoms belong on the right");
        t.coeffs[name] += c * sign;
    }
    for (auto& [sign, term] : signed_terms(rhs, text)) {
        auto [c, name] = coeff_and_name(term, text);
        if (name.empty()) {
            if (c != 0) throw ValidationError("template '" + text + "': nonzero constant on the right");
            continue;
        }
        if (name.find('(') != std::string::npos) {
            parse_atom(name);
            t.rhs.push_back({c * sign, name});
        } else {
            // a variable on the right moves to the left
            t.coeffs[name] -= c * sign;
        }
    }
    for (auto it = t.coeffs.begin(); it != t.coeffs.end();)
        it = it->second == 0 ? t.coeffs.erase(it) : std::next(it);
    return t;
}

// ---------------------------------------------------------------- catalog

namespace {

const char* kConverseBanner =
    "converse region evaluated with classical auxiliaries only; the no-go statement allows quantum "
    "auxiliaries, so this instance is an inner approximation of the no-go region";

RegionSpec make_spec(std::string id, std::string scenario, std::vector<std::string> rates, std::vector<std::string> aux,
                     std::vector<std::string> regs, int receivers, std::vector<MarkovChain> markov,
                     const std::vector<std::string>& lines, bool converse = false) {
    RegionSpec s;
    s.id = std::move(id);
    s.scenario = std::move(scenario);
    s.rate_vars = std::move(rates);
    s.aux_vars = std::move(aux);
    s.registers = std::move(regs);
    s.receivers = receivers;
    s.markov = std::move(markov);
    for (const auto& l : lines) s.templates.push_back(parse_template(l));
    s.converse = converse;
    if (converse) s.banner = kConverseBanner;
    return s;
}

std::map<std::string, RegionSpec> build_catalog() {
    std::map<std::string, RegionSpec> c;
    const std::vector<MarkovChain> multilevel_markov = {{{"U"}, {"V"}, {"X"}}};
    const std::vector<MarkovChain> double_markov = {{{"U"}, {"V2"}, {"V3", "X"}}, {{"U"}, {"V3"}, {"V2", "X"}}};
    const std::string ic = "I(V2;V3|U)";

    auto add = [&](RegionSpec s) { c.emplace(s.id, std::move(s)); };

    add(make_spec("marton_prelim", "marton", {"R0", "R1", "R2"}, {"S11", "S12", "S21", "S22", "r1", "r2"},
                  {"U0", "U1", "U2"}, 2, {},
                  {"R1 = S11 + S12", "R2 = S21 + S22", "r1 + r2 >= I(U1;U2|U0)", "S12 + r1 <= I(U1;B1|U0)",
                   "R0 + S11 + S21 + S12 + r1 <= I(U0,U1;B1)", "S22 + r2 <= I(U2;B2|U0)",
                   "R0 + S11 + S21 + S22 + r2 <= I(U0,U2;B2)"}));
    add(make_spec("marton_final", "marton", {"R0", "R1", "R2"}, {}, {"U0", "U1", "U2"}, 2, {},
                  {"R0 + R1 <= I(U0,U1;B1)", "R0 + R2 <= I(U0,U2;B2)",
                   "R0 + R1 + R2 <= I(U0,U1;B1) + I(U2;B2|U0) - I(U1;U2|U0)",
                   "R0 + R1 + R2 <= I(U0,U2;B2) + I(U1;B1|U0) - I(U1;U2|U0)",
                   "2*R0 + R1 + R2 <= I(U0,U1;B1) + I(U0,U2;B2) - I(U1;U2|U0)",
                   "0 <= I(U1;B1|U0) + I(U2;B2|U0) - I(U1;U2|U0)"}));

    add(make_spec("multilevel_prelim", "multilevel", {"R0", "R1"}, {"S1", "S2"}, {"U", "V", "X"}, 3,
                  multilevel_markov,
                  {"R1 = S1 + S2", "R0 + S1 + S2 <= I(X;B1)", "S1 + S2 <= I(X;B1|U)", "S2 <= I(X;B1|V)",
                   "R0 <= I(U;B2)", "R0 + S1 <= I(V;B3)"}));
    const std::vector<std::string> multilevel_final = {"R0 <= I(U;B2)", "R0 <= I(V;B3)", "R1 <= I(X;B1|U)",
                                                       "R0 + R1 <= I(V;B3) + I(X;B1|V)"};
    add(make_spec("multilevel_final", "multilevel", {"R0", "R1"}, {}, {"U", "V", "X"}, 3, multilevel_markov,
                  multilevel_final));
    add(make_spec("converse_multilevel", "multilevel", {"R0", "R1"}, {}, {"U", "V", "X"}, 3, multilevel_markov,
                  multilevel_final, true));
    add(make_spec("superposition", "superposition", {"R0", "R1"}, {}, {"U", "X"}, 3, {},
                  {"R0 <= I(U;B2)", "R0 <= I(U;B3)", "R1 <= I(X;B1|U)"}));

    add(make_spec("general2_prelim", "general_two", {"R0", "R1"}, {"S0", "S1", "S2", "S3", "r1", "r2"},
                  {"U", "V2", "V3", "X"}, 3, double_markov,
                  {"R1 = S0 + S1 + S2 + S3", "r1 + r2 >= " + ic, "R0 + R1 <= I(X;B1)",
                   "S1 + S2 + S3 <= I(X;B1|U)", "S1 + S3 <= I(X;B1|V2)", "S1 + S2 <= I(X;B1|V3)",
                   "S1 <= I(X;B1|V2,V3)", "R0 + S0 + S2 + r1 <= I(V2;B2)", "R0 + S0 + S3 + r2 <= I(V3;B3)"}));
    add(make_spec("general2_final", "general_two", {"R0", "R1"}, {}, {"U", "V2", "V3", "X"}, 3, double_markov,
                  {"R0 <= I(V2;B2)", "R0 <= I(V3;B3)", "2*R0 <= I(V2;B2) + I(V3;B3) - " + ic, "R0 + R1 <= I(X;B1)",
                   "R0 + R1 <= I(V2;B2) + I(X;B1|V2)", "R0 + R1 <= I(V3;B3) + I(X;B1|V3)",
                   "2*R0 + R1 <= I(V2;B2) + I(V3;B3) + I(X;B1|V2,V3) - " + ic,
                   "2*R0 + 2*R1 <= I(V2;B2) + I(X;B1|V2) + I(V3;B3) + I(X;B1|V3) - " + ic,
                   "2*R0 + 2*R1 <= I(V2;B2) + I(V3;B3) + I(X;B1|U) + I(X;B1|V2,V3) - " + ic}));
    add(make_spec("converse_general2", "general_two", {"R0", "R1"}, {}, {"U", "V2", "V3", "X"}, 3, double_markov,
                  {"R0 <= I(U;B1)", "R0 <= I(V2;B2) - I(V2;B1|U)", "R0 <= I(V3;B3) - I(V3;B1|U)",
                   "R1 <= I(X;B1|U)"},
                  true));

    add(make_spec("general3_prelim", "three_degraded", {"R0", "R1", "R2"},
                  {"R10", "R11", "S0", "S1", "S2", "S3", "r1", "r2"}, {"U", "V2", "V3", "X"}, 3, double_markov,
                  {"R2 = S0 + S1 + S2 + S3", "R1 = R10 + R11", "r1 + r2 >= " + ic, "R0 + R1 + R2 <= I(X;B1)",
                   "R11 + S1 + S2 + S3 <= I(X;B1|U)", "S1 + S3 <= I(X;B1|V2)", "R11 + S1 + S2 <= I(X;B1|V3)",
                   "S1 <= I(X;B1|V2,V3)", "R0 + S0 + R10 + R11 + S2 + r1 <= I(V2;B2)",
                   "R11 + S2 + r1 <= I(V2;B2|U)", "R0 + S0 + R10 + S3 + r2 <= I(V3;B3)"}));
    add(make_spec("general3_final", "three_degraded", {"R0", "R1", "R2"}, {}, {"U", "V2", "V3", "X"}, 3,
                  double_markov,
                  {"R0 <= I(V3;B3)", "R0 + R1 <= I(V2;B2)", "R0 + R1 <= I(V2;B2|U) + I(V3;B3) - " + ic,
                   "2*R0 + R1 <= I(V2;B2) + I(V3;B3) - " + ic, "R0 + R1 + R2 <= I(X;B1)",
                   "R0 + R1 + R2 <= I(V2;B2) + I(X;B1|V2)", "R0 + R1 + R2 <= I(V3;B3) + I(X;B1|V3)",
                   "R0 + R1 + R2 <= I(V2;B2|U) + I(V3;B3) + I(X;B1|V2,V3) - " + ic,
                   "2*R0 + R1 + R2 <= I(V2;B2) + I(V3;B3) + I(X;B1|V2,V3) - " + ic,
                   "2*R0 + 2*R1 + R2 <= I(V2;B2) + I(V3;B3) + I(X;B1|V3) - " + ic,
                   "2*R0 + 2*R1 + 2*R2 <= I(V2;B2) + I(V3;B3) + I(X;B1|V2) + I(X;B1|V3) - " + ic,
                   "2*R0 + 2*R1 + 2*R2 <= I(V2;B2|U) + I(V3;B3) + I(X;B1|U) + I(X;B1|V2,V3) - " + ic}));
    // The last inequality above is not implied by general3_prelim; this variant uses
    // I(V2;B2) in its place, which is the combination of the B2, B3 and two B1 constraints.
    RegionSpec fm = c.at("general3_final");
    fm.id = "general3_final_fm";
    fm.templates.back() =
        parse_template("2*R0 + 2*R1 + 2*R2 <= I(V2;B2) + I(V3;B3) + I(X;B1|U) + I(X;B1|V2,V3) - " + ic);
    add(fm);
    return c;
}

const std::map<std::string, RegionSpec>& catalog() {
    static const std::map<std::string, RegionSpec> c = build_catalog();
    return c;
}

}  // namespace

const std::vector<std::string>& region_ids() {
    static const std::vector<std::string> ids = {
        "marton_final",      "marton_prelim",  "multilevel_final", "multilevel_prelim",
        "superposition",     "converse_multilevel", "general2_final", "general2_prelim",
        "converse_general2", "general3_final", "general3_prelim", "general3_final_fm"};
    return ids;
}

const RegionSpec& region_spec(const std::string& id) {
    auto it = catalog().find(id);
    if (it == catalog().end()) throw ValidationError("unknown region '" + id + "'");
    return it->second;
}

std::pair<std::string, std::string> fm_pair(const std::string& family) {
    static const std::map<std::string, std::pair<std::string, std::string>> pairs = {
        {"marton", {"marton_prelim", "marton_final"}},
        {"multilevel", {"multilevel_prelim", "multilevel_final"}},
        {"general2", {"general2_prelim", "general2_final"}},
        {"general3", {"general3_prelim", "general3_final"}},
        {"general3_fm", {"general3_prelim", "general3_final_fm"}}};
    auto it = pairs.find(family);
    if (it == pairs.end()) throw ValidationError("unknown theorem family '" + family + "'");
    return it->second;
}

// ---------------------------------------------------------------- evaluation

RegionInstance evaluate_region(const RegionSpec& spec, AtomTable& table, double markov_tol) {
    if (table.channel().receivers() < spec.receivers)
        throw ValidationError(spec.id + ": channel has " + std::to_string(table.channel().receivers()) +
                              " receivers, need " + std::to_string(spec.receivers));
    const auto& joint = table.classical_joint();
    for (const auto& r : spec.registers) {
        const std::string name = table.alias(r);
        if (std::none_of(joint.registers.begin(), joint.registers.end(),
                         [&](const ClassicalRegister& c) { return c.name == name; }))
            throw ValidationError(spec.id + ": distribution lacks register '" + name + "'");
    }
    std::vector<MarkovChain> chains;
    for (auto ch : spec.markov) {
        for (auto* side : {&ch.a, &ch.b, &ch.c})
            for (auto& s : *side) s = table.alias(s);
        chains.push_back(ch);
    }
    check_markov(joint, chains, markov_tol);

    RegionInstance inst;
    inst.spec_id = spec.id;
    inst.banner = spec.banner;
    InequalitySystem& sys = inst.system;
    for (const auto& v : spec.rate_vars) sys.add_variable(v);
    for (const auto& v : spec.aux_vars) sys.add_variable(v);
    std::set<std::string> seen;
    for (const auto& t : spec.templates) {
        Rational rhs = 0;
        for (const auto& term : t.rhs) {
            const AtomValue& a = table.get(term.atom);
            rhs += term.coeff * a.rational;
            if (seen.insert(a.expr.key()).second) inst.atoms.push_back(a);
        }
        for (const auto& [v, c] : t.coeffs)
            if (!sys.has_variable(v)) throw ValidationError(spec.id + ": undeclared variable '" + v + "'");
        switch (t.rel) {
            case InequalityTemplate::Rel::le: sys.add_le(t.coeffs, rhs, t.text); break;
            case InequalityTemplate::Rel::ge: sys.add_ge(t.coeffs, rhs, t.text); break;
            case InequalityTemplate::Rel::eq: sys.add_eq(t.coeffs, rhs, t.text); break;
        }
    }
    sys.add_nonnegativity(sys.variables);
    sys.validate();
    return inst;
}

FmCheck reproduce_final_region(const std::string& prelim_id, const std::string& final_id, AtomTable& table) {
    const RegionSpec& pre = region_spec(prelim_id);
    const RegionSpec& fin = region_spec(final_id);
    if (pre.rate_vars != fin.rate_vars) throw ValidationError("fm-check: rate variables differ");
    auto start = std::chrono::steady_clock::now();
    FmCheck out;
    RegionInstance p = evaluate_region(pre, table);
    RegionInstance f = evaluate_region(fin, table);
    out.projected = fm_eliminate(p.system, pre.aux_vars, &out.stats);
    out.final_system = f.system;
    out.fm_in_final = contains(out.projected, out.final_system);
    out.final_in_fm = contains(out.final_system, out.projected);
    out.equal = out.fm_in_final && out.final_in_fm;
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

bool superposition_collapse(AtomTable& ux_table) {
    AtomTable aliased = ux_table.with_aliases({{"V", "U"}});
    auto a = evaluate_region(region_spec("multilevel_final"), aliased);
    auto b = evaluate_region(region_spec("superposition"), ux_table);
    return polytope_equal(a.system, b.system);
}

double data_processing_margin(AtomTable& table) {
    return table.get("I(U;B2)").value - (table.get("I(V2;B2)").value - table.get("I(V2;B1|U)").value);
}

ConverseReport converse_coherence(AtomTable& table) {
    ConverseReport r;
    r.data_processing_margin = data_processing_margin(table);
    AtomTable reduced_table = table.with_aliases({{"V", "V3"}});
    auto conv = evaluate_region(region_spec("converse_general2"), table);
    auto red = evaluate_region(region_spec("multilevel_final"), reduced_table);
    r.converse_in_reduced = contains(conv.system, red.system);
    r.reduced_in_converse = contains(red.system, conv.system);
    return r;
}

// ---------------------------------------------------------------- generators

std::vector<Mat> random_kraus(int d_in, int d_out, int k, Rng& rng) {
    // isometry V: C^{d_in} -> C^{d_out} (x) C^{k} from a Haar unitary
    const int big = d_out * k;
    Mat v;
    if (big >= d_in) {
        v = random_unitary(big, rng).leftCols(d_in);
    } else {
        throw ValidationError("random_kraus: d_out * k must be at least d_in");
    }
    std::vector<Mat> out;
    for (int e = 0; e < k; ++e) {
        Mat ke(d_out, d_in);
        for (int o = 0; o < d_out; ++o) ke.row(o) = v.row(o * k + e);
        out.push_back(ke);
    }
    return out;
}

Mat apply_kraus(const std::vector<Mat>& kraus, const Mat& rho) {
    Mat out = Mat::Zero(kraus.front().rows(), kraus.front().rows());
    for (const auto& k : kraus) out += k * rho * k.adjoint();
    return hermitize(out);
}

BroadcastChannel random_channel(int input_size, const std::vector<int>& dims, Rng& rng, bool pure) {
    BroadcastChannel ch;
    ch.input_size = input_size;
    ch.dims = dims;
    int total = 1;
    for (int d : dims) total *= d;
    for (int x = 0; x < input_size; ++x) ch.outputs.push_back(pure ? random_pure(total, rng) : random_density(total, rng));
    ch.validate();
    return ch;
}

BroadcastChannel degraded_channel(int input_size, int dB, Rng& rng) {
    auto m = random_kraus(dB, dB, 2, rng);
    BroadcastChannel ch;
    ch.input_size = input_size;
    ch.dims = {dB, dB, dB};
    for (int x = 0; x < input_size; ++x) {
        Mat b1 = random_density(dB, rng);
        Mat b3 = random_density(dB, rng);
        ch.outputs.push_back(kron({b1, apply_kraus(m, b1), b3}));
    }
    ch.validate();
    return ch;
}

BroadcastChannel identical_channel(int input_size, int dB, int receivers, Rng& rng) {
    BroadcastChannel ch;
    ch.input_size = input_size;
    ch.dims.assign(receivers, dB);
    for (int x = 0; x < input_size; ++x) {
        Mat r = random_density(dB, rng);
        ch.outputs.push_back(kron(std::vector<Mat>(receivers, r)));
    }
    ch.validate();
    return ch;
}

DistributionWithMap random_marton_distribution(int d0, int d1, int d2, int input_size, Rng& rng, double coupling) {
    if (coupling < 0 || coupling > 1) throw ValidationError("coupling must lie in [0, 1]");
    DistributionWithMap out;
    out.dist.registers = {{"U0", d0}, {"U1", d1}, {"U2", d2}};
    auto p0 = random_pmf(d0, rng);
    for (int u0 = 0; u0 < d0; ++u0) {
        auto p1 = random_pmf(d1, rng), p2 = random_pmf(d2, rng), q = random_pmf(d1 * d2, rng);
        for (int u1 = 0; u1 < d1; ++u1)
            for (int u2 = 0; u2 < d2; ++u2)
                out.dist.pmf.push_back(p0[u0] * ((1 - coupling) * p1[u1] * p2[u2] + coupling * q[u1 * d2 + u2]));
    }
    std::uniform_int_distribution<int> xs(0, input_size - 1);
    for (int t = 0; t < d0 * d1 * d2; ++t) out.xmap.push_back(xs(rng));
    return out;
}

DistributionWithMap random_multilevel_distribution(int dU, int dV, int input_size, Rng& rng) {
    DistributionWithMap out;
    out.dist.registers = {{"U", dU}, {"V", dV}, {"X", input_size}};
    auto pu = random_pmf(dU, rng);
    std::vector<std::vector<double>> pv(dU), px(dV);
    for (auto& p : pv) p = random_pmf(dV, rng);
    for (auto& p : px) p = random_pmf(input_size, rng);
    for (int u = 0; u < dU; ++u)
        for (int v = 0; v < dV; ++v)
            for (int x = 0; x < input_size; ++x) out.dist.pmf.push_back(pu[u] * pv[u][v] * px[v][x]);
    out.xmap = register_map(out.dist, "X");
    return out;
}

DistributionWithMap double_markov_distribution(int dU, int dA, int dB, int input_size, Rng& rng, double coupling) {
    if (coupling < 0 || coupling > 1) throw ValidationError("coupling must lie in [0, 1]");
    DistributionWithMap out;
    out.dist.registers = {{"U", dU}, {"V2", dU * dA}, {"V3", dU * dB}, {"X", input_size}};
    out.dist.pmf.assign(static_cast<std::size_t>(dU) * dU * dA * dU * dB * input_size, 0.0);
    auto pu = random_pmf(dU, rng);
    for (int u = 0; u < dU; ++u) {
        // p(a,b|u) mixes p(a|u) p(b|u) with an arbitrary joint; x is drawn from p(x|u,a,b)
        auto pa = random_pmf(dA, rng), pb = random_pmf(dB, rng), q = random_pmf(dA * dB, rng);
        for (int a = 0; a < dA; ++a)
            for (int b = 0; b < dB; ++b) {
                const double pab = (1 - coupling) * pa[a] * pb[b] + coupling * q[a * dB + b];
                auto px = random_pmf(input_size, rng);
                for (int x = 0; x < input_size; ++x) {
                    const int v2 = u * dA + a, v3 = u * dB + b;
                    const std::size_t t =
                        ((static_cast<std::size_t>(u) * dU * dA + v2) * dU * dB + v3) * input_size + x;
                    out.dist.pmf[t] = pu[u] * pab * px[x];
                }
            }
    }
    out.xmap = register_map(out.dist, "X");
    return out;
}

DistributionWithMap random_superposition_distribution(int dU, int input_size, Rng& rng) {
    DistributionWithMap out;
    out.dist.registers = {{"U", dU}, {"X", input_size}};
    out.dist.pmf = random_pmf(dU * input_size, rng);
    out.xmap = register_map(out.dist, "X");
    return out;
}

double holevo_information(const BroadcastChannel& ch, int receiver, const std::vector<double>& px) {
    JointDistribution d;
    d.registers = {{"X", ch.input_size}};
    d.pmf = px;
    auto s = channel_to_cqstate(ch, {receiver}, d, register_map(d, "X"));
    return shannon_mi(s, MiRequest{{"X"}, {}, {}});
}

InstanceSample sample_instance(const std::string& family, std::uint64_t seed, int max_attempts) {
    const std::string fin = fm_pair(family).second;
    const RegionSpec& spec = region_spec(fin);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
        InstanceSample out;
        out.seed = seed;
        out.attempts = attempt + 1;
        if (spec.scenario == "marton") {
            out.channel = random_channel(4, {2, 2}, rng, true);
            out.dist = random_marton_distribution(2, 2, 2, 4, rng, 0.1);
        } else if (spec.scenario == "multilevel") {
            out.channel = degraded_channel(3, 2, rng);
            out.dist = random_multilevel_distribution(2, 2, 3, rng);
        } else {
            out.channel = random_channel(4, {2, 2, 2}, rng, true);
            out.dist = double_markov_distribution(2, 2, 2, 4, rng, 0.1);
        }
        AtomTable table(out.channel, out.dist.dist, out.dist.xmap);
        auto inst = evaluate_region(spec, table);
        if (!feasible(inst.system)) continue;
        bool informative = true;
        for (const auto& v : spec.rate_vars)
            if (lp_max(inst.system, {{v, Rational(1)}}).value <= 0) informative = false;
        if (informative) return out;
    }
    throw ValidationError("sample_instance: no informative instance for '" + family + "' within " +
                          std::to_string(max_attempts) + " attempts");
}

// ---------------------------------------------------------------- pareto search

namespace {

// Free parameters of a distribution family: a list of pmfs plus (Marton only) the input map.
struct Params {
    std::vector<std::vector<double>> pmfs;
    std::vector<int> xmap;
};

struct Family {
    std::string scenario;
    int dU = 2, dV = 2, dA = 2, dB = 2, d0 = 2, d1 = 2, d2 = 2, nx = 2;

    Params sample(Rng& rng) const {
        Params p;
        if (scenario == "marton") {
            auto d = random_marton_distribution(d0, d1, d2, nx, rng);
            p.pmfs = {d.dist.pmf};
            p.xmap = d.xmap;
        } else if (scenario == "multilevel") {
            p.pmfs.push_back(random_pmf(dU, rng));
            for (int u = 0; u < dU; ++u) p.pmfs.push_back(random_pmf(dV, rng));
            for (int v = 0; v < dV; ++v) p.pmfs.push_back(random_pmf(nx, rng));
        } else if (scenario == "superposition") {
            p.pmfs = {random_pmf(dU * nx, rng)};
        } else {
            p.pmfs.push_back(random_pmf(dU, rng));
            for (int u = 0; u < dU; ++u) p.pmfs.push_back(random_pmf(dA * dB * nx, rng));
        }
        return p;
    }

    DistributionWithMap build(const Params& p) const {
        DistributionWithMap out;
        if (scenario == "marton") {
            out.dist.registers = {{"U0", d0}, {"U1", d1}, {"U2", d2}};
            out.dist.pmf = p.pmfs[0];
            out.xmap = p.xmap;
            return out;
        }
        if (scenario == "multilevel") {
            out.dist.registers = {{"U", dU}, {"V", dV}, {"X", nx}};
            for (int u = 0; u < dU; ++u)
                for (int v = 0; v < dV; ++v)
                    for (int x = 0; x < nx; ++x) out.dist.pmf.push_back(p.pmfs[0][u] * p.pmfs[1 + u][v] * p.pmfs[1 + dU + v][x]);
        } else if (scenario == "superposition") {
            out.dist.registers = {{"U", dU}, {"X", nx}};
            out.dist.pmf = p.pmfs[0];
        } else {
            out.dist.registers = {{"U", dU}, {"V2", dU * dA}, {"V3", dU * dB}, {"X", nx}};
            out.dist.pmf.assign(static_cast<std::size_t>(dU) * dU * dA * dU * dB * nx, 0.0);
            for (int u = 0; u < dU; ++u)
                for (int a = 0; a < dA; ++a)
                    for (int b = 0; b < dB; ++b)
                        for (int x = 0; x < nx; ++x) {
                            const std::size_t t =
                                ((static_cast<std::size_t>(u) * dU * dA + u * dA + a) * dU * dB + u * dB + b) * nx + x;
                            out.dist.pmf[t] = p.pmfs[0][u] * p.pmfs[1 + u][(a * dB + b) * nx + x];
                        }
        }
        out.xmap = register_map(out.dist, "X");
        return out;
    }

    // Read the parameters back from a distribution with the same or smaller alphabets.
    Params extract(const DistributionWithMap& d) const {
        auto size_of = [&](const std::string& n) {
            for (const auto& r : d.dist.registers)
                if (r.name == n) return r.size;
            throw ValidationError("warm start: missing register '" + n + "'");
        };
        CqState s = classical_state(d.dist.registers, d.dist.pmf);
        auto value = [&](int t, const std::string& n) { return s.tuple(t)[s.position(n)]; };
        Params p;
        if (scenario == "marton") {
            const int e0 = size_of("U0"), e1 = size_of("U1"), e2 = size_of("U2");
            if (e0 > d0 || e1 > d1 || e2 > d2) throw ValidationError("warm start: alphabet too large");
            p.pmfs = {std::vector<double>(d0 * d1 * d2, 0.0)};
            p.xmap.assign(d0 * d1 * d2, 0);
            for (int t = 0; t < s.num_tuples(); ++t) {
                int idx = (value(t, "U0") * d1 + value(t, "U1")) * d2 + value(t, "U2");
                p.pmfs[0][idx] = s.pmf[t];
                p.xmap[idx] = d.xmap[t];
            }
            return p;
        }
        if (scenario == "superposition") {
            if (size_of("U") > dU || size_of("X") != nx) throw ValidationError("warm start: alphabet mismatch");
            p.pmfs = {std::vector<double>(dU * nx, 0.0)};
            for (int t = 0; t < s.num_tuples(); ++t) p.pmfs[0][value(t, "U") * nx + value(t, "X")] = s.pmf[t];
            return p;
        }
        if (scenario == "multilevel") {
            if (size_of("U") > dU || size_of("V") > dV || size_of("X") != nx)
                throw ValidationError("warm start: alphabet mismatch");
            std::vector<double> pu(dU, 0.0);
            std::vector<std::vector<double>> puv(dU, std::vector<double>(dV, 0.0)), pvx(dV, std::vector<double>(nx, 0.0));
            for (int t = 0; t < s.num_tuples(); ++t) {
                int u = value(t, "U"), v = value(t, "V"), x = value(t, "X");
                pu[u] += s.pmf[t];
                puv[u][v] += s.pmf[t];
                pvx[v][x] += s.pmf[t];
            }
            auto normalized = [](std::vector<double> w) {
                double z = 0;
                for (double q : w) z += q;
                for (double& q : w) q = z > 0 ? q / z : 1.0 / w.size();
                return w;
            };
            p.pmfs.push_back(pu);
            for (auto& r : puv) p.pmfs.push_back(normalized(r));
            for (auto& r : pvx) p.pmfs.push_back(normalized(r));
            return p;
        }
        throw ValidationError("warm start: not supported for scenario '" + scenario + "'");
    }

    void perturb(Params& p, double step, Rng& rng) const {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        if (!p.xmap.empty() && unit(rng) < 0.25) {
            std::uniform_int_distribution<int> pick(0, static_cast<int>(p.xmap.size()) - 1), xs(0, nx - 1);
            p.xmap[pick(rng)] = xs(rng);
            return;
        }
        std::uniform_int_distribution<int> which(0, static_cast<int>(p.pmfs.size()) - 1);
        auto& w = p.pmfs[which(rng)];
        if (w.size() < 2) return;
        std::uniform_int_distribution<int> idx(0, static_cast<int>(w.size()) - 1);
        int i = idx(rng), j = idx(rng);
        if (i == j) return;
        // occasionally move all of the mass so that boundary distributions are reachable
        double amount = unit(rng) < 0.2 ? w[i] : std::min(w[i], step * unit(rng));
        w[i] -= amount;
        w[j] += amount;
    }
};

Family family_for(const RegionSpec& spec, const BroadcastChannel& ch, const ParetoConfig& cfg) {
    Family f;
    f.scenario = spec.scenario;
    f.nx = ch.input_size;
    auto get = [&](const char* n, int def) {
        auto it = cfg.alphabet.find(n);
        int v = it == cfg.alphabet.end() ? def : it->second;
        if (v < 1 || v > 16) throw ValidationError(std::string("pareto: alphabet size for ") + n + " out of range");
        return v;
    };
    f.dU = get("U", 2);
    f.dV = get("V", 2);
    f.dA = get("A", 2);
    f.dB = get("B", 2);
    f.d0 = get("U0", 2);
    f.d1 = get("U1", 2);
    f.d2 = get("U2", 2);
    return f;
}

// Weighted directions over the rate simplex, including the axes.
std::vector<std::vector<Rational>> directions(int k, int count) {
    std::vector<std::vector<Rational>> out;
    for (int i = 0; i < k; ++i) {
        std::vector<Rational> e(k, Rational(0));
        e[i] = 1;
        out.push_back(e);
    }
    out.emplace_back(k, Rational(1));
    Rng rng(0x5eed);
    std::uniform_int_distribution<int> w(1, 8);
    while (static_cast<int>(out.size()) < std::max(count, k + 1)) {
        std::vector<Rational> d;
        for (int i = 0; i < k; ++i) d.push_back(Rational(w(rng)));
        out.push_back(d);
    }
    return out;
}

struct Score {
    std::vector<Rational> best;           // per direction
    std::vector<std::vector<double>> points;  // optimal rate vectors, one per direction
};

Score score(const RegionSpec& spec, const BroadcastChannel& ch, const Family& fam, const Params& p,
            const std::vector<std::vector<Rational>>& dirs) {
    auto dw = fam.build(p);
    AtomTable table(ch, dw.dist, dw.xmap);
    auto inst = evaluate_region(spec, table);
    InequalitySystem sys = spec.aux_vars.empty() ? inst.system : fm_eliminate(inst.system, spec.aux_vars);
    Score s;
    for (const auto& d : dirs) {
        std::map<std::string, Rational> obj;
        for (std::size_t i = 0; i < d.size(); ++i) obj[spec.rate_vars[i]] = d[i];
        auto r = lp_max(sys, obj);
        if (r.status != LpResult::Status::optimal) {
            s.best.push_back(Rational(-1));
            s.points.emplace_back();
            continue;
        }
        s.best.push_back(r.value);
        std::vector<double> pt;
        for (const auto& v : spec.rate_vars) pt.push_back(to_double(r.point.at(v)));
        s.points.push_back(pt);
    }
    return s;
}

}  // namespace

DistributionWithMap embed_distribution(const DistributionWithMap& d, const std::map<std::string, int>& sizes) {
    DistributionWithMap out;
    out.dist.registers = d.dist.registers;
    for (auto& r : out.dist.registers) {
        auto it = sizes.find(r.name);
        if (it != sizes.end()) {
            if (it->second < r.size) throw ValidationError("embed: alphabet of '" + r.name + "' would shrink");
            r.size = it->second;
        }
    }
    CqState from = classical_state(d.dist.registers, d.dist.pmf);
    CqState to;
    to.registers = out.dist.registers;
    out.dist.pmf.assign(to.num_tuples(), 0.0);
    out.xmap.assign(to.num_tuples(), 0);
    bool has_x = std::any_of(out.dist.registers.begin(), out.dist.registers.end(),
                             [](const ClassicalRegister& r) { return r.name == "X"; });
    if (has_x) out.xmap = register_map(out.dist, "X");
    for (int t = 0; t < from.num_tuples(); ++t) {
        int idx = to.index(from.tuple(t));
        out.dist.pmf[idx] = d.dist.pmf[t];
        out.xmap[idx] = d.xmap[t];
    }
    return out;
}

ParetoResult pareto_search(const RegionSpec& spec, const BroadcastChannel& ch, const ParetoConfig& cfg) {
    if (cfg.candidates < 1 || cfg.refinements < 0 || cfg.workers < 1) throw ValidationError("pareto: bad config");
    const Family fam = family_for(spec, ch, cfg);
    const auto dirs = directions(static_cast<int>(spec.rate_vars.size()), cfg.directions);
    const int nd = static_cast<int>(dirs.size());

    std::vector<Params> starts;
    for (const auto& w : cfg.warm_start) starts.push_back(fam.extract(w));
    for (int i = 0; i < cfg.candidates; ++i) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
        starts.push_back(fam.sample(rng));
    }
    const int n = static_cast<int>(starts.size());
    std::vector<Score> scores(n);
    auto work = [&](int w) {
        for (int i = w; i < n; i += cfg.workers) scores[i] = score(spec, ch, fam, starts[i], dirs);
    };
    if (cfg.workers == 1) {
        work(0);
    } else {
        std::vector<std::future<void>> fs;
        for (int w = 0; w < cfg.workers; ++w) fs.push_back(std::async(std::launch::async, work, w));
        for (auto& f : fs) f.get();
    }

    ParetoResult res;
    res.rate_vars = spec.rate_vars;
    res.evaluated = n;
    std::vector<ParetoPoint> pool;
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < nd; ++d)
            if (!scores[i].points[d].empty()) pool.push_back({scores[i].points[d], fam.build(starts[i])});

    // coordinate refinement of the best start for each direction
    for (int d = 0; d < nd; ++d) {
        int best = -1;
        for (int i = 0; i < n; ++i)
            if (best < 0 || scores[i].best[d] > scores[best].best[d]) best = i;
        Params cur = starts[best];
        Rational cur_val = scores[best].best[d];
        std::vector<double> cur_pt = scores[best].points[d];
        Rng rng(derive_seed(cfg.seed, 1000000ULL + static_cast<std::uint64_t>(d)));
        double step = 0.5;
        for (int it = 0; it < cfg.refinements; ++it) {
            Params trial = cur;
            fam.perturb(trial, step, rng);
            Score s = score(spec, ch, fam, trial, {dirs[d]});
            ++res.evaluated;
            if (!s.points[0].empty() && s.best[0] > cur_val) {
                cur = trial;
                cur_val = s.best[0];
                cur_pt = s.points[0];
            } else {
                step = step * 0.95 < 1e-3 ? 0.5 : step * 0.95;
            }
        }
        if (!cur_pt.empty()) pool.push_back({cur_pt, fam.build(cur)});
    }

    // nondominated filter, first occurrence wins among equal points
    for (std::size_t i = 0; i < pool.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < pool.size() && !dominated; ++j) {
            if (i == j) continue;
            bool ge = true, gt = false;
            for (std::size_t k = 0; k < pool[i].rates.size(); ++k) {
                if (pool[j].rates[k] < pool[i].rates[k]) ge = false;
                if (pool[j].rates[k] > pool[i].rates[k]) gt = true;
            }
            if (ge && (gt || j < i)) dominated = true;
        }
        if (!dominated) res.frontier.push_back(pool[i]);
    }
    std::sort(res.frontier.begin(), res.frontier.end(),
              [](const ParetoPoint& a, const ParetoPoint& b) { return a.rates < b.rates; });
    return res;
}

}  // namespace qbc
