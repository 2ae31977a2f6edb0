#include "qbc/code_sim.hpp"

#include "qbc/divergence.hpp"
#include "qbc/pinching.hpp"
#include "qbc/rate_region.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <numeric>

namespace qbc {

namespace {

constexpr long long kMaxMessages = 1 << 16;

struct ScenarioInfo {
    std::vector<std::string> rates;
    std::vector<std::string> registers;
    std::map<std::string, std::string> index_rate;  // index name -> rate name
    std::vector<std::string> message_indices;
    int receivers;
};

const std::map<std::string, ScenarioInfo>& scenario_table() {
    static const std::map<std::string, ScenarioInfo> t = {
        {"marton_common",
         {{"R0", "S11", "S12", "S21", "S22", "r1", "r2"},
          {"U0", "U1", "U2"},
          {{"m0", "R0"}, {"m11", "S11"}, {"m12", "S12"}, {"m21", "S21"}, {"m22", "S22"}, {"k1", "r1"}, {"k2", "r2"}},
          {"m0", "m11", "m12", "m21", "m22"},
          2}},
        {"multilevel_2deg",
         {{"R0", "S1", "S2"}, {"U", "V", "X"}, {{"m0", "R0"}, {"s1", "S1"}, {"s2", "S2"}}, {"m0", "s1", "s2"}, 3}},
        {"general_2deg",
         {{"R0", "S0", "S1", "S2", "S3", "r1", "r2"},
          {"U", "V2", "V3", "X"},
          {{"m0", "R0"}, {"s0", "S0"}, {"s1", "S1"}, {"s2", "S2"}, {"s3", "S3"}, {"k1", "r1"}, {"k2", "r2"}},
          {"m0", "s0", "s1", "s2", "s3"},
          3}},
        {"general_3deg",
         {{"R0", "R10", "R11", "S0", "S1", "S2", "S3", "r1", "r2"},
          {"U", "V2", "V3", "X"},
          {{"m0", "R0"},
           {"m10", "R10"},
           {"m11", "R11"},
           {"s0", "S0"},
           {"s1", "S1"},
           {"s2", "S2"},
           {"s3", "S3"},
           {"k1", "r1"},
           {"k2", "r2"}},
          {"m0", "m10", "m11", "s0", "s1", "s2", "s3"},
          3}},
    };
    return t;
}

const ScenarioInfo& info(const std::string& scenario) {
    auto it = scenario_table().find(scenario);
    if (it == scenario_table().end()) throw ValidationError("code: unknown scenario '" + scenario + "'");
    return it->second;
}

// Layer index lists per scenario, in sampling order.
std::vector<std::pair<std::string, std::vector<std::string>>> layer_layout(const std::string& sc) {
    if (sc == "marton_common")
        return {{"U0", {"m0", "m11", "m21"}},
                {"U1", {"m0", "m11", "m21", "m12", "k1"}},
                {"U2", {"m0", "m11", "m21", "m22", "k2"}}};
    if (sc == "multilevel_2deg") return {{"U", {"m0"}}, {"V", {"m0", "s1"}}, {"X", {"m0", "s1", "s2"}}};
    if (sc == "general_2deg")
        return {{"U", {"m0", "s0"}},
                {"V2", {"m0", "s0", "s2", "k1"}},
                {"V3", {"m0", "s0", "s3", "k2"}},
                {"X", {"m0", "s0", "s2", "s3", "s1"}}};
    return {{"U", {"m0", "m10", "s0"}},
            {"V2", {"m0", "m10", "s0", "m11", "s2", "k1"}},
            {"V3", {"m0", "m10", "s0", "s3", "k2"}},
            {"X", {"m0", "m10", "s0", "m11", "s2", "s3", "s1"}}};
}

struct IndexSpace {
    std::vector<std::string> names;
    std::vector<int> sizes;

    IndexSpace(std::vector<std::string> n, const std::map<std::string, int>& all) : names(std::move(n)) {
        for (const auto& x : names) sizes.push_back(all.at(x));
    }
    long long count() const {
        long long c = 1;
        for (int s : sizes) c *= s;
        return c;
    }
    int flat(const std::map<std::string, int>& idx) const {
        long long f = 0;
        for (std::size_t i = 0; i < names.size(); ++i) f = f * sizes[i] + idx.at(names[i]);
        return static_cast<int>(f);
    }
    std::map<std::string, int> at(long long f) const {
        std::map<std::string, int> out;
        for (int i = static_cast<int>(names.size()) - 1; i >= 0; --i) {
            out[names[i]] = static_cast<int>(f % sizes[i]);
            f /= sizes[i];
        }
        return out;
    }
};

// Tuple indexing over a distribution's registers.
struct DistIndex {
    CqState shape;
    explicit DistIndex(const JointDistribution& d) { shape.registers = d.registers; }
    int pos(const std::string& r) const { return shape.position(r); }
};

// p(target | given) over the distribution, as a pmf on the target register's values.
std::vector<double> conditional_pmf(const JointDistribution& d, const DistIndex& di,
                                    const std::vector<std::pair<int, int>>& given, int target) {
    std::vector<double> out(d.registers[target].size, 0.0);
    for (int t = 0; t < d.num_tuples(); ++t) {
        if (d.pmf[t] <= 0) continue;
        auto tu = di.shape.tuple(t);
        bool ok = true;
        for (auto [p, v] : given)
            if (tu[p] != v) {
                ok = false;
                break;
            }
        if (ok) out[tu[target]] += d.pmf[t];
    }
    return out;
}

// Probability of the partial assignment.
double partial_prob(const JointDistribution& d, const DistIndex& di, const std::vector<std::pair<int, int>>& given) {
    double s = 0;
    for (int t = 0; t < d.num_tuples(); ++t) {
        if (d.pmf[t] <= 0) continue;
        auto tu = di.shape.tuple(t);
        bool ok = true;
        for (auto [p, v] : given)
            if (tu[p] != v) {
                ok = false;
                break;
            }
        if (ok) s += d.pmf[t];
    }
    return s;
}

// Draw the target given a list of conditions, dropping trailing conditions while the event is null.
int sample_given(const JointDistribution& d, const DistIndex& di, std::vector<std::pair<int, int>> given, int target,
                 Rng& rng) {
    for (;;) {
        auto p = conditional_pmf(d, di, given, target);
        double s = std::accumulate(p.begin(), p.end(), 0.0);
        if (s > 0) {
            for (auto& x : p) x /= s;
            return sample_index(p, rng);
        }
        if (given.empty()) throw ValidationError("code: distribution has no mass");
        given.pop_back();
    }
}

// Covering score p(a,b|c) / (p(a|c) p(b|c)) for registers (c, a, b).
double covering_score(const JointDistribution& d, const DistIndex& di, int pc, int c, int pa, int a, int pb, int b) {
    double pabc = partial_prob(d, di, {{pc, c}, {pa, a}, {pb, b}});
    double pc_ = partial_prob(d, di, {{pc, c}});
    double pac = partial_prob(d, di, {{pc, c}, {pa, a}});
    double pbc = partial_prob(d, di, {{pc, c}, {pb, b}});
    if (pac <= 0 || pbc <= 0) return 0;
    return pabc * pc_ / (pac * pbc);
}

bool marton_type(const std::string& sc) { return sc != "multilevel_2deg"; }

double pow2(double r) { return std::pow(2.0, r); }

}  // namespace

const std::vector<std::string>& code_scenarios() {
    static const std::vector<std::string> v = {"marton_common", "multilevel_2deg", "general_2deg", "general_3deg"};
    return v;
}

const std::vector<std::string>& scenario_rates(const std::string& scenario) { return info(scenario).rates; }
const std::vector<std::string>& scenario_registers(const std::string& scenario) { return info(scenario).registers; }
int scenario_receivers(const std::string& scenario) { return info(scenario).receivers; }

void CodebookSpec::validate() const {
    const auto& in = info(scenario);
    for (const auto& [name, r] : rates) {
        if (std::find(in.rates.begin(), in.rates.end(), name) == in.rates.end())
            throw ValidationError("code: rate '" + name + "' is not used by " + scenario);
        if (!(r >= 0) || !std::isfinite(r)) throw ValidationError("code: rate '" + name + "' must be >= 0");
    }
    dist.validate();
    if (static_cast<int>(xmap.size()) != dist.num_tuples()) throw ValidationError("code: map is not total over tuples");
    std::vector<std::string> have;
    for (const auto& r : dist.registers) have.push_back(r.name);
    std::vector<std::string> want = in.registers;
    std::sort(have.begin(), have.end());
    std::sort(want.begin(), want.end());
    if (have != want) throw ValidationError("code: " + scenario + " needs exactly the registers of its chain");
    if (scenario == "multilevel_2deg")
        check_markov(dist, {{{"U"}, {"V"}, {"X"}}});
    else if (scenario != "marton_common")
        check_markov(dist, {{{"U"}, {"V2"}, {"X", "V3"}}, {{"U"}, {"V3"}, {"X", "V2"}}});
    long long m = 1;
    for (const auto& i : in.message_indices) m *= size(i);
    if (m > kMaxMessages) throw ValidationError("code: too many messages");
}

int CodebookSpec::size(const std::string& index) const {
    const auto& in = info(scenario);
    auto it = in.index_rate.find(index);
    if (it == in.index_rate.end()) throw ValidationError("code: unknown index '" + index + "'");
    auto r = rates.find(it->second);
    double rate = r == rates.end() ? 0.0 : r->second;
    double s = std::ceil(pow2(rate) - 1e-9);
    if (s > static_cast<double>(kMaxMessages)) throw ValidationError("code: rate '" + it->second + "' too large");
    return std::max(1, static_cast<int>(s));
}

double CodebookSpec::realized_rate(const std::string& rate) const {
    for (const auto& [idx, r] : info(scenario).index_rate)
        if (r == rate) return std::log2(static_cast<double>(size(idx)));
    throw ValidationError("code: unknown rate '" + rate + "'");
}

const Layer& Codebook::layer(const std::string& reg) const {
    for (const auto& l : layers)
        if (l.reg == reg) return l;
    throw ValidationError("code: no layer for register '" + reg + "'");
}

Layer& Codebook::layer(const std::string& reg) {
    for (auto& l : layers)
        if (l.reg == reg) return l;
    throw ValidationError("code: no layer for register '" + reg + "'");
}

int Codebook::symbol(const std::string& reg, const std::map<std::string, int>& idx) const {
    const auto& l = layer(reg);
    return l.symbols.at(IndexSpace(l.indices, sizes).flat(idx));
}

double Codebook::failure_fraction() const {
    if (messages.empty()) return 0;
    int f = 0;
    for (const auto& m : messages) f += m.failure ? 1 : 0;
    return static_cast<double>(f) / static_cast<double>(messages.size());
}

namespace {

std::uint64_t x_seed(std::uint64_t seed, int flat) { return derive_seed(derive_seed(seed, 1000), flat); }

// Draws the X layer of the general scenarios from the selected pair of each bin.
void draw_general_x(Codebook& cb, const CodebookSpec& spec) {
    const DistIndex di(spec.dist);
    auto& X = cb.layer("X");
    IndexSpace xs(X.indices, cb.sizes);
    X.symbols.assign(xs.count(), 0);
    for (const auto& m : cb.messages) {
        std::map<std::string, int> idx;
        for (std::size_t i = 0; i < cb.message_indices.size(); ++i) idx[cb.message_indices[i]] = m.idx[i];
        int f = xs.flat(idx);
        Rng rng(x_seed(cb.seed, f));
        int u = m.symbols[0], v2 = m.symbols[1], v3 = m.symbols[2];
        X.symbols[f] = sample_given(spec.dist, di, {{di.pos("U"), u}, {di.pos("V2"), v2}, {di.pos("V3"), v3}},
                                    di.pos("X"), rng);
    }
}

Codebook assemble(const Codebook& in, const CodebookSpec& spec, bool redraw_x) {
    Codebook cb = in;
    const auto& sc = cb.scenario;
    const DistIndex di(spec.dist);
    IndexSpace ms(cb.message_indices, cb.sizes);
    cb.messages.clear();
    cb.messages.reserve(ms.count());
    std::vector<int> regpos;
    for (const auto& r : cb.registers) regpos.push_back(di.pos(r));
    auto x_of = [&](const std::vector<int>& symbols) {
        std::vector<int> tu(spec.dist.registers.size());
        for (std::size_t i = 0; i < symbols.size(); ++i) tu[regpos[i]] = symbols[i];
        return spec.xmap[di.shape.index(tu)];
    };
    for (long long f = 0; f < ms.count(); ++f) {
        auto idx = ms.at(f);
        Codebook::Message m;
        for (const auto& n : cb.message_indices) m.idx.push_back(idx.at(n));
        if (sc == "multilevel_2deg") {
            m.symbols = {cb.symbol("U", idx), cb.symbol("V", idx), cb.symbol("X", idx)};
        } else {
            const bool marton = sc == "marton_common";
            const std::string c = marton ? "U0" : "U", a = marton ? "U1" : "V2", b = marton ? "U2" : "V3";
            int cv = cb.symbol(c, idx);
            double best = -1;
            int bk1 = 0, bk2 = 0, ba = 0, bb = 0;
            for (int k1 = 0; k1 < cb.sizes.at("k1"); ++k1) {
                idx["k1"] = k1;
                int av = cb.symbol(a, idx);
                for (int k2 = 0; k2 < cb.sizes.at("k2"); ++k2) {
                    idx["k2"] = k2;
                    int bv = cb.symbol(b, idx);
                    double s = covering_score(spec.dist, di, di.pos(c), cv, di.pos(a), av, di.pos(b), bv);
                    if (s > best + 1e-12) {
                        best = s;
                        bk1 = k1;
                        bk2 = k2;
                        ba = av;
                        bb = bv;
                    }
                }
            }
            m.k1 = bk1;
            m.k2 = bk2;
            m.score = best;
            m.failure = best < cb.theta - 1e-12;
            m.symbols = {cv, ba, bb};
            if (!marton) m.symbols.push_back(0);
        }
        cb.messages.push_back(std::move(m));
    }
    if (sc == "general_2deg" || sc == "general_3deg") {
        if (redraw_x) draw_general_x(cb, spec);
        for (long long f = 0; f < ms.count(); ++f) {
            auto idx = ms.at(f);
            cb.messages[f].symbols[3] = cb.symbol("X", idx);
        }
    }
    for (auto& m : cb.messages) m.x = x_of(m.symbols);
    return cb;
}

}  // namespace


Codebook generate_codebook(const CodebookSpec& spec) {
    spec.validate();
    const auto& in = info(spec.scenario);
    Codebook cb;
    cb.scenario = spec.scenario;
    cb.registers = in.registers;
    cb.message_indices = in.message_indices;
    cb.seed = spec.seed;
    cb.theta = spec.theta;
    for (const auto& [idx, rate] : in.index_rate) cb.sizes[idx] = spec.size(idx);
    const DistIndex di(spec.dist);
    const bool general = spec.scenario == "general_2deg" || spec.scenario == "general_3deg";
    int layer_no = 0;
    for (const auto& [reg, indices] : layer_layout(spec.scenario)) {
        Layer l;
        l.reg = reg;
        l.indices = indices;
        IndexSpace space(indices, cb.sizes);
        l.symbols.assign(space.count(), 0);
        if (!(general && reg == "X")) {
            Rng rng(derive_seed(spec.seed, layer_no));
            for (long long f = 0; f < space.count(); ++f) {
                auto idx = space.at(f);
                std::vector<std::pair<int, int>> given;
                if (reg == "U1" || reg == "U2") given.push_back({di.pos("U0"), cb.symbol("U0", idx)});
                if (reg == "V" || reg == "V2" || reg == "V3") given.push_back({di.pos("U"), cb.symbol("U", idx)});
                if (reg == "X") {
                    given.push_back({di.pos("U"), cb.symbol("U", idx)});
                    given.push_back({di.pos("V"), cb.symbol("V", idx)});
                }
                l.symbols[f] = sample_given(spec.dist, di, given, di.pos(reg), rng);
            }
        }
        cb.layers.push_back(std::move(l));
        ++layer_no;
    }
    return assemble(cb, spec, true);
}

Codebook encoder_select(const Codebook& cb, const CodebookSpec& spec, double theta) {
    if (!marton_type(cb.scenario)) throw ValidationError("encoder_select: scenario has no binning");
    Codebook c = cb;
    c.theta = theta;
    return assemble(c, spec, true);
}

Codebook assemble_messages(const Codebook& cb, const CodebookSpec& spec) { return assemble(cb, spec, false); }

Codebook permute_index(const Codebook& cb, const CodebookSpec& spec, const std::string& index, std::uint64_t seed) {
    auto it = cb.sizes.find(index);
    if (it == cb.sizes.end()) throw ValidationError("permute_index: unknown index '" + index + "'");
    std::vector<int> perm(it->second);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    Codebook out = cb;
    for (auto& l : out.layers) {
        if (std::find(l.indices.begin(), l.indices.end(), index) == l.indices.end()) continue;
        IndexSpace space(l.indices, cb.sizes);
        const auto& old = cb.layer(l.reg).symbols;
        for (long long f = 0; f < space.count(); ++f) {
            auto idx = space.at(f);
            idx[index] = perm[idx[index]];
            l.symbols[f] = old[space.flat(idx)];
        }
    }
    return assemble_messages(out, spec);
}

namespace {

struct Skeleton {
    int receiver;
    std::vector<std::string> registers;
    std::vector<LevelSpec> levels;
    std::vector<TestSpec> tests;
    std::vector<std::string> label_indices;
    std::vector<std::string> nonunique_indices;
};

std::vector<LevelSpec> general_levels() {
    return {{"E", {}, ""}, {"E1", {"U"}, "E"}, {"E2", {"V2"}, "E1"}, {"E3", {"V3"}, "E1"}, {"E4", {"V2", "V3"}, "E1"}};
}

std::vector<Skeleton> skeletons(const CodebookSpec& spec) {
    auto R = [&](std::initializer_list<const char*> names) {
        double s = 0;
        for (const char* n : names) s += spec.realized_rate(n);
        return s;
    };
    const auto& sc = spec.scenario;
    std::vector<Skeleton> out;
    if (sc == "multilevel_2deg") {
        out.push_back({0,
                       {"U", "V", "X"},
                       {{"E", {}, ""}, {"E1", {"U"}, "E"}, {"E2", {"V"}, "E1"}},
                       {{"T0", "E", R({"R0", "S1", "S2"}), {"U", "V", "X"}, {}},
                        {"T1", "E1", R({"S1", "S2"}), {"V", "X"}, {"U"}},
                        {"T2", "E2", R({"S2"}), {"U", "X"}, {"V"}}},
                       {"m0", "s1", "s2"},
                       {}});
        out.push_back({1, {"U"}, {{"E", {}, ""}}, {{"O", "E", R({"R0"}), {"U"}, {}}}, {"m0"}, {}});
        out.push_back({2, {"V"}, {{"E", {}, ""}}, {{"Upsilon", "E", R({"R0", "S1"}), {"V"}, {}}}, {"m0"}, {"s1"}});
    } else if (sc == "marton_common") {
        out.push_back({0,
                       {"U0", "U1"},
                       {{"E", {}, ""}, {"E1", {"U0"}, "E"}},
                       {{"Pi1", "E1", R({"S12", "r1"}), {"U1"}, {"U0"}},
                        {"Pi0", "E", R({"R0", "S11", "S21", "S12", "r1"}), {"U0", "U1"}, {}}},
                       {"m0", "m11", "m21", "m12"},
                       {"k1"}});
        out.push_back({1,
                       {"U0", "U2"},
                       {{"E", {}, ""}, {"E1", {"U0"}, "E"}},
                       {{"Pi1", "E1", R({"S22", "r2"}), {"U2"}, {"U0"}},
                        {"Pi0", "E", R({"R0", "S11", "S21", "S22", "r2"}), {"U0", "U2"}, {}}},
                       {"m0", "m11", "m21", "m22"},
                       {"k2"}});
    } else if (sc == "general_2deg") {
        out.push_back({0,
                       {"U", "V2", "V3", "X"},
                       general_levels(),
                       {{"Theta0", "E", R({"R0", "S0", "S1", "S2", "S3"}), {"U", "V2", "V3", "X"}, {}},
                        {"Theta1", "E1", R({"S1", "S2", "S3"}), {"V2", "V3", "X"}, {"U"}},
                        {"Theta2", "E2", R({"S3", "S1"}), {"U", "V3", "X"}, {"V2"}},
                        {"Theta3", "E3", R({"S2", "S1"}), {"U", "V2", "X"}, {"V3"}},
                        {"Theta4", "E4", R({"S1"}), {"U", "X"}, {"V2", "V3"}}},
                       {"m0", "s0", "s1", "s2", "s3"},
                       {}});
        out.push_back({1, {"V2"}, {{"E", {}, ""}}, {{"Q", "E", R({"R0", "S0", "S2", "r1"}), {"V2"}, {}}},
                       {"m0", "s0"}, {"s2", "k1"}});
        out.push_back({2, {"V3"}, {{"E", {}, ""}}, {{"Q", "E", R({"R0", "S0", "S3", "r2"}), {"V3"}, {}}},
                       {"m0", "s0"}, {"s3", "k2"}});
    } else {
        out.push_back({0,
                       {"U", "V2", "V3", "X"},
                       general_levels(),
                       {{"Xi0", "E", R({"R0", "R10", "R11", "S0", "S1", "S2", "S3"}), {"U", "V2", "V3", "X"}, {}},
                        {"Xi1", "E1", R({"R11", "S1", "S2", "S3"}), {"V2", "V3", "X"}, {"U"}},
                        {"Xi2", "E2", R({"S3", "S1"}), {"U", "V3", "X"}, {"V2"}},
                        {"Xi3", "E3", R({"R11", "S2", "S1"}), {"U", "V2", "X"}, {"V3"}},
                        {"Xi4", "E4", R({"S1"}), {"U", "X"}, {"V2", "V3"}}},
                       {"m0", "m10", "m11", "s0", "s1", "s2", "s3"},
                       {}});
        out.push_back({1,
                       {"U", "V2"},
                       {{"E", {}, ""}, {"E1", {"U"}, "E"}},
                       {{"Phi0", "E", R({"R0", "R10", "S0", "R11", "S2", "r1"}), {"U", "V2"}, {}},
                        {"Phi1", "E1", R({"R11", "S2", "r1"}), {"V2"}, {"U"}}},
                       {"m0", "m10", "s0", "m11", "s2"},
                       {"k1"}});
        out.push_back({2,
                       {"U", "V3"},
                       {{"E", {}, ""}},
                       {{"W", "E", R({"R0", "R10", "S0", "S3", "r2"}), {"U", "V3"}, {}}},
                       {"m0", "m10", "s0"},
                       {"s3", "k2"}});
    }
    return out;
}

}  // namespace

std::vector<ReceiverPlan> receiver_plans(const Codebook& cb, const CodebookSpec& spec) {
    std::vector<ReceiverPlan> out;
    IndexSpace ms(cb.message_indices, cb.sizes);
    for (const auto& sk : skeletons(spec)) {
        ReceiverPlan p;
        p.receiver = sk.receiver;
        p.registers = sk.registers;
        p.levels = sk.levels;
        p.tests = sk.tests;
        p.label_indices = sk.label_indices;
        p.nonunique_indices = sk.nonunique_indices;
        IndexSpace ls(sk.label_indices, cb.sizes);
        IndexSpace ns(sk.nonunique_indices, cb.sizes);
        // Registers whose symbol comes from the transmitted message (unique decoding of every
        // message index) rather than from enumerating a layer.
        const bool from_message = sk.label_indices.size() == cb.message_indices.size();
        std::vector<int> regpos;
        for (const auto& r : sk.registers)
            regpos.push_back(static_cast<int>(std::find(cb.registers.begin(), cb.registers.end(), r) -
                                              cb.registers.begin()));
        p.entries.resize(ls.count());
        for (long long l = 0; l < ls.count(); ++l) {
            auto lidx = ls.at(l);
            if (from_message) {
                std::map<std::string, int> full = lidx;
                const auto& m = cb.messages[ms.flat(full)];
                std::vector<int> t;
                for (int rp : regpos) t.push_back(m.symbols[rp]);
                p.entries[l].push_back(std::move(t));
                continue;
            }
            for (long long n = 0; n < ns.count(); ++n) {
                auto idx = lidx;
                for (const auto& [k, v] : ns.at(n)) idx[k] = v;
                std::vector<int> t;
                for (const auto& r : sk.registers) t.push_back(cb.symbol(r, idx));
                p.entries[l].push_back(std::move(t));
            }
        }
        p.message_label.resize(cb.messages.size());
        for (std::size_t i = 0; i < cb.messages.size(); ++i) {
            std::map<std::string, int> idx;
            for (std::size_t j = 0; j < cb.message_indices.size(); ++j)
                idx[cb.message_indices[j]] = cb.messages[i].idx[j];
            p.message_label[i] = ls.flat(idx);
        }
        out.push_back(std::move(p));
    }
    return out;
}

namespace {

// Receiver state, its nested pinching family and memoized per-tuple test operators; shared across
// codebooks drawn from the same spec.
class ReceiverContext {
public:
    ReceiverContext(const CodebookSpec& spec, const BroadcastChannel& ch, int receiver,
                    const std::vector<std::string>& registers, const std::vector<LevelSpec>& levels,
                    std::vector<TestSpec> tests, int dim_cap, double tol)
        : state_(marginal(channel_to_cqstate(ch, {receiver}, spec.dist, spec.xmap), registers, true)),
          fam_(state_, tol),
          tests_(std::move(tests)),
          tol_(tol) {
        check_dim_cap(state_.dB, dim_cap);
        std::map<std::string, int> ids;
        for (const auto& l : levels) {
            int parent = l.parent.empty() ? -1 : ids.at(l.parent);
            ids[l.name] = fam_.add_level(l.name, l.conditioning, parent);
        }
    }

    struct Ops {
        Mat sym;  // G G^dagger
        Mat raw;  // G
    };

    const CqState& state() const { return state_; }
    const NestedPinchingFamily& family() const { return fam_; }

    std::shared_ptr<const Ops> ops(const std::vector<int>& tuple) {
        const int t = state_.index(tuple);
        {
            std::lock_guard<std::mutex> g(mu_);
            auto it = cache_.find(t);
            if (it != cache_.end()) return it->second;
        }
        auto o = std::make_shared<Ops>();
        const int d = state_.dB;
        if (state_.pmf[t] <= 0) {
            o->sym = Mat::Zero(d, d);
            o->raw = Mat::Zero(d, d);
        } else {
            Mat g = Mat::Identity(d, d);
            for (const auto& test : tests_) g = g * projector(test, tuple);
            o->raw = g;
            o->sym = hermitize(g * g.adjoint());
        }
        std::lock_guard<std::mutex> g(mu_);
        cache_.emplace(t, o);
        return o;
    }

    Mat projector(const TestSpec& test, const std::vector<int>& tuple) const {
        const int lv = fam_.level(test.level);
        const Mat& rho = state_.cond[state_.index(tuple)];
        return positive_part_projector(fam_.pinch(lv, tuple, rho), pow2(test.rate) * fam_.reference(lv, tuple), tol_);
    }

private:
    CqState state_;
    NestedPinchingFamily fam_;
    std::vector<TestSpec> tests_;
    double tol_;
    std::mutex mu_;
    std::map<int, std::shared_ptr<const Ops>> cache_;
};

DecoderPOVM povm_from_context(const ReceiverPlan& plan, ReceiverContext& ctx, double tol) {
    DecoderPOVM out;
    out.receiver = plan.receiver;
    out.plan = plan;
    const int d = ctx.state().dB;
    const int L = static_cast<int>(plan.entries.size());
    out.pre.assign(L, Mat::Zero(d, d));
    out.raw.assign(L, Mat::Zero(d, d));
    out.entry_ops.resize(L);
    for (int l = 0; l < L; ++l) {
        // Sum in sorted tuple order so the operator depends only on the set of tuples.
        std::vector<std::pair<std::vector<int>, int>> order;
        for (int e = 0; e < static_cast<int>(plan.entries[l].size()); ++e) order.push_back({plan.entries[l][e], e});
        std::sort(order.begin(), order.end());
        out.entry_ops[l].resize(plan.entries[l].size());
        for (const auto& [t, e] : order) {
            auto o = ctx.ops(t);
            out.pre[l] += o->sym;
            out.raw[l] += o->raw;
            out.entry_ops[l][e] = o->sym;
        }
        out.max_pre_eig = std::max(out.max_pre_eig, eigenvalues(out.pre[l]).maxCoeff());
    }
    Mat sum = Mat::Zero(d, d);
    for (const auto& a : out.pre) sum += a;
    Mat root = matrix_power(hermitize(sum), -0.5, tol);
    Mat total = Mat::Zero(d, d);
    out.ops.resize(L);
    for (int l = 0; l < L; ++l) {
        out.ops[l] = hermitize(root * out.pre[l] * root);
        total += out.ops[l];
    }
    out.residual = hermitize(Mat::Identity(d, d) - total);
    out.residual_min_eig = min_eigenvalue(out.residual);
    return out;
}

std::unique_ptr<ReceiverContext> make_context(const CodebookSpec& spec, const BroadcastChannel& ch,
                                              const ReceiverPlan& plan, const PovmOptions& opt) {
    return std::make_unique<ReceiverContext>(spec, ch, plan.receiver, plan.registers, plan.levels, plan.tests,
                                             opt.dim_cap, opt.tol);
}

}  // namespace

DecoderPOVM build_receiver_povm(const Codebook& cb, const CodebookSpec& spec, const BroadcastChannel& ch,
                                const ReceiverPlan& plan, const PovmOptions& opt) {
    (void)cb;
    if (plan.receiver < 0 || plan.receiver >= ch.receivers())
        throw ValidationError("build_receiver_povm: channel has no receiver " + std::to_string(plan.receiver + 1));
    auto ctx = make_context(spec, ch, plan, opt);
    return povm_from_context(plan, *ctx, opt.tol);
}

std::vector<DecoderPOVM> build_povms(const Codebook& cb, const CodebookSpec& spec, const BroadcastChannel& ch,
                                     const PovmOptions& opt) {
    if (ch.receivers() < scenario_receivers(spec.scenario))
        throw ValidationError("code: " + spec.scenario + " needs " + std::to_string(scenario_receivers(spec.scenario)) +
                              " receivers");
    std::vector<DecoderPOVM> out;
    for (const auto& p : receiver_plans(cb, spec)) out.push_back(build_receiver_povm(cb, spec, ch, p, opt));
    return out;
}

namespace {

double sorted_mean(std::vector<double> v) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double re_trace(const Mat& a, const Mat& b) { return (a * b).trace().real(); }

}  // namespace

std::vector<double> average_error_exact(const Codebook& cb, const BroadcastChannel& ch,
                                        const std::vector<DecoderPOVM>& povms) {
    std::vector<double> out;
    for (const auto& p : povms) {
        std::vector<double> e;
        e.reserve(cb.messages.size());
        for (std::size_t i = 0; i < cb.messages.size(); ++i) {
            Mat rho = ch.output(cb.messages[i].x, p.receiver);
            e.push_back(1.0 - re_trace(p.ops[p.plan.message_label[i]], rho));
        }
        out.push_back(sorted_mean(std::move(e)));
    }
    return out;
}

HnTerms hayashi_nagaoka_terms(const Codebook& cb, const BroadcastChannel& ch, const DecoderPOVM& p) {
    HnTerms h;
    std::vector<double> ex, f, s, fr;
    h.dropped_min = kInf;
    std::vector<int> regpos;
    for (const auto& r : p.plan.registers)
        regpos.push_back(static_cast<int>(std::find(cb.registers.begin(), cb.registers.end(), r) - cb.registers.begin()));
    for (std::size_t i = 0; i < cb.messages.size(); ++i) {
        const auto& m = cb.messages[i];
        Mat rho = ch.output(m.x, p.receiver);
        const int l = p.plan.message_label[i];
        double own = re_trace(p.pre[l], rho);
        double all = 0;
        for (const auto& a : p.pre) all += re_trace(a, rho);
        ex.push_back(1.0 - re_trace(p.ops[l], rho));
        f.push_back(2.0 * (1.0 - own));
        s.push_back(4.0 * (all - own));
        fr.push_back(2.0 * (1.0 - re_trace(p.raw[l], rho)));
        std::vector<int> sent;
        for (int rp : regpos) sent.push_back(m.symbols[rp]);
        bool skipped = false;
        for (std::size_t e = 0; e < p.plan.entries[l].size(); ++e) {
            if (!skipped && p.plan.entries[l][e] == sent) {
                skipped = true;
                continue;
            }
            h.dropped_min = std::min(h.dropped_min, re_trace(p.entry_ops[l][e], rho));
        }
    }
    if (!std::isfinite(h.dropped_min)) h.dropped_min = 0;
    h.exact = sorted_mean(ex);
    h.first = sorted_mean(f);
    h.second = sorted_mean(s);
    h.first_raw = sorted_mean(fr);
    return h;
}

std::vector<ReceiverBound> analytic_bound(const CodebookSpec& spec, const BroadcastChannel& ch, double alpha,
                                          const BoundOptions& opt) {
    spec.validate();
    if (!(alpha > 0 && alpha < 1)) throw ValidationError("analytic_bound: alpha must lie in (0, 1)");
    const double order = 1.0 - alpha;
    std::vector<ReceiverBound> out;
    for (const auto& sk : skeletons(spec)) {
        ReceiverContext ctx(spec, ch, sk.receiver, sk.registers, sk.levels, sk.tests, kDefaultDimCap, opt.tol);
        const auto& st = ctx.state();
        const auto& fam = ctx.family();
        ReceiverBound rb;
        rb.receiver = sk.receiver;
        for (const auto& test : sk.tests) {
            BoundTerm bt;
            bt.test = test.name;
            bt.rate = test.rate;
            const int lv = fam.level(test.level);
            bt.nu = fam.max_count(lv);
            const double c = pow2(test.rate);
            double hyp = 0, petz = 0, sand = 0;
            for (int t = 0; t < st.num_tuples(); ++t) {
                const double p = st.pmf[t];
                if (p <= 0) continue;
                auto tu = st.tuple(t);
                const Mat& rho = st.cond[t];
                const Mat& sigma = fam.reference(lv, tu);
                Mat pinched = fam.pinch(lv, tu, rho);
                Mat P = positive_part_projector(pinched, c * sigma, opt.tol);
                hyp += p * (4.0 * (1.0 - re_trace(P, rho)) + 4.0 * c * re_trace(P, sigma));
                petz += p * petz_q(pinched, sigma, order, opt.tol);
                sand += p * sandwiched_q(rho, sigma, order, opt.tol);
            }
            const double scale = 4.0 * std::pow(c, alpha);
            const double nua = std::pow(static_cast<double>(bt.nu), alpha);
            bt.hypothesis = hyp;
            bt.petz = scale * petz;
            bt.sandwiched = scale * nua * sand;
            if (opt.with_renyi_mi) {
                double I = test.mi_cond.empty() ? renyi_mi_up(st, test.mi_left, order, true)
                                                : renyi_mi_down(st, test.mi_left, test.mi_cond, order, opt.down).value;
                bt.renyi_mi = scale * nua * std::pow(2.0, -alpha * I);
            }
            rb.hypothesis += bt.hypothesis;
            rb.petz += bt.petz;
            rb.sandwiched += bt.sandwiched;
            rb.renyi_mi += bt.renyi_mi;
            rb.terms.push_back(bt);
        }
        rb.petz_vacuous = rb.petz >= 1;
        rb.sandwiched_vacuous = rb.sandwiched >= 1;
        rb.renyi_mi_vacuous = opt.with_renyi_mi && rb.renyi_mi >= 1;
        out.push_back(std::move(rb));
    }
    return out;
}

MonteCarloResult monte_carlo(const CodebookSpec& spec, const BroadcastChannel& ch, const MonteCarloOptions& opt) {
    if (opt.trials < 1) throw ValidationError("monte_carlo: trials must be >= 1");
    spec.validate();
    const int R = scenario_receivers(spec.scenario);
    if (ch.receivers() < R)
        throw ValidationError("code: " + spec.scenario + " needs " + std::to_string(R) + " receivers");
    std::vector<std::unique_ptr<ReceiverContext>> ctx;
    for (const auto& sk : skeletons(spec))
        ctx.push_back(std::make_unique<ReceiverContext>(spec, ch, sk.receiver, sk.registers, sk.levels, sk.tests,
                                                        opt.povm.dim_cap, opt.povm.tol));
    struct Trial {
        std::vector<double> err, hn, pre;
        double failure = 0, residual = 0;
    };
    std::vector<Trial> trials(opt.trials);
    auto run = [&](int w) {
        for (int i = w; i < opt.trials; i += std::max(1, opt.workers)) {
            CodebookSpec s = spec;
            s.seed = derive_seed(opt.master_seed, static_cast<std::uint64_t>(i));
            Codebook cb = generate_codebook(s);
            auto plans = receiver_plans(cb, s);
            Trial tr;
            tr.residual = kInf;
            for (std::size_t k = 0; k < plans.size(); ++k) {
                auto povm = povm_from_context(plans[k], *ctx[k], opt.povm.tol);
                auto h = hayashi_nagaoka_terms(cb, ch, povm);
                tr.err.push_back(h.exact);
                tr.hn.push_back(h.total());
                tr.pre.push_back(povm.max_pre_eig);
                tr.residual = std::min(tr.residual, povm.residual_min_eig);
            }
            tr.failure = cb.failure_fraction();
            trials[i] = std::move(tr);
        }
    };
    const int W = std::max(1, std::min(opt.workers, opt.trials));
    if (W == 1) {
        run(0);
    } else {
        std::vector<std::future<void>> fs;
        for (int w = 0; w < W; ++w) fs.push_back(std::async(std::launch::async, run, w));
        for (auto& f : fs) f.get();
    }
    MonteCarloResult res;
    res.trials = opt.trials;
    res.receivers.resize(R);
    res.min_residual = kInf;
    std::vector<double> fail;
    for (const auto& tr : trials) {
        res.errors.push_back(tr.err);
        fail.push_back(tr.failure);
        res.min_residual = std::min(res.min_residual, tr.residual);
    }
    res.failure_fraction = sorted_mean(fail);
    for (int k = 0; k < R; ++k) {
        std::vector<double> e, h;
        double pre = 0;
        for (const auto& tr : trials) {
            e.push_back(tr.err[k]);
            h.push_back(tr.hn[k]);
            pre = std::max(pre, tr.pre[k]);
        }
        auto& rs = res.receivers[k];
        rs.mean = sorted_mean(e);
        rs.hn_mean = sorted_mean(h);
        rs.max_pre_eig = pre;
        if (opt.trials > 1) {
            double v = 0;
            for (double x : e) v += (x - rs.mean) * (x - rs.mean);
            v /= static_cast<double>(opt.trials - 1);
            rs.std_error = std::sqrt(v / static_cast<double>(opt.trials));
        }
    }
    return res;
}

PowerInstance power_instance(const BroadcastChannel& ch, const JointDistribution& dist, const std::vector<int>& xmap,
                             int n, int dim_cap) {
    if (n < 1) throw ValidationError("power_instance: n must be >= 1");
    ch.validate();
    dist.validate();
    if (static_cast<int>(xmap.size()) != dist.num_tuples()) throw ValidationError("power_instance: map is not total");
    long long total = 1, inputs = 1;
    for (int i = 0; i < n; ++i) {
        total *= ch.total_dim();
        inputs *= ch.input_size;
    }
    check_dim_cap(total, dim_cap);
    PowerInstance out;
    const int K = ch.receivers();
    out.channel.input_size = static_cast<int>(inputs);
    for (int d : ch.dims) {
        long long p = 1;
        for (int i = 0; i < n; ++i) p *= d;
        out.channel.dims.push_back(static_cast<int>(p));
    }
    // Factor order of the plain product: copy-major (B1 B2 ... BK) per copy. Target: receiver-major.
    std::vector<int> fdims, perm;  // perm[target factor] = source factor
    for (int c = 0; c < n; ++c)
        for (int k = 0; k < K; ++k) fdims.push_back(ch.dims[k]);
    for (int k = 0; k < K; ++k)
        for (int c = 0; c < n; ++c) perm.push_back(c * K + k);
    const int F = static_cast<int>(fdims.size());
    const int D = static_cast<int>(total);
    std::vector<int> src_of(D);
    for (int j = 0; j < D; ++j) {
        // digits of j in the target order
        std::vector<int> digit(F);
        int r = j;
        for (int f = F - 1; f >= 0; --f) {
            int dim = fdims[perm[f]];
            digit[f] = r % dim;
            r /= dim;
        }
        std::vector<int> sdigit(F);
        for (int f = 0; f < F; ++f) sdigit[perm[f]] = digit[f];
        int s = 0;
        for (int f = 0; f < F; ++f) s = s * fdims[f] + sdigit[f];
        src_of[j] = s;
    }
    for (long long x = 0; x < inputs; ++x) {
        long long r = x;
        std::vector<int> xs(n);
        for (int c = n - 1; c >= 0; --c) {
            xs[c] = static_cast<int>(r % ch.input_size);
            r /= ch.input_size;
        }
        std::vector<Mat> parts;
        for (int c = 0; c < n; ++c) parts.push_back(ch.outputs[xs[c]]);
        Mat prod = kron(parts);
        Mat o(D, D);
        for (int a = 0; a < D; ++a)
            for (int b = 0; b < D; ++b) o(a, b) = prod(src_of[a], src_of[b]);
        out.channel.outputs.push_back(o);
    }
    // Registers keep their names; a value is the row-major tuple of per-copy values.
    for (const auto& r : dist.registers) {
        long long s = 1;
        for (int i = 0; i < n; ++i) s *= r.size;
        out.dist.registers.push_back({r.name, static_cast<int>(s)});
    }
    CqState base;
    base.registers = dist.registers;
    CqState big;
    big.registers = out.dist.registers;
    const int T = out.dist.num_tuples();
    out.dist.pmf.assign(T, 0.0);
    out.xmap.assign(T, 0);
    for (int t = 0; t < T; ++t) {
        auto tu = big.tuple(t);
        double p = 1;
        long long x = 0;
        std::vector<std::vector<int>> copies(n, std::vector<int>(tu.size()));
        for (std::size_t j = 0; j < tu.size(); ++j) {
            int v = tu[j];
            for (int c = n - 1; c >= 0; --c) {
                copies[c][j] = v % dist.registers[j].size;
                v /= dist.registers[j].size;
            }
        }
        for (int c = 0; c < n; ++c) {
            int bt = base.index(copies[c]);
            p *= dist.pmf[bt];
            x = x * ch.input_size + xmap[bt];
        }
        out.dist.pmf[t] = p;
        out.xmap[t] = static_cast<int>(x);
    }
    return out;
}

}  // namespace qbc
