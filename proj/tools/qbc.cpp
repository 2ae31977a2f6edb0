// Command-line front end: verify, region, simulate, eigencount.
#include "qbc/code_sim.hpp"
#include "qbc/io.hpp"
#include "qbc/lemmas.hpp"
#include "qbc/pinching.hpp"
#include "qbc/rate_region.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>
#include <sstream>

using namespace qbc;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInput = 2;

struct Common {
    std::uint64_t seed = 1;
    double tol = -1;  // negative: command default
    int trials = -1;
    std::vector<double> alpha;
    std::string out;
    int workers = 1;
    int dim_cap = kDefaultDimCap;
    bool seed_given = false;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--seed", c.seed, "master seed");
    app->add_option("--tol", c.tol, "tolerance override");
    app->add_option("--trials", c.trials, "number of trials");
    app->add_option("--alpha", c.alpha, "alpha values");
    app->add_option("--out", c.out, "output path (default stdout)");
    app->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
    app->add_option("--dim-cap", c.dim_cap, "largest matrix dimension")->check(CLI::PositiveNumber);
}

Json header(const std::string& command, const Common& c) {
    return {{"tool", "qbc"}, {"version", version()}, {"command", command}, {"seed", c.seed}};
}

void emit(const Json& j, const std::string& out) {
    const std::string text = j.dump(2) + "\n";
    if (out.empty())
        std::cout << text;
    else
        write_text_file(out, text);
}

double tol_or(const Common& c, double fallback) { return c.tol >= 0 ? c.tol : fallback; }

std::string need(const std::string& value, const std::string& flag) {
    if (value.empty()) throw InputError(flag + ": required");
    return value;
}

// ---- verify

int run_verify(const std::string& suite, const Common& c) {
    const int trials = c.trials >= 0 ? c.trials : 100;
    const double tol = tol_or(c, kCertificateTol);
    Json j = header("verify", c);
    j["suite"] = suite;
    j["trials"] = trials;
    j["tolerances"] = {{"certificate", tol}, {"cluster", kClusterTol}};
    Json reports = Json::array();
    bool ok = true;
    for (const auto& id : suite_lemmas(suite)) {
        SweepReport r = sweep_lemma(id, trials, c.seed, tol, c.workers);
        Json certs = Json::array();
        for (const auto& cert : r.certificates)
            certs.push_back({{"lemma_id", cert.lemma_id},
                             {"instance", cert.instance_digest},
                             {"lhs", cert.lhs},
                             {"rhs", cert.rhs},
                             {"margin", cert.margin},
                             {"passed", cert.passed}});
        reports.push_back({{"lemma_id", r.lemma_id},
                           {"instances", r.instances},
                           {"certificates", certs},
                           {"min_margin", r.min_margin},
                           {"failures", r.failures},
                           {"passed", r.passed()}});
        ok = ok && r.passed();
    }
    j["reports"] = reports;
    j["passed"] = ok;
    emit(j, c.out);
    return ok ? kExitPass : kExitFail;
}

// ---- region

struct RegionArgs {
    std::string theorem, channel, dist, a, b, expect, slice, csv, alphabet;
    int candidates = 40, refinements = 20, directions = 16;
};

AtomTable load_table(const RegionArgs& r, const Common& c) {
    auto ch = channel_from_json(read_json_file(need(r.channel, "--channel")));
    auto d = distribution_from_json(read_json_file(need(r.dist, "--dist")));
    DownOptions down;
    down.seed = c.seed;
    down.workers = c.workers;
    return AtomTable(ch, d.dist, d.xmap, {}, down);
}

Json region_tolerances(const Common& c) {
    return {{"markov", tol_or(c, kMarkovTol)}, {"quantization", "2^-40"}, {"input", kInputTol}};
}

InequalitySystem rate_projection(const RegionSpec& spec, const InequalitySystem& s) {
    return spec.aux_vars.empty() ? s : fm_eliminate(s, spec.aux_vars);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

Json write_slice(const InequalitySystem& rates, const std::string& slice, const std::string& csv) {
    auto vars = split(slice, ',');
    if (vars.size() != 2) throw InputError("--slice: expected two rate variables 'A,B'");
    std::vector<std::string> drop;
    for (const auto& v : rates.variables)
        if (v != vars[0] && v != vars[1]) drop.push_back(v);
    for (const auto& v : vars)
        if (!rates.has_variable(v)) throw InputError("--slice: unknown rate variable '" + v + "'");
    InequalitySystem plane = fm_eliminate(rates, drop);
    auto pts = polygon_vertices(plane);
    const std::string& x = plane.variables[0];
    const std::string& y = plane.variables[1];
    std::ostringstream os;
    os << x << "," << y << "," << x << "_exact," << y << "_exact\n";
    Json out = Json::array();
    for (const auto& p : pts) {
        os.precision(17);
        os << to_double(p.at(x)) << "," << to_double(p.at(y)) << "," << to_string(p.at(x)) << ","
           << to_string(p.at(y)) << "\n";
        out.push_back({{x, to_string(p.at(x))}, {y, to_string(p.at(y))}});
    }
    if (!csv.empty()) write_text_file(csv, os.str());
    return {{"variables", {x, y}}, {"vertices", out}};
}

int run_region_evaluate(const RegionArgs& r, const Common& c) {
    const RegionSpec& spec = region_spec(need(r.theorem, "--theorem"));
    AtomTable table = load_table(r, c);
    RegionInstance inst = evaluate_region(spec, table, tol_or(c, kMarkovTol));
    Json j = header("region evaluate", c);
    j["tolerances"] = region_tolerances(c);
    j["region"] = spec.id;
    j["banner"] = inst.banner;
    j["atoms"] = atoms_to_json(inst.atoms);
    j["system"] = system_to_json(inst.system);
    if (!r.slice.empty()) j["slice"] = write_slice(rate_projection(spec, inst.system), r.slice, r.csv);
    emit(j, c.out);
    return kExitPass;
}

int run_region_fm_check(const RegionArgs& r, const Common& c) {
    auto [pre, fin] = fm_pair(need(r.theorem, "--theorem"));
    AtomTable table = load_table(r, c);
    FmCheck f = reproduce_final_region(pre, fin, table);
    Json j = header("region fm-check", c);
    j["tolerances"] = region_tolerances(c);
    j["theorem"] = r.theorem;
    j["preliminary"] = pre;
    j["final"] = fin;
    j["atoms"] = atoms_to_json(table.entries());
    j["projected"] = system_to_json(f.projected);
    j["final_system"] = system_to_json(f.final_system);
    j["fm_in_final"] = f.fm_in_final;
    j["final_in_fm"] = f.final_in_fm;
    j["equal"] = f.equal;
    j["fm_stats"] = {{"steps", f.stats.steps}, {"max_intermediate", f.stats.max_intermediate},
                     {"lp_calls", f.stats.lp_calls}};
    j["passed"] = f.equal;
    emit(j, c.out);
    return f.equal ? kExitPass : kExitFail;
}

int run_region_compare(const RegionArgs& r, const Common& c) {
    const RegionSpec& sa = region_spec(need(r.a, "--a"));
    const RegionSpec& sb = region_spec(need(r.b, "--b"));
    AtomTable table = load_table(r, c);
    auto ia = evaluate_region(sa, table, tol_or(c, kMarkovTol));
    auto ib = evaluate_region(sb, table, tol_or(c, kMarkovTol));
    auto pa = rate_projection(sa, ia.system), pb = rate_projection(sb, ib.system);
    const bool a_in_b = contains(pa, pb), b_in_a = contains(pb, pa);
    Json j = header("region compare", c);
    j["tolerances"] = region_tolerances(c);
    j["a"] = sa.id;
    j["b"] = sb.id;
    j["a_system"] = system_to_json(pa);
    j["b_system"] = system_to_json(pb);
    j["a_in_b"] = a_in_b;
    j["b_in_a"] = b_in_a;
    j["equal"] = a_in_b && b_in_a;
    bool ok = true;
    if (!r.expect.empty()) {
        if (r.expect == "equal")
            ok = a_in_b && b_in_a;
        else if (r.expect == "a_in_b")
            ok = a_in_b;
        else if (r.expect == "b_in_a")
            ok = b_in_a;
        else
            throw InputError("--expect: one of equal, a_in_b, b_in_a");
        j["expect"] = r.expect;
        j["passed"] = ok;
    }
    emit(j, c.out);
    return ok ? kExitPass : kExitFail;
}

int run_region_pareto(const RegionArgs& r, const Common& c) {
    const RegionSpec& spec = region_spec(need(r.theorem, "--theorem"));
    auto ch = channel_from_json(read_json_file(need(r.channel, "--channel")));
    ParetoConfig cfg;
    cfg.candidates = r.candidates;
    cfg.refinements = r.refinements;
    cfg.directions = r.directions;
    cfg.seed = c.seed;
    cfg.workers = c.workers;
    for (const auto& kv : split(r.alphabet, ',')) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw InputError("--alphabet: expected NAME=SIZE entries");
        try {
            cfg.alphabet[kv.substr(0, eq)] = std::stoi(kv.substr(eq + 1));
        } catch (const std::exception&) {
            throw InputError("--alphabet: bad size in '" + kv + "'");
        }
    }
    ParetoResult res = pareto_search(spec, ch, cfg);
    Json j = header("region pareto", c);
    j["tolerances"] = region_tolerances(c);
    j["region"] = spec.id;
    j["config"] = {{"candidates", cfg.candidates}, {"refinements", cfg.refinements},
                   {"directions", cfg.directions}, {"alphabet", cfg.alphabet}};
    j["rate_vars"] = res.rate_vars;
    j["evaluated"] = res.evaluated;
    Json pts = Json::array();
    for (const auto& p : res.frontier) pts.push_back({{"rates", p.rates}, {"witness", distribution_to_json(p.witness)}});
    j["frontier"] = pts;
    emit(j, c.out);
    return kExitPass;
}

// ---- simulate

Json load_ref(const Json& spec, const std::string& key, const std::filesystem::path& base) {
    if (!spec.contains(key)) throw InputError("simulate." + key + ": missing");
    const Json& v = spec[key];
    if (v.is_string()) {
        std::filesystem::path p(v.get<std::string>());
        if (p.is_relative()) p = base / p;
        return read_json_file(p.string());
    }
    if (!v.is_object()) throw InputError("simulate." + key + ": expected a path or an object");
    return v;
}

int run_simulate(const std::string& spec_path, Common c) {
    Json s = read_json_file(need(spec_path, "--spec"));
    if (!s.is_object()) throw InputError(spec_path + ": expected an object");
    const auto base = std::filesystem::path(spec_path).parent_path();
    CodebookSpec cs;
    if (!s.contains("scenario") || !s["scenario"].is_string()) throw InputError("simulate.scenario: missing");
    cs.scenario = s["scenario"].get<std::string>();
    if (s.contains("rates")) {
        if (!s["rates"].is_object()) throw InputError("simulate.rates: expected an object");
        for (const auto& [k, v] : s["rates"].items()) {
            if (!v.is_number()) throw InputError("simulate.rates." + k + ": expected a number");
            cs.rates[k] = v.get<double>();
        }
    }
    auto ch = channel_from_json(load_ref(s, "channel", base));
    auto d = distribution_from_json(load_ref(s, "distribution", base));
    cs.dist = d.dist;
    cs.xmap = d.xmap;
    if (s.contains("theta")) cs.theta = s["theta"].get<double>();
    if (c.alpha.empty() && s.contains("alpha")) {
        if (s["alpha"].is_number())
            c.alpha = {s["alpha"].get<double>()};
        else
            c.alpha = s["alpha"].get<std::vector<double>>();
    }
    if (c.trials < 0) c.trials = s.value("trials", 100);
    if (!c.seed_given && s.contains("seed")) c.seed = s["seed"].get<std::uint64_t>();
    cs.seed = c.seed;
    cs.validate();

    MonteCarloOptions mo;
    mo.trials = c.trials;
    mo.master_seed = c.seed;
    mo.workers = c.workers;
    mo.povm.dim_cap = c.dim_cap;
    const double rtol = tol_or(c, kResidualTol);
    MonteCarloResult mc = monte_carlo(cs, ch, mo);

    Json j = header("simulate", c);
    j["tolerances"] = {{"residual", rtol}, {"cluster", kClusterTol}, {"input", kInputTol}};
    j["scenario"] = cs.scenario;
    j["trials"] = mc.trials;
    j["theta"] = cs.theta;
    Json rates = Json::object(), realized = Json::object();
    for (const auto& r : scenario_rates(cs.scenario)) {
        rates[r] = cs.rates.count(r) ? cs.rates.at(r) : 0.0;
        realized[r] = cs.realized_rate(r);
    }
    j["rates"] = rates;
    j["realized_rates"] = realized;
    j["encoder_failure_rate"] = mc.failure_fraction;
    Json rec = Json::array();
    for (std::size_t k = 0; k < mc.receivers.size(); ++k) {
        const auto& st = mc.receivers[k];
        rec.push_back({{"receiver", k + 1},
                       {"measured_error", st.mean},
                       {"std_error", st.std_error},
                       {"total_error", st.mean + mc.failure_fraction},
                       {"hayashi_nagaoka_mean", st.hn_mean},
                       {"max_pre_eigenvalue", st.max_pre_eig}});
    }
    j["receivers"] = rec;
    Json bounds = Json::array();
    for (double a : c.alpha) {
        BoundOptions bo;
        bo.down.seed = c.seed;
        bo.down.workers = c.workers;
        auto rb = analytic_bound(cs, ch, a, bo);
        Json per = Json::array();
        for (const auto& b : rb) {
            Json terms = Json::array();
            for (const auto& t : b.terms)
                terms.push_back({{"test", t.test},
                                 {"rate", t.rate},
                                 {"nu", t.nu},
                                 {"hypothesis", t.hypothesis},
                                 {"petz", t.petz},
                                 {"sandwiched", t.sandwiched},
                                 {"renyi_mi", t.renyi_mi}});
            per.push_back({{"receiver", b.receiver + 1},
                           {"hypothesis", b.hypothesis},
                           {"petz", b.petz},
                           {"sandwiched", b.sandwiched},
                           {"renyi_mi", b.renyi_mi},
                           {"petz_vacuous", b.petz_vacuous},
                           {"sandwiched_vacuous", b.sandwiched_vacuous},
                           {"renyi_mi_vacuous", b.renyi_mi_vacuous},
                           {"terms", terms}});
        }
        bounds.push_back({{"alpha", a}, {"receivers", per}});
    }
    j["bounds"] = bounds;
    const bool ok = mc.min_residual >= -rtol;
    j["min_residual"] = mc.min_residual;
    j["passed"] = ok;
    emit(j, c.out);
    return ok ? kExitPass : kExitFail;
}

// ---- eigencount

int run_eigencount(const std::string& base_path, int n, int max_sequences, const std::string& csv, const Common& c) {
    CqState s = cqstate_from_json(read_json_file(need(base_path, "--base")));
    if (n < 1) throw InputError("--n: must be >= 1");
    CountOptions o;
    o.seed = c.seed;
    o.tol = tol_or(c, kClusterTol);
    o.dim_cap = c.dim_cap;
    o.max_sequences = max_sequences;
    Json j = header("eigencount", c);
    j["tolerances"] = {{"cluster", o.tol}, {"input", kInputTol}};
    j["max_sequences"] = o.max_sequences;
    Json rows = Json::array();
    std::ostringstream os;
    os << "n,name,observed,bound,sequences,exhaustive,within\n";
    bool ok = true;
    for (int k = 1; k <= n; ++k) {
        CountReport r = check_count_bounds(s, k, o);
        for (const auto& l : r.lines) {
            rows.push_back({{"n", k},
                            {"name", l.name},
                            {"observed", l.observed},
                            {"bound", l.bound},
                            {"sequences", l.sequences},
                            {"exhaustive", l.exhaustive},
                            {"within", l.within()}});
            os << k << "," << l.name << "," << l.observed << "," << l.bound << "," << l.sequences << ","
               << (l.exhaustive ? 1 : 0) << "," << (l.within() ? 1 : 0) << "\n";
            ok = ok && l.within();
        }
    }
    j["counts"] = rows;
    j["passed"] = ok;
    if (!csv.empty()) write_text_file(csv, os.str());
    emit(j, c.out);
    return ok ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qbc: rate regions, certificates and one-shot code simulation for quantum broadcast channels"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version()));

    Common common;
    std::string suite = "all";
    auto* verify = app.add_subcommand("verify", "numerical certificates of the operator inequalities");
    verify->add_option("--suite", suite, "lemmas | pinching | all | <lemma id>");
    add_common(verify, common);

    RegionArgs ra;
    auto* region = app.add_subcommand("region", "rate-region evaluation and checks");
    region->require_subcommand(1);
    auto* evaluate = region->add_subcommand("evaluate", "evaluate a region on a channel and distribution");
    auto* fm = region->add_subcommand("fm-check", "eliminate auxiliaries and compare with the final region");
    auto* compare = region->add_subcommand("compare", "containment between two regions");
    auto* pareto = region->add_subcommand("pareto", "search distributions for the rate frontier");
    for (auto* sub : {evaluate, fm, compare, pareto}) {
        add_common(sub, common);
        sub->add_option("--channel", ra.channel, "channel JSON");
    }
    for (auto* sub : {evaluate, fm, compare}) sub->add_option("--dist", ra.dist, "distribution JSON");
    evaluate->add_option("--theorem", ra.theorem, "region id");
    evaluate->add_option("--slice", ra.slice, "two rate variables for a 2D vertex list, e.g. R0,R1");
    evaluate->add_option("--csv", ra.csv, "CSV output for the slice");
    fm->add_option("--theorem", ra.theorem, "marton | multilevel | general2 | general3 | general3_fm");
    compare->add_option("--a", ra.a, "region id");
    compare->add_option("--b", ra.b, "region id");
    compare->add_option("--expect", ra.expect, "equal | a_in_b | b_in_a");
    pareto->add_option("--theorem", ra.theorem, "region id");
    pareto->add_option("--alphabet", ra.alphabet, "auxiliary sizes, e.g. U=2,V=2");
    pareto->add_option("--candidates", ra.candidates)->check(CLI::PositiveNumber);
    pareto->add_option("--refinements", ra.refinements)->check(CLI::NonNegativeNumber);
    pareto->add_option("--directions", ra.directions)->check(CLI::PositiveNumber);

    std::string spec_path;
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo one-shot codes against the analytic bounds");
    simulate->add_option("--spec", spec_path, "simulation spec JSON");
    add_common(simulate, common);

    std::string base_path, csv;
    int n = 1, max_sequences = 256;
    auto* eigencount = app.add_subcommand("eigencount", "distinct-eigenvalue counts against the polynomial bounds");
    eigencount->add_option("--base", base_path, "cq-state JSON");
    eigencount->add_option("--n", n, "largest block length");
    eigencount->add_option("--max-sequences", max_sequences)->check(CLI::PositiveNumber);
    eigencount->add_option("--csv", csv, "CSV table output");
    add_common(eigencount, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    common.seed_given = simulate->get_option("--seed")->count() > 0;
    try {
        if (*verify) return run_verify(suite, common);
        if (*evaluate) return run_region_evaluate(ra, common);
        if (*fm) return run_region_fm_check(ra, common);
        if (*compare) return run_region_compare(ra, common);
        if (*pareto) return run_region_pareto(ra, common);
        if (*simulate) return run_simulate(spec_path, common);
        if (*eigencount) return run_eigencount(base_path, n, max_sequences, csv, common);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
