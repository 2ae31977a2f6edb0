// Entropic atoms, the catalog of rate-region inequality systems, and region-level checks.
#pragma once

#include "qbc/cq_state.hpp"
#include "qbc/mutual_info.hpp"
#include "qbc/polyhedra.hpp"
#include "qbc/random.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace qbc {

inline constexpr double kMarkovTol = 1e-9;

// I(A;B|C) (Shannon), Iup[a](A;B) or Idown[a](A;B|C) (sandwiched Renyi). A, C are
// classical registers; B is a receiver "B<k>" or a list of classical registers.
struct AtomExpr {
    enum class Kind { shannon_mi, renyi_up, renyi_down };
    Kind kind = Kind::shannon_mi;
    std::vector<std::string> left;
    std::vector<std::string> right;  // classical right side; empty when a receiver is named
    int receiver = -1;               // 0-based receiver index, or -1
    std::vector<std::string> cond;
    double order = 1.0;

    std::string key() const;  // canonical text form
};

AtomExpr parse_atom(const std::string& text);

struct AtomValue {
    AtomExpr expr;
    double value = 0;
    Rational rational;  // quantize(value)
};

// Atom evaluation on (channel, distribution, input map) with memoization. Aliases
// rename registers inside expressions before evaluation (used for identifications
// such as U = V). Thread-safe.
class AtomTable {
public:
    AtomTable(BroadcastChannel channel, JointDistribution dist, std::vector<int> xmap,
              std::map<std::string, std::string> aliases = {}, DownOptions down = {});

    const AtomValue& get(const std::string& expr);
    const AtomValue& get(const AtomExpr& expr);
    std::vector<AtomValue> entries() const;

    AtomTable with_aliases(std::map<std::string, std::string> aliases) const;
    std::string alias(const std::string& reg) const;

    const BroadcastChannel& channel() const { return channel_; }
    const JointDistribution& distribution() const { return dist_; }
    const std::vector<int>& xmap() const { return xmap_; }
    // Distribution over the registers plus X (appended when X is not a register).
    const JointDistribution& classical_joint() const { return joint_; }
    const CqState& receiver_state(int receiver);

private:
    BroadcastChannel channel_;
    JointDistribution dist_;
    std::vector<int> xmap_;
    std::map<std::string, std::string> aliases_;
    DownOptions down_;
    JointDistribution joint_;
    struct Cache {
        std::mutex mu;
        std::map<std::string, std::unique_ptr<AtomValue>> atoms;
        std::map<int, std::unique_ptr<CqState>> states;
    };
    std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
    AtomExpr resolve(const AtomExpr& e) const;
    double evaluate(const AtomExpr& e);
};

// A - B - C over the classical joint (registers may include X).
struct MarkovChain {
    std::vector<std::string> a, b, c;
};

class MarkovViolation : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Largest |p(abc) p(b) - p(ab) p(bc)|.
double markov_gap(const JointDistribution& dist, const MarkovChain& chain);
void check_markov(const JointDistribution& dist, const std::vector<MarkovChain>& chains, double tol = kMarkovTol);

struct TemplateTerm {
    Rational coeff;
    std::string atom;
};

// sum coeffs*vars (<=, >=, =) sum coeff*atom
struct InequalityTemplate {
    enum class Rel { le, ge, eq };
    std::map<std::string, Rational> coeffs;
    Rel rel = Rel::le;
    std::vector<TemplateTerm> rhs;
    std::string text;
};

InequalityTemplate parse_template(const std::string& text);

struct RegionSpec {
    std::string id;
    std::string scenario;  // marton | multilevel | general_two | three_degraded
    std::vector<std::string> rate_vars;
    std::vector<std::string> aux_vars;
    std::vector<std::string> registers;
    int receivers = 0;
    std::vector<MarkovChain> markov;
    std::vector<InequalityTemplate> templates;
    bool converse = false;
    std::string banner;
};

const std::vector<std::string>& region_ids();
const RegionSpec& region_spec(const std::string& id);
// Family name (marton, multilevel, general2, general3, general3_fm) to (prelim, final) ids.
std::pair<std::string, std::string> fm_pair(const std::string& family);

struct RegionInstance {
    std::string spec_id;
    InequalitySystem system;
    std::vector<AtomValue> atoms;
    std::string banner;
};

// Checks the region's Markov chains, evaluates all atoms (Shannon) and materializes the
// system with nonnegativity of every variable.
RegionInstance evaluate_region(const RegionSpec& spec, AtomTable& table, double markov_tol = kMarkovTol);

struct FmCheck {
    bool equal = false;
    bool fm_in_final = false;  // FM image contained in the final region
    bool final_in_fm = false;
    InequalitySystem projected;
    InequalitySystem final_system;
    FmStats stats;
    double seconds = 0;
};

FmCheck reproduce_final_region(const std::string& prelim_id, const std::string& final_id, AtomTable& table);

// The multilevel region with V identified with U against the superposition region on a (U, X) table.
bool superposition_collapse(AtomTable& ux_table);

// I(U;B2) - [I(V2;B2) - I(V2;B1|U)]: nonnegative for degraded B2 = M(B1) under U - V2 - X.
double data_processing_margin(AtomTable& table);

// Converse region of the general two-degraded setting against the multilevel region
// evaluated with V := V3 on the same table.
struct ConverseReport {
    bool converse_in_reduced = false;
    bool reduced_in_converse = false;
    double data_processing_margin = 0;
};
ConverseReport converse_coherence(AtomTable& table);

// Generators.
BroadcastChannel random_channel(int input_size, const std::vector<int>& dims, Rng& rng, bool pure = false);
// B1 random, B2 = M(B1) for a random channel M, B3 random.
BroadcastChannel degraded_channel(int input_size, int dB, Rng& rng);
// Identical outputs on every receiver.
BroadcastChannel identical_channel(int input_size, int dB, int receivers, Rng& rng);
// Random cptp map on d-dimensional states (Stinespring with k environment levels).
std::vector<Mat> random_kraus(int d_in, int d_out, int k, Rng& rng);
Mat apply_kraus(const std::vector<Mat>& kraus, const Mat& rho);

struct DistributionWithMap {
    JointDistribution dist;
    std::vector<int> xmap;
};
// p(u0) [(1-c) p(u1|u0) p(u2|u0) + c q(u1,u2|u0)] with a random deterministic x(u0,u1,u2);
// c = coupling in [0, 1] controls I(U1;U2|U0).
DistributionWithMap random_marton_distribution(int d0, int d1, int d2, int input_size, Rng& rng,
                                               double coupling = 1.0);
// p(u) p(v|u) p(x|v) with X a register.
DistributionWithMap random_multilevel_distribution(int dU, int dV, int input_size, Rng& rng);
// p(u) p(a,b|u) p(x|u,a,b) with V2 = (U, A), V3 = (U, B), so U is a function of V2 and of V3 and
// both U - V2 - (V3, X) and U - V3 - (V2, X) hold. p(a,b|u) = (1-c) p(a|u) p(b|u) + c q(a,b|u).
DistributionWithMap double_markov_distribution(int dU, int dA, int dB, int input_size, Rng& rng,
                                               double coupling = 1.0);
// p(u) p(x|u) with registers U and X.
DistributionWithMap random_superposition_distribution(int dU, int input_size, Rng& rng);

// Same distribution on larger alphabets (new symbols get probability zero and input 0).
DistributionWithMap embed_distribution(const DistributionWithMap& d, const std::map<std::string, int>& sizes);

// Channel and distribution whose final region (for the family's final spec) is nonempty with every
// rate individually positive. Marton: pure qubit outputs, |U0|=|U1|=|U2|=2, four inputs. Multilevel:
// degraded construction. General families: pure qubit outputs with the double Markov generator.
// Candidates are drawn from derive_seed(seed, attempt).
struct InstanceSample {
    BroadcastChannel channel;
    DistributionWithMap dist;
    std::uint64_t seed = 0;
    int attempts = 0;
};
InstanceSample sample_instance(const std::string& family, std::uint64_t seed, int max_attempts = 200);

// Pareto search over distributions for a region spec.
struct ParetoConfig {
    std::map<std::string, int> alphabet;  // auxiliary alphabet sizes
    int candidates = 40;
    int refinements = 20;
    int directions = 16;
    std::uint64_t seed = 1;
    int workers = 1;
    std::vector<DistributionWithMap> warm_start;  // extra starting points (alphabets may be smaller)
};

struct ParetoPoint {
    std::vector<double> rates;  // in rate_vars order
    DistributionWithMap witness;
};

struct ParetoResult {
    std::vector<std::string> rate_vars;
    std::vector<ParetoPoint> frontier;  // nondominated corner points
    int evaluated = 0;
};

ParetoResult pareto_search(const RegionSpec& spec, const BroadcastChannel& channel, const ParetoConfig& cfg);

// Classical capacity-type value max_p I(X;B_k) by a simplex grid/ascent search (for oracles).
double holevo_information(const BroadcastChannel& ch, int receiver, const std::vector<double>& px);

}  // namespace qbc
