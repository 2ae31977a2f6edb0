// One-shot random codes for the four broadcast scenarios: codebooks with
// superposition and binning, pinched threshold decoders, exact error and the
// analytic error bounds.
#pragma once

#include "qbc/cq_state.hpp"
#include "qbc/mutual_info.hpp"
#include "qbc/random.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace qbc {

inline constexpr double kResidualTol = 1e-9;

// Scenarios: marton_common (U0, U1, U2; x = xmap(u0,u1,u2)), multilevel_2deg (U, V, X),
// general_2deg and general_3deg (U, V2, V3, X).
const std::vector<std::string>& code_scenarios();
// Rate names of a scenario, e.g. R0, S1, S2 for multilevel_2deg.
const std::vector<std::string>& scenario_rates(const std::string& scenario);
// Registers the distribution must carry.
const std::vector<std::string>& scenario_registers(const std::string& scenario);
int scenario_receivers(const std::string& scenario);

struct CodebookSpec {
    std::string scenario;
    std::map<std::string, double> rates;  // log2 sizes; missing names are 0
    JointDistribution dist;
    std::vector<int> xmap;
    std::uint64_t seed = 1;
    double theta = 1.0;  // encoder accepts a pair when its covering score is at least theta

    void validate() const;
    // ceil(2^rate) for the message or bin index named `index`.
    int size(const std::string& index) const;
    double realized_rate(const std::string& rate) const;  // log2 size(index of rate)
};

// Codewords of one register indexed by a tuple of message/bin indices (row-major).
struct Layer {
    std::string reg;
    std::vector<std::string> indices;
    std::vector<int> symbols;
};

struct Codebook {
    std::string scenario;
    std::vector<std::string> registers;       // scenario register order
    std::map<std::string, int> sizes;         // per index name
    std::vector<std::string> message_indices;  // uniform message components
    std::vector<Layer> layers;
    std::uint64_t seed = 0;
    double theta = 1.0;

    struct Message {
        std::vector<int> idx;      // values of message_indices
        std::vector<int> symbols;  // per register
        int x = 0;
        int k1 = 0, k2 = 0;        // selected in-bin indices (Marton-type scenarios)
        double score = 1;          // covering score of the selected pair
        bool failure = false;
    };
    std::vector<Message> messages;

    const Layer& layer(const std::string& reg) const;
    Layer& layer(const std::string& reg);
    int symbol(const std::string& reg, const std::map<std::string, int>& idx) const;
    double failure_fraction() const;
};

// Samples the layers per the scenario's chain and assembles the messages
// (running encoder_select for Marton-type scenarios).
Codebook generate_codebook(const CodebookSpec& spec);
// Per product bin, picks the in-bin pair maximizing p(a,b|c)/(p(a|c)p(b|c)) (first maximum in
// row-major (k1,k2) order); flags failure when the maximum is below theta. For general_2deg and
// general_3deg the x codewords are then drawn from p(x|u,v2,v3) with seeds fixed by the bin.
Codebook encoder_select(const Codebook& cb, const CodebookSpec& spec, double theta);
// Rebuilds the message table from the layers (used after editing layers).
Codebook assemble_messages(const Codebook& cb, const CodebookSpec& spec);
// Applies one permutation of the values of `index` to every layer carrying it.
Codebook permute_index(const Codebook& cb, const CodebookSpec& spec, const std::string& index,
                       std::uint64_t seed);

// Decoder description for one receiver.
struct TestSpec {
    std::string name;   // T0, Theta3, ...
    std::string level;  // pinching level defining the test
    double rate = 0;    // realized log2 threshold
    std::vector<std::string> mi_left, mi_cond;  // the Renyi information in the error bound
};

struct LevelSpec {
    std::string name;
    std::vector<std::string> conditioning;
    std::string parent;  // empty for the root
};

struct ReceiverPlan {
    int receiver = 0;  // 0-based
    std::vector<std::string> registers;
    std::vector<LevelSpec> levels;
    std::vector<TestSpec> tests;  // product order G = T_first ... T_last
    std::vector<std::string> label_indices;
    std::vector<std::string> nonunique_indices;
    // Per label, the register tuples whose operators are summed.
    std::vector<std::vector<std::vector<int>>> entries;
    std::vector<int> message_label;  // per message of the codebook
};

std::vector<ReceiverPlan> receiver_plans(const Codebook& cb, const CodebookSpec& spec);

struct PovmOptions {
    int dim_cap = kDefaultDimCap;
    double tol = kClusterTol;
};

struct DecoderPOVM {
    int receiver = 0;
    std::vector<Mat> pre;  // summed per-label G G^dagger before the square root
    std::vector<Mat> raw;  // summed per-label ordered products G
    // Per label, the operator of each entry tuple (same order as plan.entries).
    std::vector<std::vector<Mat>> entry_ops;
    std::vector<Mat> ops;
    Mat residual;
    double residual_min_eig = 0;
    double max_pre_eig = 0;  // largest eigenvalue among pre operators (HN assumes <= 1)
    ReceiverPlan plan;
};

DecoderPOVM build_receiver_povm(const Codebook& cb, const CodebookSpec& spec, const BroadcastChannel& ch,
                                const ReceiverPlan& plan, const PovmOptions& opt = {});
std::vector<DecoderPOVM> build_povms(const Codebook& cb, const CodebookSpec& spec, const BroadcastChannel& ch,
                                     const PovmOptions& opt = {});

// Uniform-message average of 1 - tr(Lambda_label rho_x) per receiver. Per-message terms are
// summed in sorted order so the value depends only on their multiset.
std::vector<double> average_error_exact(const Codebook& cb, const BroadcastChannel& ch,
                                        const std::vector<DecoderPOVM>& povms);

// Hayashi-Nagaoka terms of one decoder: 2 avg tr(I - A_l)rho and 4 avg sum_{l' != l} tr A_l' rho.
struct HnTerms {
    double exact = 0;
    double first = 0;
    double second = 0;
    double first_raw = 0;  // 2 avg Re tr(I - G_l) rho with the raw products
    double total() const { return first + second; }
    double dropped_min = 0;  // smallest dropped in-bin term tr A rho (nonnegative when A >= 0)
};
HnTerms hayashi_nagaoka_terms(const Codebook& cb, const BroadcastChannel& ch, const DecoderPOVM& povm);

struct BoundTerm {
    std::string test;
    double rate = 0;
    int nu = 1;
    double hypothesis = 0;  // 4 tr(I-T)rho + 4 2^rate tr T sigma
    double petz = 0;        // 4 2^{alpha rate} Q_{1-alpha}(E(rho) || sigma)
    double sandwiched = 0;  // 4 nu^alpha 2^{alpha rate} Q~_{1-alpha}(rho || sigma)
    double renyi_mi = 0;    // 4 nu^alpha 2^{alpha rate} 2^{-alpha I~_{1-alpha}}
};

struct ReceiverBound {
    int receiver = 0;
    std::vector<BoundTerm> terms;
    double hypothesis = 0, petz = 0, sandwiched = 0, renyi_mi = 0;
    bool petz_vacuous = false, sandwiched_vacuous = false, renyi_mi_vacuous = false;
};

struct BoundOptions {
    bool with_renyi_mi = true;
    DownOptions down;
    double tol = kClusterTol;
};

// Bounds on the codebook-averaged error of each receiver at the realized rates.
std::vector<ReceiverBound> analytic_bound(const CodebookSpec& spec, const BroadcastChannel& ch, double alpha,
                                          const BoundOptions& opt = {});

struct ReceiverStats {
    double mean = 0;
    double std_error = 0;
    double hn_mean = 0;  // mean Hayashi-Nagaoka total
    double max_pre_eig = 0;
};

struct MonteCarloResult {
    std::vector<ReceiverStats> receivers;
    std::vector<std::vector<double>> errors;  // per trial, per receiver
    double failure_fraction = 0;              // mean encoder-failure fraction
    double min_residual = 0;                  // over trials and receivers
    int trials = 0;
};

struct MonteCarloOptions {
    int trials = 100;
    std::uint64_t master_seed = 1;
    int workers = 1;
    PovmOptions povm;
};

// Trial i uses seed derive_seed(master_seed, i).
MonteCarloResult monte_carlo(const CodebookSpec& spec, const BroadcastChannel& ch, const MonteCarloOptions& opt);

// n-fold product instance: inputs and register values become tuples (row-major), receiver k
// outputs B_k^{(x)n}.
struct PowerInstance {
    BroadcastChannel channel;
    JointDistribution dist;
    std::vector<int> xmap;
};
PowerInstance power_instance(const BroadcastChannel& ch, const JointDistribution& dist, const std::vector<int>& xmap,
                             int n, int dim_cap = kDefaultDimCap);

}  // namespace qbc
