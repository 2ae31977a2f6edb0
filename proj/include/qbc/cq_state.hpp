// Classical-quantum states over named classical registers and broadcast channels.
#pragma once

#include "qbc/hermitian.hpp"

#include <string>
#include <vector>

namespace qbc {

struct ClassicalRegister {
    std::string name;
    int size = 1;
};

// Joint pmf over row-major tuples of the registers, with one density matrix
// on B per tuple. Zero-probability tuples carry the maximally mixed state.
struct CqState {
    std::vector<ClassicalRegister> registers;
    int dB = 1;
    std::vector<double> pmf;
    std::vector<Mat> cond;

    int num_tuples() const;
    int position(const std::string& name) const;  // throws on a missing register
    std::vector<int> positions(const std::vector<std::string>& names) const;
    bool has(const std::string& name) const;
    std::vector<int> tuple(int index) const;
    int index(const std::vector<int>& tuple) const;
    std::vector<std::string> names() const;
    Mat average() const;  // rho^B
    void validate() const;
};

CqState make_cq(std::vector<ClassicalRegister> regs, std::vector<double> pmf, std::vector<Mat> cond);
CqState classical_state(std::vector<ClassicalRegister> regs, std::vector<double> pmf);

Mat embed(const CqState& s, int dim_cap = kDefaultDimCap);

// Probability of the sub-tuple `values` on registers `names`, and the
// conditional average of rho_t over tuples agreeing with it.
struct ConditionalAverage {
    double prob = 0;
    Mat rho;
};
ConditionalAverage conditional_average(const CqState& s, const std::vector<int>& positions,
                                       const std::vector<int>& values);

CqState markov_break(const CqState& s, const std::vector<std::string>& conditioning);
CqState marginal(const CqState& s, const std::vector<std::string>& keep, bool keep_quantum);
// Registers of copy i are suffixed "_i" (1-based) and laid out copy by copy.
CqState tensor_power(const CqState& s, int n, int dim_cap = kDefaultDimCap);

// Restrict a tuple of `s` to the given register positions.
std::vector<int> project_tuple(const std::vector<int>& tuple, const std::vector<int>& positions);
int sub_index(const CqState& s, const std::vector<int>& positions, const std::vector<int>& values);
int sub_count(const CqState& s, const std::vector<int>& positions);

struct BroadcastChannel {
    int input_size = 0;
    std::vector<int> dims;     // output dims of B1, B2, ...
    std::vector<Mat> outputs;  // per input symbol, a state on B1 (x) B2 (x) ...

    int receivers() const { return static_cast<int>(dims.size()); }
    int total_dim() const;
    Mat output(int x, int receiver) const;                       // marginal on one receiver
    Mat output(int x, const std::vector<int>& receivers) const;  // marginal on a set
    void validate() const;
};

struct JointDistribution {
    std::vector<ClassicalRegister> registers;
    std::vector<double> pmf;
    int num_tuples() const;
    void validate() const;
};

// x(t) for every tuple t of dist; the identity map when a register named `x_register` exists.
std::vector<int> register_map(const JointDistribution& dist, const std::string& x_register);

CqState channel_to_cqstate(const BroadcastChannel& ch, const std::vector<int>& receivers,
                           const JointDistribution& dist, const std::vector<int>& xmap);

}  // namespace qbc
