#include "qbc/cq_state.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qbc {

int CqState::num_tuples() const {
    int n = 1;
    for (const auto& r : registers) n *= r.size;
    return n;
}

int CqState::position(const std::string& name) const {
    for (std::size_t i = 0; i < registers.size(); ++i)
        if (registers[i].name == name) return static_cast<int>(i);
    throw ValidationError("missing register '" + name + "'");
}

std::vector<int> CqState::positions(const std::vector<std::string>& names) const {
    std::vector<int> out;
    for (const auto& n : names) out.push_back(position(n));
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end())
        throw ValidationError("register listed twice");
    return out;
}

bool CqState::has(const std::string& name) const {
    return std::any_of(registers.begin(), registers.end(), [&](const auto& r) { return r.name == name; });
}

std::vector<int> CqState::tuple(int index) const {
    std::vector<int> t(registers.size());
    for (int i = static_cast<int>(registers.size()) - 1; i >= 0; --i) {
        t[i] = index % registers[i].size;
        index /= registers[i].size;
    }
    return t;
}

int CqState::index(const std::vector<int>& t) const {
    int idx = 0;
    for (std::size_t i = 0; i < registers.size(); ++i) idx = idx * registers[i].size + t[i];
    return idx;
}

std::vector<std::string> CqState::names() const {
    std::vector<std::string> out;
    for (const auto& r : registers) out.push_back(r.name);
    return out;
}

Mat CqState::average() const {
    Mat out = Mat::Zero(dB, dB);
    for (std::size_t t = 0; t < pmf.size(); ++t)
        if (pmf[t] > 0) out += pmf[t] * cond[t];
    return out;
}

void CqState::validate() const {
    std::set<std::string> seen;
    for (const auto& r : registers) {
        if (r.size < 1) throw ValidationError("register '" + r.name + "' has alphabet size < 1");
        if (!seen.insert(r.name).second) throw ValidationError("duplicate register '" + r.name + "'");
    }
    if (dB < 1) throw ValidationError("quantum dimension must be positive");
    const int n = num_tuples();
    if (static_cast<int>(pmf.size()) != n || static_cast<int>(cond.size()) != n)
        throw ValidationError("pmf / conditional table size does not match registers");
    double s = 0;
    for (int t = 0; t < n; ++t) {
        if (pmf[t] < 0) throw ValidationError("pmf entry " + std::to_string(t) + " is negative");
        s += pmf[t];
        if (cond[t].rows() != dB || cond[t].cols() != dB)
            throw ValidationError("conditional " + std::to_string(t) + " has wrong dimension");
        require_density(cond[t], ("conditional " + std::to_string(t)).c_str());
    }
    if (std::abs(s - 1.0) > 1e-10) throw ValidationError("pmf does not sum to 1");
}

CqState make_cq(std::vector<ClassicalRegister> regs, std::vector<double> pmf, std::vector<Mat> cond) {
    CqState s;
    s.registers = std::move(regs);
    s.pmf = std::move(pmf);
    s.cond = std::move(cond);
    s.dB = s.cond.empty() ? 1 : static_cast<int>(s.cond.front().rows());
    s.validate();
    return s;
}

CqState classical_state(std::vector<ClassicalRegister> regs, std::vector<double> pmf) {
    std::vector<Mat> cond(pmf.size(), Mat::Identity(1, 1));
    return make_cq(std::move(regs), std::move(pmf), std::move(cond));
}

Mat embed(const CqState& s, int dim_cap) {
    const long long n = s.num_tuples();
    check_dim_cap(n * s.dB, dim_cap);
    Mat out = Mat::Zero(n * s.dB, n * s.dB);
    for (int t = 0; t < n; ++t)
        if (s.pmf[t] > 0) out.block(t * s.dB, t * s.dB, s.dB, s.dB) = s.pmf[t] * s.cond[t];
    return out;
}

std::vector<int> project_tuple(const std::vector<int>& tuple, const std::vector<int>& positions) {
    std::vector<int> out;
    out.reserve(positions.size());
    for (int p : positions) out.push_back(tuple[p]);
    return out;
}

int sub_index(const CqState& s, const std::vector<int>& positions, const std::vector<int>& values) {
    int idx = 0;
    for (std::size_t i = 0; i < positions.size(); ++i) idx = idx * s.registers[positions[i]].size + values[i];
    return idx;
}

int sub_count(const CqState& s, const std::vector<int>& positions) {
    int n = 1;
    for (int p : positions) n *= s.registers[p].size;
    return n;
}

ConditionalAverage conditional_average(const CqState& s, const std::vector<int>& positions,
                                       const std::vector<int>& values) {
    ConditionalAverage out;
    out.rho = Mat::Zero(s.dB, s.dB);
    const int n = s.num_tuples();
    for (int t = 0; t < n; ++t) {
        if (s.pmf[t] <= 0) continue;
        if (project_tuple(s.tuple(t), positions) != values) continue;
        out.prob += s.pmf[t];
        out.rho += s.pmf[t] * s.cond[t];
    }
    if (out.prob > 0)
        out.rho /= out.prob;
    else
        out.rho = Mat::Identity(s.dB, s.dB) / s.dB;
    return out;
}

CqState markov_break(const CqState& s, const std::vector<std::string>& conditioning) {
    const auto pos = s.positions(conditioning);
    const int k = sub_count(s, pos);
    std::vector<double> mass(k, 0.0);
    std::vector<Mat> acc(k, Mat::Zero(s.dB, s.dB));
    const int n = s.num_tuples();
    for (int t = 0; t < n; ++t) {
        if (s.pmf[t] <= 0) continue;
        int key = sub_index(s, pos, project_tuple(s.tuple(t), pos));
        mass[key] += s.pmf[t];
        acc[key] += s.pmf[t] * s.cond[t];
    }
    CqState out = s;
    for (int t = 0; t < n; ++t) {
        int key = sub_index(s, pos, project_tuple(s.tuple(t), pos));
        out.cond[t] = mass[key] > 0 ? Mat(acc[key] / mass[key]) : Mat(Mat::Identity(s.dB, s.dB) / s.dB);
    }
    return out;
}

CqState marginal(const CqState& s, const std::vector<std::string>& keep, bool keep_quantum) {
    const auto pos = s.positions(keep);
    CqState out;
    for (int p : pos) out.registers.push_back(s.registers[p]);
    out.dB = keep_quantum ? s.dB : 1;
    const int k = sub_count(s, pos);
    out.pmf.assign(k, 0.0);
    std::vector<Mat> acc(k, Mat::Zero(s.dB, s.dB));
    for (int t = 0; t < s.num_tuples(); ++t) {
        if (s.pmf[t] <= 0) continue;
        int key = sub_index(s, pos, project_tuple(s.tuple(t), pos));
        out.pmf[key] += s.pmf[t];
        acc[key] += s.pmf[t] * s.cond[t];
    }
    out.cond.resize(k);
    for (int j = 0; j < k; ++j) {
        if (!keep_quantum)
            out.cond[j] = Mat::Identity(1, 1);
        else if (out.pmf[j] > 0)
            out.cond[j] = acc[j] / out.pmf[j];
        else
            out.cond[j] = Mat::Identity(s.dB, s.dB) / s.dB;
    }
    return out;
}

CqState tensor_power(const CqState& s, int n, int dim_cap) {
    if (n < 1) throw ValidationError("tensor_power: n must be >= 1");
    if (n == 1) return s;
    long long dim = 1;
    for (int i = 0; i < n; ++i) dim *= static_cast<long long>(s.num_tuples()) * s.dB;
    check_dim_cap(dim, dim_cap);
    CqState out;
    for (int c = 1; c <= n; ++c)
        for (const auto& r : s.registers) out.registers.push_back({r.name + "_" + std::to_string(c), r.size});
    out.dB = 1;
    out.pmf = {1.0};
    out.cond = {Mat::Identity(1, 1)};
    for (int c = 0; c < n; ++c) {
        std::vector<double> pmf;
        std::vector<Mat> cond;
        for (std::size_t a = 0; a < out.pmf.size(); ++a)
            for (std::size_t b = 0; b < s.pmf.size(); ++b) {
                pmf.push_back(out.pmf[a] * s.pmf[b]);
                cond.push_back(kron(out.cond[a], s.cond[b]));
            }
        out.pmf = std::move(pmf);
        out.cond = std::move(cond);
        out.dB *= s.dB;
    }
    return out;
}

int BroadcastChannel::total_dim() const {
    int d = 1;
    for (int x : dims) d *= x;
    return d;
}

Mat BroadcastChannel::output(int x, int receiver) const { return output(x, std::vector<int>{receiver}); }

Mat BroadcastChannel::output(int x, const std::vector<int>& rs) const {
    if (x < 0 || x >= input_size) throw ValidationError("channel input symbol out of range");
    for (int r : rs)
        if (r < 0 || r >= receivers()) throw ValidationError("receiver index out of range");
    if (static_cast<int>(rs.size()) == receivers()) return outputs[x];
    return partial_trace(outputs[x], dims, rs);
}

void BroadcastChannel::validate() const {
    if (input_size < 1) throw ValidationError("channel: input_size must be positive");
    if (dims.empty()) throw ValidationError("channel: no receivers");
    for (int d : dims)
        if (d < 1) throw ValidationError("channel: output dims must be positive");
    if (static_cast<int>(outputs.size()) != input_size)
        throw ValidationError("channel: expected one output state per input symbol");
    for (int x = 0; x < input_size; ++x) {
        if (outputs[x].rows() != total_dim() || outputs[x].cols() != total_dim())
            throw ValidationError("channel: outputs[" + std::to_string(x) + "] has wrong dimension");
        require_density(outputs[x], ("channel outputs[" + std::to_string(x) + "]").c_str());
    }
}

int JointDistribution::num_tuples() const {
    int n = 1;
    for (const auto& r : registers) n *= r.size;
    return n;
}

void JointDistribution::validate() const {
    if (static_cast<int>(pmf.size()) != num_tuples()) throw ValidationError("distribution: pmf size mismatch");
    double s = 0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        if (pmf[i] < 0) throw ValidationError("distribution: pmf[" + std::to_string(i) + "] is negative");
        s += pmf[i];
    }
    if (std::abs(s - 1.0) > 1e-10) throw ValidationError("distribution: pmf does not sum to 1");
}

std::vector<int> register_map(const JointDistribution& dist, const std::string& x_register) {
    CqState tmp;
    tmp.registers = dist.registers;
    const int pos = tmp.position(x_register);
    std::vector<int> out(dist.num_tuples());
    for (int t = 0; t < dist.num_tuples(); ++t) out[t] = tmp.tuple(t)[pos];
    return out;
}

CqState channel_to_cqstate(const BroadcastChannel& ch, const std::vector<int>& receivers,
                           const JointDistribution& dist, const std::vector<int>& xmap) {
    dist.validate();
    if (static_cast<int>(xmap.size()) != dist.num_tuples()) throw ValidationError("map: not total over tuples");
    std::vector<Mat> per_x(ch.input_size);
    for (int x = 0; x < ch.input_size; ++x) per_x[x] = ch.output(x, receivers);
    std::vector<Mat> cond;
    for (int t = 0; t < dist.num_tuples(); ++t) {
        if (xmap[t] < 0 || xmap[t] >= ch.input_size)
            throw ValidationError("map: value out of range at tuple " + std::to_string(t));
        cond.push_back(per_x[xmap[t]]);
    }
    return make_cq(dist.registers, dist.pmf, std::move(cond));
}

}  // namespace qbc
