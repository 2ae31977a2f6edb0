// JSON formats for channels, distributions, cq-states and inequality systems.
//
// Matrix: array of rows; every entry is a real number or an [re, im] pair.
// Channel: {"dims": [d1, d2, ...], "outputs": [M_0, M_1, ...]} with M_x on B1 (x) B2 (x) ...,
//   or {"dims": [...], "product": [[M_{0,B1}, M_{0,B2}, ...], ...]} for product outputs.
// Distribution: {"registers": [{"name": "U", "size": 2}, ...], "pmf": [...],
//   "xmap": [...]} or {"x_register": "X"} (default "X" when such a register exists).
// Cq-state: {"registers": [...], "pmf": [...], "states": [M_t, ...]} or {"state": M}.
#pragma once

#include "qbc/cq_state.hpp"
#include "qbc/polyhedra.hpp"
#include "qbc/rate_region.hpp"

#include "json.hpp"

#include <string>

namespace qbc {

using Json = nlohmann::json;

inline constexpr double kInputTol = 1e-9;

const char* version();

// Malformed or invalid input; the message starts with the offending entry path.
struct InputError : ValidationError {
    using ValidationError::ValidationError;
};

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

Mat matrix_from_json(const Json& j, const std::string& path);
Json matrix_to_json(const Mat& m);
// Hermitian, positive semidefinite and unit trace within tol.
void check_density(const Mat& m, const std::string& path, double tol = kInputTol);

BroadcastChannel channel_from_json(const Json& j, double tol = kInputTol);
Json channel_to_json(const BroadcastChannel& ch);
DistributionWithMap distribution_from_json(const Json& j, double tol = kInputTol);
Json distribution_to_json(const DistributionWithMap& d);
CqState cqstate_from_json(const Json& j, double tol = kInputTol);

Json rational_to_json(const Rational& r);  // "p/q" string
Json system_to_json(const InequalitySystem& s);
Json atoms_to_json(const std::vector<AtomValue>& atoms);

// Vertices (counter-clockwise from the lowest-leftmost) of a bounded system in exactly two variables.
std::vector<Point> polygon_vertices(const InequalitySystem& s);

}  // namespace qbc
