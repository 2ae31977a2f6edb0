// Seeded random generators for states, unitaries and pmfs.
#pragma once

#include "qbc/hermitian.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace qbc {

using Rng = std::mt19937_64;

// Deterministic child seed for stream `index` under `master` (splitmix64 mix).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

Mat random_ginibre(int rows, int cols, Rng& rng);
Mat random_unitary(int d, Rng& rng);
Mat random_hermitian(int d, Rng& rng);
// Ginibre-induced density of the given rank (rank <= 0 means full rank).
Mat random_density(int d, Rng& rng, int rank = 0);
Mat random_pure(int d, Rng& rng);
// Density with a prescribed spectrum in a Haar-random basis.
Mat random_density_with_spectrum(const std::vector<double>& spec, Rng& rng);
std::vector<double> random_pmf(int n, Rng& rng);
int sample_index(const std::vector<double>& pmf, Rng& rng);

}  // namespace qbc
