#pragma once

#include "isingmix/types.hpp"

#include <cstdint>
#include <string>

namespace isingmix {

enum class CellOrder { last_fastest, first_fastest };

/// Parse whitespace-separated counts ('#' starts a comment line) into a
/// BinaryTable in canonical order. first_fastest input is permuted (the cell
/// index bits are reversed).
BinaryTable parse_table(const std::string& text, int d, CellOrder order = CellOrder::last_fastest);

/// Canonical text form: counts in canonical order, 2^(d/2 rounded) per line.
std::string serialize_table(const BinaryTable& table);

/// Bundled eight-way tables, transcribed with load-time checksums
/// (rochdale: N = 665 with 165 empty cells; nltcs: N = 21574).
BinaryTable builtin_dataset(const std::string& name);

/// Simulation designs of the reference experiments, all d = 6 with main
/// effects (1,-1,1,-1,1,-1):
///   A: theta_12,13,14,23 = (1,-1,1,-1)          single Ising
///   B: theta_12,13,14,23 = (1,-0.5,0.2,-0.1)    single Ising
///   C: K = 2, w = (0.4,0.6), theta^1_12,13 = (1,-1), theta^2_46,56 = (1,-1)
///   D: K = 2, w = (0.4,0.6), theta^1_12,13,23 = (1,-1,1), theta^2_14,15 = (1,-1)
/// sampled = false returns the fixed fractional table N * p(truth); otherwise
/// one Multinomial(N, p) draw from stream `rng_seed`.
struct SimulatedDesign {
  BinaryTable table;
  MixtureParams truth;
};
SimulatedDesign simulate_design(char name, long N, bool sampled, std::uint64_t rng_seed);

}  // namespace isingmix
