#pragma once

#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace rydode {

// Smallest allowed separation between two trapped atoms (µm).
inline constexpr double kMinAtomSpacingUm = 4.0;

// Van der Waals coefficient for the Rydberg interaction, rad·µm⁶/µs.
inline constexpr double kC6 = 862690.0 * 2.0 * std::numbers::pi;

enum class GridConfig { chain, ring, square, triangle, custom };

std::string_view to_string(GridConfig config);
GridConfig parse_grid_config(std::string_view name);

struct Position {
    double x = 0.0;
    double y = 0.0;
};

struct AtomGrid {
    GridConfig config = GridConfig::custom;
    double spacing = 0.0;  // µm
    std::vector<Position> positions;  // µm

    std::size_t n_atoms() const { return positions.size(); }
};

// Symmetric matrix of pairwise interaction strengths C6 / d⁶ (rad/µs),
// zero on the diagonal.
using InteractionMatrix = Eigen::MatrixXd;

// Places atoms for one of the named lattice families.
//
// chain:    along +x from the origin.
// square:   row-major fill of a ⌈√n⌉-wide square lattice.
// triangle: row-major fill of a ⌈√n⌉-wide triangular lattice; odd rows are
//           shifted by spacing/2 and rows are spacing·√3/2 apart.
// ring:     evenly on a circle with neighbor chord equal to spacing. Atoms are
//           labeled in zigzag order around the circle (0, 1, 3, 5, ..., 4, 2)
//           so that the four-atom ring carries exactly the labels of the
//           2×2 square.
//
// Throws std::invalid_argument for n_atoms < 1, spacing below the hardware
// floor, or GridConfig::custom.
AtomGrid build_grid(GridConfig config, int n_atoms, double spacing);

// Explicit register, bypassing the lattice families. No spacing floor is
// enforced here; use validate_spacing for that.
AtomGrid grid_from_positions(std::vector<Position> positions, GridConfig config = GridConfig::custom,
                             double spacing = 0.0);

double pair_distance(const Position& a, const Position& b);

// Throws std::invalid_argument for fewer than two atoms.
double min_pair_distance(const AtomGrid& grid);

// Throws std::invalid_argument when two atoms coincide.
InteractionMatrix interaction_matrix(const AtomGrid& grid);

// Throws std::invalid_argument when any pair is closer than min_spacing.
void validate_spacing(const AtomGrid& grid, double min_spacing = kMinAtomSpacingUm);

}  // namespace rydode
