#include "rydode/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace rydode {

std::string_view to_string(GridConfig config) {
    switch (config) {
        case GridConfig::chain: return "chain";
        case GridConfig::ring: return "ring";
        case GridConfig::square: return "square";
        case GridConfig::triangle: return "triangle";
        case GridConfig::custom: return "custom";
    }
    return "custom";
}

GridConfig parse_grid_config(std::string_view name) {
    if (name == "chain") return GridConfig::chain;
    if (name == "ring") return GridConfig::ring;
    if (name == "square") return GridConfig::square;
    if (name == "triangle") return GridConfig::triangle;
    if (name == "custom") return GridConfig::custom;
    throw std::invalid_argument("unknown grid configuration '" + std::string(name) + "'");
}

namespace {

int lattice_width(int n_atoms) {
    int width = 1;
    while (width * width < n_atoms) {
        ++width;
    }
    return width;
}

// Circle slot occupied by atom k in zigzag labeling.
int ring_slot(int k, int n) {
    if (k % 2 == 1) {
        return (k + 1) / 2;
    }
    return (n - k / 2) % n;
}

}  // namespace

AtomGrid build_grid(GridConfig config, int n_atoms, double spacing) {
    if (n_atoms < 1) {
        throw std::invalid_argument("n_atoms must be positive, got " + std::to_string(n_atoms));
    }
    if (!(spacing >= kMinAtomSpacingUm)) {
        throw std::invalid_argument("spacing " + std::to_string(spacing) + " um is below the hardware floor of " +
                                    std::to_string(kMinAtomSpacingUm) + " um");
    }

    AtomGrid grid;
    grid.config = config;
    grid.spacing = spacing;
    grid.positions.reserve(static_cast<std::size_t>(n_atoms));

    switch (config) {
        case GridConfig::chain:
            for (int k = 0; k < n_atoms; ++k) {
                grid.positions.push_back({k * spacing, 0.0});
            }
            break;
        case GridConfig::square: {
            const int width = lattice_width(n_atoms);
            for (int k = 0; k < n_atoms; ++k) {
                grid.positions.push_back({(k % width) * spacing, (k / width) * spacing});
            }
            break;
        }
        case GridConfig::triangle: {
            const int width = lattice_width(n_atoms);
            const double pitch = spacing * std::sqrt(3.0) / 2.0;
            for (int k = 0; k < n_atoms; ++k) {
                const int row = k / width;
                const double shift = (row % 2 == 1) ? spacing / 2.0 : 0.0;
                grid.positions.push_back({(k % width) * spacing + shift, row * pitch});
            }
            break;
        }
        case GridConfig::ring: {
            if (n_atoms == 1) {
                grid.positions.push_back({0.0, 0.0});
                break;
            }
            const double pi = std::numbers::pi;
            const double radius = spacing / (2.0 * std::sin(pi / n_atoms));
            for (int k = 0; k < n_atoms; ++k) {
                const double angle = 2.0 * pi * ring_slot(k, n_atoms) / n_atoms;
                grid.positions.push_back({radius * std::cos(angle), radius * std::sin(angle)});
            }
            break;
        }
        case GridConfig::custom:
            throw std::invalid_argument("custom grids must be given explicit positions");
    }
    return grid;
}

AtomGrid grid_from_positions(std::vector<Position> positions, GridConfig config, double spacing) {
    if (positions.empty()) {
        throw std::invalid_argument("a grid needs at least one atom");
    }
    AtomGrid grid;
    grid.config = config;
    grid.spacing = spacing;
    grid.positions = std::move(positions);
    return grid;
}

double pair_distance(const Position& a, const Position& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

double min_pair_distance(const AtomGrid& grid) {
    const auto n = grid.n_atoms();
    if (n < 2) {
        throw std::invalid_argument("min_pair_distance needs at least two atoms");
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            best = std::min(best, pair_distance(grid.positions[i], grid.positions[j]));
        }
    }
    return best;
}

InteractionMatrix interaction_matrix(const AtomGrid& grid) {
    const auto n = static_cast<Eigen::Index>(grid.n_atoms());
    InteractionMatrix v = InteractionMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = pair_distance(grid.positions[i], grid.positions[j]);
            if (d == 0.0) {
                throw std::invalid_argument("atoms " + std::to_string(i) + " and " + std::to_string(j) +
                                            " coincide");
            }
            const double d2 = d * d;
            v(i, j) = kC6 / (d2 * d2 * d2);
            v(j, i) = v(i, j);
        }
    }
    return v;
}

void validate_spacing(const AtomGrid& grid, double min_spacing) {
    if (grid.n_atoms() < 2) {
        return;
    }
    const double d = min_pair_distance(grid);
    if (d < min_spacing) {
        throw std::invalid_argument("minimum atom spacing " + std::to_string(d) + " um is below " +
                                    std::to_string(min_spacing) + " um");
    }
}

}  // namespace rydode
