#pragma once
// Small maps shared by unit tests and the acceptance runner.

#include "frontier_lab/gridmap.hpp"
#include "frontier_lab/random.hpp"

namespace fixtures {

using flab::CellState;
using flab::OccupancyGrid;
using flab::Pose;
using flab::ProbabilityGrid;

// Interior walls and a closed shell, well away from the border.
inline OccupancyGrid wall_map() {
    OccupancyGrid g(100, 100, CellState::Free);
    for (int i = 20; i <= 80; ++i) {
        g(i, 20) = g(i, 80) = g(20, i) = g(80, i) = CellState::Occupied;
    }
    for (int y = 20; y <= 60; ++y) g(50, y) = CellState::Occupied;
    for (int x = 50; x <= 80; ++x) g(x, 45) = CellState::Occupied;
    return g;
}

// Prediction that places every wall of `g` at (x+dx, y+dy).
inline ProbabilityGrid shifted(const OccupancyGrid& g, int dx, int dy) {
    ProbabilityGrid p(g.width(), g.height(), 0.0);
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x)
            if (g(x, y) == CellState::Occupied && p.in_bounds(x + dx, y + dy)) p(x + dx, y + dy) = 1.0;
    return p;
}

inline Pose random_free(const OccupancyGrid& g, flab::Rng& rng) {
    while (true) {
        const Pose p{static_cast<int>(rng.uniform_int(g.width())), static_cast<int>(rng.uniform_int(g.height()))};
        if (g[p] == CellState::Free) return p;
    }
}

}  // namespace fixtures
