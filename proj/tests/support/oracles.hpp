#pragma once
// Brute-force reference implementations. These deliberately share no code with
// the library so that agreement means something.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "frontier_lab/gridmap.hpp"
#include "frontier_lab/random.hpp"

namespace oracle {

using flab::CellState;
using flab::OccupancyGrid;
using flab::Pose;

// Free cell with an Unknown cell among its 8 neighbors, checked one cell at a time.
inline std::set<std::pair<int, int>> frontier_cells(const OccupancyGrid& g) {
    std::set<std::pair<int, int>> out;
    for (int y = 0; y < g.height(); ++y) {
        for (int x = 0; x < g.width(); ++x) {
            if (g(x, y) != CellState::Free) continue;
            bool touches = false;
            for (int dy = -1; dy <= 1 && !touches; ++dy)
                for (int dx = -1; dx <= 1 && !touches; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= g.width() || ny >= g.height()) continue;
                    touches = g(nx, ny) == CellState::Unknown;
                }
            if (touches) out.insert({x, y});
        }
    }
    return out;
}

// 8-connected components of a cell set, each sorted.
inline std::vector<std::vector<std::pair<int, int>>> components(const std::set<std::pair<int, int>>& cells) {
    std::set<std::pair<int, int>> left = cells;
    std::vector<std::vector<std::pair<int, int>>> out;
    while (!left.empty()) {
        std::vector<std::pair<int, int>> comp;
        std::vector<std::pair<int, int>> stack{*left.begin()};
        left.erase(left.begin());
        while (!stack.empty()) {
            auto c = stack.back();
            stack.pop_back();
            comp.push_back(c);
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    auto it = left.find({c.first + dx, c.second + dy});
                    if (it != left.end()) {
                        stack.push_back(*it);
                        left.erase(it);
                    }
                }
        }
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
    }
    return out;
}

// Path cost a + b*sqrt(2) kept as exact integers.
struct ExactCost {
    long axial = 0;
    long diagonal = 0;
    bool operator==(const ExactCost&) const = default;
};

// Sign of p + q*sqrt(2) without floating point.
inline int sign_of(long p, long q) {
    if (p >= 0 && q >= 0) return (p > 0 || q > 0) ? 1 : 0;
    if (p <= 0 && q <= 0) return -1;
    const long p2 = p * p, q2 = 2 * q * q;
    if (p > 0) return p2 > q2 ? 1 : -1;  // p > 0 > q
    return q2 > p2 ? 1 : -1;             // q > 0 > p
}

inline bool operator<(const ExactCost& a, const ExactCost& b) {
    return sign_of(a.axial - b.axial, a.diagonal - b.diagonal) < 0;
}

// Dijkstra over observed-Free cells with the no-corner-cutting rule. Relaxes
// by scanning every unsettled cell for the minimum (O(n^2)), no heap.
inline std::optional<ExactCost> dijkstra(const OccupancyGrid& g, Pose s, Pose t) {
    const int w = g.width(), h = g.height();
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<std::optional<ExactCost>> dist(n);
    std::vector<bool> done(n, false);
    dist[s.y * w + s.x] = ExactCost{};
    auto free_at = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h && g(x, y) == CellState::Free; };
    while (true) {
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i)
            if (!done[i] && dist[i] && (best == n || *dist[i] < *dist[best])) best = i;
        if (best == n) return std::nullopt;
        done[best] = true;
        const int x = static_cast<int>(best % w), y = static_cast<int>(best / w);
        if (x == t.x && y == t.y) return dist[best];
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = x + dx, ny = y + dy;
                if (!free_at(nx, ny)) continue;
                const bool diag = dx != 0 && dy != 0;
                if (diag && (g(x + dx, y) == CellState::Occupied || g(x, y + dy) == CellState::Occupied)) continue;
                ExactCost c = *dist[best];
                (diag ? c.diagonal : c.axial) += 1;
                const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
                if (!done[j] && (!dist[j] || c < *dist[j])) dist[j] = c;
            }
    }
}

// Random ternary grid with the given Unknown/Occupied rates.
inline OccupancyGrid random_grid(int w, int h, std::uint64_t seed, double p_unknown, double p_occupied) {
    flab::Rng rng(seed);
    OccupancyGrid g(w, h, CellState::Free);
    for (auto& c : g.data()) {
        const double u = rng.uniform();
        c = u < p_unknown ? CellState::Unknown : u < p_unknown + p_occupied ? CellState::Occupied : CellState::Free;
    }
    return g;
}

// Square dilation by direct neighborhood scan.
inline std::vector<std::uint8_t> dilate(const std::vector<std::uint8_t>& m, int w, int h, int radius) {
    std::vector<std::uint8_t> out(m.size(), 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx >= 0 && ny >= 0 && nx < w && ny < h && m[ny * w + nx]) out[y * w + x] = 1;
                }
    return out;
}

// Sample mean and 1.96 * sample sd / sqrt(n), two-pass.
inline std::pair<double, double> mean_ci95(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    const double m = s / v.size();
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, 1.96 * std::sqrt(ss / (v.size() - 1)) / std::sqrt(static_cast<double>(v.size()))};
}

}  // namespace oracle
