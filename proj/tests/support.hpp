#pragma once

// Shared helpers for the unit and acceptance suites: scratch directories,
// hand-rolled scene builders, and an independent Dijkstra reference that
// mirrors the planner's connectivity (8-connected, no corner cutting).

#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "owmm/rng.hpp"
#include "owmm/scene.hpp"

namespace owmm::test {

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        const auto base = std::filesystem::temp_directory_path();
        path_ = base / ("owmm_" + tag + "_" + std::to_string(++counter) + "_" +
                        std::to_string(static_cast<std::uint64_t>(::getpid())));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

// Open scene: w x h navigable cells, no furniture.
inline SceneSpec make_empty_scene(int w, int h, double cell_size = 0.25) {
    SceneSpec scene;
    scene.scene_id = "scene_test";
    scene.cell_size = cell_size;
    scene.occupancy.width = w;
    scene.occupancy.height = h;
    scene.occupancy.blocked.assign(static_cast<size_t>(w) * static_cast<size_t>(h), 0);
    return scene;
}

// Adds a box receptacle and blocks its footprint cells the way generation does.
inline void add_receptacle(SceneSpec& scene, const std::string& id, const std::string& label,
                           Vec2 center, double dx, double dy, double height) {
    Receptacle rec;
    rec.rec_id = id;
    rec.label = label;
    rec.center = center;
    rec.dx = dx;
    rec.dy = dy;
    rec.height = height;
    const CellRect cells = receptacle_footprint_cells(rec, scene.cell_size);
    for (int cy = cells.y0; cy <= cells.y1; ++cy)
        for (int cx = cells.x0; cx <= cells.x1; ++cx)
            if (scene.occupancy.in_bounds(cx, cy)) scene.occupancy.set_blocked(cx, cy, true);
    scene.receptacles.push_back(std::move(rec));
}

inline void add_object(SceneSpec& scene, const std::string& id, const std::string& label,
                       Vec3 position, double radius, const std::string& resting_on) {
    ObjectInstance obj;
    obj.obj_id = id;
    obj.label = label;
    obj.position = position;
    obj.bound_radius = radius;
    obj.resting_on = resting_on;
    scene.objects.push_back(std::move(obj));
}

// Random grid with roughly `p_block` blocked density; start cell kept free.
inline OccupancyGrid random_grid(Rng& rng, int w, int h, double p_block) {
    OccupancyGrid grid;
    grid.width = w;
    grid.height = h;
    grid.blocked.assign(static_cast<size_t>(w) * static_cast<size_t>(h), 0);
    for (int cy = 0; cy < h; ++cy)
        for (int cx = 0; cx < w; ++cx)
            if (rng.uniform() < p_block) grid.set_blocked(cx, cy, true);
    return grid;
}

// Uniform-cost Dijkstra over the planner's exact connectivity: 8-connected,
// straight cost 1, diagonal cost sqrt(2), diagonals may not cut blocked
// corners. Returns the cost in cell units, or nullopt when unreachable.
inline std::optional<double> dijkstra_cost(const OccupancyGrid& grid, int sx, int sy, int gx,
                                           int gy) {
    constexpr double kSqrt2 = 1.4142135623730951;
    if (!grid.navigable(sx, sy) || !grid.navigable(gx, gy)) return std::nullopt;
    const int w = grid.width;
    std::vector<double> dist(static_cast<size_t>(w) * static_cast<size_t>(grid.height),
                             std::numeric_limits<double>::infinity());
    using Node = std::pair<double, int>;
    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
    dist[static_cast<size_t>(sy * w + sx)] = 0.0;
    open.emplace(0.0, sy * w + sx);
    static constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    static constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
    while (!open.empty()) {
        const auto [d, cell] = open.top();
        open.pop();
        if (d > dist[static_cast<size_t>(cell)]) continue;
        const int x = cell % w, y = cell / w;
        for (int k = 0; k < 8; ++k) {
            const int nx = x + kDx[k], ny = y + kDy[k];
            if (!grid.navigable(nx, ny)) continue;
            const bool diagonal = kDx[k] != 0 && kDy[k] != 0;
            if (diagonal && (!grid.navigable(x + kDx[k], y) || !grid.navigable(x, y + kDy[k])))
                continue;
            const double nd = d + (diagonal ? kSqrt2 : 1.0);
            const size_t ni = static_cast<size_t>(ny * w + nx);
            if (nd < dist[ni]) {
                dist[ni] = nd;
                open.emplace(nd, ny * w + nx);
            }
        }
    }
    const double d = dist[static_cast<size_t>(gy * w + gx)];
    if (!std::isfinite(d)) return std::nullopt;
    return d;
}

}  // namespace owmm::test
