#include "owmm/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

namespace owmm {
namespace {

constexpr double kSqrt2 = 1.4142135623730951;

struct SearchOut {
    bool found = false;
    std::vector<int> cells;  // flat indices, start first
    double length = 0.0;     // cell units
};

// Neighbor order is fixed and ties relax strictly-better only, so the search
// expands identically on every platform.
SearchOut astar(const OccupancyGrid& grid, int sx, int sy, int gx, int gy) {
    SearchOut out;
    const int w = grid.width, h = grid.height;
    const auto idx = [w](int x, int y) { return y * w + x; };
    const int start = idx(sx, sy), goal = idx(gx, gy);
    const auto octile = [&](int x, int y) {
        const double dx = std::abs(x - gx), dy = std::abs(y - gy);
        return std::max(dx, dy) + (kSqrt2 - 1.0) * std::min(dx, dy);
    };

    std::vector<double> g(static_cast<size_t>(w) * static_cast<size_t>(h),
                          std::numeric_limits<double>::infinity());
    std::vector<int> parent(g.size(), -1);
    std::vector<uint8_t> closed(g.size(), 0);
    using Node = std::tuple<double, int, int>;  // f, index (tiebreak), cell
    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
    g[static_cast<size_t>(start)] = 0.0;
    open.emplace(octile(sx, sy), start, start);

    static constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    static constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

    while (!open.empty()) {
        const auto [f, tie, cell] = open.top();
        open.pop();
        (void)f;
        (void)tie;
        if (closed[static_cast<size_t>(cell)]) continue;
        closed[static_cast<size_t>(cell)] = 1;
        if (cell == goal) break;
        const int x = cell % w, y = cell / w;
        for (int k = 0; k < 8; ++k) {
            const int nx = x + kDx[k], ny = y + kDy[k];
            if (!grid.navigable(nx, ny)) continue;
            const bool diagonal = kDx[k] != 0 && kDy[k] != 0;
            if (diagonal && (!grid.navigable(x + kDx[k], y) || !grid.navigable(x, y + kDy[k])))
                continue;
            const int ni = idx(nx, ny);
            const double ng = g[static_cast<size_t>(cell)] + (diagonal ? kSqrt2 : 1.0);
            if (ng < g[static_cast<size_t>(ni)] - 1e-12) {
                g[static_cast<size_t>(ni)] = ng;
                parent[static_cast<size_t>(ni)] = cell;
                open.emplace(ng + octile(nx, ny), ni, ni);
            }
        }
    }

    if (!std::isfinite(g[static_cast<size_t>(goal)])) return out;
    out.found = true;
    out.length = g[static_cast<size_t>(goal)];
    for (int cell = goal; cell != -1; cell = parent[static_cast<size_t>(cell)])
        out.cells.push_back(cell);
    std::reverse(out.cells.begin(), out.cells.end());
    return out;
}

// BFS over the same connectivity as astar (8-connected, no corner cutting),
// marking every cell reachable from (sx, sy).
std::vector<uint8_t> flood_reachable(const OccupancyGrid& grid, int sx, int sy) {
    const int w = grid.width, h = grid.height;
    std::vector<uint8_t> seen(static_cast<size_t>(w) * static_cast<size_t>(h), 0);
    std::vector<int> stack;
    seen[static_cast<size_t>(sy * w + sx)] = 1;
    stack.push_back(sy * w + sx);
    static constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    static constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
    while (!stack.empty()) {
        const int cell = stack.back();
        stack.pop_back();
        const int x = cell % w, y = cell / w;
        for (int k = 0; k < 8; ++k) {
            const int nx = x + kDx[k], ny = y + kDy[k];
            if (!grid.navigable(nx, ny)) continue;
            const bool diagonal = kDx[k] != 0 && kDy[k] != 0;
            if (diagonal && (!grid.navigable(x + kDx[k], y) || !grid.navigable(x, y + kDy[k])))
                continue;
            const int ni = ny * w + nx;
            if (seen[static_cast<size_t>(ni)]) continue;
            seen[static_cast<size_t>(ni)] = 1;
            stack.push_back(ni);
        }
    }
    return seen;
}

}  // namespace

PlanResult plan_path(const SceneSpec& scene, const Vec2& start, const Vec2& goal,
                     double standoff_radius) {
    PlanResult result;
    const OccupancyGrid& grid = scene.occupancy;
    const int sx = scene.cell_x(start.x), sy = scene.cell_y(start.y);
    if (!grid.navigable(sx, sy)) {
        result.status = PlanStatus::start_blocked;
        result.error = "start position is not on a navigable cell";
        return result;
    }

    struct Candidate {
        double dist;
        int index;
        int x, y;
    };
    std::vector<Candidate> candidates;
    const int gx = scene.cell_x(goal.x), gy = scene.cell_y(goal.y);
    if (grid.navigable(gx, gy)) candidates.push_back({0.0, gy * grid.width + gx, gx, gy});

    std::vector<Candidate> ring;
    for (int cy = 0; cy < grid.height; ++cy) {
        for (int cx = 0; cx < grid.width; ++cx) {
            if (!grid.navigable(cx, cy) || (cx == gx && cy == gy)) continue;
            const double d = planar_distance(scene.cell_center(cx, cy), goal);
            if (d <= standoff_radius) ring.push_back({d, cy * grid.width + cx, cx, cy});
        }
    }
    std::sort(ring.begin(), ring.end(), [](const Candidate& a, const Candidate& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        return a.index < b.index;
    });
    candidates.insert(candidates.end(), ring.begin(), ring.end());

    const auto emit = [&](const SearchOut& found) {
        result.status = PlanStatus::ok;
        result.path.length = found.length * scene.cell_size;
        result.path.waypoints.reserve(found.cells.size());
        for (const int cell : found.cells)
            result.path.waypoints.push_back(
                scene.cell_center(cell % grid.width, cell / grid.width));
    };

    for (const auto& cand : candidates) {
        const SearchOut found = astar(grid, sx, sy, cand.x, cand.y);
        if (!found.found) continue;
        emit(found);
        return result;
    }

    // Nothing inside the standoff ring is reachable (large footprints can
    // swallow the whole ring). Fall back to the reachable navigable cell
    // nearest the goal so navigation still makes best-effort progress; the
    // caller re-decides from the closer pose.
    const std::vector<uint8_t> reachable = flood_reachable(grid, sx, sy);
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int cy = 0; cy < grid.height; ++cy) {
        for (int cx = 0; cx < grid.width; ++cx) {
            if (!reachable[static_cast<size_t>(cy * grid.width + cx)]) continue;
            const double d = planar_distance(scene.cell_center(cx, cy), goal);
            if (d < best_dist) {
                best_dist = d;
                best = cy * grid.width + cx;
            }
        }
    }
    if (best >= 0) {
        const SearchOut found = astar(grid, sx, sy, best % grid.width, best / grid.width);
        if (found.found) {
            emit(found);
            return result;
        }
    }

    result.status = PlanStatus::unreachable;
    result.error = "no navigable cell near the goal is reachable from the start";
    return result;
}

FollowOutcome follow_path(SceneSpec& scene, RobotState& state, const SimParams& params,
                          const Path& path, const Vec2& face_target,
                          const FollowConfig& config) {
    FollowOutcome out;
    if (path.waypoints.empty()) {
        out.arrived = true;
    } else {
        size_t wp = 0;
        const size_t last = path.waypoints.size() - 1;
        double best_remaining = std::numeric_limits<double>::infinity();
        int since_progress = 0;
        while (out.sim_steps < config.max_steps) {
            if (config.stop_distance > 0.0 &&
                planar_distance(state.position, face_target) <= config.stop_distance) {
                out.arrived = true;  // parked at standoff range from the target
                break;
            }
            const double dist_wp = planar_distance(state.position, path.waypoints[wp]);
            if (wp < last && dist_wp <= config.waypoint_tolerance) {
                ++wp;
                continue;
            }
            if (wp == last && dist_wp <= config.arrive_tolerance) {
                out.arrived = true;
                break;
            }
            const Vec2& target = path.waypoints[wp];
            const double desired =
                std::atan2(target.y - state.position.y, target.x - state.position.x);
            const double err = wrap_angle(desired - state.yaw);
            LowLevelAction action;
            action.omega = std::clamp(err / params.dt, -params.omega_max, params.omega_max);
            if (std::abs(err) <= config.heading_gate)
                action.v = std::min(params.v_max, dist_wp / params.dt);
            state = step(scene, state, action, params);
            settle_held(scene, state, params);
            ++out.sim_steps;
            if (config.on_step) config.on_step(state, out.sim_steps - 1, target);

            const double remaining = planar_distance(state.position, path.waypoints[last]);
            if (remaining < best_remaining - config.stall_min_progress) {
                best_remaining = remaining;
                since_progress = 0;
            } else if (++since_progress >= config.stall_window) {
                out.stalled = true;
                break;
            }
        }
        out.remaining_distance = planar_distance(state.position, path.waypoints[last]);
        if (!out.arrived && !out.stalled && out.sim_steps >= config.max_steps) out.stalled = true;
    }

    if (!out.stalled) {
        while (out.sim_steps < config.max_steps) {
            const double desired =
                std::atan2(face_target.y - state.position.y, face_target.x - state.position.x);
            const double err = wrap_angle(desired - state.yaw);
            if (std::abs(err) <= config.face_tolerance) break;
            LowLevelAction action;
            action.omega = std::clamp(err / params.dt, -params.omega_max, params.omega_max);
            state = step(scene, state, action, params);
            settle_held(scene, state, params);
            ++out.sim_steps;
        }
    }
    return out;
}

}  // namespace owmm
