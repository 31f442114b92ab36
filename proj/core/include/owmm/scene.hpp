#pragma once

#include "owmm/canonical_json.hpp"
#include "owmm/geom.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace owmm {

struct Receptacle {
    std::string rec_id;
    std::string label;
    Vec2 center;          // world meters
    double dx = 0.0;      // footprint extent along x, meters
    double dy = 0.0;      // footprint extent along y, meters
    double height = 0.0;  // top surface z, meters

    bool contains_xy(const Vec2& p) const {
        return std::abs(p.x - center.x) <= 0.5 * dx && std::abs(p.y - center.y) <= 0.5 * dy;
    }
    Vec3 top_center() const { return {center.x, center.y, height}; }
};

/// 3-D bounding-box diagonal, sqrt(dx^2 + dy^2 + height^2).
double receptacle_diagonal(const Receptacle& rec);

inline constexpr const char* kRestingHeld = "held";
inline constexpr const char* kRestingFloor = "floor";

struct ObjectInstance {
    std::string obj_id;
    std::string label;
    Vec3 position;
    double bound_radius = 0.0;
    std::string resting_on;  // rec_id, "held", or "floor"
};

// Boolean occupancy over a uniform grid; true = blocked. Row-major, y major.
struct OccupancyGrid {
    int width = 0;   // cells along x
    int height = 0;  // cells along y
    std::vector<uint8_t> blocked;

    bool in_bounds(int cx, int cy) const {
        return cx >= 0 && cx < width && cy >= 0 && cy < height;
    }
    bool is_blocked(int cx, int cy) const {
        return blocked[static_cast<size_t>(cy) * static_cast<size_t>(width) +
                       static_cast<size_t>(cx)] != 0;
    }
    void set_blocked(int cx, int cy, bool v) {
        blocked[static_cast<size_t>(cy) * static_cast<size_t>(width) +
                static_cast<size_t>(cx)] = v ? 1 : 0;
    }
    bool navigable(int cx, int cy) const { return in_bounds(cx, cy) && !is_blocked(cx, cy); }
};

struct SceneSpec {
    std::string scene_id;
    double cell_size = 0.25;  // meters per cell
    OccupancyGrid occupancy;
    std::vector<Receptacle> receptacles;
    std::vector<ObjectInstance> objects;
    double floor_height = 0.0;

    int cell_x(double wx) const { return static_cast<int>(std::floor(wx / cell_size)); }
    int cell_y(double wy) const { return static_cast<int>(std::floor(wy / cell_size)); }
    Vec2 cell_center(int cx, int cy) const {
        return {(cx + 0.5) * cell_size, (cy + 0.5) * cell_size};
    }
    bool navigable_at(const Vec2& p) const {
        return occupancy.navigable(cell_x(p.x), cell_y(p.y));
    }
    double width_m() const { return occupancy.width * cell_size; }
    double height_m() const { return occupancy.height * cell_size; }

    const Receptacle* find_receptacle(const std::string& rec_id) const;
    const ObjectInstance* find_object(const std::string& obj_id) const;
    ObjectInstance* find_object(const std::string& obj_id);
    /// Topmost receptacle whose footprint contains (x, y), if any.
    const Receptacle* receptacle_under(const Vec2& p) const;

    json to_json() const;
    static SceneSpec from_json(const json& j);
};

struct TaskInstance {
    std::string task_id;
    std::string instruction;
    std::string object;     // obj_id
    std::string start_rec;  // rec_id
    std::string goal_rec;   // rec_id
    double strict_goal_threshold = 0.85;
    double lenient_goal_threshold = 1.7;

    json to_json() const;
    static TaskInstance from_json(const json& j);
};

struct SceneParams {
    int grid_width = 48;
    int grid_height = 48;
    double cell_size = 0.25;
    int receptacle_count = 6;
    int object_count = 3;
    int max_layout_retries = 1000;

    // Receptacle extents keep the 3-D diagonals inside the band that the
    // episodic threshold filter accepts, and heights below the head camera.
    double rec_extent_min = 0.5;
    double rec_extent_max = 1.1;
    double rec_height_min = 0.35;
    double rec_height_max = 0.95;
    double object_radius_min = 0.04;
    double object_radius_max = 0.10;
    // Minimum surface-to-surface spacing between spawned objects.
    double object_gap = 0.06;
};

enum class SceneGenStatus { ok, invalid_params, generation_infeasible };

struct SceneGenResult {
    SceneGenStatus status = SceneGenStatus::ok;
    SceneSpec scene;
    std::string error;
};

/// Deterministic procedural scene: receptacle boxes on an occupancy grid,
/// objects resting on top surfaces, labels from the bundled bank.
SceneGenResult generate_scene(uint64_t seed, const SceneParams& params = {});

enum class TaskSpawnStatus { ok, no_valid_pair };

struct TaskSpawnResult {
    TaskSpawnStatus status = TaskSpawnStatus::ok;
    TaskInstance task;
    std::string error;
};

/// Picks an object and a distinct goal receptacle uniformly under the seed
/// and renders the "Move <A> from the <B> to the <C>." instruction.
TaskSpawnResult spawn_task(const SceneSpec& scene, uint64_t seed,
                           double strict_goal_threshold = 0.85,
                           double lenient_goal_threshold = 1.7);

/// Inclusive cell-index bounds of a rectangle of blocked cells.
struct CellRect {
    int x0 = 0, y0 = 0, x1 = -1, y1 = -1;

    bool contains(int cx, int cy) const { return cx >= x0 && cx <= x1 && cy >= y0 && cy <= y1; }
};

/// Cells whose area overlaps the receptacle footprint (zero-area boundary
/// contact does not count). These are exactly the cells generation blocks.
CellRect receptacle_footprint_cells(const Receptacle& rec, double cell_size);

/// Flood fill over navigable cells from (cx, cy); returns per-cell
/// reachability. Used as the connectivity oracle and by the planner tests.
std::vector<uint8_t> flood_fill(const OccupancyGrid& grid, int cx, int cy);

/// True when, from some navigable cell, every receptacle has at least one
/// reachable navigable cell adjacent (8-neighborhood) to its blocked footprint.
bool all_receptacles_reachable(const SceneSpec& scene);

}  // namespace owmm
