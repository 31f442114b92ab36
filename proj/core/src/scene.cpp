#include "owmm/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <stdexcept>
#include <utility>

#include "owmm/bank.hpp"
#include "owmm/rng.hpp"

namespace owmm {
namespace {

// Sub-stream tags for Rng::derive so scene layout and task spawning draw
// from decoupled sequences even when given the same seed.
constexpr uint64_t kStreamLayout = 0x5ce4e;
constexpr uint64_t kStreamTask = 0x7a5c;

std::string format_id(const char* prefix, uint64_t n, int width) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s%0*llu", prefix, width,
                  static_cast<unsigned long long>(n));
    return buf;
}

bool valid_params(const SceneParams& p, const LabelBank& labels, std::string& error) {
    const auto fail = [&](const char* msg) {
        error = msg;
        return false;
    };
    if (p.grid_width < 8 || p.grid_height < 8) return fail("grid must be at least 8x8 cells");
    if (p.cell_size <= 0.0) return fail("cell_size must be positive");
    if (p.receptacle_count < 2) return fail("need at least two receptacles");
    if (p.object_count < 1) return fail("need at least one object");
    if (p.receptacle_count > static_cast<int>(labels.receptacles.size()))
        return fail("receptacle_count exceeds the label bank");
    if (p.object_count > static_cast<int>(labels.objects.size()))
        return fail("object_count exceeds the label bank");
    if (p.max_layout_retries < 1) return fail("max_layout_retries must be at least 1");
    if (p.rec_extent_min <= 0.0 || p.rec_extent_max < p.rec_extent_min)
        return fail("receptacle extent range is invalid");
    if (p.rec_height_min <= 0.0 || p.rec_height_max < p.rec_height_min)
        return fail("receptacle height range is invalid");
    if (p.object_radius_min <= 0.0 || p.object_radius_max < p.object_radius_min)
        return fail("object radius range is invalid");
    return true;
}

}  // namespace

double receptacle_diagonal(const Receptacle& rec) {
    return std::sqrt(rec.dx * rec.dx + rec.dy * rec.dy + rec.height * rec.height);
}

// The epsilon absorbs float noise so boundary-touching overlap stays zero-area.
CellRect receptacle_footprint_cells(const Receptacle& rec, double cell_size) {
    const double eps = 1e-9;
    CellRect r;
    r.x0 = static_cast<int>(std::floor((rec.center.x - 0.5 * rec.dx) / cell_size + eps));
    r.y0 = static_cast<int>(std::floor((rec.center.y - 0.5 * rec.dy) / cell_size + eps));
    r.x1 = static_cast<int>(std::ceil((rec.center.x + 0.5 * rec.dx) / cell_size - eps)) - 1;
    r.y1 = static_cast<int>(std::ceil((rec.center.y + 0.5 * rec.dy) / cell_size - eps)) - 1;
    return r;
}

const Receptacle* SceneSpec::find_receptacle(const std::string& rec_id) const {
    for (const auto& rec : receptacles)
        if (rec.rec_id == rec_id) return &rec;
    return nullptr;
}

const ObjectInstance* SceneSpec::find_object(const std::string& obj_id) const {
    for (const auto& obj : objects)
        if (obj.obj_id == obj_id) return &obj;
    return nullptr;
}

ObjectInstance* SceneSpec::find_object(const std::string& obj_id) {
    for (auto& obj : objects)
        if (obj.obj_id == obj_id) return &obj;
    return nullptr;
}

const Receptacle* SceneSpec::receptacle_under(const Vec2& p) const {
    const Receptacle* best = nullptr;
    for (const auto& rec : receptacles) {
        if (!rec.contains_xy(p)) continue;
        if (best == nullptr || rec.height > best->height) best = &rec;
    }
    return best;
}

json SceneSpec::to_json() const {
    json rows = json::array();
    for (int cy = 0; cy < occupancy.height; ++cy) {
        std::string row(static_cast<size_t>(occupancy.width), '0');
        for (int cx = 0; cx < occupancy.width; ++cx)
            if (occupancy.is_blocked(cx, cy)) row[static_cast<size_t>(cx)] = '1';
        rows.push_back(std::move(row));
    }
    json recs = json::array();
    for (const auto& r : receptacles) {
        recs.push_back(json{{"rec_id", r.rec_id},
                            {"label", r.label},
                            {"center", json::array({r.center.x, r.center.y})},
                            {"extent", json::array({r.dx, r.dy})},
                            {"height", r.height}});
    }
    json objs = json::array();
    for (const auto& o : objects) {
        objs.push_back(json{{"obj_id", o.obj_id},
                            {"label", o.label},
                            {"position", json::array({o.position.x, o.position.y, o.position.z})},
                            {"bound_radius", o.bound_radius},
                            {"resting_on", o.resting_on}});
    }
    return json{{"scene_id", scene_id},
                {"cell_size", cell_size},
                {"floor_height", floor_height},
                {"grid", json{{"width", occupancy.width},
                              {"height", occupancy.height},
                              {"blocked_rows", rows}}},
                {"receptacles", recs},
                {"objects", objs}};
}

SceneSpec SceneSpec::from_json(const json& j) {
    SceneSpec scene;
    scene.scene_id = j.at("scene_id").get<std::string>();
    scene.cell_size = j.at("cell_size").get<double>();
    scene.floor_height = j.at("floor_height").get<double>();
    if (scene.cell_size <= 0.0) throw std::runtime_error("scene: cell_size must be positive");

    const json& grid = j.at("grid");
    scene.occupancy.width = grid.at("width").get<int>();
    scene.occupancy.height = grid.at("height").get<int>();
    if (scene.occupancy.width <= 0 || scene.occupancy.height <= 0)
        throw std::runtime_error("scene: grid dimensions must be positive");
    const auto& rows = grid.at("blocked_rows");
    if (static_cast<int>(rows.size()) != scene.occupancy.height)
        throw std::runtime_error("scene: blocked_rows count does not match grid height");
    scene.occupancy.blocked.assign(
        static_cast<size_t>(scene.occupancy.width) * static_cast<size_t>(scene.occupancy.height),
        0);
    for (int cy = 0; cy < scene.occupancy.height; ++cy) {
        const std::string row = rows.at(static_cast<size_t>(cy)).get<std::string>();
        if (static_cast<int>(row.size()) != scene.occupancy.width)
            throw std::runtime_error("scene: blocked row length does not match grid width");
        for (int cx = 0; cx < scene.occupancy.width; ++cx) {
            const char c = row[static_cast<size_t>(cx)];
            if (c != '0' && c != '1')
                throw std::runtime_error("scene: blocked rows must contain only 0/1");
            if (c == '1') scene.occupancy.set_blocked(cx, cy, true);
        }
    }

    for (const auto& rj : j.at("receptacles")) {
        Receptacle rec;
        rec.rec_id = rj.at("rec_id").get<std::string>();
        rec.label = rj.at("label").get<std::string>();
        rec.center = {rj.at("center").at(0).get<double>(), rj.at("center").at(1).get<double>()};
        rec.dx = rj.at("extent").at(0).get<double>();
        rec.dy = rj.at("extent").at(1).get<double>();
        rec.height = rj.at("height").get<double>();
        if (rec.dx <= 0.0 || rec.dy <= 0.0 || rec.height <= 0.0)
            throw std::runtime_error("scene: receptacle extents must be positive");
        scene.receptacles.push_back(std::move(rec));
    }
    for (const auto& oj : j.at("objects")) {
        ObjectInstance obj;
        obj.obj_id = oj.at("obj_id").get<std::string>();
        obj.label = oj.at("label").get<std::string>();
        obj.position = {oj.at("position").at(0).get<double>(),
                        oj.at("position").at(1).get<double>(),
                        oj.at("position").at(2).get<double>()};
        obj.bound_radius = oj.at("bound_radius").get<double>();
        obj.resting_on = oj.at("resting_on").get<std::string>();
        if (obj.bound_radius <= 0.0)
            throw std::runtime_error("scene: object bound_radius must be positive");
        if (obj.resting_on != kRestingHeld && obj.resting_on != kRestingFloor &&
            scene.find_receptacle(obj.resting_on) == nullptr)
            throw std::runtime_error("scene: object rests on unknown receptacle " + obj.resting_on);
        scene.objects.push_back(std::move(obj));
    }
    return scene;
}

json TaskInstance::to_json() const {
    return json{{"task_id", task_id},
                {"instruction", instruction},
                {"object", object},
                {"start_rec", start_rec},
                {"goal_rec", goal_rec},
                {"strict_goal_threshold", strict_goal_threshold},
                {"lenient_goal_threshold", lenient_goal_threshold}};
}

TaskInstance TaskInstance::from_json(const json& j) {
    TaskInstance task;
    task.task_id = j.at("task_id").get<std::string>();
    task.instruction = j.at("instruction").get<std::string>();
    task.object = j.at("object").get<std::string>();
    task.start_rec = j.at("start_rec").get<std::string>();
    task.goal_rec = j.at("goal_rec").get<std::string>();
    task.strict_goal_threshold = j.at("strict_goal_threshold").get<double>();
    task.lenient_goal_threshold = j.at("lenient_goal_threshold").get<double>();
    if (task.strict_goal_threshold <= 0.0 ||
        task.lenient_goal_threshold < task.strict_goal_threshold)
        throw std::runtime_error("task: thresholds must satisfy 0 < strict <= lenient");
    return task;
}

SceneGenResult generate_scene(uint64_t seed, const SceneParams& params) {
    SceneGenResult result;
    const LabelBank& labels = default_label_bank();
    if (!valid_params(params, labels, result.error)) {
        result.status = SceneGenStatus::invalid_params;
        return result;
    }

    // A fresh layout attempt reshuffles everything from a derived sub-seed, so
    // a connectivity failure cannot poison later draws.
    constexpr int kLayoutAttempts = 16;
    for (int attempt = 0; attempt < kLayoutAttempts; ++attempt) {
        Rng rng(Rng::derive(Rng::derive(seed, kStreamLayout), static_cast<uint64_t>(attempt)));

        SceneSpec scene;
        scene.scene_id = format_id("scene_", seed, 6);
        scene.cell_size = params.cell_size;
        scene.occupancy.width = params.grid_width;
        scene.occupancy.height = params.grid_height;
        scene.occupancy.blocked.assign(
            static_cast<size_t>(params.grid_width) * static_cast<size_t>(params.grid_height), 0);

        std::vector<std::string> rec_labels = labels.receptacles;
        rng.shuffle(rec_labels);
        std::vector<std::string> obj_labels = labels.objects;
        rng.shuffle(obj_labels);

        bool layout_ok = true;
        for (int ri = 0; ri < params.receptacle_count && layout_ok; ++ri) {
            bool placed = false;
            for (int tries = 0; tries < params.max_layout_retries && !placed; ++tries) {
                Receptacle rec;
                rec.dx = rng.uniform(params.rec_extent_min, params.rec_extent_max);
                rec.dy = rng.uniform(params.rec_extent_min, params.rec_extent_max);
                rec.height = rng.uniform(params.rec_height_min, params.rec_height_max);
                // Keep the footprint at least two cells away from the border
                // so a navigable walkway always rings the scene.
                const double margin_x = 2.0 * params.cell_size + 0.5 * rec.dx;
                const double margin_y = 2.0 * params.cell_size + 0.5 * rec.dy;
                if (scene.width_m() - margin_x <= margin_x ||
                    scene.height_m() - margin_y <= margin_y)
                    continue;
                rec.center = {rng.uniform(margin_x, scene.width_m() - margin_x),
                              rng.uniform(margin_y, scene.height_m() - margin_y)};
                const CellRect cells = receptacle_footprint_cells(rec, params.cell_size);
                // The footprint plus a one-cell navigable ring must be free;
                // this separates receptacles and keeps their standoffs open.
                bool clear = true;
                for (int cy = cells.y0 - 1; cy <= cells.y1 + 1 && clear; ++cy)
                    for (int cx = cells.x0 - 1; cx <= cells.x1 + 1 && clear; ++cx)
                        if (!scene.occupancy.in_bounds(cx, cy) ||
                            scene.occupancy.is_blocked(cx, cy))
                            clear = false;
                if (!clear) continue;
                for (int cy = cells.y0; cy <= cells.y1; ++cy)
                    for (int cx = cells.x0; cx <= cells.x1; ++cx)
                        scene.occupancy.set_blocked(cx, cy, true);
                rec.rec_id = format_id("rec_", static_cast<uint64_t>(ri), 2);
                rec.label = rec_labels[static_cast<size_t>(ri)];
                scene.receptacles.push_back(std::move(rec));
                placed = true;
            }
            if (!placed) layout_ok = false;
        }
        if (!layout_ok || !all_receptacles_reachable(scene)) continue;

        bool objects_ok = true;
        for (int oi = 0; oi < params.object_count && objects_ok; ++oi) {
            ObjectInstance obj;
            obj.obj_id = format_id("obj_", static_cast<uint64_t>(oi), 2);
            obj.label = obj_labels[static_cast<size_t>(oi)];
            bool spot_found = false;
            for (int tries = 0; tries < params.max_layout_retries && !spot_found; ++tries) {
                const Receptacle& rec =
                    scene.receptacles[static_cast<size_t>(rng.bounded(scene.receptacles.size()))];
                obj.bound_radius =
                    rng.uniform(params.object_radius_min, params.object_radius_max);
                // Inner 70% of the footprint keeps the whole bound inside the top.
                obj.position = {rec.center.x + rng.uniform(-0.35, 0.35) * rec.dx,
                                rec.center.y + rng.uniform(-0.35, 0.35) * rec.dy,
                                rec.height + obj.bound_radius};
                obj.resting_on = rec.rec_id;
                spot_found = true;
                // Bodies must not interpenetrate, and a clear gap keeps one
                // trinket from swallowing a neighbor in every sight line.
                for (const auto& other : scene.objects) {
                    const double clearance =
                        obj.bound_radius + other.bound_radius + params.object_gap;
                    if ((obj.position - other.position).norm() < clearance) {
                        spot_found = false;
                        break;
                    }
                }
            }
            if (!spot_found) {
                objects_ok = false;
                break;
            }
            scene.objects.push_back(std::move(obj));
        }
        if (!objects_ok) continue;

        result.scene = std::move(scene);
        result.status = SceneGenStatus::ok;
        return result;
    }

    result.status = SceneGenStatus::generation_infeasible;
    result.error = "could not place receptacles with the required separation and connectivity";
    return result;
}

TaskSpawnResult spawn_task(const SceneSpec& scene, uint64_t seed, double strict_goal_threshold,
                           double lenient_goal_threshold) {
    TaskSpawnResult result;
    std::vector<const ObjectInstance*> candidates;
    for (const auto& obj : scene.objects)
        if (scene.find_receptacle(obj.resting_on) != nullptr) candidates.push_back(&obj);
    if (candidates.empty() || scene.receptacles.size() < 2) {
        result.status = TaskSpawnStatus::no_valid_pair;
        result.error = "need an object resting on a receptacle and at least two receptacles";
        return result;
    }

    Rng rng(Rng::derive(seed, kStreamTask));
    const ObjectInstance& obj =
        *candidates[static_cast<size_t>(rng.bounded(candidates.size()))];
    const Receptacle& start = *scene.find_receptacle(obj.resting_on);
    std::vector<const Receptacle*> goals;
    for (const auto& rec : scene.receptacles)
        if (rec.rec_id != start.rec_id) goals.push_back(&rec);
    const Receptacle& goal = *goals[static_cast<size_t>(rng.bounded(goals.size()))];

    TaskInstance task;
    task.task_id = scene.scene_id + format_id("_task_", seed, 4);
    task.object = obj.obj_id;
    task.start_rec = start.rec_id;
    task.goal_rec = goal.rec_id;
    task.strict_goal_threshold = strict_goal_threshold;
    task.lenient_goal_threshold = lenient_goal_threshold;
    task.instruction =
        "Move " + obj.label + " from the " + start.label + " to the " + goal.label + ".";
    result.task = std::move(task);
    result.status = TaskSpawnStatus::ok;
    return result;
}

std::vector<uint8_t> flood_fill(const OccupancyGrid& grid, int cx, int cy) {
    std::vector<uint8_t> reached(
        static_cast<size_t>(grid.width) * static_cast<size_t>(grid.height), 0);
    if (!grid.navigable(cx, cy)) return reached;
    std::deque<std::pair<int, int>> queue;
    queue.emplace_back(cx, cy);
    reached[static_cast<size_t>(cy) * static_cast<size_t>(grid.width) +
            static_cast<size_t>(cx)] = 1;
    while (!queue.empty()) {
        const auto [x, y] = queue.front();
        queue.pop_front();
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = x + dx, ny = y + dy;
                if (!grid.navigable(nx, ny)) continue;
                // Same connectivity as the planner: diagonal steps may not
                // cut a blocked corner.
                if (dx != 0 && dy != 0 &&
                    (!grid.navigable(x + dx, y) || !grid.navigable(x, y + dy)))
                    continue;
                const size_t idx = static_cast<size_t>(ny) * static_cast<size_t>(grid.width) +
                                   static_cast<size_t>(nx);
                if (!reached[idx]) {
                    reached[idx] = 1;
                    queue.emplace_back(nx, ny);
                }
            }
        }
    }
    return reached;
}

bool all_receptacles_reachable(const SceneSpec& scene) {
    const OccupancyGrid& grid = scene.occupancy;
    int sx = -1, sy = -1;
    for (int cy = 0; cy < grid.height && sx < 0; ++cy) {
        for (int cx = 0; cx < grid.width; ++cx) {
            if (!grid.is_blocked(cx, cy)) {
                sx = cx;
                sy = cy;
                break;
            }
        }
    }
    if (sx < 0) return scene.receptacles.empty();
    const std::vector<uint8_t> reached = flood_fill(grid, sx, sy);
    for (const auto& rec : scene.receptacles) {
        const CellRect cells = receptacle_footprint_cells(rec, scene.cell_size);
        bool ok = false;
        for (int cy = cells.y0 - 1; cy <= cells.y1 + 1 && !ok; ++cy) {
            for (int cx = cells.x0 - 1; cx <= cells.x1 + 1 && !ok; ++cx) {
                const bool on_ring =
                    cx < cells.x0 || cx > cells.x1 || cy < cells.y0 || cy > cells.y1;
                if (on_ring && grid.navigable(cx, cy) &&
                    reached[static_cast<size_t>(cy) * static_cast<size_t>(grid.width) +
                            static_cast<size_t>(cx)])
                    ok = true;
            }
        }
        if (!ok) return false;
    }
    return true;
}

}  // namespace owmm
