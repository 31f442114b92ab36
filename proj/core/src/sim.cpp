#include "owmm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "owmm/rng.hpp"

namespace owmm {
namespace {

constexpr double kRayEps = 1e-9;
constexpr double kOcclusionTol = 1e-6;
constexpr uint64_t kStreamPoseGraph = 0x9f4a;

bool ray_box(const Vec3& origin, const Vec3& dir, const Vec3& lo, const Vec3& hi, double max_t,
             double& t_hit) {
    double tmin = kRayEps, tmax = max_t;
    const double o[3] = {origin.x, origin.y, origin.z};
    const double d[3] = {dir.x, dir.y, dir.z};
    const double l[3] = {lo.x, lo.y, lo.z};
    const double h[3] = {hi.x, hi.y, hi.z};
    for (int i = 0; i < 3; ++i) {
        if (std::abs(d[i]) < 1e-12) {
            if (o[i] < l[i] || o[i] > h[i]) return false;
            continue;
        }
        double t0 = (l[i] - o[i]) / d[i];
        double t1 = (h[i] - o[i]) / d[i];
        if (t0 > t1) std::swap(t0, t1);
        tmin = std::max(tmin, t0);
        tmax = std::min(tmax, t1);
        if (tmin > tmax) return false;
    }
    t_hit = tmin;
    return true;
}

bool ray_sphere(const Vec3& origin, const Vec3& dir, const Vec3& center, double radius,
                double max_t, double& t_hit) {
    const Vec3 oc = origin - center;
    const double b = dot(oc, dir);
    const double c = dot(oc, oc) - radius * radius;
    const double disc = b * b - c;
    if (disc < 0.0) return false;
    const double t = -b - std::sqrt(disc);
    if (t <= kRayEps || t > max_t) return false;
    t_hit = t;
    return true;
}

}  // namespace

RobotState step(const SceneSpec& scene, const RobotState& state, const LowLevelAction& action,
                const SimParams& params) {
    const double v = std::clamp(action.v, -params.v_max, params.v_max);
    const double omega = std::clamp(action.omega, -params.omega_max, params.omega_max);
    RobotState next = state;
    const Vec2 proposed{state.position.x + v * std::cos(state.yaw) * params.dt,
                        state.position.y + v * std::sin(state.yaw) * params.dt};
    if (scene.navigable_at(proposed)) next.position = proposed;
    next.yaw = wrap_angle(state.yaw + omega * params.dt);
    return next;
}

CameraPose head_camera(const RobotState& state, const SimParams& params) {
    CameraPose pose;
    pose.position = {state.position.x, state.position.y, params.camera_height};
    pose.yaw = state.yaw;
    pose.pitch = params.camera_pitch;
    return pose;
}

Vec3 held_carry_point(const RobotState& state, const SimParams& params) {
    return {state.position.x + params.ee_forward * std::cos(state.yaw),
            state.position.y + params.ee_forward * std::sin(state.yaw), params.ee_height};
}

void settle_held(SceneSpec& scene, const RobotState& state, const SimParams& params) {
    if (!state.is_holding()) return;
    if (ObjectInstance* obj = scene.find_object(state.held)) {
        obj->position = held_carry_point(state, params);
        obj->resting_on = kRestingHeld;
    }
}

RayHit raycast(const SceneSpec& scene, const Vec3& origin, const Vec3& dir, double max_range,
               const std::string& ignore_obj, bool include_objects) {
    RayHit best;
    best.range = max_range;
    for (const auto& rec : scene.receptacles) {
        const Vec3 lo{rec.center.x - 0.5 * rec.dx, rec.center.y - 0.5 * rec.dy,
                      scene.floor_height};
        const Vec3 hi{rec.center.x + 0.5 * rec.dx, rec.center.y + 0.5 * rec.dy, rec.height};
        double t = 0.0;
        if (ray_box(origin, dir, lo, hi, best.range, t) && t < best.range) {
            best = {HitKind::receptacle, rec.rec_id, t};
        }
    }
    if (include_objects) {
        for (const auto& obj : scene.objects) {
            if (obj.resting_on == kRestingHeld || obj.obj_id == ignore_obj) continue;
            double t = 0.0;
            if (ray_sphere(origin, dir, obj.position, obj.bound_radius, best.range, t) &&
                t < best.range) {
                best = {HitKind::object, obj.obj_id, t};
            }
        }
    }
    if (dir.z < -1e-12) {
        const double t = (scene.floor_height - origin.z) / dir.z;
        if (t > kRayEps && t < best.range) best = {HitKind::floor, "", t};
    }
    if (best.kind == HitKind::none) best.range = 0.0;
    return best;
}

namespace {

bool reference_point_visible(const SceneSpec& scene, const CameraPose& camera,
                             const PixelPoint& pp, const CameraIntrinsics& intr,
                             const std::string& entity_id, double max_range,
                             const std::string& exclude_obj, bool objects_occlude) {
    if (!pp.in_front) return false;
    if (pp.u < 0.0 || pp.u >= intr.width || pp.v < 0.0 || pp.v >= intr.height) return false;
    if (pp.range < 1e-9 || pp.range > max_range) return false;
    const Vec3 dir = (unproject_px(camera, intr, pp.u, pp.v, 1.0) - camera.position).normalized();
    const RayHit hit =
        raycast(scene, camera.position, dir, max_range, exclude_obj, objects_occlude);
    if (hit.kind == HitKind::none) return true;
    if (hit.id == entity_id && hit.kind != HitKind::floor) return true;
    return hit.range >= pp.range - kOcclusionTol;
}

}  // namespace

Observation observe_from(const SceneSpec& scene, const CameraPose& camera,
                         const SimParams& params, bool with_depth_raster,
                         const std::string& exclude_obj) {
    const CameraIntrinsics& intr = params.intrinsics;
    Observation obs;
    obs.camera = camera;

    for (const auto& rec : scene.receptacles) {
        const Vec3 ref = rec.top_center();
        const PixelPoint pp = project_point(camera, intr, ref);
        if (!reference_point_visible(scene, camera, pp, intr, rec.rec_id, params.max_range,
                                     exclude_obj, /*objects_occlude=*/false))
            continue;
        // Screen box from the in-front corners of the 3-D box.
        BBoxPx box{pp.u, pp.v, pp.u, pp.v};
        int corners_in_front = 0;
        for (int i = 0; i < 8; ++i) {
            const Vec3 corner{rec.center.x + ((i & 1) ? 0.5 : -0.5) * rec.dx,
                              rec.center.y + ((i & 2) ? 0.5 : -0.5) * rec.dy,
                              (i & 4) ? rec.height : scene.floor_height};
            const PixelPoint cp = project_point(camera, intr, corner);
            if (!cp.in_front) continue;
            ++corners_in_front;
            box.x0 = std::min(box.x0, cp.u);
            box.y0 = std::min(box.y0, cp.v);
            box.x1 = std::max(box.x1, cp.u);
            box.y1 = std::max(box.y1, cp.v);
        }
        if (corners_in_front < 2) continue;
        ObservedEntity ent;
        ent.id = rec.rec_id;
        ent.kind = "receptacle";
        ent.label = rec.label;
        ent.bbox = normalize_bbox(box, intr);
        ent.anchor_u = pp.u;
        ent.anchor_v = pp.v;
        ent.depth_m = pp.range;
        obs.entities.push_back(std::move(ent));
    }

    for (const auto& obj : scene.objects) {
        if (obj.resting_on == kRestingHeld || obj.obj_id == exclude_obj) continue;
        const SphereProjection sp = project_sphere(camera, intr, obj.position, obj.bound_radius);
        if (!sp.in_front) continue;
        if (!reference_point_visible(scene, camera, sp.center, intr, obj.obj_id,
                                     params.max_range, exclude_obj, /*objects_occlude=*/true))
            continue;
        ObservedEntity ent;
        ent.id = obj.obj_id;
        ent.kind = "object";
        ent.label = obj.label;
        ent.bbox = normalize_bbox(sp.bbox, intr);
        ent.anchor_u = sp.center.u;
        ent.anchor_v = sp.center.v;
        ent.depth_m = sp.center.range;
        obs.entities.push_back(std::move(ent));
    }

    if (with_depth_raster) {
        obs.depth.assign(static_cast<size_t>(intr.width) * static_cast<size_t>(intr.height),
                         static_cast<float>(params.max_range));
        size_t i = 0;
        for (int py = 0; py < intr.height; ++py) {
            for (int px = 0; px < intr.width; ++px, ++i) {
                const Vec3 dir = pixel_ray(camera, intr, px + 0.5, py + 0.5);
                const RayHit hit = raycast(scene, camera.position, dir, params.max_range,
                                           exclude_obj);
                if (hit.kind != HitKind::none) obs.depth[i] = static_cast<float>(hit.range);
            }
        }
    }
    return obs;
}

Observation observe(const SceneSpec& scene, const RobotState& state, const SimParams& params,
                    bool with_depth_raster) {
    return observe_from(scene, head_camera(state, params), params, with_depth_raster, state.held);
}

namespace {

struct Cell {
    int x = 0, y = 0;
};

std::vector<Cell> reached_cells(const SceneSpec& scene, std::vector<uint8_t>& reached_out) {
    const OccupancyGrid& grid = scene.occupancy;
    int sx = -1, sy = -1;
    for (int cy = 0; cy < grid.height && sx < 0; ++cy)
        for (int cx = 0; cx < grid.width; ++cx)
            if (!grid.is_blocked(cx, cy)) {
                sx = cx;
                sy = cy;
                break;
            }
    std::vector<Cell> cells;
    if (sx < 0) {
        reached_out.assign(static_cast<size_t>(grid.width) * static_cast<size_t>(grid.height), 0);
        return cells;
    }
    reached_out = flood_fill(grid, sx, sy);
    for (int cy = 0; cy < grid.height; ++cy)
        for (int cx = 0; cx < grid.width; ++cx)
            if (reached_out[static_cast<size_t>(cy) * static_cast<size_t>(grid.width) +
                            static_cast<size_t>(cx)])
                cells.push_back({cx, cy});
    return cells;
}

}  // namespace

PoseGraphResult render_pose_graph(const SceneSpec& scene, const SimParams& params,
                                  uint64_t seed) {
    PoseGraphResult result;
    std::vector<uint8_t> reached;
    const std::vector<Cell> free_cells = reached_cells(scene, reached);
    if (free_cells.empty()) {
        result.error = "scene has no reachable navigable cells";
        return result;
    }
    const OccupancyGrid& grid = scene.occupancy;
    const auto is_reached = [&](int cx, int cy) {
        return grid.in_bounds(cx, cy) &&
               reached[static_cast<size_t>(cy) * static_cast<size_t>(grid.width) +
                       static_cast<size_t>(cx)] != 0;
    };

    struct Shot {
        CameraPose camera;
        std::string provenance;
    };
    std::vector<Shot> shots;

    for (const auto& rec : scene.receptacles) {
        const CellRect rect = receptacle_footprint_cells(rec, scene.cell_size);
        // Ring cells adjacent to the footprint, nearest to the target first.
        struct Candidate {
            double dist;
            int index;
            Cell cell;
        };
        std::vector<Candidate> ring;
        for (int cy = rect.y0 - 1; cy <= rect.y1 + 1; ++cy) {
            for (int cx = rect.x0 - 1; cx <= rect.x1 + 1; ++cx) {
                if (rect.contains(cx, cy) || !is_reached(cx, cy)) continue;
                const Vec2 c = scene.cell_center(cx, cy);
                ring.push_back({planar_distance(c, rec.center), cy * grid.width + cx, {cx, cy}});
            }
        }
        std::sort(ring.begin(), ring.end(), [](const Candidate& a, const Candidate& b) {
            if (a.dist != b.dist) return a.dist < b.dist;
            return a.index < b.index;
        });
        bool shot_taken = false;
        for (const auto& cand : ring) {
            const Vec2 c = scene.cell_center(cand.cell.x, cand.cell.y);
            const Vec3 ref = rec.top_center();
            CameraPose cam;
            cam.position = {c.x, c.y, params.camera_height};
            cam.yaw = std::atan2(ref.y - c.y, ref.x - c.x);
            const double planar = planar_distance(c, rec.center);
            cam.pitch = std::atan2(ref.z - params.camera_height, planar);
            const PixelPoint pp = project_point(cam, params.intrinsics, ref);
            if (reference_point_visible(scene, cam, pp, params.intrinsics, rec.rec_id,
                                        params.max_range, {}, /*objects_occlude=*/false)) {
                shots.push_back({cam, rec.rec_id});
                shot_taken = true;
                break;
            }
        }
        if (!shot_taken) {
            result.error = "no reachable viewpoint sees receptacle " + rec.rec_id;
            return result;
        }
    }

    Rng rng(Rng::derive(seed, kStreamPoseGraph));
    for (int i = 0; i < params.pose_graph_random_frames; ++i) {
        const Cell cell = free_cells[static_cast<size_t>(rng.bounded(free_cells.size()))];
        const Vec2 c = scene.cell_center(cell.x, cell.y);
        CameraPose cam;
        cam.position = {c.x, c.y, params.camera_height};
        cam.yaw = rng.uniform(-std::numbers::pi, std::numbers::pi);
        cam.pitch = params.camera_pitch;
        shots.push_back({cam, "random"});
    }

    rng.shuffle(shots);
    result.frames.reserve(shots.size());
    for (size_t i = 0; i < shots.size(); ++i) {
        PoseFrame frame;
        frame.index = static_cast<int>(i);
        frame.camera = shots[i].camera;
        frame.provenance = shots[i].provenance;
        frame.observation = observe_from(scene, shots[i].camera, params);
        result.frames.push_back(std::move(frame));
    }
    result.ok = true;
    return result;
}

RobotState spawn_robot(const SceneSpec& scene, const SimParams& params) {
    std::vector<uint8_t> reached;
    const std::vector<Cell> free_cells = reached_cells(scene, reached);
    RobotState state;
    if (free_cells.empty()) return state;
    const Cell* fallback = &free_cells.front();
    const Cell* chosen = nullptr;
    for (const auto& cell : free_cells) {
        const Vec2 c = scene.cell_center(cell.x, cell.y);
        bool clear = true;
        for (const auto& rec : scene.receptacles) {
            if (rect_distance(c, rec.center, rec.dx, rec.dy) < params.standoff_radius) {
                clear = false;
                break;
            }
        }
        if (clear) {
            chosen = &cell;
            break;
        }
    }
    if (chosen == nullptr) chosen = fallback;
    state.position = scene.cell_center(chosen->x, chosen->y);
    state.yaw = std::atan2(0.5 * scene.height_m() - state.position.y,
                           0.5 * scene.width_m() - state.position.x);
    return state;
}

}  // namespace owmm
