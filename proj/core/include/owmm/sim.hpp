#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "owmm/camera.hpp"
#include "owmm/geom.hpp"
#include "owmm/scene.hpp"

namespace owmm {

// Fixed physical configuration of the robot and its head camera.
struct SimParams {
    double dt = 0.1;            // seconds per control step
    double v_max = 1.0;         // m/s forward speed limit
    double omega_max = 1.5;     // rad/s turn rate limit
    double camera_height = 1.2;
    double camera_pitch = -0.35;  // fixed downward tilt
    CameraIntrinsics intrinsics;  // 512x512, 90 degree hfov
    double max_reach = 1.2;       // planar workspace radius of the arm
    double pick_success_radius = 0.15;  // grasp tolerance around an object center
    double standoff_radius = 0.6;       // nav fallback ring around blocked goals
    double ee_forward = 0.3;            // carried object offset ahead of the base
    double ee_height = 0.8;             // carried object height
    double max_range = 20.0;            // raycast / depth clamp
    int pose_graph_random_frames = 2;
};

struct RobotState {
    Vec2 position;
    double yaw = 0.0;
    std::string held;  // obj_id while carrying, empty otherwise

    bool is_holding() const { return !held.empty(); }
};

struct LowLevelAction {
    double v = 0.0;      // forward velocity command
    double omega = 0.0;  // yaw rate command
};

// One unicycle integration step: limits are clamped, the position update uses
// the pre-step heading, and a step into a blocked or out-of-range cell keeps
// the old position (the rotation still applies).
RobotState step(const SceneSpec& scene, const RobotState& state, const LowLevelAction& action,
                const SimParams& params);

CameraPose head_camera(const RobotState& state, const SimParams& params);

// World-frame point where a carried object is held.
Vec3 held_carry_point(const RobotState& state, const SimParams& params);

// Moves the held object (if any) to the carry point. Call after every step.
void settle_held(SceneSpec& scene, const RobotState& state, const SimParams& params);

enum class HitKind { none, receptacle, object, floor };

struct RayHit {
    HitKind kind = HitKind::none;
    std::string id;  // rec_id / obj_id when applicable
    double range = 0.0;
};

// Nearest intersection along the ray. Held objects never intersect; an
// object whose id equals `ignore_obj` is skipped as well. With
// `include_objects` false only receptacles and the floor are tested, which
// visibility checks use so furniture-scale entities are never hidden behind
// hand-scale objects.
RayHit raycast(const SceneSpec& scene, const Vec3& origin, const Vec3& dir, double max_range,
               const std::string& ignore_obj = {}, bool include_objects = true);

// Everything the perception abstraction exposes about one visible entity.
struct ObservedEntity {
    std::string id;
    std::string kind;   // "object" or "receptacle"
    std::string label;
    BBoxNorm bbox;      // normalized [0, 1000] box, clipped to the image
    double anchor_u = 0.0;  // projected reference point, raw pixels
    double anchor_v = 0.0;
    double depth_m = 0.0;   // Euclidean range to the reference point
};

struct Observation {
    CameraPose camera;
    std::vector<ObservedEntity> entities;
    // Optional per-pixel Euclidean range raster, row major, width*height.
    std::vector<float> depth;
};

// Renders the entity list (and optionally the depth raster) for an arbitrary
// camera. An entity is visible when its reference point projects in front of
// the camera, lands inside the image, and the first raycast hit along that
// pixel is the entity itself. Reference points: object center, receptacle
// top-face center. Receptacle visibility ignores objects along the sight
// line (hand-scale items never hide furniture); object visibility is blocked
// by both. `exclude_obj` drops one object (the held one) entirely.
Observation observe_from(const SceneSpec& scene, const CameraPose& camera,
                         const SimParams& params, bool with_depth_raster = false,
                         const std::string& exclude_obj = {});

// Ego view through the robot's head camera; a held object is excluded.
Observation observe(const SceneSpec& scene, const RobotState& state, const SimParams& params,
                    bool with_depth_raster = false);

// One pre-mapped frame of the scene pose graph.
struct PoseFrame {
    int index = 0;
    CameraPose camera;
    std::string provenance;  // rec_id the frame was shot for, or "random"
    Observation observation;
};

struct PoseGraphResult {
    bool ok = false;
    std::vector<PoseFrame> frames;
    std::string error;
};

// Deterministic pre-mapping pass: one frame per receptacle (shot from a
// reachable cell adjacent to its footprint, aimed at the top-face center)
// plus `pose_graph_random_frames` frames at random reachable cells. Frame
// order is shuffled so position does not encode provenance.
PoseGraphResult render_pose_graph(const SceneSpec& scene, const SimParams& params, uint64_t seed);

// Deterministic spawn pose: center of the first reachable navigable cell
// (scanning y-major) at least `standoff_radius` away from every receptacle
// footprint, facing the scene center.
RobotState spawn_robot(const SceneSpec& scene, const SimParams& params);

}  // namespace owmm
