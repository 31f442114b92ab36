#pragma once

#include <functional>
#include <string>
#include <vector>

#include "owmm/scene.hpp"
#include "owmm/sim.hpp"

namespace owmm {

// Grid path as a sequence of cell centers, start cell first.
struct Path {
    std::vector<Vec2> waypoints;
    double length = 0.0;  // meters, sum of segment costs
};

enum class PlanStatus { ok, start_blocked, unreachable };

struct PlanResult {
    PlanStatus status = PlanStatus::ok;
    Path path;
    std::string error;
};

// A* over the occupancy grid: 8-connected, diagonal steps cost sqrt(2) times
// the cell size and may not cut blocked corners. When the goal cell itself is
// blocked or unreachable, navigable cells whose center lies within
// `standoff_radius` of the goal point are tried as substitutes, nearest (then
// lowest cell index) first; if none of those is reachable either (a large
// blocked footprint can swallow the whole ring), the plan falls back to the
// reachable navigable cell nearest the goal point so the caller still makes
// best-effort progress. Ties during the search resolve by cell index, so
// identical inputs yield identical paths everywhere.
PlanResult plan_path(const SceneSpec& scene, const Vec2& start, const Vec2& goal,
                     double standoff_radius);

// Drives a path with rotate-then-advance unicycle control, then turns in
// place toward `face_target`.
struct FollowConfig {
    double waypoint_tolerance = 0.125;  // advance to the next waypoint inside this
    double arrive_tolerance = 0.1;      // final waypoint considered reached inside this
    double stop_distance = 0.0;  // >0: also arrive once this close to `face_target`
    double heading_gate = 0.35;  // rad; drive only when heading error is below
    double face_tolerance = 0.05;       // rad; final alignment target
    int max_steps = 1500;               // hard cap on sim steps
    int stall_window = 50;              // steps without progress before giving up
    double stall_min_progress = 0.01;   // meters of required progress per window
    // Called after each drive step with the new state, the 0-based step
    // index, and the waypoint currently steered for.
    std::function<void(const RobotState&, int, const Vec2&)> on_step;
};

struct FollowOutcome {
    bool arrived = false;
    bool stalled = false;
    int sim_steps = 0;
    double remaining_distance = 0.0;  // to the final waypoint when finished
};

// Advances the robot (and any held object) through the scene until arrival,
// stall, or the step cap. The robot ends facing `face_target`.
FollowOutcome follow_path(SceneSpec& scene, RobotState& state, const SimParams& params,
                          const Path& path, const Vec2& face_target,
                          const FollowConfig& config = {});

}  // namespace owmm
