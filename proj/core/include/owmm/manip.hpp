#pragma once

#include <string>

#include "owmm/scene.hpp"
#include "owmm/sim.hpp"

namespace owmm {

// Grasp attempt at a 3-D target point (typically the unprojection of a pick
// box center). Succeeds when some free object's center lies within
// pick_success_radius of the target and within max_reach of the base.
struct PickOutcome {
    bool success = false;
    std::string object_id;  // grasped object on success
    std::string reason;     // failure explanation otherwise
    double miss_distance = 0.0;  // target-to-nearest-object distance
};

PickOutcome try_pick(SceneSpec& scene, RobotState& state, const SimParams& params,
                     const Vec3& target);

// Release attempt at a 3-D target point. The held object snaps down onto the
// topmost receptacle under the point, or onto the floor if none. Fails when
// nothing is held or the point is outside the arm workspace.
struct PlaceOutcome {
    bool success = false;
    std::string object_id;
    std::string receptacle_id;  // empty when the object lands on the floor
    std::string reason;
};

PlaceOutcome try_place(SceneSpec& scene, RobotState& state, const SimParams& params,
                       const Vec3& target);

}  // namespace owmm
