#include "owmm/manip.hpp"

#include <cmath>
#include <limits>

namespace owmm {

PickOutcome try_pick(SceneSpec& scene, RobotState& state, const SimParams& params,
                     const Vec3& target) {
    PickOutcome out;
    if (state.is_holding()) {
        out.reason = "already holding " + state.held;
        return out;
    }
    const ObjectInstance* best = nullptr;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& obj : scene.objects) {
        if (obj.resting_on == kRestingHeld) continue;
        const double d = (obj.position - target).norm();
        if (d < best_dist) {
            best_dist = d;
            best = &obj;
        }
    }
    out.miss_distance = best ? best_dist : -1.0;
    if (best == nullptr || best_dist > params.pick_success_radius) {
        out.reason = "no object within the grasp tolerance of the target point";
        return out;
    }
    if (planar_distance(best->position.xy(), state.position) > params.max_reach) {
        out.reason = best->obj_id + " is outside the arm workspace";
        return out;
    }
    ObjectInstance* grasped = scene.find_object(best->obj_id);
    grasped->resting_on = kRestingHeld;
    state.held = grasped->obj_id;
    settle_held(scene, state, params);
    out.success = true;
    out.object_id = grasped->obj_id;
    return out;
}

PlaceOutcome try_place(SceneSpec& scene, RobotState& state, const SimParams& params,
                       const Vec3& target) {
    PlaceOutcome out;
    if (!state.is_holding()) {
        out.reason = "nothing is held";
        return out;
    }
    if (planar_distance(target.xy(), state.position) > params.max_reach) {
        out.reason = "release point is outside the arm workspace";
        return out;
    }
    ObjectInstance* obj = scene.find_object(state.held);
    out.object_id = obj->obj_id;
    const Receptacle* rec = scene.receptacle_under(target.xy());
    if (rec != nullptr) {
        obj->position = {target.x, target.y, rec->height + obj->bound_radius};
        obj->resting_on = rec->rec_id;
        out.receptacle_id = rec->rec_id;
    } else {
        obj->position = {target.x, target.y, scene.floor_height + obj->bound_radius};
        obj->resting_on = kRestingFloor;
    }
    state.held.clear();
    out.success = true;
    return out;
}

}  // namespace owmm
