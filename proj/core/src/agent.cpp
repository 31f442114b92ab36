#include "owmm/agent.hpp"

#include <algorithm>
#include <cmath>

#include "owmm/manip.hpp"
#include "owmm/rng.hpp"

namespace owmm {

json StepRecord::to_json() const {
    return json{{"step", step},
                {"context", context},
                {"context_digest", to_hex(context_digest)},
                {"raw_response", raw_response},
                {"parse_status", parse_status},
                {"action_name", action_name},
                {"action_args", action_args},
                {"action_valid", action_valid},
                {"invalid_reason", invalid_reason},
                {"actuation_success", actuation_success},
                {"actuation_detail", actuation_detail},
                {"sim_steps", sim_steps},
                {"selected_frame_after", selected_frame_after},
                {"robot", json::array({robot_x, robot_y, robot_yaw})},
                {"dist_base_object", dist_base_object},
                {"dist_object_goal", dist_object_goal},
                {"pick_miss", pick_miss},
                {"holding_id", holding_id},
                {"holding_after", holding_after},
                {"summarization", summarization}};
}

const char* terminal_name(EpisodeTerminal terminal) {
    switch (terminal) {
        case EpisodeTerminal::success: return "success";
        case EpisodeTerminal::dead_loop: return "dead_loop";
        case EpisodeTerminal::invalid_budget: return "invalid_budget";
        case EpisodeTerminal::timeout: return "timeout";
        case EpisodeTerminal::policy_error: return "policy_error";
    }
    return "unknown";
}

json episode_end_json(const EpisodeResult& result, const std::string& scene_id,
                      const std::string& task_id, int episode_index, uint64_t seed) {
    return json{{"type", "episode_end"},
                {"scene_id", scene_id},
                {"task_id", task_id},
                {"episode", episode_index},
                {"seed", seed},
                {"terminal", terminal_name(result.terminal)},
                {"success_lenient", result.success_lenient},
                {"success_strict", result.success_strict},
                {"final_object_goal_distance", result.final_object_goal_distance},
                {"steps_used", result.steps_used},
                {"total_sim_steps", result.total_sim_steps}};
}

SetupResult prepare_episode(const SceneSpec& scene, const TaskInstance& task,
                            const SimParams& params, uint64_t seed) {
    SetupResult result;
    PoseGraphResult graph = render_pose_graph(scene, params, seed);
    if (!graph.ok) {
        result.error = graph.error;
        return result;
    }
    result.setup.scene = scene;
    result.setup.task = task;
    result.setup.params = params;
    result.setup.frames = std::move(graph.frames);
    result.setup.robot = spawn_robot(scene, params);
    result.ok = true;
    return result;
}

std::string action_signature(const HighLevelAction& action, bool holding) {
    std::string sig = kind_name(action.kind);
    sig += ':';
    if (action.kind == ActionKind::search_scene_frame) {
        sig += std::to_string(action.frame_index);
    } else {
        sig += std::to_string(action.bbox.x1 / 100) + ',' + std::to_string(action.bbox.y1 / 100) +
               ',' + std::to_string(action.bbox.x2 / 100) + ',' +
               std::to_string(action.bbox.y2 / 100);
    }
    sig += holding ? ":1" : ":0";
    return sig;
}

bool detect_dead_loop(const std::vector<LoopSignature>& signatures, int window, int repeats,
                      double min_displacement) {
    if (repeats <= 0) return false;
    const size_t begin =
        signatures.size() > static_cast<size_t>(window) ? signatures.size() - window : 0;
    for (size_t i = begin; i < signatures.size(); ++i) {
        int count = 0;
        double max_pair = 0.0;
        for (size_t a = begin; a < signatures.size(); ++a) {
            if (signatures[a].key != signatures[i].key) continue;
            ++count;
            for (size_t b = a + 1; b < signatures.size(); ++b)
                if (signatures[b].key == signatures[i].key)
                    max_pair = std::max(
                        max_pair, planar_distance(signatures[a].position, signatures[b].position));
        }
        if (count >= repeats && max_pair < min_displacement) return true;
    }
    return false;
}

EpisodeResult run_episode(EpisodeSetup& setup, Policy& policy, const AgentConfig& config) {
    EpisodeResult result;
    SceneSpec& scene = setup.scene;
    const TaskInstance& task = setup.task;
    const SimParams& params = setup.params;
    RobotState& robot = setup.robot;

    std::string history = "Task just started.";
    int selected_frame = -1;
    int invalid_count = 0;
    std::vector<LoopSignature> signatures;
    bool terminal_set = false;

    const auto snapshot = [&](StepRecord& rec) {
        rec.robot_x = robot.position.x;
        rec.robot_y = robot.position.y;
        rec.robot_yaw = robot.yaw;
        rec.selected_frame_after = selected_frame;
        rec.holding_id = robot.held;
        rec.holding_after = robot.is_holding();
        const ObjectInstance* obj = scene.find_object(task.object);
        const Receptacle* goal = scene.find_receptacle(task.goal_rec);
        if (obj) rec.dist_base_object = planar_distance(robot.position, obj->position.xy());
        if (obj && goal)
            rec.dist_object_goal = planar_distance(obj->position.xy(), goal->center);
    };

    for (int t = 0; t < config.max_steps && !terminal_set; ++t) {
        const Observation ego = observe(scene, robot, params);
        PolicyInput input;
        input.task = &task;
        input.frames = &setup.frames;
        input.ego = &ego;
        input.history = history;
        input.step = t;
        input.selected_frame = selected_frame;
        input.held_object = robot.held;
        input.params = &params;

        StepRecord rec;
        rec.step = t;
        rec.context = history;
        rec.context_digest = fnv1a64(history);

        const auto commit = [&]() {
            result.total_sim_steps += rec.sim_steps;
            result.steps.push_back(rec);
            if (config.decision_hook) config.decision_hook(input, result.steps.back());
        };

        const PolicyOutput pout = policy.decide(input);
        if (!pout.ok) {
            rec.parse_status = "policy_error";
            rec.invalid_reason = pout.error;
            snapshot(rec);
            commit();
            result.terminal = EpisodeTerminal::policy_error;
            terminal_set = true;
            break;
        }
        rec.raw_response = pout.raw_text;
        const ParseResult parsed = parse_decision(pout.raw_text);
        rec.parse_status = parse_status_name(parsed.status);

        bool valid = parsed.status == ParseStatus::ok;
        std::string reason = parsed.error;
        if (valid && parsed.decision.action.kind == ActionKind::search_scene_frame &&
            parsed.decision.action.frame_index >= static_cast<int>(setup.frames.size())) {
            valid = false;
            reason = "frame index out of range";
        }
        if (!valid) {
            rec.invalid_reason = reason;
            snapshot(rec);
            commit();
            if (++invalid_count > config.invalid_action_budget) {
                result.terminal = EpisodeTerminal::invalid_budget;
                terminal_set = true;
            }
            continue;  // the history text does not advance on invalid actions
        }

        const HighLevelAction& action = parsed.decision.action;
        rec.action_name = kind_name(action.kind);
        rec.action_args = action.args_json();
        rec.action_valid = true;
        const bool holding_before = robot.is_holding();

        switch (action.kind) {
            case ActionKind::search_scene_frame: {
                selected_frame = action.frame_index;
                rec.actuation_success = true;
                rec.actuation_detail =
                    "selected scene frame " + std::to_string(action.frame_index);
                break;
            }
            case ActionKind::nav_to_point: {
                // A box grounds in the armed scene frame when one is active,
                // otherwise in the current ego view.
                const CameraPose cam =
                    (selected_frame >= 0)
                        ? setup.frames[static_cast<size_t>(selected_frame)].camera
                        : ego.camera;
                selected_frame = -1;
                const Vec2 center = bbox_center_px(action.bbox, params.intrinsics);
                // A box drawn around a far-off, near-horizon point can
                // quantize the center ray a hair above the surface it marks;
                // when that ray misses, probe downward inside the box.
                const double half_h = 0.5 * (action.bbox.y2 - action.bbox.y1) *
                                      params.intrinsics.height / 1000.0;
                Vec3 dir;
                RayHit hit;
                for (const double frac : {0.0, 0.5, 0.98}) {
                    const double v = std::min(center.y + frac * half_h,
                                              params.intrinsics.height - 1.0);
                    dir = pixel_ray(cam, params.intrinsics, center.x, v);
                    hit = raycast(scene, cam.position, dir, params.max_range, robot.held);
                    if (hit.kind != HitKind::none) break;
                }
                if (hit.kind == HitKind::none) {
                    rec.actuation_detail = "grounding ray hit nothing";
                    break;
                }
                const Vec3 target = cam.position + dir * hit.range;
                const PlanResult plan =
                    plan_path(scene, robot.position, target.xy(), params.standoff_radius);
                if (plan.status != PlanStatus::ok) {
                    rec.actuation_detail = plan.error;
                    break;
                }
                FollowConfig fcfg = config.follow;
                // Park at standoff range: driving flush against furniture can
                // drop the target below the fixed head camera's field of view.
                fcfg.stop_distance = params.standoff_radius;
                int checkpoint_index = 0;
                if (config.nav_checkpoint_hook) {
                    fcfg.on_step = [&](const RobotState& rs, int i, const Vec2& wp) {
                        if ((i + 1) % config.checkpoint_interval == 0)
                            config.nav_checkpoint_hook(
                                {t, checkpoint_index++, rs, wp, target, false});
                    };
                }
                const FollowOutcome follow =
                    follow_path(scene, robot, params, plan.path, target.xy(), fcfg);
                rec.sim_steps = follow.sim_steps;
                rec.actuation_success = follow.arrived;
                rec.actuation_detail =
                    follow.arrived ? "arrived" : (follow.stalled ? "stalled" : "stopped");
                if (config.nav_checkpoint_hook)
                    config.nav_checkpoint_hook({t, checkpoint_index, robot,
                                                plan.path.waypoints.back(), target, true});
                break;
            }
            case ActionKind::pick:
            case ActionKind::place: {
                selected_frame = -1;
                rec.sim_steps = 30;  // fixed arm actuation cycle
                const Vec2 center = bbox_center_px(action.bbox, params.intrinsics);
                const Vec3 dir = pixel_ray(ego.camera, params.intrinsics, center.x, center.y);
                const RayHit hit =
                    raycast(scene, ego.camera.position, dir, params.max_range, robot.held);
                if (hit.kind == HitKind::none) {
                    rec.actuation_detail = "grounding ray hit nothing";
                    break;
                }
                const Vec3 target = ego.camera.position + dir * hit.range;
                if (action.kind == ActionKind::pick) {
                    const PickOutcome outcome = try_pick(scene, robot, params, target);
                    rec.actuation_success = outcome.success;
                    rec.pick_miss = outcome.miss_distance;
                    rec.actuation_detail =
                        outcome.success ? "picked " + outcome.object_id : outcome.reason;
                } else {
                    const PlaceOutcome outcome = try_place(scene, robot, params, target);
                    rec.actuation_success = outcome.success;
                    rec.actuation_detail =
                        outcome.success
                            ? (outcome.receptacle_id.empty()
                                   ? "placed " + outcome.object_id + " on the floor"
                                   : "placed " + outcome.object_id + " on " +
                                         outcome.receptacle_id)
                            : outcome.reason;
                }
                break;
            }
        }

        rec.summarization = parsed.decision.summarization;
        if (!parsed.decision.summarization.empty()) history = parsed.decision.summarization;
        snapshot(rec);

        if (action.kind == ActionKind::place && rec.actuation_success) {
            const ObjectInstance* obj = scene.find_object(task.object);
            if (obj != nullptr && obj->resting_on != kRestingHeld &&
                rec.dist_object_goal <= task.lenient_goal_threshold) {
                result.success_lenient = true;
                result.success_strict = rec.dist_object_goal <= task.strict_goal_threshold;
                result.terminal = EpisodeTerminal::success;
                terminal_set = true;
                commit();
                break;
            }
        }

        signatures.push_back({action_signature(action, holding_before), robot.position});
        if (detect_dead_loop(signatures, config.dead_loop_window, config.dead_loop_repeats,
                             config.dead_loop_displacement)) {
            result.terminal = EpisodeTerminal::dead_loop;
            terminal_set = true;
            commit();
            break;
        }
        commit();
    }

    if (!terminal_set) result.terminal = EpisodeTerminal::timeout;
    const ObjectInstance* obj = scene.find_object(task.object);
    const Receptacle* goal = scene.find_receptacle(task.goal_rec);
    if (obj != nullptr && goal != nullptr)
        result.final_object_goal_distance = planar_distance(obj->position.xy(), goal->center);
    result.steps_used = static_cast<int>(result.steps.size());
    return result;
}

}  // namespace owmm
