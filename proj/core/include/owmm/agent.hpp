#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "owmm/action.hpp"
#include "owmm/planner.hpp"
#include "owmm/policy.hpp"

namespace owmm {

// One high-level decision step of an episode, as recorded in traces.
struct StepRecord {
    int step = 0;
    std::string context;  // history text given to the policy this step
    uint64_t context_digest = 0;
    std::string raw_response;
    std::string parse_status;
    std::string action_name;  // empty when parsing failed
    json action_args;         // null when parsing failed
    bool action_valid = false;
    std::string invalid_reason;
    bool actuation_success = false;
    std::string actuation_detail;
    int sim_steps = 0;
    int selected_frame_after = -1;
    double robot_x = 0.0, robot_y = 0.0, robot_yaw = 0.0;  // post-step pose
    double dist_base_object = 0.0;
    double dist_object_goal = 0.0;
    double pick_miss = -1.0;  // grasp-point-to-object distance of a pick attempt
    std::string holding_id;   // obj_id in the gripper after the step
    bool holding_after = false;
    std::string summarization;

    json to_json() const;
};

enum class EpisodeTerminal { success, dead_loop, invalid_budget, timeout, policy_error };

const char* terminal_name(EpisodeTerminal terminal);

struct EpisodeResult {
    EpisodeTerminal terminal = EpisodeTerminal::timeout;
    bool success_lenient = false;
    bool success_strict = false;
    double final_object_goal_distance = 0.0;
    int steps_used = 0;
    int total_sim_steps = 0;
    std::vector<StepRecord> steps;
};

// Trace line for the episode summary (one per episode in run traces).
json episode_end_json(const EpisodeResult& result, const std::string& scene_id,
                      const std::string& task_id, int episode_index, uint64_t seed);

// Robot pose captured during a navigation actuation, used by the data
// synthesis pipeline to derive intermediate supervision frames.
struct NavCheckpoint {
    int step = 0;              // high-level step the nav belongs to
    int checkpoint_index = 0;  // 0, 1, ... within this nav
    RobotState robot;
    Vec2 waypoint;     // follower's current waypoint
    Vec3 nav_target;   // grounded 3-D nav goal
    bool final_pose = false;
};

struct AgentConfig {
    int max_steps = 20;
    int invalid_action_budget = 3;  // episode fails after this many invalid actions
    int dead_loop_window = 6;       // trailing steps examined
    int dead_loop_repeats = 3;      // identical signatures within the window
    double dead_loop_displacement = 0.1;  // meters; below this the loop is "stuck"
    int checkpoint_interval = 10;         // sim steps between nav checkpoints
    FollowConfig follow;
    // Optional instrumentation for data synthesis.
    std::function<void(const NavCheckpoint&)> nav_checkpoint_hook;
    std::function<void(const PolicyInput&, const StepRecord&)> decision_hook;
};

// World prepared for one episode: a private scene copy the run mutates, the
// pre-mapped frames, and the spawned robot.
struct EpisodeSetup {
    SceneSpec scene;
    TaskInstance task;
    SimParams params;
    std::vector<PoseFrame> frames;
    RobotState robot;
};

struct SetupResult {
    bool ok = false;
    EpisodeSetup setup;
    std::string error;
};

SetupResult prepare_episode(const SceneSpec& scene, const TaskInstance& task,
                            const SimParams& params, uint64_t seed);

// Signature stream for cyclic-stagnation detection; exposed for direct tests.
struct LoopSignature {
    std::string key;
    Vec2 position;
};

std::string action_signature(const HighLevelAction& action, bool holding);

bool detect_dead_loop(const std::vector<LoopSignature>& signatures, int window, int repeats,
                      double min_displacement);

// Runs the decide/convert/actuate loop until the task completes or a failure
// terminal triggers. The setup is consumed (scene and robot mutate).
EpisodeResult run_episode(EpisodeSetup& setup, Policy& policy, const AgentConfig& config = {});

}  // namespace owmm
