#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "owmm/agent.hpp"
#include "owmm/oracle.hpp"

namespace owmm {

// One instruction-tuning example. Records are self-contained: they carry the
// perceived entity lists and the camera configuration needed to rebuild a
// DecisionView, so evaluation never re-runs the simulator.
struct QARecord {
    std::string record_id;  // "<task_id>_r<index>"
    std::string scene_id;
    std::string task_id;
    int episode = 0;       // episode ordinal within the synthesis run
    int step = 0;          // source high-level decision step
    int substep = 0;       // nav checkpoint index / arm frame index
    int record_index = 0;  // position within the episode's QA chain
    std::string role;      // nav_start|nav_waypoint|nav_end|pick_frame|place_frame|search_frame
    std::string grounding_class;  // object|receptacle|navigation ("" for search)

    std::string task_description;     // the instruction
    std::string context_description;  // chained robot-history text
    std::string question;             // templated prompt
    std::string answer;               // decision JSON (reasoning + action + summarization)
    std::string action_name;
    json action_information;              // [[x1,y1,x2,y2]] or bare frame index
    int gt_frame_index = -1;              // search records: the expert's choice
    std::vector<int> valid_frame_indices;  // frames shot for the phase's target receptacle

    std::vector<std::string> images;    // ordered frame references (pose frames, then ego)
    json ego_entities = json::array();  // wire-format entities of the ego view
    json pose_frames = json::array();   // search records only: [{index, entities}]
    int selected_frame = -1;
    std::string held_object;

    // Task binding (ids + labels), also used for split hygiene.
    std::string object_id, start_rec_id, goal_rec_id;
    std::string object_label, start_label, goal_label;

    // Logged state for independent re-validation.
    double robot_x = 0.0, robot_y = 0.0, robot_yaw = 0.0;
    std::string target_entity_id;  // entity the filter checked
    bool has_waypoint = false;     // nav records: follower waypoint at the checkpoint
    double waypoint_x = 0.0, waypoint_y = 0.0;

    // Camera / perception configuration.
    int image_width = 512, image_height = 512;
    double hfov = 1.5707963267948966;
    double camera_pitch = -0.35;
    double camera_height = 1.2;
    double max_reach = 1.2;

    json to_json() const;
    static bool from_json(const json& j, QARecord& out, std::string& error);
};

// Rebuilds the expert's input from a stored record (context as history, the
// record's chain position as the step index).
DecisionView decision_view_from_record(const QARecord& record);

struct DatagenParams {
    int scenes = 2;
    int tasks_per_scene = 25;  // one episode per task
    uint64_t seed = 7;
    SceneParams scene;
    SimParams sim;
    AgentConfig agent;         // checkpoint cadence lives here (default 10 sim steps)
    int waypoint_interval = 5;  // checkpoints between interior nav key steps
    int arm_frames = 3;         // records per pick/place actuation
    double scene_test_fraction = 30.0 / 143.0;
    double object_test_fraction = 20.0 / 157.0;
};

struct SynthStats {
    int episodes_total = 0;
    int episodes_valid = 0;
    int candidates = 0;
    int dropped_filter = 0;         // visibility / reach / waypoint-in-frame failures
    int dropped_role = 0;           // expert would act off-role at the checkpoint
    int skipped_template_holes = 0;
    int dropped_train_leakage = 0;  // train-scene records carrying test labels
    int dropped_test_offsplit = 0;  // test-scene records carrying train labels
    std::map<std::string, int> records_per_kind;  // exported, by action name
};

struct SynthResult {
    bool ok = false;
    std::string error;
    std::vector<QARecord> train;
    std::vector<QARecord> test;
    std::vector<SceneSpec> scenes;
    std::vector<TaskInstance> tasks;
    std::vector<std::string> test_scene_ids;
    std::vector<std::string> test_object_labels;
    double lenient_threshold = 0.0;
    double strict_threshold = 0.0;
    SynthStats stats;

    json manifest() const;
};

// Full pipeline: generate scenes, derive goal thresholds from the receptacle
// battery, run expert episodes with instrumentation, select and filter key
// steps, build chained QA records, and split train/test with no object-label
// or scene overlap.
SynthResult synthesize_dataset(const DatagenParams& params);

// Split-hygiene check over already-built record sets; returns a list of
// violations ("" result means clean).
std::string check_split_hygiene(const std::vector<QARecord>& train,
                                const std::vector<QARecord>& test);

}  // namespace owmm
