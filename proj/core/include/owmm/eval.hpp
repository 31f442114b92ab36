#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "owmm/datagen.hpp"

namespace owmm {

// ---------------------------------------------------------------- thresholds

struct GoalThresholds {
    bool ok = false;
    double lenient = 0.0;
    double strict = 0.0;
    std::string error;
};

// Mean receptacle diagonal over the plausible furniture band [0.75 m, 3.0 m]
// (inclusive); strict is half the lenient value. Errors when no diagonal
// falls inside the band.
GoalThresholds compute_goal_thresholds(const std::vector<double>& diagonals);

// ------------------------------------------------------- single-step metrics

// Center-distance grounding score in [0, 1]: 1 - |pred_center - gt_center| /
// image diagonal, centers taken as box midpoints in raw pixels. 0 when the
// predicted action kind differs from the ground truth or is not a box action.
double grounding_score(const HighLevelAction& pred, const HighLevelAction& gt, int image_width,
                       int image_height);

struct Prediction {
    bool parsed = false;
    ParsedDecision decision;
    std::string raw_text;
};

// Parses one raw model response (parsed = false when it does not decode).
Prediction prediction_from_text(const std::string& raw_text);

// Runs the scripted expert over stored records, optionally corrupted; the
// default NoiseParams reproduce the expert exactly.
std::map<std::string, Prediction> predictions_from_expert(const std::vector<QARecord>& records,
                                                          const NoiseParams& noise = {});

struct GroundingStat {
    int count = 0;
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation

    json to_json() const;
};

struct SingleStepMetrics {
    int total = 0;
    int missing = 0;         // records without a prediction
    int parse_failures = 0;  // predictions that did not decode
    int decision_correct = 0;
    double decision_accuracy = 0.0;
    int retrieval_total = 0;  // frame-retrieval questions seen
    int retrieval_correct = 0;
    double retrieval_accuracy = 0.0;
    GroundingStat grounding;  // box questions only
    std::map<std::string, GroundingStat> grounding_by_class;

    json to_json() const;
    std::string render_table() const;
};

// Scores predictions against records; a record without a prediction (or with
// an unparseable one) counts as wrong everywhere it applies.
SingleStepMetrics evaluate_single_step(const std::vector<QARecord>& records,
                                       const std::map<std::string, Prediction>& predictions);

// ---------------------------------------------------------- episodic metrics

struct EpisodeTraceData {
    std::string scene_id;
    std::string task_id;
    int episode = 0;
    uint64_t seed = 0;
    std::string policy;
    std::vector<std::string> frame_provenance;  // receptacle id per frame index ("" = random)
    std::vector<json> steps;
    json end;
};

struct TraceParseResult {
    bool ok = false;
    std::string error;
    std::vector<EpisodeTraceData> episodes;
};

TraceParseResult parse_trace_lines(const std::string& text);
TraceParseResult parse_trace_file(const std::string& path);

struct EpisodicThresholds {
    double goal_strict = 0.85;  // used when a task carries no thresholds
    double goal_lenient = 1.7;
    double pick_strict = 0.15;  // grasp-point miss distance, meters
    double pick_lenient = 0.8;
    double close_strict = 1.5;  // base-to-target distance, meters
    double close_lenient = 2.0;
};

struct EpisodeFlags {
    bool full_task = false;           // task object placed, ends within the goal radius
    bool object_picked = false;       // task object grasped within the miss tolerance
    bool robot_close_object = false;  // approach phase came near the object
    bool robot_close_goal = false;    // carry phase came near the goal receptacle
    bool retrieval_object = false;    // first approach-phase search chose a start-rec frame
    bool retrieval_goal = false;      // first carry-phase search chose a goal-rec frame
    bool dead_loop = false;           // terminal was cyclic stagnation
};

// Success-condition battery for one episode at one strictness level.
// Retrieval flags are vacuously true when the phase issued no search.
EpisodeFlags eval_episode(const EpisodeTraceData& trace, const SceneSpec& scene,
                          const TaskInstance& task, const EpisodicThresholds& th, bool strict);

struct ModeRates {
    double full_task = 0.0;
    double object_picked = 0.0;
    double robot_close_object = 0.0;
    double robot_close_goal = 0.0;
    double retrieval_object = 0.0;
    double retrieval_goal = 0.0;

    json to_json() const;
};

struct EpisodicMetrics {
    int episodes = 0;
    ModeRates strict;
    ModeRates lenient;
    double dead_loop_rate = 0.0;
    std::map<std::string, int> terminals;
    double mean_steps = 0.0;
    double mean_sim_steps = 0.0;
    double mean_final_distance = 0.0;
    double mean_decision_seconds = -1.0;  // -1 when no timings were supplied

    json to_json() const;
    std::string render_table() const;
};

struct EpisodicEvalResult {
    bool ok = false;
    std::string error;
    EpisodicMetrics metrics;
};

// Aggregates the battery over a run; scenes and tasks are looked up by id.
// decision_seconds, when non-empty, is the flat list of per-decision wall
// times used for the latency column.
EpisodicEvalResult evaluate_episodes(const std::vector<EpisodeTraceData>& episodes,
                                     const std::map<std::string, SceneSpec>& scenes,
                                     const std::map<std::string, TaskInstance>& tasks,
                                     const EpisodicThresholds& th = {},
                                     const std::vector<double>& decision_seconds = {});

}  // namespace owmm
