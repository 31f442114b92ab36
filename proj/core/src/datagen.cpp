#include "owmm/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <type_traits>

#include "owmm/bank.hpp"
#include "owmm/canonical_json.hpp"
#include "owmm/eval.hpp"
#include "owmm/rng.hpp"
#include "owmm/wire.hpp"

namespace owmm {
namespace {

constexpr uint64_t kStreamSceneSplit = 0x3b1d;
constexpr uint64_t kStreamLabelSplit = 0x3b1e;

// Round-trips a value through the canonical serializer so in-memory records
// match their on-disk form bit for bit; answers generated from them are then
// reproducible from the stored files.
json canon(const json& j) { return json::parse(canonical_dump(j)); }

double canon(double v) { return json::parse(canonical_dump(json(v))).get<double>(); }

json entities_to_json(const std::vector<ObservedEntity>& entities) {
    json arr = json::array();
    for (const auto& e : entities) arr.push_back(entity_to_wire(e));
    return canon(arr);
}

const ObservedEntity* find_observed(const Observation& obs, const std::string& id) {
    for (const auto& e : obs.entities)
        if (e.id == id) return &e;
    return nullptr;
}

struct CheckpointCapture {
    NavCheckpoint cp;
    Observation obs;
};

struct StepCapture {
    StepRecord rec;
    Observation ego;
    int selected_frame = -1;
    std::string held;
    std::vector<CheckpointCapture> checkpoints;
};

struct Candidate {
    std::string role;
    int step = 0;
    int substep = 0;
    const Observation* obs = nullptr;
    std::string held;
    int selected_frame = -1;
    ActionKind expected = ActionKind::search_scene_frame;
    std::string target_id;  // entity the filter checks ("" for search)
    bool has_waypoint = false;
    Vec2 waypoint;
    Vec3 nav_target;  // grounded nav destination, meaningful with has_waypoint
    RobotState pose;
};

ActionKind expected_for_name(const std::string& name) {
    if (name == "pick") return ActionKind::pick;
    if (name == "place") return ActionKind::place;
    if (name == "nav_to_point") return ActionKind::nav_to_point;
    return ActionKind::search_scene_frame;
}

bool point_in_frame(const Observation& obs, const CameraIntrinsics& intr, const Vec3& p) {
    const PixelPoint pp = project_point(obs.camera, intr, p);
    return pp.in_front && pp.u >= 0.0 && pp.u < intr.width && pp.v >= 0.0 && pp.v < intr.height;
}

}  // namespace

json QARecord::to_json() const {
    return json{{"record_id", record_id},
                {"scene_id", scene_id},
                {"task_id", task_id},
                {"episode", episode},
                {"step", step},
                {"substep", substep},
                {"record_index", record_index},
                {"role", role},
                {"grounding_class", grounding_class},
                {"task_description", task_description},
                {"context_description", context_description},
                {"question", question},
                {"answer", answer},
                {"action_name", action_name},
                {"action_information", action_information},
                {"gt_frame_index", gt_frame_index},
                {"valid_frame_indices", valid_frame_indices},
                {"images", images},
                {"ego_entities", ego_entities},
                {"pose_frames", pose_frames},
                {"selected_frame", selected_frame},
                {"held_object", held_object},
                {"task",
                 json{{"object_id", object_id},
                      {"start_rec_id", start_rec_id},
                      {"goal_rec_id", goal_rec_id},
                      {"object_label", object_label},
                      {"start_label", start_label},
                      {"goal_label", goal_label}}},
                {"robot", json::array({robot_x, robot_y, robot_yaw})},
                {"target_entity_id", target_entity_id},
                {"waypoint", has_waypoint ? json::array({waypoint_x, waypoint_y}) : json()},
                {"config",
                 json{{"image_width", image_width},
                      {"image_height", image_height},
                      {"hfov", hfov},
                      {"camera_pitch", camera_pitch},
                      {"camera_height", camera_height},
                      {"max_reach", max_reach}}}};
}

bool QARecord::from_json(const json& j, QARecord& out, std::string& error) {
    const auto need = [&](const char* key) -> const json* {
        const auto it = j.find(key);
        if (it == j.end()) {
            error = std::string("missing field: ") + key;
            return nullptr;
        }
        return &*it;
    };
    const auto get_str = [&](const char* key, std::string& dst) {
        const json* v = need(key);
        if (v == nullptr || !v->is_string()) {
            if (error.empty()) error = std::string("field is not a string: ") + key;
            return false;
        }
        dst = v->get<std::string>();
        return true;
    };
    const auto get_int = [&](const char* key, int& dst) {
        const json* v = need(key);
        if (v == nullptr || !v->is_number_integer()) {
            if (error.empty()) error = std::string("field is not an integer: ") + key;
            return false;
        }
        dst = v->get<int>();
        return true;
    };
    error.clear();
    if (!j.is_object()) {
        error = "record is not a JSON object";
        return false;
    }
    if (!get_str("record_id", out.record_id) || !get_str("scene_id", out.scene_id) ||
        !get_str("task_id", out.task_id) || !get_str("role", out.role) ||
        !get_str("grounding_class", out.grounding_class) ||
        !get_str("task_description", out.task_description) ||
        !get_str("context_description", out.context_description) ||
        !get_str("question", out.question) || !get_str("answer", out.answer) ||
        !get_str("action_name", out.action_name) || !get_str("held_object", out.held_object) ||
        !get_str("target_entity_id", out.target_entity_id))
        return false;
    if (!get_int("episode", out.episode) || !get_int("step", out.step) ||
        !get_int("substep", out.substep) || !get_int("record_index", out.record_index) ||
        !get_int("gt_frame_index", out.gt_frame_index) ||
        !get_int("selected_frame", out.selected_frame))
        return false;
    const json* v = need("action_information");
    if (v == nullptr) return false;
    out.action_information = *v;
    if ((v = need("valid_frame_indices")) == nullptr || !v->is_array()) {
        if (error.empty()) error = "valid_frame_indices is not an array";
        return false;
    }
    out.valid_frame_indices.clear();
    for (const auto& e : *v) {
        if (!e.is_number_integer()) {
            error = "valid_frame_indices holds a non-integer";
            return false;
        }
        out.valid_frame_indices.push_back(e.get<int>());
    }
    if ((v = need("images")) == nullptr || !v->is_array()) {
        if (error.empty()) error = "images is not an array";
        return false;
    }
    out.images.clear();
    for (const auto& e : *v) {
        if (!e.is_string()) {
            error = "images holds a non-string";
            return false;
        }
        out.images.push_back(e.get<std::string>());
    }
    if ((v = need("ego_entities")) == nullptr || !v->is_array()) {
        if (error.empty()) error = "ego_entities is not an array";
        return false;
    }
    out.ego_entities = *v;
    if ((v = need("pose_frames")) == nullptr || !v->is_array()) {
        if (error.empty()) error = "pose_frames is not an array";
        return false;
    }
    out.pose_frames = *v;
    if ((v = need("task")) == nullptr || !v->is_object()) {
        if (error.empty()) error = "task is not an object";
        return false;
    }
    const json& t = *v;
    const auto get_task_str = [&](const char* key, std::string& dst) {
        const auto it = t.find(key);
        if (it == t.end() || !it->is_string()) {
            error = std::string("task field is not a string: ") + key;
            return false;
        }
        dst = it->get<std::string>();
        return true;
    };
    if (!get_task_str("object_id", out.object_id) ||
        !get_task_str("start_rec_id", out.start_rec_id) ||
        !get_task_str("goal_rec_id", out.goal_rec_id) ||
        !get_task_str("object_label", out.object_label) ||
        !get_task_str("start_label", out.start_label) ||
        !get_task_str("goal_label", out.goal_label))
        return false;
    if ((v = need("robot")) == nullptr || !v->is_array() || v->size() != 3 ||
        !(*v)[0].is_number() || !(*v)[1].is_number() || !(*v)[2].is_number()) {
        if (error.empty()) error = "robot is not a [x, y, yaw] array";
        return false;
    }
    out.robot_x = (*v)[0].get<double>();
    out.robot_y = (*v)[1].get<double>();
    out.robot_yaw = (*v)[2].get<double>();
    if ((v = need("waypoint")) == nullptr) return false;
    if (v->is_null()) {
        out.has_waypoint = false;
    } else if (v->is_array() && v->size() == 2 && (*v)[0].is_number() && (*v)[1].is_number()) {
        out.has_waypoint = true;
        out.waypoint_x = (*v)[0].get<double>();
        out.waypoint_y = (*v)[1].get<double>();
    } else {
        error = "waypoint is neither null nor [x, y]";
        return false;
    }
    if ((v = need("config")) == nullptr || !v->is_object()) {
        if (error.empty()) error = "config is not an object";
        return false;
    }
    const json& c = *v;
    const auto get_cfg = [&](const char* key, auto& dst) {
        const auto it = c.find(key);
        if (it == c.end() || !it->is_number()) {
            error = std::string("config field is not a number: ") + key;
            return false;
        }
        dst = it->get<std::remove_reference_t<decltype(dst)>>();
        return true;
    };
    if (!get_cfg("image_width", out.image_width) || !get_cfg("image_height", out.image_height) ||
        !get_cfg("hfov", out.hfov) || !get_cfg("camera_pitch", out.camera_pitch) ||
        !get_cfg("camera_height", out.camera_height) || !get_cfg("max_reach", out.max_reach))
        return false;
    return true;
}

DecisionView decision_view_from_record(const QARecord& record) {
    DecisionView view;
    view.object_id = record.object_id;
    view.start_rec_id = record.start_rec_id;
    view.goal_rec_id = record.goal_rec_id;
    view.object_label = record.object_label;
    view.start_label = record.start_label;
    view.goal_label = record.goal_label;
    view.held_object = record.held_object;
    view.history = record.context_description;
    view.step = record.record_index;
    view.selected_frame = record.selected_frame;
    view.intrinsics = {record.image_width, record.image_height, record.hfov};
    view.camera_pitch = record.camera_pitch;
    view.max_reach = record.max_reach;
    for (const auto& e : record.ego_entities) {
        ViewEntity entity;
        if (entity_from_wire(e, entity)) view.ego.push_back(std::move(entity));
    }
    for (const auto& frame : record.pose_frames) {
        std::vector<ViewEntity> list;
        if (frame.is_object() && frame.contains("entities") && frame["entities"].is_array()) {
            for (const auto& e : frame["entities"]) {
                ViewEntity entity;
                if (entity_from_wire(e, entity)) list.push_back(std::move(entity));
            }
        }
        view.frames.push_back(std::move(list));
    }
    return view;
}

json SynthResult::manifest() const {
    json kinds = json::object();
    for (const auto& [name, count] : stats.records_per_kind) kinds[name] = count;
    return json{
        {"thresholds", json{{"lenient", lenient_threshold}, {"strict", strict_threshold}}},
        {"split", json{{"test_scenes", test_scene_ids},
                       {"test_object_labels", test_object_labels},
                       {"train_records", static_cast<int>(train.size())},
                       {"test_records", static_cast<int>(test.size())},
                       {"leakage_check", check_split_hygiene(train, test).empty()
                                             ? "ok"
                                             : check_split_hygiene(train, test)}}},
        {"records_per_kind", kinds},
        {"yield", json{{"episodes_total", stats.episodes_total},
                       {"episodes_valid", stats.episodes_valid}}},
        {"drops", json{{"filtered", stats.dropped_filter},
                       {"off_role", stats.dropped_role},
                       {"template_holes", stats.skipped_template_holes},
                       {"train_leakage", stats.dropped_train_leakage},
                       {"test_offsplit", stats.dropped_test_offsplit}}},
        {"candidates", stats.candidates}};
}

std::string check_split_hygiene(const std::vector<QARecord>& train,
                                const std::vector<QARecord>& test) {
    std::set<std::string> train_labels, test_labels, train_scenes, test_scenes;
    for (const auto& r : train) {
        train_labels.insert(r.object_label);
        train_scenes.insert(r.scene_id);
    }
    for (const auto& r : test) {
        test_labels.insert(r.object_label);
        test_scenes.insert(r.scene_id);
    }
    for (const auto& label : test_labels)
        if (train_labels.count(label))
            return "leakage detected: object label \"" + label + "\" appears in both splits";
    for (const auto& id : test_scenes)
        if (train_scenes.count(id))
            return "leakage detected: scene \"" + id + "\" appears in both splits";
    return "";
}

SynthResult synthesize_dataset(const DatagenParams& params) {
    SynthResult result;
    if (params.scenes < 1 || params.tasks_per_scene < 1 || params.waypoint_interval < 1 ||
        params.arm_frames < 1) {
        result.error = "scene count, tasks per scene, waypoint interval and arm frames must be "
                       "positive";
        return result;
    }
    const TemplateBank& bank = default_template_bank();

    for (int i = 0; i < params.scenes; ++i) {
        SceneGenResult gen = generate_scene(params.seed + static_cast<uint64_t>(i), params.scene);
        if (gen.status != SceneGenStatus::ok) {
            result.error = "scene generation failed: " + gen.error;
            return result;
        }
        result.scenes.push_back(std::move(gen.scene));
    }

    std::vector<double> diagonals;
    for (const auto& scene : result.scenes)
        for (const auto& rec : scene.receptacles) diagonals.push_back(receptacle_diagonal(rec));
    const GoalThresholds th = compute_goal_thresholds(diagonals);
    if (!th.ok) {
        result.error = "goal thresholds: " + th.error;
        return result;
    }
    result.lenient_threshold = th.lenient;
    result.strict_threshold = th.strict;

    std::vector<QARecord> records;
    int episode_ordinal = 0;

    for (const auto& scene : result.scenes) {
        for (int ti = 0; ti < params.tasks_per_scene; ++ti) {
            TaskSpawnResult spawned =
                spawn_task(scene, static_cast<uint64_t>(ti), th.strict, th.lenient);
            if (spawned.status != TaskSpawnStatus::ok) {
                result.error = "task spawn failed: " + spawned.error;
                return result;
            }
            const TaskInstance task = spawned.task;
            result.tasks.push_back(task);
            ++result.stats.episodes_total;
            const int episode = episode_ordinal++;

            SetupResult setup_result = prepare_episode(
                scene, task, params.sim, Rng::derive(params.seed, fnv1a64(task.task_id)));
            if (!setup_result.ok) continue;
            EpisodeSetup& setup = setup_result.setup;

            std::vector<StepCapture> caps;
            std::vector<CheckpointCapture> pending;
            AgentConfig cfg = params.agent;
            cfg.nav_checkpoint_hook = [&](const NavCheckpoint& cp) {
                pending.push_back({cp, observe(setup.scene, cp.robot, params.sim)});
            };
            cfg.decision_hook = [&](const PolicyInput& input, const StepRecord& rec) {
                StepCapture cap;
                cap.rec = rec;
                cap.ego = *input.ego;
                cap.selected_frame = input.selected_frame;
                cap.held = input.held_object;
                if (rec.action_name == "nav_to_point") cap.checkpoints = std::move(pending);
                pending.clear();
                caps.push_back(std::move(cap));
            };

            OraclePolicy policy(setup.scene);
            const EpisodeResult er = run_episode(setup, policy, cfg);
            if (er.terminal != EpisodeTerminal::success) continue;
            ++result.stats.episodes_valid;

            // Key-step candidates, in step order.
            std::vector<Candidate> candidates;
            for (const auto& cap : caps) {
                if (!cap.rec.action_valid) continue;
                const ActionKind kind = expected_for_name(cap.rec.action_name);
                RobotState decision_pose;
                decision_pose.position = {cap.rec.robot_x, cap.rec.robot_y};
                decision_pose.yaw = cap.rec.robot_yaw;
                decision_pose.held = cap.held;
                if (kind == ActionKind::search_scene_frame) {
                    Candidate c;
                    c.role = "search_frame";
                    c.step = cap.rec.step;
                    c.obs = &cap.ego;
                    c.held = cap.held;
                    c.selected_frame = cap.selected_frame;
                    c.expected = kind;
                    c.pose = decision_pose;
                    candidates.push_back(c);
                } else if (kind == ActionKind::pick || kind == ActionKind::place) {
                    if (!cap.rec.actuation_success) continue;
                    for (int f = 0; f < params.arm_frames; ++f) {
                        Candidate c;
                        c.role = kind == ActionKind::pick ? "pick_frame" : "place_frame";
                        c.step = cap.rec.step;
                        c.substep = f;
                        c.obs = &cap.ego;
                        c.held = cap.held;
                        c.expected = kind;
                        c.target_id = kind == ActionKind::pick ? task.object : task.goal_rec;
                        c.pose = decision_pose;
                        candidates.push_back(c);
                    }
                } else {
                    const auto& cps = cap.checkpoints;
                    if (cps.empty()) continue;
                    const std::string target =
                        cap.held.empty() ? task.start_rec : task.goal_rec;
                    int first_visible = -1;
                    for (size_t i = 0; i < cps.size(); ++i) {
                        if (find_observed(cps[i].obs, target) != nullptr) {
                            first_visible = static_cast<int>(i);
                            break;
                        }
                    }
                    if (first_visible < 0) continue;
                    const int last = static_cast<int>(cps.size()) - 1;
                    std::vector<int> picks;
                    for (int i = first_visible; i < last; i += params.waypoint_interval)
                        picks.push_back(i);
                    picks.push_back(last);
                    for (const int i : picks) {
                        Candidate c;
                        c.role = i == last ? "nav_end"
                                           : (i == first_visible ? "nav_start" : "nav_waypoint");
                        c.step = cap.rec.step;
                        c.substep = i;
                        c.obs = &cps[static_cast<size_t>(i)].obs;
                        c.held = cap.held;
                        c.expected = kind;
                        c.target_id = target;
                        c.has_waypoint = true;
                        c.waypoint = cps[static_cast<size_t>(i)].cp.waypoint;
                        c.nav_target = cps[static_cast<size_t>(i)].cp.nav_target;
                        c.pose = cps[static_cast<size_t>(i)].cp.robot;
                        candidates.push_back(c);
                    }
                }
            }
            result.stats.candidates += static_cast<int>(candidates.size());

            // Filter: visibility, reachability, and waypoint-in-frame rules.
            std::vector<Candidate> survivors;
            for (const auto& c : candidates) {
                bool keep = true;
                if (c.expected == ActionKind::nav_to_point) {
                    // The pose supervises pointing only if the checkpoint
                    // still sees the phase receptacle and the grounded
                    // destination itself is somewhere in the frame.
                    keep = find_observed(*c.obs, c.target_id) != nullptr &&
                           point_in_frame(*c.obs, params.sim.intrinsics, c.nav_target);
                } else if (c.expected == ActionKind::pick ||
                           c.expected == ActionKind::place) {
                    const ObservedEntity* e = find_observed(*c.obs, c.target_id);
                    keep = e != nullptr &&
                           planar_range_from_pixel(params.sim.intrinsics,
                                                   params.sim.camera_pitch, e->anchor_u,
                                                   e->anchor_v, e->depth_m) <=
                               params.sim.max_reach;
                }
                if (keep)
                    survivors.push_back(c);
                else
                    ++result.stats.dropped_filter;
            }

            // Build the chained records.
            std::string context = bank.summarization.at("start").front();
            int record_index = 0;
            for (const auto& c : survivors) {
                QARecord r;
                r.scene_id = scene.scene_id;
                r.task_id = task.task_id;
                r.episode = episode;
                r.step = c.step;
                r.substep = c.substep;
                r.record_index = record_index;
                r.role = c.role;
                r.task_description = task.instruction;
                r.context_description = context;
                std::map<std::string, std::string> slots{
                    {"instruction", task.instruction},
                    {"history", context},
                    {"frame_count", std::to_string(setup.frames.size())}};
                if (!instantiate_template(bank.question, slots, r.question)) {
                    ++result.stats.skipped_template_holes;
                    continue;
                }
                r.ego_entities = entities_to_json(c.obs->entities);
                if (c.expected == ActionKind::search_scene_frame) {
                    json frames = json::array();
                    for (const auto& frame : setup.frames) {
                        frames.push_back(json{{"index", frame.index},
                                              {"entities",
                                               entities_to_json(frame.observation.entities)}});
                    }
                    r.pose_frames = canon(frames);
                    r.selected_frame = c.selected_frame;
                }
                for (size_t i = 0; i < setup.frames.size(); ++i)
                    r.images.push_back("pose_frame:" + std::to_string(i));
                r.images.push_back("ego");
                r.held_object = c.held;
                r.object_id = task.object;
                r.start_rec_id = task.start_rec;
                r.goal_rec_id = task.goal_rec;
                if (const ObjectInstance* obj = scene.find_object(task.object))
                    r.object_label = obj->label;
                if (const Receptacle* rec = scene.find_receptacle(task.start_rec))
                    r.start_label = rec->label;
                if (const Receptacle* rec = scene.find_receptacle(task.goal_rec))
                    r.goal_label = rec->label;
                r.robot_x = c.pose.position.x;
                r.robot_y = c.pose.position.y;
                r.robot_yaw = c.pose.yaw;
                r.target_entity_id = c.target_id;
                r.has_waypoint = c.has_waypoint;
                r.waypoint_x = c.waypoint.x;
                r.waypoint_y = c.waypoint.y;
                r.image_width = params.sim.intrinsics.width;
                r.image_height = params.sim.intrinsics.height;
                r.hfov = canon(params.sim.intrinsics.hfov);
                r.camera_pitch = canon(params.sim.camera_pitch);
                r.camera_height = canon(params.sim.camera_height);
                r.max_reach = canon(params.sim.max_reach);

                const DecisionView view = decision_view_from_record(r);
                const ParsedDecision answer = oracle_decide(view, bank);
                if (answer.action.kind != c.expected) {
                    ++result.stats.dropped_role;
                    continue;
                }
                r.answer = decision_to_text(answer);
                r.action_name = kind_name(answer.action.kind);
                r.action_information = answer.action.args_json();
                switch (answer.action.kind) {
                    case ActionKind::pick: r.grounding_class = "object"; break;
                    case ActionKind::place: r.grounding_class = "receptacle"; break;
                    case ActionKind::nav_to_point: r.grounding_class = "navigation"; break;
                    case ActionKind::search_scene_frame: break;
                }
                if (answer.action.kind == ActionKind::search_scene_frame) {
                    r.gt_frame_index = answer.action.frame_index;
                    const std::string phase_rec =
                        c.held.empty() ? task.start_rec : task.goal_rec;
                    // A frame resolves the query when it was shot for the
                    // phase receptacle or when the queried entity shows in it.
                    const std::string& queried = c.held.empty() ? task.object : task.goal_rec;
                    for (const auto& frame : setup.frames) {
                        bool resolves = frame.provenance == phase_rec;
                        if (!resolves)
                            for (const auto& e : frame.observation.entities)
                                if (e.id == queried) {
                                    resolves = true;
                                    break;
                                }
                        if (resolves) r.valid_frame_indices.push_back(frame.index);
                    }
                }
                char suffix[16];
                std::snprintf(suffix, sizeof(suffix), "_r%04d", record_index);
                r.record_id = task.task_id + suffix;
                records.push_back(std::move(r));
                context = answer.summarization;
                ++record_index;
            }
        }
    }

    // Scene split: seeded shuffle, desk-scale rounding of the paper's ratio.
    std::vector<std::string> scene_ids;
    for (const auto& scene : result.scenes) scene_ids.push_back(scene.scene_id);
    int test_scene_count = 0;
    if (scene_ids.size() >= 2) {
        test_scene_count = std::max(
            1, static_cast<int>(std::llround(static_cast<double>(scene_ids.size()) *
                                             params.scene_test_fraction)));
        test_scene_count = std::min(test_scene_count, static_cast<int>(scene_ids.size()) - 1);
    }
    std::vector<std::string> shuffled = scene_ids;
    Rng scene_rng(Rng::derive(params.seed, kStreamSceneSplit));
    scene_rng.shuffle(shuffled);
    result.test_scene_ids.assign(shuffled.begin(), shuffled.begin() + test_scene_count);
    std::sort(result.test_scene_ids.begin(), result.test_scene_ids.end());
    const std::set<std::string> test_scenes(result.test_scene_ids.begin(),
                                            result.test_scene_ids.end());

    // Object-label split: the held-out labels are chosen among labels that
    // actually occur in test-scene records so the test split cannot end up
    // empty by accident of scene content.
    std::set<std::string> universe;
    std::set<std::string> test_scene_label_set;
    for (const auto& r : records) {
        universe.insert(r.object_label);
        if (test_scenes.count(r.scene_id)) test_scene_label_set.insert(r.object_label);
    }
    int test_label_count =
        universe.empty() ? 0
                         : std::max(1, static_cast<int>(std::llround(
                                           static_cast<double>(universe.size()) *
                                           params.object_test_fraction)));
    std::vector<std::string> label_pool(test_scene_label_set.begin(),
                                        test_scene_label_set.end());
    Rng label_rng(Rng::derive(params.seed, kStreamLabelSplit));
    label_rng.shuffle(label_pool);
    if (static_cast<int>(label_pool.size()) > test_label_count)
        label_pool.resize(static_cast<size_t>(test_label_count));
    result.test_object_labels = label_pool;
    std::sort(result.test_object_labels.begin(), result.test_object_labels.end());
    const std::set<std::string> test_labels(result.test_object_labels.begin(),
                                            result.test_object_labels.end());

    for (auto& r : records) {
        const bool in_test_scene = test_scenes.count(r.scene_id) != 0;
        const bool has_test_label = test_labels.count(r.object_label) != 0;
        if (in_test_scene && has_test_label) {
            ++result.stats.records_per_kind[r.action_name];
            result.test.push_back(std::move(r));
        } else if (!in_test_scene && !has_test_label) {
            ++result.stats.records_per_kind[r.action_name];
            result.train.push_back(std::move(r));
        } else if (in_test_scene) {
            ++result.stats.dropped_test_offsplit;
        } else {
            ++result.stats.dropped_train_leakage;
        }
    }

    const std::string hygiene = check_split_hygiene(result.train, result.test);
    if (!hygiene.empty()) {
        result.error = hygiene;
        return result;
    }
    result.ok = true;
    return result;
}

}  // namespace owmm
