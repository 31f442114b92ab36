#include "owmm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "owmm/bank.hpp"
#include "owmm/canonical_json.hpp"

namespace owmm {
namespace {

constexpr double kDiagonalBandLow = 0.75;
constexpr double kDiagonalBandHigh = 3.0;

GroundingStat stat_from(const std::vector<double>& xs) {
    GroundingStat s;
    s.count = static_cast<int>(xs.size());
    if (xs.empty()) return s;
    double sum = 0.0;
    for (const double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    double var = 0.0;
    for (const double x : xs) var += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(var / static_cast<double>(xs.size()));
    return s;
}

bool kind_from_name(const std::string& name, ActionKind& out) {
    if (name == "search_scene_frame") out = ActionKind::search_scene_frame;
    else if (name == "nav_to_point") out = ActionKind::nav_to_point;
    else if (name == "pick") out = ActionKind::pick;
    else if (name == "place") out = ActionKind::place;
    else return false;
    return true;
}

// Reconstructs the ground-truth action a record stores.
bool gt_action_from_record(const QARecord& r, HighLevelAction& out) {
    if (!kind_from_name(r.action_name, out.kind)) return false;
    if (out.kind == ActionKind::search_scene_frame) {
        out.frame_index = r.gt_frame_index;
        return out.frame_index >= 0;
    }
    const json& args = r.action_information;
    if (!args.is_array() || args.size() != 1 || !args[0].is_array() || args[0].size() != 4)
        return false;
    for (const auto& v : args[0])
        if (!v.is_number_integer()) return false;
    out.bbox = {args[0][0].get<int>(), args[0][1].get<int>(), args[0][2].get<int>(),
                args[0][3].get<int>()};
    return true;
}

std::string format_rate(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

GoalThresholds compute_goal_thresholds(const std::vector<double>& diagonals) {
    GoalThresholds th;
    double sum = 0.0;
    int kept = 0;
    for (const double d : diagonals) {
        if (d < kDiagonalBandLow || d > kDiagonalBandHigh) continue;
        sum += d;
        ++kept;
    }
    if (kept == 0) {
        th.error = "no receptacle diagonal falls inside the [0.75, 3.0] m band";
        return th;
    }
    th.lenient = sum / static_cast<double>(kept);
    th.strict = th.lenient / 2.0;
    th.ok = true;
    return th;
}

double grounding_score(const HighLevelAction& pred, const HighLevelAction& gt, int image_width,
                       int image_height) {
    if (pred.kind != gt.kind || gt.kind == ActionKind::search_scene_frame) return 0.0;
    const auto center = [&](const BBoxNorm& b, double& u, double& v) {
        u = (b.x1 + b.x2) * 0.5 * image_width / 1000.0;
        v = (b.y1 + b.y2) * 0.5 * image_height / 1000.0;
    };
    double pu = 0.0, pv = 0.0, gu = 0.0, gv = 0.0;
    center(pred.bbox, pu, pv);
    center(gt.bbox, gu, gv);
    const double dist = std::hypot(pu - gu, pv - gv);
    const double diag = std::hypot(static_cast<double>(image_width),
                                   static_cast<double>(image_height));
    return std::max(0.0, 1.0 - dist / diag);
}

Prediction prediction_from_text(const std::string& raw_text) {
    Prediction p;
    p.raw_text = raw_text;
    const ParseResult parsed = parse_decision(raw_text);
    if (parsed.status == ParseStatus::ok) {
        p.parsed = true;
        p.decision = parsed.decision;
    }
    return p;
}

std::map<std::string, Prediction> predictions_from_expert(const std::vector<QARecord>& records,
                                                          const NoiseParams& noise) {
    const TemplateBank& bank = default_template_bank();
    std::map<std::string, Prediction> out;
    for (const auto& r : records) {
        const DecisionView view = decision_view_from_record(r);
        ParsedDecision decision = oracle_decide(view, bank);
        if (noise.sigma_px > 0.0 || noise.p_wrong_kind > 0.0)
            decision = corrupt_decision(decision, view, noise);
        Prediction p;
        p.parsed = true;
        p.decision = decision;
        p.raw_text = decision_to_text(decision);
        out[r.record_id] = std::move(p);
    }
    return out;
}

json GroundingStat::to_json() const {
    return json{{"count", count}, {"mean", mean}, {"stddev", stddev}};
}

json SingleStepMetrics::to_json() const {
    json by_class = json::object();
    for (const auto& [name, stat] : grounding_by_class) by_class[name] = stat.to_json();
    return json{{"total", total},
                {"missing", missing},
                {"parse_failures", parse_failures},
                {"decision", json{{"correct", decision_correct}, {"accuracy", decision_accuracy}}},
                {"retrieval", json{{"total", retrieval_total},
                                   {"correct", retrieval_correct},
                                   {"accuracy", retrieval_accuracy}}},
                {"grounding", grounding.to_json()},
                {"grounding_by_class", by_class}};
}

std::string SingleStepMetrics::render_table() const {
    std::ostringstream out;
    char buf[128];
    out << "single-step evaluation\n";
    std::snprintf(buf, sizeof(buf), "  %-22s %6d\n", "records", total);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  %-22s %6d\n", "missing predictions", missing);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  %-22s %6d\n", "parse failures", parse_failures);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  %-22s %9.4f\n", "decision accuracy", decision_accuracy);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  %-22s %9.4f  (n=%d)\n", "retrieval accuracy",
                  retrieval_accuracy, retrieval_total);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  %-22s %9.4f  std %.4f  (n=%d)\n", "grounding score",
                  grounding.mean, grounding.stddev, grounding.count);
    out << buf;
    for (const auto& [name, stat] : grounding_by_class) {
        std::snprintf(buf, sizeof(buf), "    %-20s %9.4f  std %.4f  (n=%d)\n", name.c_str(),
                      stat.mean, stat.stddev, stat.count);
        out << buf;
    }
    return out.str();
}

SingleStepMetrics evaluate_single_step(const std::vector<QARecord>& records,
                                       const std::map<std::string, Prediction>& predictions) {
    SingleStepMetrics m;
    std::vector<double> all_scores;
    std::map<std::string, std::vector<double>> class_scores;

    for (const auto& r : records) {
        ++m.total;
        HighLevelAction gt;
        const bool gt_ok = gt_action_from_record(r, gt);

        const Prediction* pred = nullptr;
        const auto it = predictions.find(r.record_id);
        if (it == predictions.end()) {
            ++m.missing;
        } else if (!it->second.parsed) {
            ++m.parse_failures;
        } else {
            pred = &it->second;
        }

        const bool kind_match =
            pred != nullptr && gt_ok && pred->decision.action.kind == gt.kind;
        if (kind_match) ++m.decision_correct;

        if (gt_ok && gt.kind == ActionKind::search_scene_frame) {
            ++m.retrieval_total;
            if (kind_match) {
                const int chosen = pred->decision.action.frame_index;
                const auto& valid = r.valid_frame_indices;
                if (std::find(valid.begin(), valid.end(), chosen) != valid.end())
                    ++m.retrieval_correct;
            }
        } else if (gt_ok) {
            const double score =
                pred != nullptr ? grounding_score(pred->decision.action, gt, r.image_width,
                                                  r.image_height)
                                : 0.0;
            all_scores.push_back(score);
            if (!r.grounding_class.empty()) class_scores[r.grounding_class].push_back(score);
        }
    }

    m.decision_accuracy =
        m.total > 0 ? static_cast<double>(m.decision_correct) / m.total : 0.0;
    m.retrieval_accuracy = m.retrieval_total > 0
                               ? static_cast<double>(m.retrieval_correct) / m.retrieval_total
                               : 0.0;
    m.grounding = stat_from(all_scores);
    for (const auto& [name, scores] : class_scores) m.grounding_by_class[name] = stat_from(scores);
    return m;
}

TraceParseResult parse_trace_lines(const std::string& text) {
    TraceParseResult result;
    EpisodeTraceData current;
    bool open = false;
    size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        const std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            result.error = "line " + std::to_string(line_no) + ": not a JSON object";
            return result;
        }
        const std::string type = j.value("type", "");
        if (type == "episode_start") {
            if (open) {
                result.error =
                    "line " + std::to_string(line_no) + ": episode_start inside an open episode";
                return result;
            }
            current = EpisodeTraceData{};
            current.scene_id = j.value("scene_id", "");
            current.task_id = j.value("task_id", "");
            current.episode = j.value("episode", 0);
            current.seed = j.value("seed", static_cast<uint64_t>(0));
            current.policy = j.value("policy", "");
            const auto frames = j.find("frames");
            if (frames == j.end() || !frames->is_array()) {
                result.error = "line " + std::to_string(line_no) + ": episode_start lacks frames";
                return result;
            }
            current.frame_provenance.assign(frames->size(), "");
            for (const auto& f : *frames) {
                const int index = f.value("index", -1);
                if (index < 0 || index >= static_cast<int>(frames->size())) {
                    result.error =
                        "line " + std::to_string(line_no) + ": frame index out of range";
                    return result;
                }
                current.frame_provenance[static_cast<size_t>(index)] =
                    f.value("provenance", "");
            }
            open = true;
        } else if (type == "episode_end") {
            if (!open) {
                result.error =
                    "line " + std::to_string(line_no) + ": episode_end without a start";
                return result;
            }
            current.end = j;
            result.episodes.push_back(std::move(current));
            current = EpisodeTraceData{};
            open = false;
        } else {
            if (!open) {
                result.error =
                    "line " + std::to_string(line_no) + ": step record outside an episode";
                return result;
            }
            current.steps.push_back(j);
        }
    }
    if (open) {
        result.error = "trace ends inside an open episode";
        return result;
    }
    result.ok = true;
    return result;
}

TraceParseResult parse_trace_file(const std::string& path) {
    try {
        return parse_trace_lines(read_text_file(path));
    } catch (const std::exception& e) {
        TraceParseResult result;
        result.error = e.what();
        return result;
    }
}

EpisodeFlags eval_episode(const EpisodeTraceData& trace, const SceneSpec& scene,
                          const TaskInstance& task, const EpisodicThresholds& th, bool strict) {
    EpisodeFlags flags;
    flags.dead_loop = trace.end.value("terminal", "") == "dead_loop";

    double goal_th = strict ? task.strict_goal_threshold : task.lenient_goal_threshold;
    if (goal_th <= 0.0) goal_th = strict ? th.goal_strict : th.goal_lenient;
    const double pick_th = strict ? th.pick_strict : th.pick_lenient;
    const double close_th = strict ? th.close_strict : th.close_lenient;

    // Phase boundaries: first successful grasp of the task object opens the
    // carry phase; the first successful release of it closes the task.
    int first_pick = -1, first_place = -1;
    double pick_miss_at = -1.0;
    std::string held;
    const int n = static_cast<int>(trace.steps.size());
    for (int i = 0; i < n; ++i) {
        const json& s = trace.steps[static_cast<size_t>(i)];
        const std::string name = s.value("action_name", "");
        const bool success = s.value("actuation_success", false);
        const std::string holding = s.value("holding_id", "");
        if (first_pick < 0 && name == "pick" && success && holding == task.object) {
            first_pick = i;
            pick_miss_at = s.value("pick_miss", -1.0);
        }
        if (first_place < 0 && name == "place" && success && held == task.object)
            first_place = i;
        held = holding;
    }

    const double final_dist = trace.end.value("final_object_goal_distance",
                                              std::numeric_limits<double>::infinity());
    flags.full_task = first_place >= 0 && final_dist <= goal_th;
    flags.object_picked = first_pick >= 0 && pick_miss_at >= 0.0 && pick_miss_at <= pick_th;

    const int approach_last = first_pick >= 0 ? first_pick : n - 1;
    double min_obj = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= approach_last && i < n; ++i)
        min_obj = std::min(min_obj,
                           trace.steps[static_cast<size_t>(i)].value(
                               "dist_base_object", std::numeric_limits<double>::infinity()));
    flags.robot_close_object = min_obj <= close_th;

    if (first_pick >= 0) {
        const Receptacle* goal = scene.find_receptacle(task.goal_rec);
        if (goal != nullptr) {
            const int carry_last = first_place >= 0 ? first_place : n - 1;
            double min_goal = std::numeric_limits<double>::infinity();
            for (int i = first_pick; i <= carry_last && i < n; ++i) {
                const json& s = trace.steps[static_cast<size_t>(i)];
                const auto robot = s.find("robot");
                if (robot == s.end() || !robot->is_array() || robot->size() < 2) continue;
                const double dx = (*robot)[0].get<double>() - goal->center.x;
                const double dy = (*robot)[1].get<double>() - goal->center.y;
                min_goal = std::min(min_goal, std::hypot(dx, dy));
            }
            flags.robot_close_goal = min_goal <= close_th;
        }
    }

    // First search of each phase must have chosen a frame pre-mapped for the
    // phase's receptacle; a phase without searches passes vacuously.
    const auto search_frame = [&](int from, int to_exclusive, int& frame) {
        for (int i = from; i < to_exclusive && i < n; ++i) {
            const json& s = trace.steps[static_cast<size_t>(i)];
            if (s.value("action_name", "") != "search_scene_frame") continue;
            if (!s.value("action_valid", false)) continue;
            const auto args = s.find("action_args");
            if (args == s.end() || !args->is_number_integer()) return false;
            frame = args->get<int>();
            return true;
        }
        frame = -1;
        return true;  // vacuous
    };
    const auto provenance_of = [&](int frame) -> std::string {
        if (frame < 0 || frame >= static_cast<int>(trace.frame_provenance.size())) return "";
        return trace.frame_provenance[static_cast<size_t>(frame)];
    };
    int frame = -1;
    if (search_frame(0, first_pick >= 0 ? first_pick : n, frame))
        flags.retrieval_object = frame < 0 || provenance_of(frame) == task.start_rec;
    frame = -1;
    if (first_pick < 0) {
        flags.retrieval_goal = true;
    } else if (search_frame(first_pick + 1, n, frame)) {
        flags.retrieval_goal = frame < 0 || provenance_of(frame) == task.goal_rec;
    }
    return flags;
}

json ModeRates::to_json() const {
    return json{{"full_task", full_task},
                {"object_picked", object_picked},
                {"robot_close_object", robot_close_object},
                {"robot_close_goal", robot_close_goal},
                {"retrieval_object", retrieval_object},
                {"retrieval_goal", retrieval_goal}};
}

json EpisodicMetrics::to_json() const {
    json terms = json::object();
    for (const auto& [name, count] : terminals) terms[name] = count;
    json j{{"episodes", episodes},
           {"strict", strict.to_json()},
           {"lenient", lenient.to_json()},
           {"dead_loop_rate", dead_loop_rate},
           {"terminals", terms},
           {"mean_steps", mean_steps},
           {"mean_sim_steps", mean_sim_steps},
           {"mean_final_distance", mean_final_distance}};
    if (mean_decision_seconds >= 0.0) j["mean_decision_seconds"] = mean_decision_seconds;
    else j["mean_decision_seconds"] = nullptr;
    return j;
}

std::string EpisodicMetrics::render_table() const {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "episodic evaluation over %d episodes\n", episodes);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  %-22s %9s %9s\n", "", "strict", "lenient");
    out << buf;
    const auto row = [&](const char* name, double s, double l) {
        std::snprintf(buf, sizeof(buf), "  %-22s %9s %9s\n", name, format_rate(s).c_str(),
                      format_rate(l).c_str());
        out << buf;
    };
    row("full_task", strict.full_task, lenient.full_task);
    row("object_picked", strict.object_picked, lenient.object_picked);
    row("robot_close_object", strict.robot_close_object, lenient.robot_close_object);
    row("robot_close_goal", strict.robot_close_goal, lenient.robot_close_goal);
    row("retrieval_object", strict.retrieval_object, lenient.retrieval_object);
    row("retrieval_goal", strict.retrieval_goal, lenient.retrieval_goal);
    std::snprintf(buf, sizeof(buf), "  %-22s %9s\n", "dead_loop_rate",
                  format_rate(dead_loop_rate).c_str());
    out << buf;
    std::snprintf(buf, sizeof(buf), "  %-22s %9.2f\n", "mean_steps", mean_steps);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  %-22s %9.1f\n", "mean_sim_steps", mean_sim_steps);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  %-22s %9.3f\n", "mean_final_distance",
                  mean_final_distance);
    out << buf;
    if (mean_decision_seconds >= 0.0)
        std::snprintf(buf, sizeof(buf), "  %-22s %9.4f\n", "mean_decision_seconds",
                      mean_decision_seconds);
    else
        std::snprintf(buf, sizeof(buf), "  %-22s %9s\n", "mean_decision_seconds", "n/a");
    out << buf;
    out << "  terminals";
    for (const auto& [name, count] : terminals) {
        std::snprintf(buf, sizeof(buf), " %s=%d", name.c_str(), count);
        out << buf;
    }
    out << "\n";
    return out.str();
}

EpisodicEvalResult evaluate_episodes(const std::vector<EpisodeTraceData>& episodes,
                                     const std::map<std::string, SceneSpec>& scenes,
                                     const std::map<std::string, TaskInstance>& tasks,
                                     const EpisodicThresholds& th,
                                     const std::vector<double>& decision_seconds) {
    EpisodicEvalResult result;
    if (episodes.empty()) {
        result.error = "trace contains no episodes";
        return result;
    }
    EpisodicMetrics& m = result.metrics;
    m.episodes = static_cast<int>(episodes.size());
    int strict_counts[6] = {0, 0, 0, 0, 0, 0};
    int lenient_counts[6] = {0, 0, 0, 0, 0, 0};
    int dead_loops = 0;
    double sum_steps = 0.0, sum_sim = 0.0, sum_final = 0.0;

    for (const auto& trace : episodes) {
        const auto scene_it = scenes.find(trace.scene_id);
        if (scene_it == scenes.end()) {
            result.error = "trace references unknown scene: " + trace.scene_id;
            return result;
        }
        const auto task_it = tasks.find(trace.task_id);
        if (task_it == tasks.end()) {
            result.error = "trace references unknown task: " + trace.task_id;
            return result;
        }
        const EpisodeFlags fs =
            eval_episode(trace, scene_it->second, task_it->second, th, true);
        const EpisodeFlags fl =
            eval_episode(trace, scene_it->second, task_it->second, th, false);
        const bool sflags[6] = {fs.full_task,         fs.object_picked, fs.robot_close_object,
                                fs.robot_close_goal,  fs.retrieval_object, fs.retrieval_goal};
        const bool lflags[6] = {fl.full_task,         fl.object_picked, fl.robot_close_object,
                                fl.robot_close_goal,  fl.retrieval_object, fl.retrieval_goal};
        for (int i = 0; i < 6; ++i) {
            strict_counts[i] += sflags[i] ? 1 : 0;
            lenient_counts[i] += lflags[i] ? 1 : 0;
        }
        if (fl.dead_loop) ++dead_loops;
        ++m.terminals[trace.end.value("terminal", "unknown")];
        sum_steps += trace.end.value("steps_used", 0);
        sum_sim += trace.end.value("total_sim_steps", 0);
        sum_final += trace.end.value("final_object_goal_distance", 0.0);
    }

    const double n = static_cast<double>(m.episodes);
    const auto fill = [&](ModeRates& rates, const int counts[6]) {
        rates.full_task = counts[0] / n;
        rates.object_picked = counts[1] / n;
        rates.robot_close_object = counts[2] / n;
        rates.robot_close_goal = counts[3] / n;
        rates.retrieval_object = counts[4] / n;
        rates.retrieval_goal = counts[5] / n;
    };
    fill(m.strict, strict_counts);
    fill(m.lenient, lenient_counts);
    m.dead_loop_rate = dead_loops / n;
    m.mean_steps = sum_steps / n;
    m.mean_sim_steps = sum_sim / n;
    m.mean_final_distance = sum_final / n;
    if (!decision_seconds.empty()) {
        double sum = 0.0;
        for (const double t : decision_seconds) sum += t;
        m.mean_decision_seconds = sum / static_cast<double>(decision_seconds.size());
    }
    result.ok = true;
    return result;
}

}  // namespace owmm
