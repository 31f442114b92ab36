#include "owmm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "owmm/rng.hpp"

namespace owmm {
namespace {

const ViewEntity* find_entity(const std::vector<ViewEntity>& list, const std::string& id) {
    for (const auto& e : list)
        if (e.id == id) return &e;
    return nullptr;
}

double planar_to(const DecisionView& view, const ViewEntity& e) {
    return planar_range_from_pixel(view.intrinsics, view.camera_pitch, e.anchor_u, e.anchor_v,
                                   e.depth_m);
}

// Square box (normalized units) centered on the entity's reference pixel.
BBoxNorm anchor_box(const ViewEntity& e, const CameraIntrinsics& intr, int half_norm) {
    const auto to_norm = [](double px, int size) {
        return std::clamp(static_cast<int>(std::floor(px * 1000.0 / size)), 0, 1000);
    };
    const int ax = to_norm(e.anchor_u, intr.width);
    const int ay = to_norm(e.anchor_v, intr.height);
    BBoxNorm box;
    box.x1 = std::max(0, ax - half_norm);
    box.y1 = std::max(0, ay - half_norm);
    box.x2 = std::min(1000, ax + half_norm);
    box.y2 = std::min(1000, ay + half_norm);
    return box;
}

// Frame that centers the entity's reference point best. The pre-mapping pass
// aims one frame straight at each receptacle's top face, so for a receptacle
// this selects its own frame under any frame ordering.
int best_frame_for(const DecisionView& view, const std::string& id) {
    int best = -1;
    double best_d2 = 0.0;
    const double cx = view.intrinsics.cx();
    const double cy = view.intrinsics.cy();
    for (size_t i = 0; i < view.frames.size(); ++i) {
        const ViewEntity* e = find_entity(view.frames[i], id);
        if (e == nullptr) continue;
        const double du = e->anchor_u - cx;
        const double dv = e->anchor_v - cy;
        const double d2 = du * du + dv * dv;
        if (best < 0 || d2 < best_d2) {
            best = static_cast<int>(i);
            best_d2 = d2;
        }
    }
    return best;
}

// Margin between the expert's engage distance and the simulator's workspace
// gate; absorbs the 9-significant-digit rounding a wire round trip applies.
constexpr double kReachMargin = 0.15;
constexpr int kNavBoxHalf = 40;
constexpr int kPlaceBoxHalf = 30;

}  // namespace

ViewEntity to_view_entity(const ObservedEntity& entity) {
    return {entity.id,       entity.kind,     entity.label, entity.bbox,
            entity.anchor_u, entity.anchor_v, entity.depth_m};
}

DecisionView make_decision_view(const PolicyInput& input, const SceneSpec& scene) {
    DecisionView view;
    view.object_id = input.task->object;
    view.start_rec_id = input.task->start_rec;
    view.goal_rec_id = input.task->goal_rec;
    if (const ObjectInstance* obj = scene.find_object(view.object_id))
        view.object_label = obj->label;
    if (const Receptacle* rec = scene.find_receptacle(view.start_rec_id))
        view.start_label = rec->label;
    if (const Receptacle* rec = scene.find_receptacle(view.goal_rec_id))
        view.goal_label = rec->label;
    view.held_object = input.held_object;
    view.history = input.history;
    view.step = input.step;
    view.selected_frame = input.selected_frame;
    for (const auto& frame : *input.frames) {
        std::vector<ViewEntity> entities;
        entities.reserve(frame.observation.entities.size());
        for (const auto& e : frame.observation.entities) entities.push_back(to_view_entity(e));
        view.frames.push_back(std::move(entities));
    }
    for (const auto& e : input.ego->entities) view.ego.push_back(to_view_entity(e));
    view.intrinsics = input.params->intrinsics;
    view.camera_pitch = input.params->camera_pitch;
    view.max_reach = input.params->max_reach;
    return view;
}

ParsedDecision oracle_decide(const DecisionView& view, const TemplateBank& bank) {
    const bool holding = !view.held_object.empty();
    const double reach_gate = view.max_reach - kReachMargin;
    const std::string& target_id = holding ? view.goal_rec_id : view.object_id;

    ParsedDecision decision;
    std::string reasoning_key, summar_key;
    std::map<std::string, std::string> slots{
        {"A", view.object_label}, {"B", view.start_label}, {"C", view.goal_label}};

    bool decided = false;
    if (!holding) {
        if (const ViewEntity* obj = find_entity(view.ego, view.object_id)) {
            if (planar_to(view, *obj) <= reach_gate) {
                decision.action.kind = ActionKind::pick;
                decision.action.bbox = obj->bbox;
                reasoning_key = "pick";
                summar_key = "picked";
            } else {
                decision.action.kind = ActionKind::nav_to_point;
                decision.action.bbox = obj->bbox;
                reasoning_key = "nav_object";
                summar_key = "approach_object";
            }
            decided = true;
        } else if (view.selected_frame >= 0 &&
                   view.selected_frame < static_cast<int>(view.frames.size())) {
            const auto& frame = view.frames[static_cast<size_t>(view.selected_frame)];
            const ViewEntity* in_frame = find_entity(frame, view.object_id);
            if (in_frame == nullptr) in_frame = find_entity(frame, view.start_rec_id);
            if (in_frame != nullptr) {
                decision.action.kind = ActionKind::nav_to_point;
                decision.action.bbox = in_frame->kind == "object"
                                           ? in_frame->bbox
                                           : anchor_box(*in_frame, view.intrinsics, kNavBoxHalf);
                reasoning_key = "nav_object";
                summar_key = "approach_object";
                decided = true;
            }
        } else {
            // Approaching the source receptacle only helps while it is still
            // beyond arm range. Parked next to it with the object out of the
            // ego view, the productive move is consulting the scene memory
            // for a frame that shows the object itself.
            const ViewEntity* rec = find_entity(view.ego, view.start_rec_id);
            if (rec != nullptr && planar_to(view, *rec) > view.max_reach) {
                decision.action.kind = ActionKind::nav_to_point;
                decision.action.bbox = anchor_box(*rec, view.intrinsics, kNavBoxHalf);
                reasoning_key = "nav_object";
                summar_key = "approach_object";
                decided = true;
            }
        }
    } else {
        if (const ViewEntity* goal = find_entity(view.ego, view.goal_rec_id)) {
            if (planar_to(view, *goal) <= reach_gate) {
                decision.action.kind = ActionKind::place;
                decision.action.bbox = anchor_box(*goal, view.intrinsics, kPlaceBoxHalf);
                reasoning_key = "place";
                summar_key = "placed";
            } else {
                decision.action.kind = ActionKind::nav_to_point;
                decision.action.bbox = anchor_box(*goal, view.intrinsics, kNavBoxHalf);
                reasoning_key = "nav_goal";
                summar_key = "approach_goal";
            }
            decided = true;
        } else if (view.selected_frame >= 0 &&
                   view.selected_frame < static_cast<int>(view.frames.size())) {
            const auto& frame = view.frames[static_cast<size_t>(view.selected_frame)];
            if (const ViewEntity* goal = find_entity(frame, view.goal_rec_id)) {
                decision.action.kind = ActionKind::nav_to_point;
                decision.action.bbox = anchor_box(*goal, view.intrinsics, kNavBoxHalf);
                reasoning_key = "nav_goal";
                summar_key = "approach_goal";
                decided = true;
            }
        }
    }

    if (!decided) {
        const std::string& phase_rec = holding ? view.goal_rec_id : view.start_rec_id;
        int frame_index = best_frame_for(view, phase_rec);
        if (!holding) {
            // The source receptacle's frame resolves the query only when the
            // object actually shows in it (a neighbor can hide it from that
            // vantage); otherwise take the frame that centers the object.
            const bool frame_shows_object =
                frame_index >= 0 &&
                find_entity(view.frames[static_cast<size_t>(frame_index)], view.object_id) !=
                    nullptr;
            if (!frame_shows_object) {
                const int object_frame = best_frame_for(view, view.object_id);
                if (object_frame >= 0) frame_index = object_frame;
            }
        }
        if (frame_index < 0) frame_index = best_frame_for(view, target_id);
        if (frame_index < 0) frame_index = 0;
        decision.action.kind = ActionKind::search_scene_frame;
        decision.action.frame_index = frame_index;
        reasoning_key = holding ? "search_goal" : "search_object";
        summar_key = holding ? "approach_goal" : "approach_object";
        slots["F"] = std::to_string(frame_index);
    }

    const uint64_t base = fnv1a64(view.history + "|" + std::to_string(view.step) + "|" +
                                  reasoning_key + "|" + std::to_string(view.selected_frame));
    const std::string& reasoning_tmpl = pick_phrase(bank.reasoning.at(reasoning_key), base);
    if (!instantiate_template(reasoning_tmpl, slots, decision.reasoning))
        decision.reasoning = reasoning_tmpl;
    const std::string& summar_tmpl =
        pick_phrase(bank.summarization.at(summar_key), Rng::derive(base, 1));
    if (!instantiate_template(summar_tmpl, slots, decision.summarization))
        decision.summarization = summar_tmpl;
    return decision;
}

PolicyOutput OraclePolicy::decide(const PolicyInput& input) {
    PolicyOutput out;
    const DecisionView view = make_decision_view(input, *scene_);
    out.raw_text = decision_to_text(oracle_decide(view, default_template_bank()));
    out.ok = true;
    return out;
}

PolicyOutput NoisyOraclePolicy::decide(const PolicyInput& input) {
    PolicyOutput out;
    const DecisionView view = make_decision_view(input, *scene_);
    const ParsedDecision decision = oracle_decide(view, default_template_bank());
    out.raw_text = decision_to_text(corrupt_decision(decision, view, noise_));
    out.ok = true;
    return out;
}

ParsedDecision corrupt_decision(const ParsedDecision& decision, const DecisionView& view,
                                const NoiseParams& noise) {
    ParsedDecision out = decision;
    const uint64_t h = fnv1a64(view.history + "#" + std::to_string(view.step));
    Rng rng(Rng::derive(noise.seed, h));

    if (noise.p_wrong_kind > 0.0 && rng.uniform() < noise.p_wrong_kind) {
        const ActionKind all[4] = {ActionKind::search_scene_frame, ActionKind::nav_to_point,
                                   ActionKind::pick, ActionKind::place};
        ActionKind others[3];
        int n = 0;
        for (const ActionKind k : all)
            if (k != out.action.kind) others[n++] = k;
        const ActionKind old_kind = out.action.kind;
        out.action.kind = others[rng.bounded(3)];
        if (out.action.kind == ActionKind::search_scene_frame) {
            const size_t frame_count = view.frames.size();
            out.action.frame_index =
                frame_count > 0 ? static_cast<int>(rng.bounded(frame_count)) : 0;
        } else if (old_kind == ActionKind::search_scene_frame) {
            out.action.bbox = {450, 450, 550, 550};
        }
    }

    if (out.action.kind != ActionKind::search_scene_frame && noise.sigma_px > 0.0) {
        const CameraIntrinsics& intr = view.intrinsics;
        double px[4] = {out.action.bbox.x1 * intr.width / 1000.0,
                        out.action.bbox.y1 * intr.height / 1000.0,
                        out.action.bbox.x2 * intr.width / 1000.0,
                        out.action.bbox.y2 * intr.height / 1000.0};
        const double limit[4] = {static_cast<double>(intr.width),
                                 static_cast<double>(intr.height),
                                 static_cast<double>(intr.width),
                                 static_cast<double>(intr.height)};
        for (int i = 0; i < 4; ++i)
            px[i] = std::clamp(px[i] + rng.normal(0.0, noise.sigma_px), 0.0, limit[i]);
        if (px[0] > px[2]) std::swap(px[0], px[2]);
        if (px[1] > px[3]) std::swap(px[1], px[3]);
        const auto to_norm = [](double p, double size) {
            return std::clamp(static_cast<int>(std::floor(p * 1000.0 / size)), 0, 1000);
        };
        out.action.bbox = {to_norm(px[0], limit[0]), to_norm(px[1], limit[1]),
                           to_norm(px[2], limit[2]), to_norm(px[3], limit[3])};
    }
    return out;
}

}  // namespace owmm
