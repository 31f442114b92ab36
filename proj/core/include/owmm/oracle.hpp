#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "owmm/action.hpp"
#include "owmm/bank.hpp"
#include "owmm/policy.hpp"

namespace owmm {

// Minimal observation record the scripted expert works from. Buildable both
// from a local PolicyInput and from a wire request, so the in-process oracle
// and the HTTP mock produce the same decisions from the same numbers.
struct ViewEntity {
    std::string id;
    std::string kind;
    std::string label;
    BBoxNorm bbox;
    double anchor_u = 0.0;
    double anchor_v = 0.0;
    double depth_m = 0.0;
};

struct DecisionView {
    // Task binding (ids and labels come from the task/scene files).
    std::string object_id, start_rec_id, goal_rec_id;
    std::string object_label, start_label, goal_label;
    // Step state.
    std::string held_object;
    std::string history;
    int step = 0;
    int selected_frame = -1;
    // Perception.
    std::vector<std::vector<ViewEntity>> frames;
    std::vector<ViewEntity> ego;
    CameraIntrinsics intrinsics;
    double camera_pitch = -0.35;
    double max_reach = 1.2;
};

ViewEntity to_view_entity(const ObservedEntity& entity);

// Builds the view for the in-process expert. The scene is needed only to
// resolve the task's object/receptacle labels.
DecisionView make_decision_view(const PolicyInput& input, const SceneSpec& scene);

// Scripted expert: search the frame showing the current target, navigate
// until the target is inside the arm workspace, then pick/place on it.
// Reasoning and summarization strings come from the template bank, selected
// deterministically from the history digest.
ParsedDecision oracle_decide(const DecisionView& view, const TemplateBank& bank);

class OraclePolicy : public Policy {
public:
    explicit OraclePolicy(const SceneSpec& scene) : scene_(&scene) {}

    std::string name() const override { return "oracle"; }
    PolicyOutput decide(const PolicyInput& input) override;

private:
    const SceneSpec* scene_;
};

// Oracle with controlled corruption: each box corner is jittered by a
// Gaussian in raw pixel space (sigma_px = 0 reproduces the oracle exactly),
// and with probability p_wrong_kind the action kind is replaced by one of
// the other three with synthesized arguments. Fully seeded: the same
// (seed, history, step) always corrupts the same way.
struct NoiseParams {
    double sigma_px = 0.0;
    double p_wrong_kind = 0.0;
    uint64_t seed = 0;
};

// Applies the corruption model to one decision; pure and fully seeded.
ParsedDecision corrupt_decision(const ParsedDecision& decision, const DecisionView& view,
                                const NoiseParams& noise);

class NoisyOraclePolicy : public Policy {
public:
    NoisyOraclePolicy(const SceneSpec& scene, const NoiseParams& noise)
        : scene_(&scene), noise_(noise) {}

    std::string name() const override { return "noisy-oracle"; }
    PolicyOutput decide(const PolicyInput& input) override;

private:
    const SceneSpec* scene_;
    NoiseParams noise_;
};

}  // namespace owmm
