#pragma once

#include <string>
#include <vector>

#include "owmm/scene.hpp"
#include "owmm/sim.hpp"

namespace owmm {

// Everything a decision maker sees at one step. Scene ground truth is not
// part of this structure: policies act on the perceived entity lists, the
// instruction, proprioception (held object), and the running history text.
struct PolicyInput {
    const TaskInstance* task = nullptr;
    const std::vector<PoseFrame>* frames = nullptr;
    const Observation* ego = nullptr;
    std::string history;
    int step = 0;
    int selected_frame = -1;  // pose frame armed by a prior search, -1 if none
    std::string held_object;
    const SimParams* params = nullptr;
};

struct PolicyOutput {
    bool ok = false;
    std::string raw_text;  // model-style response; parsed by parse_decision
    std::string error;
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    virtual PolicyOutput decide(const PolicyInput& input) = 0;
};

}  // namespace owmm
