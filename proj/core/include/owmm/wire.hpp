#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "owmm/canonical_json.hpp"
#include "owmm/oracle.hpp"
#include "owmm/policy.hpp"

namespace owmm {

// HTTP decision protocol: the client POSTs one JSON request per step and the
// server answers {"raw_text": "<model-style response>"}.
inline constexpr int kProtocolVersion = 1;

std::string base64_encode(const uint8_t* data, size_t size);

// Inverse of base64_encode; returns false on characters outside the alphabet
// or a malformed tail.
bool base64_decode(const std::string& text, std::vector<uint8_t>& out);

json entity_to_wire(const ObservedEntity& entity);

// Reads one wire entity into the oracle's view type. Returns false when a
// field is missing or of the wrong shape.
bool entity_from_wire(const json& j, ViewEntity& out);

// Serializes one decision step. The payload carries what a remote policy
// needs to act: the task binding (instruction, target ids and labels), the
// history text, the perceived entity lists, proprioception, and the camera
// configuration (ego depth raster optional). The scene resolves the target
// labels, exactly as the in-process policies do.
json build_decision_request(const PolicyInput& input, const SceneSpec& scene,
                            bool include_raster = false);

struct WireDecisionView {
    bool ok = false;
    DecisionView view;
    std::string error;
};

// Rebuilds the expert's input from a wire request. Requests are
// self-contained: every number and id comes from the payload, so a decision
// computed here matches one computed by a client that serialized the same
// step.
WireDecisionView decision_view_from_wire(const json& request);

struct WireResponse {
    bool ok = false;
    std::string raw_text;
    std::string error;
};

WireResponse parse_decision_response(const std::string& body);

}  // namespace owmm
