#pragma once

#include <string>

#include "owmm/camera.hpp"
#include "owmm/canonical_json.hpp"

namespace owmm {

enum class ActionKind { search_scene_frame, nav_to_point, pick, place };

const char* kind_name(ActionKind kind);

struct HighLevelAction {
    ActionKind kind = ActionKind::search_scene_frame;
    int frame_index = -1;  // search_scene_frame argument
    BBoxNorm bbox;         // nav_to_point / pick / place argument

    // Arguments in wire form: a bare frame index, or [[x1, y1, x2, y2]].
    json args_json() const;
};

struct ParsedDecision {
    std::string reasoning;
    std::string summarization;
    HighLevelAction action;
};

enum class ParseStatus { ok, malformed_json, missing_field, unknown_action, bad_arguments };

const char* parse_status_name(ParseStatus status);

struct ParseResult {
    ParseStatus status = ParseStatus::ok;
    ParsedDecision decision;
    std::string error;
};

// Parses a model response into a decision. The first '{' through the last
// '}' is treated as the JSON payload, so surrounding prose or code fences
// are tolerated. Requirements:
//   - "action" object with a "name" in the four-action vocabulary;
//   - search_scene_frame args: a non-negative integer, bare or [i];
//   - box actions args: [[x1, y1, x2, y2]] or [x1, y1, x2, y2], integers in
//     [0, 1000] with x1 <= x2 and y1 <= y2;
//   - "reasoning" / "summarization" strings are optional (default empty).
ParseResult parse_decision(const std::string& raw_text);

// Canonical single-line JSON emission; parse_decision inverts it exactly.
std::string decision_to_text(const ParsedDecision& decision);

// Short protocol description included in prompts and wire requests.
const std::string& action_schema_doc();

}  // namespace owmm
