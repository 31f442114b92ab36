#include "owmm/action.hpp"

namespace owmm {

const char* kind_name(ActionKind kind) {
    switch (kind) {
        case ActionKind::search_scene_frame: return "search_scene_frame";
        case ActionKind::nav_to_point: return "nav_to_point";
        case ActionKind::pick: return "pick";
        case ActionKind::place: return "place";
    }
    return "unknown";
}

const char* parse_status_name(ParseStatus status) {
    switch (status) {
        case ParseStatus::ok: return "ok";
        case ParseStatus::malformed_json: return "malformed_json";
        case ParseStatus::missing_field: return "missing_field";
        case ParseStatus::unknown_action: return "unknown_action";
        case ParseStatus::bad_arguments: return "bad_arguments";
    }
    return "unknown";
}

json HighLevelAction::args_json() const {
    if (kind == ActionKind::search_scene_frame) return json(frame_index);
    return json::array({json::array({bbox.x1, bbox.y1, bbox.x2, bbox.y2})});
}

namespace {

ParseResult fail(ParseStatus status, std::string message) {
    ParseResult result;
    result.status = status;
    result.error = std::move(message);
    return result;
}

bool read_norm_coord(const json& j, int& out) {
    if (!j.is_number_integer()) return false;
    const auto v = j.get<int64_t>();
    if (v < 0 || v > 1000) return false;
    out = static_cast<int>(v);
    return true;
}

}  // namespace

ParseResult parse_decision(const std::string& raw_text) {
    const size_t open = raw_text.find('{');
    const size_t close = raw_text.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open)
        return fail(ParseStatus::malformed_json, "no JSON object in response");
    json j = json::parse(raw_text.substr(open, close - open + 1), nullptr, false);
    if (j.is_discarded() || !j.is_object())
        return fail(ParseStatus::malformed_json, "response is not a JSON object");

    ParseResult result;
    if (j.contains("reasoning")) {
        if (!j["reasoning"].is_string())
            return fail(ParseStatus::missing_field, "reasoning must be a string");
        result.decision.reasoning = j["reasoning"].get<std::string>();
    }
    if (j.contains("summarization")) {
        if (!j["summarization"].is_string())
            return fail(ParseStatus::missing_field, "summarization must be a string");
        result.decision.summarization = j["summarization"].get<std::string>();
    }

    if (!j.contains("action") || !j["action"].is_object())
        return fail(ParseStatus::missing_field, "action object is required");
    const json& action = j["action"];
    if (!action.contains("name") || !action["name"].is_string())
        return fail(ParseStatus::missing_field, "action.name is required");
    const std::string name = action["name"].get<std::string>();

    HighLevelAction& out = result.decision.action;
    if (name == "search_scene_frame") out.kind = ActionKind::search_scene_frame;
    else if (name == "nav_to_point") out.kind = ActionKind::nav_to_point;
    else if (name == "pick") out.kind = ActionKind::pick;
    else if (name == "place") out.kind = ActionKind::place;
    else return fail(ParseStatus::unknown_action, "unknown action: " + name);

    if (!action.contains("args"))
        return fail(ParseStatus::missing_field, "action.args is required");
    const json& args = action["args"];

    if (out.kind == ActionKind::search_scene_frame) {
        const json* idx = &args;
        if (args.is_array()) {
            if (args.size() != 1)
                return fail(ParseStatus::bad_arguments,
                            "search_scene_frame takes a single frame index");
            idx = &args[0];
        }
        if (!idx->is_number_integer() || idx->get<int64_t>() < 0)
            return fail(ParseStatus::bad_arguments,
                        "search_scene_frame index must be a non-negative integer");
        out.frame_index = static_cast<int>(idx->get<int64_t>());
        return result;
    }

    const json* box = &args;
    if (!args.is_array())
        return fail(ParseStatus::bad_arguments, "box actions take [[x1, y1, x2, y2]]");
    if (args.size() == 1 && args[0].is_array()) box = &args[0];
    if (!box->is_array() || box->size() != 4)
        return fail(ParseStatus::bad_arguments, "bounding box needs exactly four coordinates");
    int coords[4];
    for (size_t i = 0; i < 4; ++i) {
        if (!read_norm_coord((*box)[i], coords[i]))
            return fail(ParseStatus::bad_arguments,
                        "bounding box coordinates must be integers in [0, 1000]");
    }
    if (coords[0] > coords[2] || coords[1] > coords[3])
        return fail(ParseStatus::bad_arguments,
                    "bounding box corners must satisfy x1 <= x2 and y1 <= y2");
    out.bbox = {coords[0], coords[1], coords[2], coords[3]};
    return result;
}

std::string decision_to_text(const ParsedDecision& decision) {
    const json j{{"reasoning", decision.reasoning},
                 {"action", json{{"name", kind_name(decision.action.kind)},
                                 {"args", decision.action.args_json()}}},
                 {"summarization", decision.summarization}};
    return canonical_dump(j);
}

const std::string& action_schema_doc() {
    static const std::string doc =
        "Answer with one JSON object: {\"reasoning\": string, \"action\": {\"name\": string, "
        "\"args\": ...}, \"summarization\": string}. Actions: search_scene_frame(frame_index) "
        "retrieves a posed scene frame; nav_to_point([[x1, y1, x2, y2]]) drives toward the "
        "grounded box; pick([[x1, y1, x2, y2]]) grasps at the box; place([[x1, y1, x2, y2]]) "
        "releases at the box. Box coordinates are integers in [0, 1000] normalized to the "
        "image; nav boxes are grounded in the selected scene frame when one is active, "
        "otherwise in the current ego view; pick and place always use the ego view.";
    return doc;
}

}  // namespace owmm
