#include "owmm/wire.hpp"

#include <array>

namespace owmm {
namespace {

constexpr char kB64Alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::array<int8_t, 256> b64_reverse_table() {
    std::array<int8_t, 256> table;
    table.fill(-1);
    for (int i = 0; i < 64; ++i) table[static_cast<uint8_t>(kB64Alphabet[i])] = static_cast<int8_t>(i);
    return table;
}

bool read_string(const json& j, const char* key, std::string& out) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return false;
    out = it->get<std::string>();
    return true;
}

bool read_number(const json& j, const char* key, double& out) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number()) return false;
    out = it->get<double>();
    return true;
}

bool read_int(const json& j, const char* key, int& out) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer()) return false;
    out = it->get<int>();
    return true;
}

}  // namespace

std::string base64_encode(const uint8_t* data, size_t size) {
    std::string out;
    out.reserve((size + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 3 <= size; i += 3) {
        const uint32_t n = (static_cast<uint32_t>(data[i]) << 16) |
                           (static_cast<uint32_t>(data[i + 1]) << 8) | data[i + 2];
        out += kB64Alphabet[(n >> 18) & 63];
        out += kB64Alphabet[(n >> 12) & 63];
        out += kB64Alphabet[(n >> 6) & 63];
        out += kB64Alphabet[n & 63];
    }
    const size_t rest = size - i;
    if (rest == 1) {
        const uint32_t n = static_cast<uint32_t>(data[i]) << 16;
        out += kB64Alphabet[(n >> 18) & 63];
        out += kB64Alphabet[(n >> 12) & 63];
        out += "==";
    } else if (rest == 2) {
        const uint32_t n =
            (static_cast<uint32_t>(data[i]) << 16) | (static_cast<uint32_t>(data[i + 1]) << 8);
        out += kB64Alphabet[(n >> 18) & 63];
        out += kB64Alphabet[(n >> 12) & 63];
        out += kB64Alphabet[(n >> 6) & 63];
        out += '=';
    }
    return out;
}

bool base64_decode(const std::string& text, std::vector<uint8_t>& out) {
    static const std::array<int8_t, 256> table = b64_reverse_table();
    out.clear();
    if (text.size() % 4 != 0) return false;
    out.reserve(text.size() / 4 * 3);
    for (size_t i = 0; i < text.size(); i += 4) {
        int pad = 0;
        uint32_t n = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=') {
                // Padding may only occupy the final one or two positions.
                if (i + 4 != text.size() || k < 2) return false;
                ++pad;
                n <<= 6;
                continue;
            }
            if (pad > 0) return false;
            const int8_t v = table[static_cast<uint8_t>(c)];
            if (v < 0) return false;
            n = (n << 6) | static_cast<uint32_t>(v);
        }
        out.push_back(static_cast<uint8_t>((n >> 16) & 0xff));
        if (pad < 2) out.push_back(static_cast<uint8_t>((n >> 8) & 0xff));
        if (pad < 1) out.push_back(static_cast<uint8_t>(n & 0xff));
    }
    return true;
}

json entity_to_wire(const ObservedEntity& entity) {
    return json{{"id", entity.id},
                {"kind", entity.kind},
                {"label", entity.label},
                {"bbox", entity.bbox.to_json()},
                {"anchor_px", json::array({entity.anchor_u, entity.anchor_v})},
                {"depth_m", entity.depth_m}};
}

bool entity_from_wire(const json& j, ViewEntity& out) {
    if (!j.is_object()) return false;
    if (!read_string(j, "id", out.id) || !read_string(j, "kind", out.kind) ||
        !read_string(j, "label", out.label))
        return false;
    const auto bbox = j.find("bbox");
    if (bbox == j.end() || !bbox->is_array() || bbox->size() != 4) return false;
    for (const auto& c : *bbox)
        if (!c.is_number_integer()) return false;
    out.bbox = {(*bbox)[0].get<int>(), (*bbox)[1].get<int>(), (*bbox)[2].get<int>(),
                (*bbox)[3].get<int>()};
    const auto anchor = j.find("anchor_px");
    if (anchor == j.end() || !anchor->is_array() || anchor->size() != 2 ||
        !(*anchor)[0].is_number() || !(*anchor)[1].is_number())
        return false;
    out.anchor_u = (*anchor)[0].get<double>();
    out.anchor_v = (*anchor)[1].get<double>();
    if (!read_number(j, "depth_m", out.depth_m)) return false;
    return true;
}

json build_decision_request(const PolicyInput& input, const SceneSpec& scene,
                            bool include_raster) {
    json frames = json::array();
    for (const auto& frame : *input.frames) {
        json entities = json::array();
        for (const auto& e : frame.observation.entities) entities.push_back(entity_to_wire(e));
        frames.push_back(json{{"index", frame.index}, {"entities", std::move(entities)}});
    }
    json ego_entities = json::array();
    for (const auto& e : input.ego->entities) ego_entities.push_back(entity_to_wire(e));
    json ego{{"entities", std::move(ego_entities)}};
    if (include_raster && !input.ego->depth.empty()) {
        const auto* bytes = reinterpret_cast<const uint8_t*>(input.ego->depth.data());
        ego["depth_b64"] = base64_encode(bytes, input.ego->depth.size() * sizeof(float));
        ego["depth_width"] = input.params->intrinsics.width;
        ego["depth_height"] = input.params->intrinsics.height;
    }
    std::string object_label, start_label, goal_label;
    if (const ObjectInstance* obj = scene.find_object(input.task->object))
        object_label = obj->label;
    if (const Receptacle* rec = scene.find_receptacle(input.task->start_rec))
        start_label = rec->label;
    if (const Receptacle* rec = scene.find_receptacle(input.task->goal_rec))
        goal_label = rec->label;
    const SimParams& p = *input.params;
    return json{{"protocol_version", kProtocolVersion},
                {"task", json{{"instruction", input.task->instruction},
                              {"object_id", input.task->object},
                              {"start_rec_id", input.task->start_rec},
                              {"goal_rec_id", input.task->goal_rec},
                              {"object_label", object_label},
                              {"start_label", start_label},
                              {"goal_label", goal_label}}},
                {"step", input.step},
                {"history", input.history},
                {"selected_frame", input.selected_frame},
                {"held_object", input.held_object},
                {"schema", action_schema_doc()},
                {"config", json{{"image_width", p.intrinsics.width},
                                {"image_height", p.intrinsics.height},
                                {"hfov", p.intrinsics.hfov},
                                {"camera_pitch", p.camera_pitch},
                                {"camera_height", p.camera_height},
                                {"max_reach", p.max_reach},
                                {"bbox_scale", 1000}}},
                {"pose_frames", std::move(frames)},
                {"ego", std::move(ego)}};
}

WireDecisionView decision_view_from_wire(const json& request) {
    WireDecisionView result;
    DecisionView& view = result.view;
    if (!request.is_object()) {
        result.error = "request is not a JSON object";
        return result;
    }
    int version = 0;
    if (!read_int(request, "protocol_version", version) || version != kProtocolVersion) {
        result.error = "unsupported protocol_version";
        return result;
    }
    const auto task = request.find("task");
    if (task == request.end() || !task->is_object()) {
        result.error = "missing task";
        return result;
    }
    if (!read_string(*task, "object_id", view.object_id) ||
        !read_string(*task, "start_rec_id", view.start_rec_id) ||
        !read_string(*task, "goal_rec_id", view.goal_rec_id) ||
        !read_string(*task, "object_label", view.object_label) ||
        !read_string(*task, "start_label", view.start_label) ||
        !read_string(*task, "goal_label", view.goal_label)) {
        result.error = "malformed task binding";
        return result;
    }
    if (!read_int(request, "step", view.step) ||
        !read_int(request, "selected_frame", view.selected_frame) ||
        !read_string(request, "history", view.history) ||
        !read_string(request, "held_object", view.held_object)) {
        result.error = "missing step/selected_frame/history/held_object";
        return result;
    }
    const auto config = request.find("config");
    if (config == request.end() || !config->is_object()) {
        result.error = "missing config";
        return result;
    }
    if (!read_int(*config, "image_width", view.intrinsics.width) ||
        !read_int(*config, "image_height", view.intrinsics.height) ||
        !read_number(*config, "hfov", view.intrinsics.hfov) ||
        !read_number(*config, "camera_pitch", view.camera_pitch) ||
        !read_number(*config, "max_reach", view.max_reach)) {
        result.error = "malformed config";
        return result;
    }
    const auto frames = request.find("pose_frames");
    if (frames == request.end() || !frames->is_array()) {
        result.error = "missing pose_frames";
        return result;
    }
    view.frames.reserve(frames->size());
    for (const auto& frame : *frames) {
        int index = -1;
        if (!frame.is_object() || !read_int(frame, "index", index) ||
            index != static_cast<int>(view.frames.size())) {
            result.error = "pose_frames must be ordered by index";
            return result;
        }
        const auto entities = frame.find("entities");
        if (entities == frame.end() || !entities->is_array()) {
            result.error = "pose frame missing entities";
            return result;
        }
        std::vector<ViewEntity> list;
        list.reserve(entities->size());
        for (const auto& e : *entities) {
            ViewEntity entity;
            if (!entity_from_wire(e, entity)) {
                result.error = "malformed pose frame entity";
                return result;
            }
            list.push_back(std::move(entity));
        }
        view.frames.push_back(std::move(list));
    }
    const auto ego = request.find("ego");
    if (ego == request.end() || !ego->is_object()) {
        result.error = "missing ego";
        return result;
    }
    const auto ego_entities = ego->find("entities");
    if (ego_entities == ego->end() || !ego_entities->is_array()) {
        result.error = "ego missing entities";
        return result;
    }
    for (const auto& e : *ego_entities) {
        ViewEntity entity;
        if (!entity_from_wire(e, entity)) {
            result.error = "malformed ego entity";
            return result;
        }
        view.ego.push_back(std::move(entity));
    }

    result.ok = true;
    return result;
}

WireResponse parse_decision_response(const std::string& body) {
    WireResponse out;
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        out.error = "response body is not a JSON object";
        return out;
    }
    if (!read_string(j, "raw_text", out.raw_text)) {
        out.error = "response missing raw_text string";
        return out;
    }
    out.ok = true;
    return out;
}

}  // namespace owmm
