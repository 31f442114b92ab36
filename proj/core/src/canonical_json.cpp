#include "owmm/canonical_json.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace owmm {

namespace {

void escape_string(const std::string& s, std::string& out) {
    out.push_back('"');
    for (const char c : s) {
        const auto uc = static_cast<unsigned char>(c);
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (uc < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", uc);
                    out += buf;
                } else {
                    out.push_back(c);  // UTF-8 bytes pass through
                }
        }
    }
    out.push_back('"');
}

void format_double(double v, std::string& out) {
    if (!std::isfinite(v)) {
        throw std::runtime_error("canonical_dump: non-finite number");
    }
    if (v == 0.0) {
        out.push_back('0');  // collapses -0.0 as well
        return;
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                   std::chars_format::general, 9);
    out.append(buf, res.ptr);
}

void dump_rec(const json& j, std::string& out) {
    switch (j.type()) {
        case json::value_t::null: out += "null"; break;
        case json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; break;
        case json::value_t::number_integer:
            out += std::to_string(j.get<int64_t>());
            break;
        case json::value_t::number_unsigned:
            out += std::to_string(j.get<uint64_t>());
            break;
        case json::value_t::number_float:
            format_double(j.get<double>(), out);
            break;
        case json::value_t::string: escape_string(j.get<std::string>(), out); break;
        case json::value_t::array: {
            out.push_back('[');
            bool first = true;
            for (const auto& el : j) {
                if (!first) out.push_back(',');
                first = false;
                dump_rec(el, out);
            }
            out.push_back(']');
            break;
        }
        case json::value_t::object: {
            // nlohmann::json stores object members in a std::map, so this
            // iteration is already in lexicographic key order.
            out.push_back('{');
            bool first = true;
            for (auto it = j.cbegin(); it != j.cend(); ++it) {
                if (!first) out.push_back(',');
                first = false;
                escape_string(it.key(), out);
                out.push_back(':');
                dump_rec(it.value(), out);
            }
            out.push_back('}');
            break;
        }
        default:
            throw std::runtime_error("canonical_dump: unsupported JSON value type");
    }
}

}  // namespace

std::string canonical_dump(const json& j) {
    std::string out;
    out.reserve(256);
    dump_rec(j, out);
    return out;
}

std::string canonical_line(const json& j) {
    std::string s = canonical_dump(j);
    s.push_back('\n');
    return s;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json parse_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        throw std::runtime_error("invalid JSON in " + path.string());
    }
    return j;
}

}  // namespace owmm
