#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "owmm/canonical_json.hpp"

namespace owmm {

// Pools of human-readable names used when generating scenes and language data.
struct LabelBank {
  std::vector<std::string> receptacles;
  std::vector<std::string> objects;

  static LabelBank from_json(const json& j);
};

// Parameterised phrase banks for questions, reasoning and summarization text.
// Slot keys (e.g. {A}, {B}, {C}, {F}) are substituted via instantiate_template.
struct TemplateBank {
  std::string question;
  std::map<std::string, std::vector<std::string>> summarization;
  std::map<std::string, std::vector<std::string>> reasoning;

  static TemplateBank from_json(const json& j);
};

// Banks compiled into the library; always available.
const LabelBank& default_label_bank();
const TemplateBank& default_template_bank();

// Load replacements from disk (same JSON schema as the built-in data files).
LabelBank load_label_bank(const std::filesystem::path& path);
TemplateBank load_template_bank(const std::filesystem::path& path);

// Replaces every {key} placeholder in `tmpl` with slots.at(key).
// Returns false (leaving `out` unspecified) if a placeholder has no binding or
// the bound value is empty — callers treat that as a template hole and skip.
bool instantiate_template(const std::string& tmpl,
                          const std::map<std::string, std::string>& slots,
                          std::string& out);

// Deterministic phrase selection: bank[hash % bank.size()].
const std::string& pick_phrase(const std::vector<std::string>& bank, std::uint64_t hash);

}  // namespace owmm
