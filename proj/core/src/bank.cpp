#include "owmm/bank.hpp"

#include <stdexcept>

namespace owmm::embedded {
extern const char* const kLabelBankJson;
extern const char* const kTemplateBankJson;
}  // namespace owmm::embedded

namespace owmm {

LabelBank LabelBank::from_json(const json& j) {
  LabelBank bank;
  bank.receptacles = j.at("receptacles").get<std::vector<std::string>>();
  bank.objects = j.at("objects").get<std::vector<std::string>>();
  if (bank.receptacles.empty() || bank.objects.empty()) {
    throw std::runtime_error("label bank must contain receptacle and object names");
  }
  return bank;
}

TemplateBank TemplateBank::from_json(const json& j) {
  TemplateBank bank;
  bank.question = j.at("question").get<std::string>();
  for (const auto& [key, value] : j.at("summarization").items()) {
    bank.summarization[key] = value.get<std::vector<std::string>>();
  }
  for (const auto& [key, value] : j.at("reasoning").items()) {
    bank.reasoning[key] = value.get<std::vector<std::string>>();
  }
  for (const char* key : {"start", "approach_object", "picked", "approach_goal", "placed"}) {
    if (!bank.summarization.count(key) || bank.summarization.at(key).empty()) {
      throw std::runtime_error(std::string("template bank missing summarization bank: ") + key);
    }
  }
  for (const char* key :
       {"search_object", "nav_object", "pick", "search_goal", "nav_goal", "place"}) {
    if (!bank.reasoning.count(key) || bank.reasoning.at(key).empty()) {
      throw std::runtime_error(std::string("template bank missing reasoning bank: ") + key);
    }
  }
  return bank;
}

const LabelBank& default_label_bank() {
  static const LabelBank bank = LabelBank::from_json(json::parse(embedded::kLabelBankJson));
  return bank;
}

const TemplateBank& default_template_bank() {
  static const TemplateBank bank =
      TemplateBank::from_json(json::parse(embedded::kTemplateBankJson));
  return bank;
}

LabelBank load_label_bank(const std::filesystem::path& path) {
  return LabelBank::from_json(parse_json_file(path));
}

TemplateBank load_template_bank(const std::filesystem::path& path) {
  return TemplateBank::from_json(parse_json_file(path));
}

bool instantiate_template(const std::string& tmpl,
                          const std::map<std::string, std::string>& slots, std::string& out) {
  std::string result;
  result.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      std::size_t close = tmpl.find('}', i + 1);
      if (close == std::string::npos) return false;
      std::string key = tmpl.substr(i + 1, close - i - 1);
      auto it = slots.find(key);
      if (it == slots.end() || it->second.empty()) return false;
      result += it->second;
      i = close + 1;
    } else {
      result += tmpl[i];
      ++i;
    }
  }
  out = std::move(result);
  return true;
}

const std::string& pick_phrase(const std::vector<std::string>& bank, std::uint64_t hash) {
  if (bank.empty()) throw std::runtime_error("pick_phrase: empty bank");
  return bank[hash % bank.size()];
}

}  // namespace owmm
