#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

namespace foundry::agents {

struct PromptTemplate {
  std::string system;
  std::string user;
};

/// Prompt templates keyed by role: caption, question, answer,
/// validate_caption, validate_question, validate_answer, probe, judge.
/// Files use a "[system]" section followed by a "[user]" section;
/// placeholders are written {{name}} and filled from a JSON object.
class PromptLibrary {
 public:
  /// Built-in templates (identical to the shipped prompts/ directory).
  static PromptLibrary defaults();
  /// Defaults overlaid with every <role>.txt found in `dir`.
  static PromptLibrary load(const std::filesystem::path& dir);

  const PromptTemplate& get(const std::string& role) const;
  void set(const std::string& role, PromptTemplate tmpl) { templates_[role] = std::move(tmpl); }
  const std::map<std::string, PromptTemplate>& all() const { return templates_; }

 private:
  std::map<std::string, PromptTemplate> templates_;
};

PromptTemplate parse_prompt_file(const std::string& text);
std::string format_prompt_file(const PromptTemplate& tmpl);

/// Replaces {{key}} with context[key] (strings verbatim, other values as
/// JSON). Unknown keys render as empty.
std::string render(const std::string& tmpl, const nlohmann::json& context);

}  // namespace foundry::agents
