#include "foundry/agents/prompts.h"

#include "foundry/core/error.h"
#include "foundry/core/serialize.h"
#include "foundry/core/text.h"

namespace foundry::agents {
namespace {

const char* const kSotifFrame =
    "You are annotating images for a perception SOTIF (Safety of the Intended Functionality) dataset. "
    "Focus on conditions that degrade the perception of a driver or an automated driving system: adverse "
    "weather, challenging lighting, and unusual object appearance or behaviour.";

std::map<std::string, PromptTemplate> builtin() {
  std::map<std::string, PromptTemplate> t;
  t["caption"] = {
      std::string(kSotifFrame),
      "Write one caption of about 18 to 20 words for the attached driving image. Describe the scene and the "
      "perception-related risk it shows (for example reduced visibility, glare, occlusion). Return only the caption."};
  t["question"] = {
      std::string(kSotifFrame),
      "Caption: {{caption}}\nDetections: {{detections}}\n"
      "Write exactly {{count}} natural, human-like questions about the attached image following this plan, in order: "
      "{{plan}}\nClosed-ended question templates by type: uncertainty: 'What is the uncertainty level (low, medium, "
      "high) of the (object)?'; existence: 'Does an object of class (class) exist?'; type: 'What is the type of "
      "(object) at the bottom left?'; counting: 'How many (objects) are there?'; key_object: 'Is this (object) a key "
      "object?'. Open-ended questions must ask to identify or explain a SOTIF risk, or to recommend an action that "
      "prevents it. For each question give its difficulty (easy, medium, hard) and expected answer type (analysis, "
      "yes_no_multiple_choice, recommendation, count, identification)."};
  t["answer"] = {
      std::string(kSotifFrame),
      "Question: {{question}}\nQuestion kind: {{answer_mode}} {{closed_type}}\n"
      "Give {{count}} independent answers to the question for the attached image, as {{count}} different "
      "annotators would. Closed-ended questions need short answers (yes/no, a number, a category). For each answer "
      "give your confidence (yes, maybe, no) and the answer type."};
  t["validate_caption"] = {
      "You validate dataset annotations. " + std::string(kSotifFrame),
      "Caption: {{caption}}\nIs this caption related to the attached image and to its perception SOTIF context? "
      "Answer pass=true only if both hold, otherwise give the reason."};
  t["validate_question"] = {
      "You validate dataset annotations. " + std::string(kSotifFrame),
      "Caption: {{caption}}\nQuestions:\n{{questions}}\nAre all questions related to the attached image and to its "
      "perception SOTIF context? Answer pass=true only if every question qualifies, otherwise give the reason."};
  t["validate_answer"] = {
      "You validate dataset annotations. " + std::string(kSotifFrame),
      "Question: {{question}}\nAnswers:\n{{answers}}\nAre these answers correct for the attached image and the "
      "question? Answer pass=true only if they are, otherwise give the reason."};
  t["probe"] = {std::string(kSotifFrame),
                "Question: {{question}}\nAnswer the question about the attached image with a single short answer."};
  t["judge"] = {
      "You are an impartial judge scoring answers to questions about driving images.",
      "Question: {{question}}\nReference answer: {{reference}}\nModel response: {{response}}\n"
      "Using the attached image, score the model response from 1 to 5 on each criterion: relevance, "
      "trustworthiness, clarity, coherence. Return integers only."};
  return t;
}

}  // namespace

PromptLibrary PromptLibrary::defaults() {
  PromptLibrary lib;
  lib.templates_ = builtin();
  return lib;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
  PromptLibrary lib = defaults();
  if (!std::filesystem::is_directory(dir)) return lib;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    lib.templates_[entry.path().stem().string()] = parse_prompt_file(read_text_file(entry.path()));
  }
  return lib;
}

const PromptTemplate& PromptLibrary::get(const std::string& role) const {
  auto it = templates_.find(role);
  if (it == templates_.end()) throw Error(ErrorCode::config_invalid, "no prompt template for role '" + role + "'");
  return it->second;
}

PromptTemplate parse_prompt_file(const std::string& text) {
  const auto sys = text.find("[system]");
  const auto usr = text.find("[user]");
  if (sys == std::string::npos || usr == std::string::npos || usr < sys)
    throw Error(ErrorCode::config_invalid, "prompt file needs [system] then [user] sections");
  PromptTemplate t;
  t.system = trim(text.substr(sys + 8, usr - sys - 8));
  t.user = trim(text.substr(usr + 6));
  return t;
}

std::string format_prompt_file(const PromptTemplate& tmpl) {
  return "[system]\n" + tmpl.system + "\n\n[user]\n" + tmpl.user + "\n";
}

std::string render(const std::string& tmpl, const nlohmann::json& context) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string::npos) break;
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string::npos) break;
    out.append(tmpl, pos, open - pos);
    const std::string key = trim(tmpl.substr(open + 2, close - open - 2));
    if (auto it = context.find(key); it != context.end() && !it->is_null())
      out += it->is_string() ? it->get<std::string>() : it->dump();
    pos = close + 2;
  }
  out.append(tmpl, pos);
  return out;
}

}  // namespace foundry::agents
