#include "kwt/prompt.hpp"

#include "kwt/errors.hpp"

namespace kwt {

namespace {

const std::string kEquivalenceSuffix =
    "\n\nAre Answer1 and Answer2 semantically equivalent?\n\nAnswer only 'yes' or 'no':";

// Finds the last occurrence of marker that starts a line.
std::size_t rfind_line_start(const std::string& text, const std::string& marker,
                             std::size_t before) {
  std::size_t pos = text.rfind(marker, before);
  while (pos != std::string::npos && pos != 0 && text[pos - 1] != '\n') {
    pos = text.rfind(marker, pos - 1);
  }
  return pos;
}

}  // namespace

std::string render_demo_block(const std::string& question, const std::string& response) {
  return "Question: " + question + "\nAnswer: " + response + "\n\n";
}

std::string build_probe_prompt(const QaInstance& instance, const std::vector<QaInstance>& demos) {
  std::string prompt;
  for (const auto& demo : demos) {
    if (demo.id == instance.id) {
      throw ValidationError("probe prompt for '" + instance.id +
                            "' would include itself as a demonstration");
    }
    prompt += render_demo_block(demo.question, demo.gold_response);
  }
  prompt += "Question: " + instance.question + "\nAnswer:";
  return prompt;
}

std::string render_task_prompt(const QaInstance& instance, bool include_knowledge) {
  std::string prompt;
  if (include_knowledge && instance.knowledge.has_value()) {
    prompt += "Knowledge: " + *instance.knowledge + "\n";
  }
  prompt += "Question: " + instance.question + "\nAnswer:";
  return prompt;
}

std::string render_judge_prompt(const std::string& question,
                                const std::optional<std::string>& knowledge,
                                const std::string& gold, const std::string& candidate) {
  std::string prompt = "Question: " + question;
  if (knowledge.has_value()) prompt += "\n\nKnowledge: " + *knowledge;
  prompt += "\n\nAnswer1: " + gold;
  prompt += "\n\nAnswer2: " + candidate;
  prompt += kEquivalenceSuffix;
  return prompt;
}

std::optional<JudgeRequest> parse_judge_prompt(const std::string& prompt) {
  if (prompt.size() <= kEquivalenceSuffix.size() ||
      prompt.compare(prompt.size() - kEquivalenceSuffix.size(), kEquivalenceSuffix.size(),
                     kEquivalenceSuffix) != 0) {
    return std::nullopt;
  }
  if (prompt.rfind("Question: ", 0) != 0) return std::nullopt;

  const std::size_t body_end = prompt.size() - kEquivalenceSuffix.size();
  const std::string a2_marker = "\n\nAnswer2: ";
  const std::string a1_marker = "\n\nAnswer1: ";
  const std::string k_marker = "\n\nKnowledge: ";

  std::size_t a2 = prompt.rfind(a2_marker, body_end);
  if (a2 == std::string::npos) return std::nullopt;
  std::size_t a1 = prompt.rfind(a1_marker, a2);
  if (a1 == std::string::npos) return std::nullopt;

  JudgeRequest req;
  req.answer2 = prompt.substr(a2 + a2_marker.size(), body_end - a2 - a2_marker.size());
  req.answer1 = prompt.substr(a1 + a1_marker.size(), a2 - a1 - a1_marker.size());

  std::size_t head_end = a1;
  std::size_t k = prompt.rfind(k_marker, a1);
  if (k != std::string::npos) {
    req.knowledge = prompt.substr(k + k_marker.size(), a1 - k - k_marker.size());
    head_end = k;
  }
  req.question = prompt.substr(std::string("Question: ").size(),
                               head_end - std::string("Question: ").size());
  return req;
}

std::optional<std::string> extract_final_question(const std::string& prompt) {
  const std::string q_marker = "Question: ";
  std::size_t q = rfind_line_start(prompt, q_marker, std::string::npos);
  if (q == std::string::npos) return std::nullopt;
  std::size_t start = q + q_marker.size();
  std::size_t end = prompt.find("\nAnswer:", start);
  if (end == std::string::npos) return std::nullopt;
  return prompt.substr(start, end - start);
}

}  // namespace kwt
