#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kwt/types.hpp"

namespace kwt {

// One few-shot demonstration block: "Question: {q}\nAnswer: {r}\n\n".
std::string render_demo_block(const std::string& question, const std::string& response);

// Few-shot estimation prompt: the demonstration blocks in order, then the
// probe block "Question: {q}\nAnswer:". Demonstrations never carry knowledge
// paragraphs or <IDK>. A demo sharing the probe's id is rejected.
std::string build_probe_prompt(const QaInstance& instance, const std::vector<QaInstance>& demos);

// Training/evaluation prompt: "Question: {q}\nAnswer:", with a
// "Knowledge: {k}\n" line before the question when requested and present.
std::string render_task_prompt(const QaInstance& instance, bool include_knowledge);

// Answer-equivalence judge prompt. Blocks are separated by blank lines; the
// Knowledge block appears only when a knowledge paragraph is supplied.
std::string render_judge_prompt(const std::string& question,
                                const std::optional<std::string>& knowledge,
                                const std::string& gold, const std::string& candidate);

// Parsed judge prompt, used by the mock server's stand-in judge.
struct JudgeRequest {
  std::string question;
  std::optional<std::string> knowledge;
  std::string answer1;
  std::string answer2;
};

// Recognizes a judge prompt by its equivalence question and recovers the
// blocks; returns nullopt for non-judge prompts.
std::optional<JudgeRequest> parse_judge_prompt(const std::string& prompt);

// Recovers the question of the final "Question:" block of a probe or task
// prompt; returns nullopt when no such block exists.
std::optional<std::string> extract_final_question(const std::string& prompt);

}  // namespace kwt
