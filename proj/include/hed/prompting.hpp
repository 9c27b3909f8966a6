#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hed/corpus.hpp"

namespace hed {

enum class PromptTask {
  ExtractClassify,  // model extracts URLs from context and classifies each
  ClassifyOnly,     // model is handed one URL plus context, classifies it
};

enum class ExampleMode { Static, Dynamic, ZeroShot };

std::string_view task_name(PromptTask t);    // "e+cl" | "cl"
std::string_view mode_name(ExampleMode m);   // "static" | "dynamic" | "zero"
PromptTask parse_task(std::string_view s);
ExampleMode parse_mode(std::string_view s);

struct RenderedPrompt {
  std::string text;
  std::vector<std::string> example_ids;
  std::string target_id;
  std::optional<std::string> target_url;  // set for ClassifyOnly
};

// Cosine similarity over term-frequency vectors of casefolded alphanumeric
// tokens. Symmetric; 1.0 for identical token multisets; 0.0 when the
// vocabularies are disjoint or either text has no tokens.
double similarity(std::string_view a, std::string_view b);

// Top-k pool records by descending similarity to the target context, ties
// broken by record id ascending. The target and anything sharing its repo
// are never candidates. Throws when fewer than k candidates remain.
std::vector<const ContextRecord*> select_dynamic_examples(const ContextRecord& target,
                                                          const Corpus& pool,
                                                          std::size_t k);

// The configured records in configured order. Ids must be distinct and
// present in the pool.
std::vector<const ContextRecord*> select_static_examples(const Corpus& pool,
                                                         std::span<const std::string> ids);

std::vector<const ContextRecord*> select_examples(const ContextRecord& target,
                                                  const Corpus& pool, std::size_t k,
                                                  ExampleMode mode,
                                                  std::span<const std::string> static_ids);

// Prompt template files with {{{ ... }}} placeholders. e_cl.txt needs
// EXAMPLES and INSERT INPUT HERE; cl.txt additionally INSERT URL HERE.
struct PromptTemplates {
  std::string extract_classify;
  std::string classify_only;
  std::string version;  // stable hash over both files

  static PromptTemplates load(const std::filesystem::path& dir);
};

// The gold mentions of one example serialized the way prompts show model
// output: [{"URL": "...", "label": "dataset_landing_page"}, ...] with the
// lowercase underscore label spelling.
std::string example_output_json(const ContextRecord& example);

// Fills the task's template. Examples must number exactly 4, or 0 for the
// zero-shot degenerate mode. ClassifyOnly requires target_url and that it
// occurs in the target context. The target may never be one of its own
// examples.
RenderedPrompt render_prompt(const PromptTemplates& templates, PromptTask task,
                             std::span<const ContextRecord* const> examples,
                             const ContextRecord& target,
                             const std::optional<std::string>& target_url = std::nullopt);

}  // namespace hed
