#include "hed/prompting.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "hed/errors.hpp"
#include "hed/jsonl.hpp"

namespace hed {
namespace {

bool token_char(unsigned char c) {
  // Multibyte UTF-8 continuation/lead bytes count as word characters so
  // non-ASCII words stay whole.
  return std::isalnum(c) || c >= 0x80;
}

std::map<std::string, std::size_t> term_frequencies(std::string_view text) {
  std::map<std::string, std::size_t> tf;
  std::string token;
  for (unsigned char c : text) {
    if (token_char(c)) {
      token.push_back(static_cast<char>(std::tolower(c)));
    } else if (!token.empty()) {
      ++tf[token];
      token.clear();
    }
  }
  if (!token.empty()) ++tf[token];
  return tf;
}

// Single-line prompt inputs: contexts may carry newlines from block joins.
std::string flatten(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  }
  return out;
}

std::string json_quote(std::string_view s) {
  return nlohmann::json(std::string(s)).dump();
}

void replace_placeholder(std::string& text, std::string_view placeholder,
                         std::string_view value) {
  const auto pos = text.find(placeholder);
  if (pos == std::string::npos) {
    throw ConfigError("template is missing placeholder " + std::string(placeholder));
  }
  text.replace(pos, placeholder.size(), value);
}

std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string example_block(PromptTask task, std::size_t n, const ContextRecord& ex) {
  for (const auto& m : ex.mentions) {
    if (!m.label) throw SchemaError("example record '" + ex.id + "' lacks gold labels");
  }
  std::ostringstream out;
  out << "# Example " << n << ":\n";
  out << "Input: " << flatten(ex.context) << '\n';
  if (task == PromptTask::ClassifyOnly) {
    // CL examples classify the record's first mention.
    const Mention& m = ex.mentions.front();
    out << "URL: " << m.url << '\n';
    out << "Output: [{\"URL\": " << json_quote(m.url) << ", \"label\": "
        << json_quote(prompt_label(*m.label)) << "}]";
  } else {
    out << "Output: " << example_output_json(ex);
  }
  return out.str();
}

}  // namespace

std::string_view task_name(PromptTask t) {
  return t == PromptTask::ExtractClassify ? "e+cl" : "cl";
}

std::string_view mode_name(ExampleMode m) {
  switch (m) {
    case ExampleMode::Static: return "static";
    case ExampleMode::Dynamic: return "dynamic";
    case ExampleMode::ZeroShot: return "zero";
  }
  return "static";
}

PromptTask parse_task(std::string_view s) {
  if (s == "e+cl" || s == "e&cl" || s == "extract") return PromptTask::ExtractClassify;
  if (s == "cl" || s == "classify") return PromptTask::ClassifyOnly;
  throw ConfigError("unknown task '" + std::string(s) + "' (expected e+cl or cl)");
}

ExampleMode parse_mode(std::string_view s) {
  if (s == "static") return ExampleMode::Static;
  if (s == "dynamic") return ExampleMode::Dynamic;
  if (s == "zero" || s == "zero-shot" || s == "zsl") return ExampleMode::ZeroShot;
  throw ConfigError("unknown mode '" + std::string(s) + "' (expected static, dynamic or zero)");
}

double similarity(std::string_view a, std::string_view b) {
  const auto ta = term_frequencies(a);
  const auto tb = term_frequencies(b);
  if (ta.empty() || tb.empty()) return 0.0;
  double dot = 0.0;
  for (const auto& [token, count] : ta) {
    auto it = tb.find(token);
    if (it != tb.end()) dot += static_cast<double>(count) * static_cast<double>(it->second);
  }
  double na = 0.0;
  double nb = 0.0;
  for (const auto& [_, c] : ta) na += static_cast<double>(c) * static_cast<double>(c);
  for (const auto& [_, c] : tb) nb += static_cast<double>(c) * static_cast<double>(c);
  // sqrt of the product keeps identical multisets at exactly 1.0
  const double score = dot / std::sqrt(na * nb);
  return std::clamp(score, 0.0, 1.0);
}

std::vector<const ContextRecord*> select_dynamic_examples(const ContextRecord& target,
                                                          const Corpus& pool,
                                                          std::size_t k) {
  struct Scored {
    double score;
    const ContextRecord* rec;
  };
  std::vector<Scored> candidates;
  for (const auto& rec : pool.records) {
    if (rec.id == target.id) continue;
    if (!rec.repo.empty() && rec.repo == target.repo) continue;
    candidates.push_back({similarity(target.context, rec.context), &rec});
  }
  if (candidates.size() < k) {
    throw ConfigError("example pool too small: need " + std::to_string(k) +
                      " candidates for record '" + target.id + "', have " +
                      std::to_string(candidates.size()));
  }
  std::sort(candidates.begin(), candidates.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.rec->id < b.rec->id;
  });
  std::vector<const ContextRecord*> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(candidates[i].rec);
  return out;
}

std::vector<const ContextRecord*> select_static_examples(const Corpus& pool,
                                                         std::span<const std::string> ids) {
  std::vector<const ContextRecord*> out;
  for (const auto& id : ids) {
    const ContextRecord* rec = pool.find(id);
    if (!rec) throw ConfigError("static example id '" + id + "' not found in pool");
    if (std::find(out.begin(), out.end(), rec) != out.end()) {
      throw ConfigError("static example id '" + id + "' listed twice");
    }
    out.push_back(rec);
  }
  return out;
}

std::vector<const ContextRecord*> select_examples(const ContextRecord& target,
                                                  const Corpus& pool, std::size_t k,
                                                  ExampleMode mode,
                                                  std::span<const std::string> static_ids) {
  switch (mode) {
    case ExampleMode::ZeroShot: return {};
    case ExampleMode::Static: return select_static_examples(pool, static_ids);
    case ExampleMode::Dynamic: return select_dynamic_examples(target, pool, k);
  }
  return {};
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  PromptTemplates t;
  t.extract_classify = jsonl::read_text_file(dir / "e_cl.txt");
  t.classify_only = jsonl::read_text_file(dir / "cl.txt");
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(
                    fnv1a64(t.classify_only, fnv1a64(t.extract_classify))));
  t.version = buf;
  return t;
}

std::string example_output_json(const ContextRecord& example) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < example.mentions.size(); ++i) {
    const Mention& m = example.mentions[i];
    if (!m.label) throw SchemaError("example record '" + example.id + "' lacks gold labels");
    if (i > 0) out << ',';
    out << "{\"URL\": " << json_quote(m.url) << ", \"label\": "
        << json_quote(prompt_label(*m.label)) << '}';
  }
  out << ']';
  return out.str();
}

RenderedPrompt render_prompt(const PromptTemplates& templates, PromptTask task,
                             std::span<const ContextRecord* const> examples,
                             const ContextRecord& target,
                             const std::optional<std::string>& target_url) {
  if (examples.size() != 4 && !examples.empty()) {
    throw ConfigError("prompts take exactly 4 examples (or 0 in zero-shot mode), got " +
                      std::to_string(examples.size()));
  }
  for (const auto* ex : examples) {
    if (ex->id == target.id) {
      throw ConfigError("target record '" + target.id + "' appears among its own examples");
    }
  }
  if (task == PromptTask::ClassifyOnly) {
    if (!target_url) throw ConfigError("ClassifyOnly prompt needs a target URL");
    if (target.context.find(*target_url) == std::string::npos) {
      throw ConfigError("target URL '" + *target_url + "' does not occur in context of '" +
                        target.id + "'");
    }
  }

  std::ostringstream blocks;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (i > 0) blocks << "\n\n";
    blocks << example_block(task, i + 1, *examples[i]);
  }

  std::string text = task == PromptTask::ExtractClassify ? templates.extract_classify
                                                         : templates.classify_only;
  if (examples.empty()) {
    // zero-shot: drop the examples heading along with the empty block
    const std::string_view section = "\n\n# Examples:\n{{{ EXAMPLES }}}";
    if (const auto pos = text.find(section); pos != std::string::npos) {
      text.erase(pos, section.size());
    } else {
      replace_placeholder(text, "{{{ EXAMPLES }}}", "");
    }
  } else {
    replace_placeholder(text, "{{{ EXAMPLES }}}", blocks.str());
  }
  replace_placeholder(text, "{{{INSERT INPUT HERE}}}", flatten(target.context));
  if (task == PromptTask::ClassifyOnly) {
    replace_placeholder(text, "{{{INSERT URL HERE}}}", *target_url);
  }

  RenderedPrompt prompt;
  prompt.text = std::move(text);
  for (const auto* ex : examples) prompt.example_ids.push_back(ex->id);
  prompt.target_id = target.id;
  prompt.target_url = target_url;
  return prompt;
}

}  // namespace hed
