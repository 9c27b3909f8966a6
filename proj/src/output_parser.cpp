#include "hed/output_parser.hpp"

#include <algorithm>
#include <cctype>
#include <initializer_list>
#include <unordered_set>

#include "hed/errors.hpp"
#include "hed/jsonl.hpp"

namespace hed {
namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool has_structural_char(std::string_view s) {
  return s.find_first_of("[]{}") != std::string_view::npos;
}

json try_parse(std::string_view s) {
  return json::parse(s, nullptr, /*allow_exceptions=*/false);
}

// `,` immediately before a closing bracket/brace (modulo whitespace) is a
// trailing comma; JSON forbids it but models emit it routinely.
std::string remove_trailing_commas(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      out.push_back(c);
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
      out.push_back(c);
      continue;
    }
    if (c == ',') {
      std::size_t k = i + 1;
      while (k < s.size() && std::isspace(static_cast<unsigned char>(s[k]))) ++k;
      if (k < s.size() && (s[k] == ']' || s[k] == '}')) continue;  // drop comma
    }
    out.push_back(c);
  }
  return out;
}

// Byte position just past the bracket closing the opener at `open`, or npos
// when the structure never closes. String literals are skipped.
std::size_t find_matching_close(std::string_view s, std::size_t open) {
  std::vector<char> stack;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    switch (c) {
      case '"': in_string = true; break;
      case '[': stack.push_back(']'); break;
      case '{': stack.push_back('}'); break;
      case ']':
      case '}':
        if (stack.empty() || stack.back() != c) return std::string_view::npos;
        stack.pop_back();
        if (stack.empty()) return i + 1;
        break;
      default: break;
    }
  }
  return std::string_view::npos;
}

// Complete `{...}` slices at brace depth zero, in order. A trailing
// unclosed object is dropped; slices that fail to parse are skipped.
std::vector<json> scan_complete_objects(const std::string& s) {
  std::vector<json> objects;
  std::size_t i = 0;
  bool in_string = false;
  bool escaped = false;
  while (i < s.size()) {
    const char c = s[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      ++i;
      continue;
    }
    if (c == '"') {
      in_string = true;
      ++i;
      continue;
    }
    if (c == '{') {
      const std::size_t close = find_matching_close(s, i);
      if (close == std::string_view::npos) break;  // truncated final object
      json j = try_parse(remove_trailing_commas(s.substr(i, close - i)));
      if (j.is_object()) objects.push_back(std::move(j));
      i = close;
      continue;
    }
    ++i;
  }
  return objects;
}

std::string dump_as_array(json j) {
  if (j.is_object()) {
    json arr = json::array();
    arr.push_back(std::move(j));
    return arr.dump();
  }
  return j.dump();
}

std::optional<std::string> json_string_field(const json& obj,
                                             std::initializer_list<const char*> aliases) {
  for (const char* key : aliases) {
    if (obj.contains(key) && obj.at(key).is_string()) {
      return obj.at(key).get<std::string>();
    }
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(ParseFailReason r) {
  switch (r) {
    case ParseFailReason::NoJsonFound: return "no_json_found";
    case ParseFailReason::UnrecoverableSyntax: return "unrecoverable_syntax";
    case ParseFailReason::EmptyAfterRepair: return "empty_after_repair";
  }
  return "unrecoverable_syntax";
}

ParseOutcome ParseOutcome::ok(std::vector<Prediction> preds) {
  ParseOutcome o;
  o.parsed = true;
  o.predictions = std::move(preds);
  return o;
}

ParseOutcome ParseOutcome::fail(ParseFailReason r) {
  ParseOutcome o;
  o.parsed = false;
  o.reason = r;
  return o;
}

std::string ParseOutcome::status() const {
  return parsed ? "parsed" : std::string(to_string(reason));
}

PreambleRules PreambleRules::load(const std::filesystem::path& path) {
  const std::string text = jsonl::read_text_file(path);
  json j = try_parse(text);
  if (j.is_discarded()) throw SchemaError("preamble rules file is not valid JSON: " + path.string());
  return from_json(j);
}

PreambleRules PreambleRules::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("rules") || !j.at("rules").is_array()) {
    throw SchemaError("preamble rules: expected object with a 'rules' array");
  }
  PreambleRules rules;
  for (const auto& rj : j.at("rules")) {
    Rule rule;
    rule.name = rj.value("name", std::string("unnamed"));
    const std::string pattern = rj.value("pattern", std::string());
    if (pattern.empty()) throw SchemaError("preamble rule '" + rule.name + "': empty pattern");
    try {
      rule.pattern = std::regex(pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw SchemaError("preamble rule '" + rule.name + "': bad pattern: " + e.what());
    }
    rule.replacement = rj.value("replacement", std::string());
    rules.rules_.push_back(std::move(rule));
  }
  return rules;
}

std::string PreambleRules::apply(const std::string& raw) const {
  std::string s = raw;
  for (const auto& rule : rules_) {
    s = std::regex_replace(s, rule.pattern, rule.replacement);
  }
  return s;
}

std::string strip_preamble(const std::string& raw, const PreambleRules& rules) {
  return rules.apply(raw);
}

ConsolidateOutcome consolidate_json(const std::string& input) {
  const std::string s = trim(input);
  if (!has_structural_char(s)) {
    return ConsolidateOutcome{std::nullopt, ParseFailReason::NoJsonFound};
  }

  // 1. Valid as-is: array passes through, a single object is wrapped.
  {
    json j = try_parse(s);
    if (j.is_array() || j.is_object()) return ConsolidateOutcome{dump_as_array(std::move(j)), {}};
  }

  // 2. Trailing commas removed, then retry.
  {
    json j = try_parse(remove_trailing_commas(s));
    if (j.is_array() || j.is_object()) return ConsolidateOutcome{dump_as_array(std::move(j)), {}};
  }

  // 3. Slice out a balanced [...] region, discarding surrounding prose.
  {
    int attempts = 0;
    for (std::size_t pos = s.find('['); pos != std::string::npos && attempts < 16;
         pos = s.find('[', pos + 1), ++attempts) {
      const std::size_t close = find_matching_close(s, pos);
      if (close == std::string_view::npos) continue;
      json j = try_parse(remove_trailing_commas(s.substr(pos, close - pos)));
      if (j.is_array()) return ConsolidateOutcome{j.dump(), {}};
    }
  }

  // 4. Collect complete objects wherever they sit: newline-separated
  //    enumerations, comma-joined fragments, truncated arrays.
  {
    std::vector<json> objects = scan_complete_objects(s);
    if (!objects.empty()) {
      json arr = json::array();
      for (auto& o : objects) arr.push_back(std::move(o));
      return ConsolidateOutcome{arr.dump(), {}};
    }
  }

  return ConsolidateOutcome{std::nullopt, ParseFailReason::UnrecoverableSyntax};
}

ParseOutcome parse_predictions(const std::string& raw, const PreambleRules& rules) {
  const std::string stripped = strip_preamble(raw, rules);
  const ConsolidateOutcome consolidated = consolidate_json(stripped);
  if (!consolidated.array_json) return ParseOutcome::fail(consolidated.fail);

  const json arr = try_parse(*consolidated.array_json);
  const bool asserted_empty = arr.is_array() && arr.empty();

  std::vector<Prediction> preds;
  std::unordered_set<std::string> seen;
  for (const auto& element : arr) {
    if (!element.is_object()) continue;
    const auto url = json_string_field(element, {"URL", "url", "link"});
    if (!url || url->empty()) continue;  // objects without a URL are dropped
    Prediction p;
    p.url = *url;
    p.raw_label = json_string_field(element, {"label", "class", "type"});
    if (p.raw_label) p.label = normalize_label(*p.raw_label);
    const std::string key =
        p.url + '\x1f' +
        (p.label ? std::string(canonical_name(*p.label)) : p.raw_label.value_or(""));
    if (!seen.insert(key).second) continue;  // first occurrence wins
    preds.push_back(std::move(p));
  }

  if (preds.empty() && !asserted_empty) {
    return ParseOutcome::fail(ParseFailReason::EmptyAfterRepair);
  }
  return ParseOutcome::ok(std::move(preds));
}

double parse_ratio(std::span<const ParseOutcome> outcomes) {
  if (outcomes.empty()) throw SchemaError("parse_ratio: empty outcome list");
  std::size_t parsed = 0;
  for (const auto& o : outcomes) {
    if (o.parsed) ++parsed;
  }
  return static_cast<double>(parsed) / static_cast<double>(outcomes.size());
}

std::string predictions_to_array_json(std::span<const Prediction> preds) {
  std::string out = "[";
  bool first = true;
  for (const auto& p : preds) {
    if (!first) out += ',';
    first = false;
    out += "{\"URL\": " + json(p.url).dump();
    if (p.label) {
      out += ", \"label\": " + json(std::string(prompt_label(*p.label))).dump();
    } else if (p.raw_label) {
      out += ", \"label\": " + json(*p.raw_label).dump();
    }
    out += '}';
  }
  out += ']';
  return out;
}

}  // namespace hed
