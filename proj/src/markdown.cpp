#include "hed/harvest.hpp"

#include <algorithm>
#include <cctype>
#include <deque>

#include "hed/errors.hpp"
#include "hed/utf8.hpp"

namespace hed {
namespace {

constexpr std::size_t npos = std::string_view::npos;

bool is_space(char c) { return c == ' ' || c == '\t'; }

bool is_blank_line(std::string_view line) {
  return line.find_first_not_of(" \t\r") == npos;
}

// Matches "http://" or "https://" at pos, case-insensitively.
std::size_t scheme_length(std::string_view text, std::size_t pos) {
  static constexpr std::string_view kHttp = "http://";
  static constexpr std::string_view kHttps = "https://";
  for (std::string_view scheme : {kHttps, kHttp}) {
    if (pos + scheme.size() > text.size()) continue;
    bool match = true;
    for (std::size_t i = 0; i < scheme.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(text[pos + i])) != scheme[i]) {
        match = false;
        break;
      }
    }
    if (match) return scheme.size();
  }
  return 0;
}

struct Fence {
  std::size_t begin;  // first byte of the opening fence line
  std::size_t end;    // one past the closing fence line (or text end)
};

// ``` / ~~~ fenced regions; blank lines inside them do not split blocks and
// their URLs are only harvested on request.
std::vector<Fence> find_fences(std::string_view text) {
  std::vector<Fence> fences;
  std::size_t line_start = 0;
  std::optional<std::pair<char, std::size_t>> open;  // fence char + run length
  std::size_t open_at = 0;
  while (line_start <= text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == npos) line_end = text.size();
    std::string_view line = text.substr(line_start, line_end - line_start);

    std::size_t indent = 0;
    while (indent < line.size() && indent < 3 && line[indent] == ' ') ++indent;
    std::size_t run = indent;
    const char c = run < line.size() ? line[run] : '\0';
    if (c == '`' || c == '~') {
      while (run < line.size() && line[run] == c) ++run;
    }
    const std::size_t run_len = run - indent;

    if (!open) {
      if (run_len >= 3 && (c == '`' || c == '~')) {
        open = {c, run_len};
        open_at = line_start;
      }
    } else if (run_len >= open->second && c == open->first &&
               line.find_first_not_of(" \t\r", run) == npos) {
      fences.push_back({open_at, std::min(line_end + 1, text.size())});
      open.reset();
    }

    if (line_end == text.size()) break;
    line_start = line_end + 1;
  }
  if (open) fences.push_back({open_at, text.size()});
  return fences;
}

bool in_ranges(const std::vector<Fence>& fences, std::size_t pos) {
  for (const auto& f : fences) {
    if (pos >= f.begin && pos < f.end) return true;
  }
  return false;
}

// Walks back from a ']' to its matching '['.
std::size_t matching_open_bracket(std::string_view text, std::size_t close) {
  int depth = 0;
  for (std::size_t i = close + 1; i-- > 0;) {
    if (text[i] == ']') {
      ++depth;
    } else if (text[i] == '[') {
      if (--depth == 0) return i;
    }
  }
  return npos;
}

bool is_url_stop(char c) {
  return is_space(c) || c == '\n' || c == '\r' || c == '<' || c == '>' || c == '"' ||
         c == '\'' || c == '`';
}

// True when the quote at qpos closes an attribute assignment like href=".
bool quote_is_attribute(std::string_view text, std::size_t qpos) {
  if (qpos == 0 || text[qpos - 1] != '=') return false;
  std::size_t i = qpos - 1;
  std::size_t letters = 0;
  while (i > 0) {
    const char c = text[i - 1];
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == ':') {
      ++letters;
      --i;
    } else {
      break;
    }
  }
  return letters > 0;
}

// True when everything on the line before pos is a "[label]:" definition.
bool line_is_reference_definition(std::string_view text, std::size_t pos) {
  std::size_t ls = text.rfind('\n', pos == 0 ? 0 : pos - 1);
  ls = ls == npos ? 0 : ls + 1;
  std::size_t i = ls;
  std::size_t indent = 0;
  while (i < pos && text[i] == ' ' && indent < 3) {
    ++i;
    ++indent;
  }
  if (i >= pos || text[i] != '[') return false;
  const std::size_t close = text.find(']', i);
  if (close == npos || close + 1 >= pos || text[close + 1] != ':') return false;
  return text.find_first_not_of(" \t", close + 2) == pos;
}

}  // namespace

std::string_view url_kind_name(UrlKind k) {
  switch (k) {
    case UrlKind::Bare: return "bare";
    case UrlKind::Inline: return "inline";
    case UrlKind::Autolink: return "autolink";
    case UrlKind::Reference: return "reference";
    case UrlKind::Image: return "image";
    case UrlKind::Html: return "html";
  }
  return "bare";
}

std::vector<UrlHit> extract_urls(std::string_view markdown, const ExtractConfig& cfg) {
  const std::vector<Fence> fences = find_fences(markdown);
  std::vector<UrlHit> hits;

  std::size_t pos = 0;
  while (pos < markdown.size()) {
    const std::size_t h = markdown.find_first_of("hH", pos);
    if (h == npos) break;
    const std::size_t scheme = scheme_length(markdown, h);
    if (scheme == 0) {
      pos = h + 1;
      continue;
    }
    if (!cfg.include_code_fences && in_ranges(fences, h)) {
      pos = h + scheme;
      continue;
    }

    const char prev = h > 0 ? markdown[h - 1] : '\0';
    std::size_t end = npos;
    UrlKind kind = UrlKind::Bare;
    bool emit = true;

    if (prev == '<') {
      // autolink: everything to the closing angle bracket
      std::size_t i = h;
      while (i < markdown.size() && !is_url_stop(markdown[i])) ++i;
      if (i < markdown.size() && markdown[i] == '>') {
        end = i;
        kind = UrlKind::Autolink;
      }
    } else if (prev == '(' && h >= 2 && markdown[h - 2] == ']') {
      // inline link destination: up to the balancing ')' or a title separator
      int depth = 1;
      std::size_t i = h;
      for (; i < markdown.size(); ++i) {
        const char c = markdown[i];
        if (is_space(c) || c == '\n' || c == '\r') break;
        if (c == '(') ++depth;
        if (c == ')' && --depth == 0) break;
      }
      if (i < markdown.size() && markdown[i] == ')') {
        end = i;
        const std::size_t open = matching_open_bracket(markdown, h - 2);
        kind = open != npos && open > 0 && markdown[open - 1] == '!' ? UrlKind::Image
                                                                     : UrlKind::Inline;
      } else if (i < markdown.size() && is_space(markdown[i])) {
        end = i;  // "(url \"title\")" form
        kind = UrlKind::Inline;
      }
    } else if ((prev == '"' || prev == '\'') && quote_is_attribute(markdown, h - 1)) {
      const std::size_t q = markdown.find(prev, h);
      if (q != npos && markdown.find('\n', h) > q) {
        end = q;
        kind = UrlKind::Html;
        emit = cfg.include_html;
      }
    }

    if (end == npos) {
      // bare token (also reference definitions, which look bare mid-line)
      std::size_t i = h;
      while (i < markdown.size() && !is_url_stop(markdown[i])) ++i;
      end = i;
      // sentence punctuation belongs to the prose, not the URL
      while (end > h + scheme) {
        const char last = markdown[end - 1];
        if (last == '.' || last == ',' || last == ';' || last == ':') {
          --end;
        } else if (last == ')') {
          const std::string_view token = markdown.substr(h, end - h);
          const auto opens = std::count(token.begin(), token.end(), '(');
          const auto closes = std::count(token.begin(), token.end(), ')');
          if (opens >= closes) break;
          --end;
        } else {
          break;
        }
      }
      kind = line_is_reference_definition(markdown, h) ? UrlKind::Reference : UrlKind::Bare;
    }

    if (end > h + scheme && emit) {
      hits.push_back({std::string(markdown.substr(h, end - h)), h, end, kind});
    }
    pos = std::max(end, h + scheme);
  }
  return hits;
}

namespace {

struct Block {
  std::size_t begin;
  std::size_t end;  // exclusive, includes no trailing newline
  bool fenced;
};

bool is_heading_line(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && i < 3 && line[i] == ' ') ++i;
  std::size_t hashes = 0;
  while (i < line.size() && line[i] == '#') {
    ++i;
    ++hashes;
  }
  return hashes >= 1 && hashes <= 6 && (i == line.size() || line[i] == ' ');
}

// Length of a list marker ("- ", "* ", "12. ") at the line start, 0 if none.
std::size_t list_marker_length(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && is_space(line[i])) ++i;
  const std::size_t content = i;
  if (content < line.size() && (line[content] == '-' || line[content] == '*' ||
                                line[content] == '+')) {
    if (content + 1 < line.size() && is_space(line[content + 1])) return content + 2;
    return 0;
  }
  std::size_t d = content;
  while (d < line.size() && std::isdigit(static_cast<unsigned char>(line[d]))) ++d;
  if (d > content && d < line.size() && (line[d] == '.' || line[d] == ')')) {
    if (d + 1 < line.size() && is_space(line[d + 1])) return d + 2;
  }
  return 0;
}

bool is_table_row(std::string_view line) {
  const std::size_t i = line.find_first_not_of(" \t");
  return i != npos && line[i] == '|';
}

std::vector<Block> segment_blocks(std::string_view text, const std::vector<Fence>& fences) {
  std::vector<Block> blocks;
  std::size_t line_start = 0;
  std::optional<Block> current;

  auto flush = [&] {
    if (current) {
      blocks.push_back(*current);
      current.reset();
    }
  };

  while (line_start < text.size()) {
    // a fence is one indivisible block regardless of its internal blank lines
    const Fence* fence = nullptr;
    for (const auto& f : fences) {
      if (f.begin == line_start) {
        fence = &f;
        break;
      }
    }
    if (fence) {
      flush();
      std::size_t end = fence->end;
      while (end > fence->begin && (text[end - 1] == '\n' || text[end - 1] == '\r')) --end;
      blocks.push_back({fence->begin, end, true});
      line_start = fence->end;
      continue;
    }

    std::size_t line_end = text.find('\n', line_start);
    if (line_end == npos) line_end = text.size();
    std::string_view line = text.substr(line_start, line_end - line_start);

    if (is_blank_line(line)) {
      flush();
    } else if (is_heading_line(line) || is_table_row(line)) {
      flush();
      blocks.push_back({line_start, line_end, false});
    } else if (list_marker_length(line) > 0) {
      flush();
      current = Block{line_start, line_end, false};
    } else if (current) {
      current->end = line_end;
    } else {
      current = Block{line_start, line_end, false};
    }
    line_start = line_end + 1;
  }
  flush();

  for (auto& b : blocks) {
    while (b.end > b.begin && (text[b.end - 1] == '\r' || text[b.end - 1] == ' ' ||
                               text[b.end - 1] == '\t')) {
      --b.end;
    }
  }
  return blocks;
}

struct Edit {
  std::size_t pos;
  std::size_t len;
  std::string repl;
};

// Prefix bytes to drop at a line start: blockquote markers, heading hashes,
// list markers, plus leading indentation.
std::size_t line_prefix_length(std::string_view text, std::size_t ls, std::size_t le,
                               bool first_line) {
  std::size_t i = ls;
  while (i < le && is_space(text[i])) ++i;
  while (i < le && text[i] == '>') {
    ++i;
    if (i < le && is_space(text[i])) ++i;
    while (i < le && is_space(text[i])) ++i;
  }
  std::string_view line = text.substr(i, le - i);
  std::size_t hashes = 0;
  while (hashes < line.size() && line[hashes] == '#') ++hashes;
  if (hashes >= 1 && hashes <= 6 && hashes < line.size() && line[hashes] == ' ') {
    i += hashes + 1;
  } else if (first_line) {
    i += list_marker_length(line);
  }
  while (i < le && is_space(text[i])) ++i;
  return i - ls;
}

struct Converted {
  std::string text;
  std::size_t begin = npos;
  std::size_t end = npos;
};

// Rewrites one block as plain text, keeping link targets inline. When a
// tracked byte span is given its position in the output is reported; edits
// never touch the tracked bytes themselves.
Converted convert_block(std::string_view text, const Block& block, std::size_t track_begin,
                        std::size_t track_end) {
  std::vector<Edit> edits;

  if (block.fenced) {
    // drop the fence delimiter lines, keep the body verbatim
    std::size_t first_nl = text.find('\n', block.begin);
    if (first_nl != npos && first_nl < block.end) {
      edits.push_back({block.begin, first_nl + 1 - block.begin, ""});
      std::size_t last_nl = text.rfind('\n', block.end - 1);
      if (last_nl != npos && last_nl > first_nl) {
        // closing fence line (absent when the fence runs to EOF unclosed)
        std::string_view last_line = text.substr(last_nl + 1, block.end - last_nl - 1);
        std::size_t j = last_line.find_first_not_of(" \t");
        if (j != npos && (last_line[j] == '`' || last_line[j] == '~')) {
          edits.push_back({last_nl, block.end - last_nl, ""});
        }
      }
    } else {
      edits.push_back({block.begin, block.end - block.begin, ""});
    }
  } else {
    // line prefixes and hard-wrap joins
    std::size_t ls = block.begin;
    bool first = true;
    while (ls < block.end) {
      std::size_t le = text.find('\n', ls);
      if (le == npos || le > block.end) le = block.end;
      const std::size_t plen = line_prefix_length(text, ls, le, first);
      if (plen > 0) edits.push_back({ls, plen, ""});
      if (le < block.end) edits.push_back({le, 1, " "});
      ls = le + 1;
      first = false;
    }

    // [text](url) -> text (url);  ![alt](url) -> alt (url)
    for (std::size_t q = block.begin; q + 1 < block.end; ++q) {
      if (text[q] != ']' || text[q + 1] != '(') continue;
      const std::size_t open = matching_open_bracket(text, q);
      if (open == npos || open < block.begin) continue;
      int depth = 1;
      std::size_t close = q + 2;
      for (; close < block.end; ++close) {
        if (text[close] == '(') ++depth;
        if (text[close] == ')' && --depth == 0) break;
      }
      if (close >= block.end) continue;
      const bool image = open > block.begin && text[open - 1] == '!';
      edits.push_back({image ? open - 1 : open, image ? 2u : 1u, ""});
      edits.push_back({q, 2, " ("});
    }

    // <http://…> -> http://…
    for (std::size_t lt = block.begin; lt < block.end; ++lt) {
      if (text[lt] != '<' || scheme_length(text, lt + 1) == 0) continue;
      std::size_t gt = lt + 1;
      while (gt < block.end && !is_url_stop(text[gt])) ++gt;
      if (gt < block.end && text[gt] == '>') {
        edits.push_back({lt, 1, ""});
        edits.push_back({gt, 1, ""});
      }
    }
  }

  std::sort(edits.begin(), edits.end(),
            [](const Edit& a, const Edit& b) { return a.pos < b.pos; });

  Converted out;
  std::size_t cur = block.begin;
  auto copy_upto = [&](std::size_t stop) {
    if (track_begin != npos && track_begin >= cur && track_begin < stop) {
      out.begin = out.text.size() + (track_begin - cur);
    }
    if (track_end != npos && track_end > cur && track_end <= stop) {
      out.end = out.text.size() + (track_end - cur);
    }
    out.text.append(text.substr(cur, stop - cur));
    cur = stop;
  };
  for (const auto& e : edits) {
    if (e.pos < cur) continue;  // swallowed by an earlier overlapping edit
    if (track_begin != npos && e.pos < track_end && e.pos + e.len > track_begin) continue;
    copy_upto(e.pos);
    out.text.append(e.repl);
    cur = e.pos + e.len;
  }
  copy_upto(block.end);

  while (!out.text.empty() &&
         (out.text.back() == ' ' || out.text.back() == '\t' || out.text.back() == '\n')) {
    out.text.pop_back();
  }
  return out;
}

}  // namespace

void ContextConfig::validate() const {
  if (min_context_chars == 0) throw ConfigError("min_context_chars must be positive");
}

BuiltContext build_context(std::string_view markdown, const UrlHit& hit,
                           const ContextConfig& cfg) {
  cfg.validate();
  if (hit.end <= hit.begin || hit.end > markdown.size()) {
    throw SchemaError("url span [" + std::to_string(hit.begin) + "," +
                      std::to_string(hit.end) + ") out of bounds for document of " +
                      std::to_string(markdown.size()) + " bytes");
  }

  const std::vector<Fence> fences = find_fences(markdown);
  const std::vector<Block> blocks = segment_blocks(markdown, fences);
  std::size_t home = npos;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (hit.begin >= blocks[i].begin && hit.end <= blocks[i].end) {
      home = i;
      break;
    }
  }
  if (home == npos) {
    throw SchemaError("url span does not fall inside any markdown block");
  }

  // expand around the home block, previous neighbour first
  std::size_t lo = home;
  std::size_t hi = home;
  std::deque<std::pair<std::size_t, Converted>> parts;
  parts.emplace_back(home, convert_block(markdown, blocks[home], hit.begin, hit.end));

  auto total_chars = [&] {
    std::size_t bytes = 0;
    for (const auto& [_, c] : parts) bytes += c.text.size();
    bytes += parts.size() - 1;  // join separators
    std::string joined;
    joined.reserve(bytes);
    for (const auto& [_, c] : parts) {
      if (!joined.empty()) joined.push_back('\n');
      joined += c.text;
    }
    return utf8::length(joined);
  };

  bool take_prev = true;
  while (total_chars() < cfg.min_context_chars && (lo > 0 || hi + 1 < blocks.size())) {
    if ((take_prev && lo > 0) || hi + 1 >= blocks.size()) {
      --lo;
      parts.emplace_front(lo, convert_block(markdown, blocks[lo], npos, npos));
    } else {
      ++hi;
      parts.emplace_back(hi, convert_block(markdown, blocks[hi], npos, npos));
    }
    take_prev = !take_prev;
  }

  BuiltContext built;
  std::size_t url_byte_begin = npos;
  for (const auto& [index, conv] : parts) {
    if (!built.context.empty()) built.context.push_back('\n');
    if (index == home) {
      if (conv.begin == npos || conv.end == npos) {
        throw SchemaError("lost track of url while converting its block");
      }
      url_byte_begin = built.context.size() + conv.begin;
    }
    built.context += conv.text;
  }

  built.start = utf8::length(std::string_view(built.context).substr(0, url_byte_begin));
  built.end = built.start + utf8::length(hit.url);
  if (utf8::substr(built.context, built.start, built.end) != hit.url) {
    throw SchemaError("recomputed span does not cover the url in the built context");
  }
  return built;
}

std::vector<ContextRecord> harvest_records(std::string_view markdown, const RepoRef& repo,
                                           const ExtractConfig& extract_cfg,
                                           const ContextConfig& context_cfg) {
  std::vector<ContextRecord> records;
  const auto hits = extract_urls(markdown, extract_cfg);
  for (std::size_t i = 0; i < hits.size(); ++i) {
    BuiltContext built = build_context(markdown, hits[i], context_cfg);
    ContextRecord rec;
    rec.id = repo.slug() + "#" + std::to_string(i + 1);
    rec.repo = repo.slug();
    rec.context = std::move(built.context);
    rec.mentions.push_back({hits[i].url, built.start, built.end, std::nullopt});
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace hed
