#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hed {

// Length of the longest common contiguous substring of a and b, in bytes,
// case-sensitive. Linear-time (suffix automaton over b).
std::size_t longest_common_substring(std::string_view a, std::string_view b);

// Longest-common-substring length divided by the gold URL's length; the
// gold string fixes the denominator. Throws SchemaError for empty gold.
double lcs_ratio(std::string_view pred, std::string_view gold);

struct MatchConfig {
  // A pair forms when lcs_ratio > 0 and >= min_ratio. The default admits
  // any nonzero overlap; raise it to demand stronger agreement.
  double min_ratio = 0.0;
};

struct MatchPair {
  std::size_t gold_index;
  std::size_t pred_index;
  double ratio;  // in (0, 1]
};

// 1-to-1 alignment between predictions and gold mentions of one record.
// Every gold index lands in exactly one of pairs/missing and every
// prediction index in exactly one of pairs/spurious.
struct MatchResult {
  std::vector<MatchPair> pairs;
  std::vector<std::size_t> missing;   // gold indices with no match
  std::vector<std::size_t> spurious;  // prediction indices with no match
};

// Greedy per-gold assignment in document order: each gold takes the
// unmatched prediction with maximal lcs_ratio, ties broken by lowest
// prediction index. Matching sees URL strings only, never labels.
MatchResult match_record(std::span<const std::string> pred_urls,
                         std::span<const std::string> gold_urls,
                         const MatchConfig& cfg = {});

}  // namespace hed
