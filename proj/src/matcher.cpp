#include "hed/matcher.hpp"

#include <algorithm>
#include <array>
#include <map>

#include "hed/errors.hpp"

namespace hed {
namespace {

// Suffix automaton with transitions stored per state in a small sorted map.
class SuffixAutomaton {
 public:
  explicit SuffixAutomaton(std::string_view s) {
    states_.reserve(2 * s.size() + 2);
    states_.push_back(State{-1, 0, {}});
    int last = 0;
    for (char raw : s) {
      const auto ch = static_cast<unsigned char>(raw);
      const int cur = static_cast<int>(states_.size());
      states_.push_back(State{-1, states_[last].len + 1, {}});
      int p = last;
      while (p >= 0 && !states_[p].next.count(ch)) {
        states_[p].next[ch] = cur;
        p = states_[p].link;
      }
      if (p < 0) {
        states_[cur].link = 0;
      } else {
        const int q = states_[p].next[ch];
        if (states_[p].len + 1 == states_[q].len) {
          states_[cur].link = q;
        } else {
          const int clone = static_cast<int>(states_.size());
          states_.push_back(states_[q]);
          states_[clone].len = states_[p].len + 1;
          while (p >= 0 && states_[p].next[ch] == q) {
            states_[p].next[ch] = clone;
            p = states_[p].link;
          }
          states_[q].link = clone;
          states_[cur].link = clone;
        }
      }
      last = cur;
    }
  }

  // Longest substring of `other` that is also a substring of the automaton's
  // source string.
  std::size_t longest_common_with(std::string_view other) const {
    std::size_t best = 0;
    int v = 0;
    int len = 0;
    for (char raw : other) {
      const auto ch = static_cast<unsigned char>(raw);
      while (v != 0 && !states_[v].next.count(ch)) {
        v = states_[v].link;
        len = states_[v].len;
      }
      auto it = states_[v].next.find(ch);
      if (it != states_[v].next.end()) {
        v = it->second;
        ++len;
      }
      best = std::max(best, static_cast<std::size_t>(len));
    }
    return best;
  }

 private:
  struct State {
    int link;
    int len;
    std::map<unsigned char, int> next;
  };
  std::vector<State> states_;
};

}  // namespace

std::size_t longest_common_substring(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty()) return 0;
  return SuffixAutomaton(b).longest_common_with(a);
}

double lcs_ratio(std::string_view pred, std::string_view gold) {
  if (gold.empty()) throw SchemaError("lcs_ratio: empty gold URL");
  const std::size_t common = longest_common_substring(pred, gold);
  return static_cast<double>(common) / static_cast<double>(gold.size());
}

MatchResult match_record(std::span<const std::string> pred_urls,
                         std::span<const std::string> gold_urls,
                         const MatchConfig& cfg) {
  if (cfg.min_ratio < 0.0 || cfg.min_ratio > 1.0) {
    throw ConfigError("match min_ratio must lie in [0, 1]");
  }
  MatchResult result;
  std::vector<bool> taken(pred_urls.size(), false);

  for (std::size_t g = 0; g < gold_urls.size(); ++g) {
    double best = 0.0;
    std::size_t best_p = pred_urls.size();
    for (std::size_t p = 0; p < pred_urls.size(); ++p) {
      if (taken[p]) continue;
      const double r = lcs_ratio(pred_urls[p], gold_urls[g]);
      if (r > best) {  // strict > keeps the lowest index on ties
        best = r;
        best_p = p;
      }
    }
    if (best_p < pred_urls.size() && best > 0.0 && best >= cfg.min_ratio) {
      taken[best_p] = true;
      result.pairs.push_back(MatchPair{g, best_p, best});
    } else {
      result.missing.push_back(g);
    }
  }
  for (std::size_t p = 0; p < pred_urls.size(); ++p) {
    if (!taken[p]) result.spurious.push_back(p);
  }
  return result;
}

}  // namespace hed
