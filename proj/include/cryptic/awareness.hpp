#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cryptic/error.hpp"
#include "cryptic/parallel.hpp"
#include "cryptic/time.hpp"
#include "cryptic/types.hpp"

namespace cryptic {

/// Malformed awareness pattern; `position` is the 1-based column of the fault.
class PatternSyntaxError : public ConfigError {
 public:
  PatternSyntaxError(const std::string& pattern, std::size_t position, const std::string& what)
      : ConfigError("pattern '" + pattern + "', column " + std::to_string(position) + ": " + what),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Lowercases ASCII and collapses whitespace runs to one space, trimming both ends.
inline void normalize_query(std::string_view text, std::string& out) {
  out.clear();
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (u == ' ' || u == '\t' || u == '\n' || u == '\r' || u == '\f' || u == '\v') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back((u >= 'A' && u <= 'Z') ? static_cast<char>(u + ('a' - 'A')) : c);
  }
}

inline std::string normalize_query(std::string_view text) {
  std::string out;
  normalize_query(text, out);
  return out;
}

/// Compiled set of awareness-indicating patterns. Each pattern is an AND of
/// OR-groups of normalized terms.
class QueryMatcher {
 public:
  using Group = std::vector<std::string>;
  using Pattern = std::vector<Group>;

  explicit QueryMatcher(std::vector<Pattern> patterns) : patterns_(std::move(patterns)) {}

  const std::vector<Pattern>& patterns() const { return patterns_; }

  /// Matches an already-normalized text.
  bool matches_normalized(std::string_view norm) const {
    for (const Pattern& p : patterns_) {
      bool all = true;
      for (const Group& g : p) {
        bool any = false;
        for (const std::string& term : g) {
          if (norm.find(term) != std::string_view::npos) {
            any = true;
            break;
          }
        }
        if (!any) {
          all = false;
          break;
        }
      }
      if (all) return true;
    }
    return false;
  }

  bool matches(std::string_view text) const {
    thread_local std::string buf;
    normalize_query(text, buf);
    return matches_normalized(buf);
  }

 private:
  std::vector<Pattern> patterns_;
};

namespace awareness_detail {

inline QueryMatcher::Pattern parse_pattern(const std::string& src) {
  QueryMatcher::Pattern pattern;
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t')) ++pos;
  };
  auto fail = [&](const std::string& what) -> void {
    throw PatternSyntaxError(src, pos + 1, what);
  };
  for (;;) {
    skip_ws();
    if (pos >= src.size() || src[pos] != '(') fail("expected '('");
    ++pos;
    QueryMatcher::Group group;
    for (;;) {
      const std::size_t start = pos;
      while (pos < src.size() && src[pos] != '|' && src[pos] != ')' && src[pos] != '(' &&
             src[pos] != '&') {
        ++pos;
      }
      std::string term = normalize_query(std::string_view(src).substr(start, pos - start));
      if (term.empty()) {
        pos = start;
        fail("empty term");
      }
      group.push_back(std::move(term));
      if (pos >= src.size()) fail("unterminated group, expected ')'");
      if (src[pos] == '|') {
        ++pos;
        continue;
      }
      if (src[pos] == ')') {
        ++pos;
        break;
      }
      fail(std::string("unexpected '") + src[pos] + "' inside group");
    }
    pattern.push_back(std::move(group));
    skip_ws();
    if (pos >= src.size()) break;
    if (src[pos] != '&') fail("expected '&' between groups");
    ++pos;
  }
  return pattern;
}

}  // namespace awareness_detail

/// Compiles pattern expressions of the form `(a|b|c)&(d)...`; at least one pattern required.
inline QueryMatcher compile_query_set(std::span<const std::string> patterns) {
  if (patterns.empty()) throw ConfigError("awareness pattern set is empty");
  std::vector<QueryMatcher::Pattern> compiled;
  compiled.reserve(patterns.size());
  for (const auto& p : patterns) compiled.push_back(awareness_detail::parse_pattern(p));
  return QueryMatcher(std::move(compiled));
}

inline QueryMatcher compile_query_set(std::initializer_list<std::string> patterns) {
  std::vector<std::string> v(patterns);
  return compile_query_set(std::span<const std::string>(v));
}

/// The default awareness-indicating query set.
inline const std::vector<std::string>& default_patterns() {
  static const std::vector<std::string> kPatterns{"(n95|kn95|kf94)&(face mask)"};
  return kPatterns;
}

/// Reads one expression per line; blank lines and '#' comments are skipped.
inline std::vector<std::string> read_patterns_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open patterns file " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    out.push_back(line.substr(first, last - first + 1));
  }
  return out;
}

/// Months covered by the activity filter: [first_month, first_month + n_months).
struct QualificationWindow {
  std::int64_t first_month = 0;  // local_month_index units
  int n_months = 60;

  /// The n_months full months immediately preceding the month containing `observation_start`.
  static QualificationWindow before(Timestamp observation_start, int n_months = 60) {
    return {local_month_index(observation_start) - n_months, n_months};
  }
};

/// Flags (aligned with `individuals`) for those with at least one purchase in every
/// month of the window. `purchases` must be sorted by individual id.
inline std::vector<std::uint8_t> filter_qualified(std::span<const Individual> individuals,
                                                  std::span<const PurchaseEvent> purchases,
                                                  const QualificationWindow& window) {
  std::vector<std::uint8_t> flags(individuals.size(), 0);
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(window.n_months));
  std::size_t p = 0;
  for (std::size_t i = 0; i < individuals.size(); ++i) {
    const IndividualId id = individuals[i].id;
    while (p < purchases.size() && purchases[p].individual_id < id) ++p;
    std::fill(seen.begin(), seen.end(), 0);
    int covered = 0;
    for (; p < purchases.size() && purchases[p].individual_id == id; ++p) {
      const std::int64_t m = local_month_index(purchases[p].timestamp) - window.first_month;
      if (m >= 0 && m < window.n_months && !seen[static_cast<std::size_t>(m)]) {
        seen[static_cast<std::size_t>(m)] = 1;
        ++covered;
      }
    }
    flags[i] = covered == window.n_months ? 1 : 0;
  }
  return flags;
}

inline constexpr Timestamp kNeverAware = std::numeric_limits<Timestamp>::max();

/// Per-individual first-aware time, aligned with a sorted id list. The label
/// L(i,t) is 1 exactly when t >= first_aware(i), so it never reverts.
class AwarenessTimeline {
 public:
  AwarenessTimeline() = default;
  AwarenessTimeline(std::vector<IndividualId> ids, std::vector<Timestamp> first_aware)
      : ids_(std::move(ids)), first_aware_(std::move(first_aware)) {
    if (ids_.size() != first_aware_.size()) {
      throw std::invalid_argument("timeline ids and times differ in length");
    }
  }

  std::size_t size() const { return ids_.size(); }
  const std::vector<IndividualId>& ids() const { return ids_; }
  const std::vector<Timestamp>& raw() const { return first_aware_; }

  std::optional<Timestamp> first_aware(std::size_t i) const {
    if (first_aware_[i] == kNeverAware) return std::nullopt;
    return first_aware_[i];
  }

  bool label(std::size_t i, Timestamp t) const { return t >= first_aware_[i]; }

  std::optional<std::size_t> index_of(IndividualId id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - ids_.begin());
  }

  bool operator==(const AwarenessTimeline&) const = default;

 private:
  std::vector<IndividualId> ids_;
  std::vector<Timestamp> first_aware_;
};

/// First-aware time = timestamp of the `threshold`-th matching submission inside
/// the observation window. `queries` must be sorted by (individual_id, timestamp).
inline AwarenessTimeline label_awareness(std::span<const IndividualId> ids,
                                         std::span<const QueryEvent> queries,
                                         const QueryMatcher& matcher, const Calendar& calendar,
                                         int threshold = 3, unsigned jobs = 1) {
  if (threshold < 1) throw ConfigError("awareness threshold must be >= 1");
  std::vector<Timestamp> first(ids.size(), kNeverAware);

  // Contiguous query range per individual.
  std::vector<std::size_t> begin(ids.size() + 1, queries.size());
  {
    std::size_t q = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      while (q < queries.size() && queries[q].individual_id < ids[i]) ++q;
      begin[i] = q;
    }
  }

  parallel_for(ids.size(), jobs, [&](std::size_t i) {
    std::string buf;
    int count = 0;
    for (std::size_t q = begin[i]; q < queries.size() && queries[q].individual_id == ids[i]; ++q) {
      const QueryEvent& ev = queries[q];
      if (!calendar.contains(ev.timestamp)) continue;
      normalize_query(ev.query_text, buf);
      if (matcher.matches_normalized(buf) && ++count == threshold) {
        first[i] = ev.timestamp;
        break;
      }
    }
  });
  return AwarenessTimeline(std::vector<IndividualId>(ids.begin(), ids.end()), std::move(first));
}

/// Fraction of `cohort` (timeline indices) aware at time t.
inline double awareness_percentage(const AwarenessTimeline& timeline,
                                   std::span<const std::size_t> cohort, Timestamp t) {
  if (cohort.empty()) throw UndefinedCohortError("awareness percentage over an empty cohort");
  std::size_t aware = 0;
  for (std::size_t i : cohort) {
    if (timeline.label(i, t)) ++aware;
  }
  return static_cast<double>(aware) / static_cast<double>(cohort.size());
}

/// Tab-separated timeline: id, first_aware (epoch or NA), qualified flag.
inline void write_timeline(const std::filesystem::path& path, const AwarenessTimeline& tl,
                           std::span<const std::uint8_t> qualified) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ExitCode::kDataIntegrity, "cannot write " + path.string());
  os << "id\tfirst_aware\tqualified\n";
  for (std::size_t i = 0; i < tl.size(); ++i) {
    os << tl.ids()[i] << '\t';
    if (auto fa = tl.first_aware(i)) {
      os << *fa;
    } else {
      os << "NA";
    }
    os << '\t' << (qualified.empty() ? 0 : static_cast<int>(qualified[i])) << '\n';
  }
}

struct LoadedTimeline {
  AwarenessTimeline timeline;
  std::vector<std::uint8_t> qualified;
};

inline LoadedTimeline read_timeline(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError(path.string(), 1, "missing header");
  std::vector<IndividualId> ids;
  std::vector<Timestamp> times;
  std::vector<std::uint8_t> qualified;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos) {
      throw ParseError(path.string(), lineno, "expected 3 columns");
    }
    try {
      ids.push_back(std::stoull(line.substr(0, t1)));
      const std::string fa = line.substr(t1 + 1, t2 - t1 - 1);
      times.push_back(fa == "NA" ? kNeverAware : std::stoll(fa));
      qualified.push_back(line.substr(t2 + 1) == "1" ? 1 : 0);
    } catch (const std::logic_error&) {
      throw ParseError(path.string(), lineno, "malformed number");
    }
  }
  return {AwarenessTimeline(std::move(ids), std::move(times)), std::move(qualified)};
}

}  // namespace cryptic
