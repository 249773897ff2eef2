#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cryptic/error.hpp"
#include "cryptic/types.hpp"

namespace cryptic {

namespace io_detail {

using nlohmann::json;

struct LineContext {
  const std::string& source;
  std::size_t line;

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source, line, what); }
};

inline const json& field(const json& obj, const char* name, const LineContext& ctx) {
  auto it = obj.find(name);
  if (it == obj.end()) ctx.fail(std::string("missing field '") + name + "'");
  return *it;
}

inline std::uint64_t get_u64(const json& obj, const char* name, const LineContext& ctx) {
  const json& v = field(obj, name, ctx);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  ctx.fail(std::string("field '") + name + "' must be an unsigned integer");
}

inline std::int64_t get_i64(const json& obj, const char* name, const LineContext& ctx) {
  const json& v = field(obj, name, ctx);
  if (!v.is_number_integer()) ctx.fail(std::string("field '") + name + "' must be an integer");
  return v.get<std::int64_t>();
}

inline double get_f64(const json& obj, const char* name, const LineContext& ctx) {
  const json& v = field(obj, name, ctx);
  if (!v.is_number()) ctx.fail(std::string("field '") + name + "' must be a number");
  return v.get<double>();
}

inline bool get_bool(const json& obj, const char* name, const LineContext& ctx) {
  const json& v = field(obj, name, ctx);
  if (!v.is_boolean()) ctx.fail(std::string("field '") + name + "' must be a boolean");
  return v.get<bool>();
}

inline std::string get_str(const json& obj, const char* name, const LineContext& ctx) {
  const json& v = field(obj, name, ctx);
  if (!v.is_string()) ctx.fail(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

template <typename Enum, std::size_t N>
Enum get_enum(const json& obj, const char* name, const std::array<std::string_view, N>& names,
              const LineContext& ctx) {
  const std::string text = get_str(obj, name, ctx);
  auto parsed = parse_enum<Enum>(text, names);
  if (!parsed) ctx.fail(std::string("field '") + name + "' has unknown value '" + text + "'");
  return *parsed;
}

inline void check_fraction(double v, const char* name, const LineContext& ctx) {
  if (!(v >= 0.0 && v <= 1.0)) ctx.fail(std::string("field '") + name + "' must lie in [0,1]");
}

/// Calls fn(json, ctx) for every non-blank line of the file.
template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  const std::string source = path.string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    LineContext ctx{source, lineno};
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) ctx.fail("malformed record");
    fn(obj, ctx);
  }
}

inline void append_escaped(std::string& out, std::string_view s) {
  out.push_back('"');
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(c));
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  out.push_back('"');
}

template <typename T>
void append_number(std::string& out, T v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

inline void append_bool(std::string& out, bool v) { out += v ? "true" : "false"; }

}  // namespace io_detail

inline Individual parse_individual(const nlohmann::json& obj, const io_detail::LineContext& ctx) {
  using namespace io_detail;
  Individual ind;
  ind.id = get_u64(obj, "id", ctx);
  ind.gender = get_enum<Gender>(obj, "gender", kGenderNames, ctx);
  const std::int64_t age = get_i64(obj, "age", ctx);
  if (age < 0 || age > 150) ctx.fail("field 'age' out of range");
  ind.age = static_cast<int>(age);
  ind.education = get_enum<Education>(obj, "education", kEducationNames, ctx);
  ind.occupation = get_enum<Occupation>(obj, "occupation", kOccupationNames, ctx);
  const std::int64_t pp = get_i64(obj, "purchasing_power", ctx);
  if (pp < kMinPurchasingPower || pp > kMaxPurchasingPower) {
    ctx.fail("field 'purchasing_power' must be in [1,7], got " + std::to_string(pp));
  }
  ind.purchasing_power = static_cast<int>(pp);
  ind.has_child = get_bool(obj, "has_child", ctx);
  ind.married = get_bool(obj, "married", ctx);
  ind.home_city = get_u64(obj, "home_city", ctx);
  ind.qualified = get_bool(obj, "qualified", ctx);
  return ind;
}

inline Region parse_region(const nlohmann::json& obj, const io_detail::LineContext& ctx) {
  using namespace io_detail;
  Region r;
  r.city_id = get_u64(obj, "city_id", ctx);
  r.province_id = get_u64(obj, "province_id", ctx);
  r.name = get_str(obj, "name", ctx);
  r.distance_to_epicenter = get_f64(obj, "distance_to_epicenter", ctx);
  if (!(r.distance_to_epicenter >= 0.0)) ctx.fail("field 'distance_to_epicenter' must be >= 0");
  r.gdp = get_f64(obj, "gdp", ctx);
  if (!(r.gdp >= 0.0)) ctx.fail("field 'gdp' must be >= 0");
  const json& cases = field(obj, "daily_confirmed_cases", ctx);
  if (!cases.is_array()) ctx.fail("field 'daily_confirmed_cases' must be an array");
  for (const auto& c : cases) {
    if (!c.is_number_integer() || c.get<std::int64_t>() < 0) {
      ctx.fail("field 'daily_confirmed_cases' must hold non-negative integers");
    }
    r.daily_confirmed_cases.push_back(c.get<std::int64_t>());
  }
  r.cultural_tightness = get_f64(obj, "cultural_tightness", ctx);
  r.paddy_rice_pct = get_f64(obj, "paddy_rice_pct", ctx);
  check_fraction(r.paddy_rice_pct, "paddy_rice_pct", ctx);
  r.innovation_index = get_f64(obj, "innovation_index", ctx);
  r.illiteracy_pct = get_f64(obj, "illiteracy_pct", ctx);
  check_fraction(r.illiteracy_pct, "illiteracy_pct", ctx);
  r.multi_ethnic_household_pct = get_f64(obj, "multi_ethnic_household_pct", ctx);
  check_fraction(r.multi_ethnic_household_pct, "multi_ethnic_household_pct", ctx);
  r.population_count = get_i64(obj, "population_count", ctx);
  if (r.population_count <= 0) ctx.fail("field 'population_count' must be > 0");
  return r;
}

inline AddressRecord parse_address(const nlohmann::json& obj, const io_detail::LineContext& ctx) {
  using namespace io_detail;
  AddressRecord a;
  a.individual_id = get_u64(obj, "individual_id", ctx);
  a.address_id = get_u64(obj, "address_id", ctx);
  a.kind = get_enum<AddressKind>(obj, "kind", kAddressKindNames, ctx);
  const json& iv = field(obj, "active_interval", ctx);
  if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number_integer() ||
      !iv[1].is_number_integer()) {
    ctx.fail("field 'active_interval' must be [start, end]");
  }
  a.start = iv[0].get<std::int64_t>();
  a.end = iv[1].get<std::int64_t>();
  if (a.start > a.end) ctx.fail("field 'active_interval' has start > end");
  return a;
}

/// Parses one events line into the matching stream of `log`.
inline void parse_event(const nlohmann::json& obj, const io_detail::LineContext& ctx,
                        EventLog& log) {
  using namespace io_detail;
  const std::string type = get_str(obj, "type", ctx);
  if (type == "query") {
    QueryEvent q;
    q.individual_id = get_u64(obj, "individual_id", ctx);
    q.timestamp = get_i64(obj, "timestamp", ctx);
    q.query_text = get_str(obj, "query_text", ctx);
    log.queries.push_back(std::move(q));
  } else if (type == "purchase") {
    PurchaseEvent p;
    p.individual_id = get_u64(obj, "individual_id", ctx);
    p.timestamp = get_i64(obj, "timestamp", ctx);
    p.category = get_str(obj, "category", ctx);
    p.is_ppe = get_bool(obj, "is_ppe", ctx);
    log.purchases.push_back(std::move(p));
  } else {
    ctx.fail("field 'type' has unknown value '" + type + "'");
  }
}

inline std::vector<Individual> read_population(const std::filesystem::path& path) {
  std::vector<Individual> out;
  io_detail::for_each_record(path, [&](const auto& obj, const auto& ctx) {
    out.push_back(parse_individual(obj, ctx));
  });
  return out;
}

inline std::vector<Region> read_regions(const std::filesystem::path& path) {
  std::vector<Region> out;
  io_detail::for_each_record(path, [&](const auto& obj, const auto& ctx) {
    out.push_back(parse_region(obj, ctx));
  });
  return out;
}

inline std::vector<AddressRecord> read_addresses(const std::filesystem::path& path) {
  std::vector<AddressRecord> out;
  io_detail::for_each_record(path, [&](const auto& obj, const auto& ctx) {
    out.push_back(parse_address(obj, ctx));
  });
  return out;
}

inline EventLog read_events(const std::filesystem::path& path) {
  EventLog log;
  io_detail::for_each_record(path,
                             [&](const auto& obj, const auto& ctx) { parse_event(obj, ctx, log); });
  return log;
}

// Writers emit one JSON object per line with fields in declaration order.

inline void format_record(std::string& out, const Individual& ind) {
  using namespace io_detail;
  out += "{\"id\":";
  append_number(out, ind.id);
  out += ",\"gender\":";
  append_escaped(out, to_string(ind.gender));
  out += ",\"age\":";
  append_number(out, ind.age);
  out += ",\"education\":";
  append_escaped(out, to_string(ind.education));
  out += ",\"occupation\":";
  append_escaped(out, to_string(ind.occupation));
  out += ",\"purchasing_power\":";
  append_number(out, ind.purchasing_power);
  out += ",\"has_child\":";
  append_bool(out, ind.has_child);
  out += ",\"married\":";
  append_bool(out, ind.married);
  out += ",\"home_city\":";
  append_number(out, ind.home_city);
  out += ",\"qualified\":";
  append_bool(out, ind.qualified);
  out += "}\n";
}

inline void format_record(std::string& out, const Region& r) {
  using namespace io_detail;
  out += "{\"city_id\":";
  append_number(out, r.city_id);
  out += ",\"province_id\":";
  append_number(out, r.province_id);
  out += ",\"name\":";
  append_escaped(out, r.name);
  out += ",\"distance_to_epicenter\":";
  append_number(out, r.distance_to_epicenter);
  out += ",\"gdp\":";
  append_number(out, r.gdp);
  out += ",\"daily_confirmed_cases\":[";
  for (std::size_t i = 0; i < r.daily_confirmed_cases.size(); ++i) {
    if (i) out.push_back(',');
    append_number(out, r.daily_confirmed_cases[i]);
  }
  out += "],\"cultural_tightness\":";
  append_number(out, r.cultural_tightness);
  out += ",\"paddy_rice_pct\":";
  append_number(out, r.paddy_rice_pct);
  out += ",\"innovation_index\":";
  append_number(out, r.innovation_index);
  out += ",\"illiteracy_pct\":";
  append_number(out, r.illiteracy_pct);
  out += ",\"multi_ethnic_household_pct\":";
  append_number(out, r.multi_ethnic_household_pct);
  out += ",\"population_count\":";
  append_number(out, r.population_count);
  out += "}\n";
}

inline void format_record(std::string& out, const AddressRecord& a) {
  using namespace io_detail;
  out += "{\"individual_id\":";
  append_number(out, a.individual_id);
  out += ",\"address_id\":";
  append_number(out, a.address_id);
  out += ",\"kind\":";
  append_escaped(out, to_string(a.kind));
  out += ",\"active_interval\":[";
  append_number(out, a.start);
  out.push_back(',');
  append_number(out, a.end);
  out += "]}\n";
}

inline void format_record(std::string& out, const QueryEvent& q) {
  using namespace io_detail;
  out += "{\"type\":\"query\",\"individual_id\":";
  append_number(out, q.individual_id);
  out += ",\"timestamp\":";
  append_number(out, q.timestamp);
  out += ",\"query_text\":";
  append_escaped(out, q.query_text);
  out += "}\n";
}

inline void format_record(std::string& out, const PurchaseEvent& p) {
  using namespace io_detail;
  out += "{\"type\":\"purchase\",\"individual_id\":";
  append_number(out, p.individual_id);
  out += ",\"timestamp\":";
  append_number(out, p.timestamp);
  out += ",\"category\":";
  append_escaped(out, p.category);
  out += ",\"is_ppe\":";
  append_bool(out, p.is_ppe);
  out += "}\n";
}

/// Buffered line writer; flushes in large chunks.
class RecordWriter {
 public:
  explicit RecordWriter(const std::filesystem::path& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error(ExitCode::kDataIntegrity, "cannot write " + path.string());
    buf_.reserve(kChunk + 4096);
  }
  RecordWriter(const RecordWriter&) = delete;
  RecordWriter& operator=(const RecordWriter&) = delete;
  ~RecordWriter() { flush(); }

  template <typename Record>
  void write(const Record& r) {
    format_record(buf_, r);
    if (buf_.size() >= kChunk) flush();
  }

  void write_raw(std::string_view text) {
    buf_ += text;
    if (buf_.size() >= kChunk) flush();
  }

  void flush() {
    out_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    buf_.clear();
    out_.flush();
  }

 private:
  static constexpr std::size_t kChunk = 1 << 20;
  std::filesystem::path path_;
  std::ofstream out_;
  std::string buf_;
};

template <typename Range>
void write_records(const std::filesystem::path& path, const Range& records) {
  RecordWriter w(path);
  for (const auto& r : records) w.write(r);
}

/// Events are written in global chronological order.
inline void write_events(const std::filesystem::path& path, const EventLog& log) {
  RecordWriter w(path);
  for (const EventRef& ref : chronological_order(log)) {
    if (ref.type == EventType::kQuery) {
      w.write(log.queries[ref.index]);
    } else {
      w.write(log.purchases[ref.index]);
    }
  }
}

struct DatasetPaths {
  std::filesystem::path population;
  std::filesystem::path regions;
  std::filesystem::path addresses;
  std::filesystem::path events;

  static DatasetPaths in_dir(const std::filesystem::path& dir) {
    return {dir / "population.jsonl", dir / "regions.jsonl", dir / "addresses.jsonl",
            dir / "events.jsonl"};
  }
};

inline void write_dataset(const DatasetPaths& paths, const Dataset& ds) {
  write_records(paths.population, ds.individuals);
  write_records(paths.regions, ds.regions);
  write_records(paths.addresses, ds.addresses);
  write_events(paths.events, ds.events);
}

}  // namespace cryptic
