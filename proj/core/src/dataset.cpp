#include "llmda/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <limits>
#include <string>

namespace llmda {

namespace {

struct RawRow {
  std::string subject;
  std::string relation;
  std::string object;
  std::string time;
  std::size_t line = 0;
};

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<RawRow> read_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<RawRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 4) {
      throw ParseError(path.string(), lineno,
                       "expected 4 tab-separated fields, got " + std::to_string(fields.size()));
    }
    rows.push_back({std::string(fields[0]), std::string(fields[1]), std::string(fields[2]),
                    std::string(fields[3]), lineno});
  }
  return rows;
}

std::optional<std::int64_t> parse_day_index(std::string_view text) {
  std::int64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || p != end || v < 0) return std::nullopt;
  return v;
}

enum class TimeKind { Unknown, Date, Index };

struct TimeScan {
  TimeKind kind = TimeKind::Unknown;
  std::int64_t min_date = std::numeric_limits<std::int64_t>::max();
};

void scan_times(const std::vector<RawRow>& rows, const std::string& where, TimeScan& scan) {
  for (const RawRow& row : rows) {
    if (auto d = parse_iso_date(row.time)) {
      if (scan.kind == TimeKind::Index) {
        throw ParseError(where, row.line, "date timestamp mixed with integer day indices");
      }
      scan.kind = TimeKind::Date;
      scan.min_date = std::min(scan.min_date, *d);
    } else if (parse_day_index(row.time)) {
      if (scan.kind == TimeKind::Date) {
        throw ParseError(where, row.line, "integer day index mixed with date timestamps");
      }
      scan.kind = TimeKind::Index;
    } else {
      throw ParseError(where, row.line, "unparsable timestamp '" + row.time + "'");
    }
  }
}

EntityId resolve_entity(Catalogs& c, const std::string& name, bool strict, const std::string& where,
                        std::size_t line) {
  if (!strict) return c.entities.intern(name);
  if (auto id = c.entities.find(name)) return *id;
  if (auto v = parse_day_index(name); v && c.entities.contains(EntityId{static_cast<std::uint32_t>(*v)})) {
    return EntityId{static_cast<std::uint32_t>(*v)};
  }
  throw ResolutionError(where + ":" + std::to_string(line) + ": unknown entity '" + name + "'");
}

RelationId resolve_relation(Catalogs& c, const std::string& name, bool strict,
                            const std::string& where, std::size_t line) {
  if (!strict) return c.relations.intern(name);
  if (auto id = c.relations.find(name); id && !is_inverse(*id)) return *id;
  if (auto v = parse_day_index(name)) {
    const auto id = RelationCatalog::forward_id(static_cast<std::uint32_t>(*v));
    if (c.relations.contains(id)) return id;
  }
  throw ResolutionError(where + ":" + std::to_string(line) + ": unknown relation '" + name + "'");
}

std::vector<Quadruple> convert(const std::vector<RawRow>& rows, Catalogs& catalogs, bool strict,
                               std::int64_t epoch, const std::string& where) {
  std::vector<Quadruple> out;
  out.reserve(rows.size());
  for (const RawRow& row : rows) {
    Quadruple q;
    q.subject = resolve_entity(catalogs, row.subject, strict, where, row.line);
    q.relation = resolve_relation(catalogs, row.relation, strict, where, row.line);
    q.object = resolve_entity(catalogs, row.object, strict, where, row.line);
    if (auto d = parse_iso_date(row.time)) {
      q.t = *d - epoch;
    } else {
      q.t = *parse_day_index(row.time);
    }
    out.push_back(q);
  }
  return out;
}

std::vector<std::pair<std::string, std::int64_t>> read_id_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::pair<std::string, std::int64_t>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2) throw ParseError(path.string(), lineno, "expected name<TAB>id");
    auto id = parse_day_index(fields[1]);
    if (!id || *id > std::numeric_limits<std::uint32_t>::max() / 2) {
      throw ParseError(path.string(), lineno, "invalid id '" + std::string(fields[1]) + "'");
    }
    out.emplace_back(std::string(fields[0]), *id);
  }
  return out;
}

}  // namespace

std::optional<std::int64_t> parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  auto num = [&](std::size_t from, std::size_t len, auto& out) {
    auto [p, ec] = std::from_chars(text.data() + from, text.data() + from + len, out);
    return ec == std::errc{} && p == text.data() + from + len;
  };
  if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

void load_id_maps(Catalogs& catalogs, const std::filesystem::path& entity2id,
                  const std::filesystem::path& relation2id) {
  for (const auto& [name, id] : read_id_map(entity2id)) {
    catalogs.entities.assign(name, EntityId{static_cast<std::uint32_t>(id)});
  }
  for (const auto& [name, id] : read_id_map(relation2id)) {
    catalogs.relations.assign(name, static_cast<std::uint32_t>(id));
  }
}

std::vector<Quadruple> load_quadruples(const std::filesystem::path& path, Catalogs& catalogs,
                                       const LoadOptions& options) {
  const auto rows = read_rows(path);
  TimeScan scan;
  scan_times(rows, path.string(), scan);
  const std::int64_t epoch = options.epoch_days.value_or(
      scan.kind == TimeKind::Date ? scan.min_date : 0);
  return convert(rows, catalogs, options.strict, epoch, path.string());
}

Dataset load_dataset(const DatasetPaths& paths) {
  Dataset ds;
  ds.catalogs = std::make_shared<Catalogs>();
  const bool strict = paths.entity2id.has_value() || paths.relation2id.has_value();
  if (strict) {
    if (!paths.entity2id || !paths.relation2id) {
      throw ValidationError("entity2id and relation2id must be given together");
    }
    load_id_maps(*ds.catalogs, *paths.entity2id, *paths.relation2id);
  }
  const auto hist = read_rows(paths.historical);
  const auto cur = read_rows(paths.current);
  const auto fut = read_rows(paths.future);
  TimeScan scan;
  scan_times(hist, paths.historical.string(), scan);
  scan_times(cur, paths.current.string(), scan);
  scan_times(fut, paths.future.string(), scan);
  const std::int64_t epoch = scan.kind == TimeKind::Date ? scan.min_date : 0;
  ds.split.historical = convert(hist, *ds.catalogs, strict, epoch, paths.historical.string());
  ds.split.current = convert(cur, *ds.catalogs, strict, epoch, paths.current.string());
  ds.split.future = convert(fut, *ds.catalogs, strict, epoch, paths.future.string());
  validate_chronological(ds.split);
  return ds;
}

void validate_chronological(const DatasetSplit& split) {
  auto max_t = [](const std::vector<Quadruple>& v) {
    Timestamp m = std::numeric_limits<Timestamp>::min();
    for (const auto& q : v) m = std::max(m, q.t);
    return m;
  };
  auto min_t = [](const std::vector<Quadruple>& v) {
    Timestamp m = std::numeric_limits<Timestamp>::max();
    for (const auto& q : v) m = std::min(m, q.t);
    return m;
  };
  if (!split.historical.empty() && !split.current.empty() &&
      max_t(split.historical) > min_t(split.current)) {
    throw ValidationError("historical split overlaps the current split in time");
  }
  if (!split.current.empty() && !split.future.empty() && min_t(split.current) > min_t(split.future)) {
    throw ValidationError("current split starts after the future split");
  }
  if (!split.historical.empty() && !split.future.empty() &&
      max_t(split.historical) > min_t(split.future)) {
    throw ValidationError("historical split overlaps the future split in time");
  }
}

void write_quadruples(const std::filesystem::path& path, std::span<const Quadruple> quads,
                      const Catalogs& catalogs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const Quadruple& q : quads) {
    out << catalogs.entities.name(q.subject) << '\t' << catalogs.relations.name(q.relation) << '\t'
        << catalogs.entities.name(q.object) << '\t' << q.t << '\n';
  }
}

void write_id_maps(const std::filesystem::path& entity2id, const std::filesystem::path& relation2id,
                   const Catalogs& catalogs) {
  std::ofstream ents(entity2id, std::ios::binary);
  std::ofstream rels(relation2id, std::ios::binary);
  if (!ents || !rels) throw Error("cannot write id maps");
  for (std::uint32_t i = 0; i < catalogs.entities.size(); ++i) {
    if (catalogs.entities.contains(EntityId{i})) {
      ents << catalogs.entities.name(EntityId{i}) << '\t' << i << '\n';
    }
  }
  for (std::uint32_t i = 0; i < catalogs.relations.forward_count(); ++i) {
    const auto id = RelationCatalog::forward_id(i);
    if (catalogs.relations.contains(id)) rels << catalogs.relations.name(id) << '\t' << i << '\n';
  }
}

}  // namespace llmda
