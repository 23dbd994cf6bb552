#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "llmda/tkg.hpp"

namespace llmda {

/// Chronological splits; historical/current/future play the roles of train/valid/test.
struct DatasetSplit {
  std::vector<Quadruple> historical;
  std::vector<Quadruple> current;
  std::vector<Quadruple> future;
};

struct Dataset {
  std::shared_ptr<Catalogs> catalogs;
  DatasetSplit split;
};

struct DatasetPaths {
  std::filesystem::path historical;
  std::filesystem::path current;
  std::filesystem::path future;
  std::optional<std::filesystem::path> entity2id;
  std::optional<std::filesystem::path> relation2id;
};

/// Populates catalogs from `name<TAB>integer` files. Catalogs loaded this way are strict.
void load_id_maps(Catalogs& catalogs, const std::filesystem::path& entity2id,
                  const std::filesystem::path& relation2id);

struct LoadOptions {
  /// Unknown names are a ResolutionError instead of new catalog entries.
  bool strict = false;
  /// Epoch for ISO dates; defaults to the earliest date in the file.
  std::optional<std::int64_t> epoch_days;
};

/// Reads `subject<TAB>relation<TAB>object<TAB>timestamp` lines. Timestamps are
/// ISO-8601 dates (converted to day offsets from the epoch) or integer day indices.
std::vector<Quadruple> load_quadruples(const std::filesystem::path& path, Catalogs& catalogs,
                                       const LoadOptions& options = {});

/// Loads three split files against shared catalogs. ISO dates share one epoch
/// (the earliest date across all splits). Throws ValidationError when the
/// splits are not chronological.
Dataset load_dataset(const DatasetPaths& paths);

void validate_chronological(const DatasetSplit& split);

/// Writes names and integer day indices; the output reloads to the same quadruples.
void write_quadruples(const std::filesystem::path& path, std::span<const Quadruple> quads,
                      const Catalogs& catalogs);
void write_id_maps(const std::filesystem::path& entity2id, const std::filesystem::path& relation2id,
                   const Catalogs& catalogs);

/// Days since 1970-01-01 for a YYYY-MM-DD date, or nullopt when `text` is not one.
std::optional<std::int64_t> parse_iso_date(std::string_view text);

}  // namespace llmda
