#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "orcidds/model.hpp"

namespace orcidds {

/// One archive member: its path inside the archive (or on disk) and raw bytes.
struct RawRecord {
  std::string name;
  std::string bytes;
};

/// Sequential, lazy reader over the XML members of an archive.
class RecordStream {
 public:
  virtual ~RecordStream() = default;
  /// Next .xml member, or nullopt at end of archive. Throws IoError.
  virtual std::optional<RawRecord> next() = 0;
  /// Bytes consumed from the underlying source so far (uncompressed for tar.gz).
  virtual std::uint64_t bytes_read() const = 0;
};

/// Opens a gzip-compressed tar (ORCID public data file layout) or a directory
/// of .xml files. Throws IoError / NotAnArchive.
std::unique_ptr<RecordStream> open_archive(const std::filesystem::path& path);

/// Parses one ORCID record summary document (2.x or 3.0 schema).
/// Throws MalformedRecord / MissingOrcidId.
ProfileRecord parse_record(std::string_view buffer);

/// First ####-####-####-###X token in a member path, if any.
std::optional<std::string> orcid_from_path(std::string_view name);

struct IngestStats {
  std::uint64_t records_seen = 0;
  std::uint64_t records_parsed = 0;
  std::uint64_t records_failed = 0;
  std::uint64_t bytes_read = 0;
  std::uint64_t largest_record = 0;

  bool operator==(const IngestStats&) const = default;
};

struct IngestFailure {
  std::string orcid_id;  // "?" when unknown
  std::string reason;
};

struct IngestOptions {
  unsigned workers = 1;
  /// Called for every skipped record. Calls are serialized.
  std::function<void(const IngestFailure&)> on_failure;
};

/// Offers every parsed record to `sink` exactly once; sink calls are
/// serialized, order is unspecified when workers > 1. Per-record failures are
/// counted and skipped; IoError aborts.
IngestStats ingest(const std::filesystem::path& archive,
                   const std::function<void(ProfileRecord&&)>& sink,
                   const IngestOptions& options = {});

}  // namespace orcidds
