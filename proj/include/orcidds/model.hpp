#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace orcidds {

enum class ErrorCode {
  EmptyInput,
  NotADoi,
  IoError,
  NotAnArchive,
  MalformedRecord,
  MissingOrcidId,
  NotADataset,
  SchemaError,
  UnknownDomain,
  MissingTable,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline constexpr int kMinYear = 1900;
inline constexpr int kMaxYear = 2100;

enum class Section { Employment, EducationQualification };

enum class Repository { Zenodo, Dryad, Figshare, Unknown };

enum class Scenario { A_RepoAndDataCite, B_RepoOtherSource, C_DataCiteOnly, Excluded };

std::string_view to_string(Section s);
std::string_view to_string(Repository r);
std::string_view to_string(Scenario s);
Section parse_section(std::string_view s);
Repository parse_repository(std::string_view s);
Scenario parse_scenario(std::string_view s);

struct WorkRecord {
  std::string put_code;
  std::string work_type;
  std::optional<std::string> doi;  // normalized
  std::optional<std::string> source_name;
  std::optional<int> pub_year;

  bool operator==(const WorkRecord&) const = default;
};

struct AffiliationRecord {
  Section section = Section::Employment;
  std::optional<std::string> country;
  std::optional<std::string> role_title;
  std::optional<int> start_year;
  std::optional<int> end_year;  // absent = ongoing

  bool operator==(const AffiliationRecord&) const = default;
};

struct ProfileRecord {
  std::string orcid_id;
  std::vector<WorkRecord> works;
  std::vector<AffiliationRecord> affiliations;

  bool operator==(const ProfileRecord&) const = default;
};

/// Case-folded, whitespace-free comparison key for a work's crediting source.
struct SourceKey {
  std::string key;
  bool is_datacite = false;

  bool operator==(const SourceKey&) const = default;
};

/// Shape check only: ####-####-####-###X, no checksum.
bool is_valid_orcid_id(std::string_view id);

/// Lowercases, trims and strips resolver prefixes ("https://doi.org/",
/// "http://dx.doi.org/", "doi:"). Throws EmptyInput / NotADoi.
std::string normalize_doi(std::string_view raw);

std::optional<SourceKey> normalize_source(const std::optional<std::string>& raw);

/// ISO-3166-1 alpha-2 membership (officially assigned codes).
bool is_iso_country(std::string_view code);

std::optional<int> checked_year(int year);

// ASCII helpers shared by the classifiers.
std::string ascii_lower(std::string_view s);
std::string_view trim(std::string_view s);
/// Lowercase alphanumerics only; "Data-Set" -> "dataset".
std::string type_key(std::string_view s);

}  // namespace orcidds
