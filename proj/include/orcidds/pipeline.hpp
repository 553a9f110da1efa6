#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orcidds/careers.hpp"
#include "orcidds/model.hpp"

namespace orcidds {

struct PipelineConfig {
  std::filesystem::path archive;
  std::filesystem::path out = "out";
  int window = kDefaultWindow;
  int cohort_from = kDefaultCohortFrom;
  int cohort_to = kDefaultCohortTo;
  int top_n = 15;
  std::optional<std::filesystem::path> category_map;
  std::optional<std::filesystem::path> domain_map;
  std::optional<std::filesystem::path> phd_lexicon;
  unsigned workers = 1;

  /// Throws std::invalid_argument on window < 1, reversed cohort range,
  /// top_n < 1 or workers < 1.
  void validate() const;

  std::filesystem::path tables_dir() const { return out / "tables"; }
  std::filesystem::path reports_dir() const { return out / "reports"; }
};

struct StageResult {
  std::string stage;
  std::map<std::string, std::size_t> tables;        // table -> rows written
  std::map<std::string, std::uint64_t> counters;
  std::vector<std::filesystem::path> outputs;
  std::vector<std::string> warnings;
};

inline constexpr const char* kStages[] = {"ingest", "classify", "countries", "careers", "disciplines", "report"};

StageResult run_ingest(const PipelineConfig& config);
StageResult run_classify(const PipelineConfig& config);
StageResult run_countries(const PipelineConfig& config);
StageResult run_careers(const PipelineConfig& config);
StageResult run_disciplines(const PipelineConfig& config);
StageResult run_report(const PipelineConfig& config);

/// Dispatches one of ingest, classify, countries, careers, disciplines,
/// report or all. Throws std::invalid_argument for an unknown subcommand.
std::vector<StageResult> run(const std::string& subcommand, const PipelineConfig& config);

/// One JSON object summarizing the stages (row counts per table, counters).
std::string summary_json(const std::string& subcommand, const std::vector<StageResult>& results);

/// Profiles reassembled from the profiles/works/affiliations stage tables.
std::vector<ProfileRecord> load_profiles(const std::filesystem::path& tables_dir);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace orcidds
