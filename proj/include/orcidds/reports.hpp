#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "orcidds/affiliations.hpp"
#include "orcidds/careers.hpp"
#include "orcidds/classifier.hpp"
#include "orcidds/disciplines.hpp"

namespace orcidds {

enum class ReportKind { TableOne, SourceOverlap, Country, Discipline, Cohort };

std::string_view to_string(ReportKind kind);
/// File stem used for a report kind ("table_one", "countries", ...).
std::string_view report_file_stem(ReportKind kind);

/// Empty, integral count, real (printed with 6 decimals) or text label.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

struct Provenance {
  std::map<std::string, std::string> config;
  std::map<std::string, std::string> inputs;  // stage table -> sha256

  bool operator==(const Provenance&) const = default;
};

struct IndicatorReport {
  ReportKind kind = ReportKind::TableOne;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  Provenance provenance;

  std::string to_csv() const;
  /// Same values as the CSV plus provenance.
  std::string to_json() const;
};

std::string format_cell(const Cell& cell);

struct CorpusAggregates {
  std::size_t total_profiles = 0;
  std::size_t profiles_with_dataset = 0;
  std::size_t distinct_datasets = 0;
  std::size_t producers = 0;
  std::size_t distinct_in_scope_datasets = 0;
  std::size_t producer_country_links = 0;
  std::size_t all_country_links = 0;
  std::size_t producers_with_matched_article = 0;
  std::size_t matched_articles = 0;
};

IndicatorReport table_one(const CorpusAggregates& aggregates);

/// Per repository, DataCite-sourced vs other-sourced in-scope datasets, plus
/// the DataCite-sourced total over every repository.
IndicatorReport source_overlap_report(std::span<const DatasetClassification> in_scope_datasets);

/// Top `top_n` countries by producer count (ties alphabetical). Shares use
/// researcher counts as denominators. Throws std::invalid_argument if top_n < 1.
IndicatorReport country_report(const CountryLinks& links, int top_n = 15);

IndicatorReport discipline_report(std::span<const DomainShare> distribution);

IndicatorReport cohort_report(std::span<const CohortStat> stats);

}  // namespace orcidds
