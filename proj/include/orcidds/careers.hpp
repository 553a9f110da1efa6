#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "orcidds/model.hpp"

namespace orcidds {

inline constexpr int kDefaultWindow = 5;
inline constexpr int kDefaultCohortFrom = 2010;
inline constexpr int kDefaultCohortTo = 2015;

/// English doctoral-status terms matched as whole words against folded role
/// titles.
class PhdLexicon {
 public:
  PhdLexicon();  // phd, ph d, dphil, doctorate, doctoral
  explicit PhdLexicon(std::vector<std::string> terms);
  /// One term per line; blank lines and '#' comments skipped. Throws IoError.
  static PhdLexicon load(const std::filesystem::path& path);

  bool matches(std::string_view role_title) const;
  const std::vector<std::string>& terms() const { return terms_; }

 private:
  std::vector<std::string> terms_;  // folded
};

/// Lowercase, punctuation removed, whitespace runs collapsed to one space.
std::string fold_role_text(std::string_view text);

/// Earliest start year among education/qualification entries whose role
/// title names a doctorate.
std::optional<int> detect_phd_start(std::span<const AffiliationRecord> affiliations,
                                    const PhdLexicon& lexicon = PhdLexicon());

enum class OutputKind { Dataset, JournalArticle };

/// (orcid_id, put_code) of every in-scope dataset work.
using InScopeWorks = std::set<std::pair<std::string, std::string>>;

std::optional<int> first_output_year(const ProfileRecord& profile, OutputKind kind,
                                     const InScopeWorks& in_scope_datasets);

struct CareerRecord {
  std::string orcid_id;
  bool is_producer = false;
  std::optional<int> phd_start_year;
  std::optional<int> first_dataset_year;
  std::optional<int> first_article_year;

  bool operator==(const CareerRecord&) const = default;
};

CareerRecord career_of(const ProfileRecord& profile, bool is_producer,
                       const InScopeWorks& in_scope_datasets, const PhdLexicon& lexicon);

/// Years from PhD start to first output, when 0 <= delta <= window.
struct Eligibility {
  std::optional<int> dataset_delta;
  std::optional<int> article_delta;
};

/// Throws std::invalid_argument when window < 1.
Eligibility window_filter(const CareerRecord& career, int window = kDefaultWindow);

struct CohortStat {
  int cohort_year = 0;
  std::size_t n_dataset = 0;
  std::optional<double> mean_years_to_dataset;
  std::size_t n_article = 0;
  std::optional<double> mean_years_to_article;

  bool operator==(const CohortStat&) const = default;
};

/// Partial (sum, count) per cohort year; merge is commutative.
class CohortAccumulator {
 public:
  explicit CohortAccumulator(int window = kDefaultWindow);
  void add(const CareerRecord& career);
  void merge(const CohortAccumulator& other);
  std::vector<CohortStat> stats(int first_year, int last_year) const;

 private:
  struct Sums {
    long long dataset_sum = 0;
    std::size_t dataset_n = 0;
    long long article_sum = 0;
    std::size_t article_n = 0;
  };
  int window_;
  std::map<int, Sums> by_year_;
};

/// One row per year in [first_year, last_year]. Throws std::invalid_argument
/// on a reversed range or window < 1.
std::vector<CohortStat> cohort_stats(std::span<const CareerRecord> careers,
                                     int first_year = kDefaultCohortFrom,
                                     int last_year = kDefaultCohortTo, int window = kDefaultWindow);

struct EraBreakdown {
  std::size_t before = 0;  // PhD start < first_year
  std::size_t during = 0;
  std::size_t after = 0;   // PhD start > last_year
  std::optional<double> share_before;
  std::optional<double> share_during;
  std::optional<double> share_after;
};

/// Shares of dataset-eligible researchers by PhD-start era.
EraBreakdown era_breakdown(std::span<const CareerRecord> careers, int window = kDefaultWindow,
                           int first_year = kDefaultCohortFrom, int last_year = kDefaultCohortTo);

}  // namespace orcidds
