#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "orcidds/model.hpp"

namespace orcidds {

struct DatasetClassification {
  std::string orcid_id;
  std::string put_code;
  std::optional<std::string> doi;
  Repository repository = Repository::Unknown;
  std::optional<std::string> source;  // normalized source key
  bool source_is_datacite = false;
  Scenario scenario = Scenario::Excluded;
  bool in_scope = false;

  bool operator==(const DatasetClassification&) const = default;
  auto operator<=>(const DatasetClassification& o) const {
    if (auto c = orcid_id <=> o.orcid_id; c != 0) return c;
    return put_code <=> o.put_code;
  }
};

/// Work type "data-set" / "dataset" / "DATASETS" / "data set".
bool is_dataset(const WorkRecord& work);
bool is_journal_article(const WorkRecord& work);

/// Substring rule on the DOI, checked zenodo, dryad, figshare in that order.
Repository repository_of(const std::optional<std::string>& doi);

/// Repository x DataCite-source decision table.
Scenario scenario_for(Repository repository, bool source_is_datacite);

/// Throws NotADataset if !is_dataset(work).
DatasetClassification classify(const WorkRecord& work, const std::string& owner);

/// Distinct-dataset identity: the DOI when present, else (orcid_id, put_code).
std::string dedupe_key(const DatasetClassification& c);

struct DedupeResult {
  /// One representative per distinct key: the smallest (orcid_id, put_code).
  std::vector<DatasetClassification> datasets;
  /// orcid_id -> number of distinct dataset keys credited to that profile.
  std::map<std::string, std::size_t> per_researcher;

  bool operator==(const DedupeResult&) const = default;
};

/// Commutative accumulator so partial results from several workers can merge.
class DedupeAccumulator {
 public:
  void add(const DatasetClassification& c);
  void merge(const DedupeAccumulator& other);
  DedupeResult result() const;
  std::size_t distinct() const { return by_key_.size(); }

 private:
  std::map<std::string, DatasetClassification> by_key_;
  std::set<std::pair<std::string, std::string>> researcher_keys_;
};

DedupeResult dedupe(std::span<const DatasetClassification> classifications);

struct InScopeSelection {
  std::vector<DatasetClassification> datasets;     // deduped, in scope only
  std::map<std::string, std::size_t> producers;    // orcid_id -> in-scope distinct datasets
};

InScopeSelection select_in_scope(std::span<const ProfileRecord> profiles);
/// Same selection over already-classified rows (the stage-table path).
InScopeSelection select_in_scope(std::span<const DatasetClassification> classifications);

}  // namespace orcidds
