#include "orcidds/classifier.hpp"

#include <algorithm>

namespace orcidds {

bool is_dataset(const WorkRecord& work) {
  auto key = type_key(work.work_type);
  return key == "dataset" || key == "datasets";
}

bool is_journal_article(const WorkRecord& work) { return type_key(work.work_type) == "journalarticle"; }

Repository repository_of(const std::optional<std::string>& doi) {
  if (!doi) return Repository::Unknown;
  if (doi->find("zenodo") != std::string::npos) return Repository::Zenodo;
  if (doi->find("dryad") != std::string::npos) return Repository::Dryad;
  if (doi->find("figshare") != std::string::npos) return Repository::Figshare;
  return Repository::Unknown;
}

Scenario scenario_for(Repository repository, bool source_is_datacite) {
  bool known = repository != Repository::Unknown;
  if (known) return source_is_datacite ? Scenario::A_RepoAndDataCite : Scenario::B_RepoOtherSource;
  return source_is_datacite ? Scenario::C_DataCiteOnly : Scenario::Excluded;
}

DatasetClassification classify(const WorkRecord& work, const std::string& owner) {
  if (!is_dataset(work))
    throw Error(ErrorCode::NotADataset, "work " + work.put_code + " has type '" + work.work_type + "'");
  DatasetClassification c;
  c.orcid_id = owner;
  c.put_code = work.put_code;
  c.doi = work.doi;
  c.repository = repository_of(work.doi);
  if (auto source = normalize_source(work.source_name)) {
    c.source = source->key;
    c.source_is_datacite = source->is_datacite;
  }
  c.scenario = scenario_for(c.repository, c.source_is_datacite);
  c.in_scope = c.scenario != Scenario::Excluded;
  return c;
}

std::string dedupe_key(const DatasetClassification& c) {
  if (c.doi) return "doi:" + *c.doi;
  return "work:" + c.orcid_id + "/" + c.put_code;
}

void DedupeAccumulator::add(const DatasetClassification& c) {
  auto key = dedupe_key(c);
  researcher_keys_.emplace(c.orcid_id, key);
  auto [it, inserted] = by_key_.try_emplace(key, c);
  if (!inserted && c < it->second) it->second = c;
}

void DedupeAccumulator::merge(const DedupeAccumulator& other) {
  for (const auto& [key, c] : other.by_key_) {
    auto [it, inserted] = by_key_.try_emplace(key, c);
    if (!inserted && c < it->second) it->second = c;
  }
  researcher_keys_.insert(other.researcher_keys_.begin(), other.researcher_keys_.end());
}

DedupeResult DedupeAccumulator::result() const {
  DedupeResult r;
  r.datasets.reserve(by_key_.size());
  for (const auto& [key, c] : by_key_) r.datasets.push_back(c);
  std::sort(r.datasets.begin(), r.datasets.end());
  for (const auto& [orcid, key] : researcher_keys_) r.per_researcher[orcid]++;
  return r;
}

DedupeResult dedupe(std::span<const DatasetClassification> classifications) {
  DedupeAccumulator acc;
  for (const auto& c : classifications) acc.add(c);
  return acc.result();
}

InScopeSelection select_in_scope(std::span<const DatasetClassification> classifications) {
  DedupeAccumulator acc;
  for (const auto& c : classifications)
    if (c.in_scope) acc.add(c);
  auto result = acc.result();
  return InScopeSelection{std::move(result.datasets), std::move(result.per_researcher)};
}

InScopeSelection select_in_scope(std::span<const ProfileRecord> profiles) {
  std::vector<DatasetClassification> all;
  for (const auto& p : profiles)
    for (const auto& w : p.works)
      if (is_dataset(w)) all.push_back(classify(w, p.orcid_id));
  return select_in_scope(std::span<const DatasetClassification>(all));
}

}  // namespace orcidds
