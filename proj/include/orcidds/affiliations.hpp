#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "orcidds/model.hpp"

namespace orcidds {

struct CountryEntry {
  std::string country;  // verbatim from the record
  Section section = Section::Employment;
  std::optional<int> start_year;
  std::optional<int> end_year;
  bool valid_iso = false;

  bool operator==(const CountryEntry&) const = default;
};

/// Employment and education/qualification entries that carry a country.
std::vector<CountryEntry> merge_affiliations(const ProfileRecord& profile);

/// Countries of the entries sharing the maximal recency key. Ongoing (no end
/// year) beats any end year; later start breaks ties; entries with neither
/// date only count when nothing is dated.
std::set<std::string> most_recent_countries(std::span<const CountryEntry> entries);

struct CountryLink {
  std::string orcid_id;
  std::string country;
  bool is_producer = false;
  bool valid_iso = false;
  /// Most-recent affiliation rows backing this link (raw linkage count).
  std::size_t entries = 0;

  bool operator==(const CountryLink&) const = default;
};

struct CountryCount {
  std::size_t producers = 0;
  std::size_t profiles = 0;
};

struct CountryLinks {
  std::vector<CountryLink> links;  // sorted by (orcid_id, country); every profile

  std::size_t producer_links() const;
  std::size_t all_links() const { return links.size(); }
  std::size_t producer_raw_entries() const;
  std::size_t all_raw_entries() const;
  std::size_t invalid_links() const;
  /// Distinct researchers with >= 1 country, producers and all profiles.
  std::size_t producers_with_country() const;
  std::size_t profiles_with_country() const;
  std::map<std::string, CountryCount> per_country() const;
};

/// Links for a single profile.
std::vector<CountryLink> country_links_for(const ProfileRecord& profile, bool is_producer);

CountryLinks build_country_links(std::span<const ProfileRecord> profiles,
                                 const std::map<std::string, std::size_t>& producers);

}  // namespace orcidds
