#include "orcidds/affiliations.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

namespace orcidds {

namespace {

using RecencyKey = std::tuple<int, int, int>;

RecencyKey recency(const CountryEntry& e) {
  bool dated = e.start_year || e.end_year;
  return {dated ? 1 : 0, e.end_year.value_or(std::numeric_limits<int>::max()),
          e.start_year.value_or(std::numeric_limits<int>::min())};
}

}  // namespace

std::vector<CountryEntry> merge_affiliations(const ProfileRecord& profile) {
  std::vector<CountryEntry> out;
  for (const auto& a : profile.affiliations) {
    if (!a.country) continue;
    out.push_back(CountryEntry{*a.country, a.section, a.start_year, a.end_year, is_iso_country(*a.country)});
  }
  return out;
}

std::set<std::string> most_recent_countries(std::span<const CountryEntry> entries) {
  std::set<std::string> out;
  if (entries.empty()) return out;
  RecencyKey best = recency(entries.front());
  for (const auto& e : entries) best = std::max(best, recency(e));
  for (const auto& e : entries)
    if (recency(e) == best) out.insert(e.country);
  return out;
}

std::vector<CountryLink> country_links_for(const ProfileRecord& profile, bool is_producer) {
  auto entries = merge_affiliations(profile);
  auto recent = most_recent_countries(entries);
  std::vector<CountryLink> out;
  if (recent.empty()) return out;
  RecencyKey best = recency(entries.front());
  for (const auto& e : entries) best = std::max(best, recency(e));
  for (const auto& country : recent) {
    CountryLink link{profile.orcid_id, country, is_producer, is_iso_country(country), 0};
    for (const auto& e : entries)
      if (e.country == country && recency(e) == best) link.entries++;
    out.push_back(std::move(link));
  }
  return out;
}

CountryLinks build_country_links(std::span<const ProfileRecord> profiles,
                                 const std::map<std::string, std::size_t>& producers) {
  CountryLinks result;
  for (const auto& p : profiles) {
    auto links = country_links_for(p, producers.contains(p.orcid_id));
    result.links.insert(result.links.end(), std::make_move_iterator(links.begin()),
                        std::make_move_iterator(links.end()));
  }
  std::sort(result.links.begin(), result.links.end(), [](const CountryLink& a, const CountryLink& b) {
    return std::tie(a.orcid_id, a.country) < std::tie(b.orcid_id, b.country);
  });
  // Repeated profiles in the input collapse to one link per (orcid_id, country).
  result.links.erase(std::unique(result.links.begin(), result.links.end(),
                                 [](const CountryLink& a, const CountryLink& b) {
                                   return a.orcid_id == b.orcid_id && a.country == b.country;
                                 }),
                     result.links.end());
  return result;
}

std::size_t CountryLinks::producer_links() const {
  return static_cast<std::size_t>(
      std::count_if(links.begin(), links.end(), [](const CountryLink& l) { return l.is_producer; }));
}

std::size_t CountryLinks::producer_raw_entries() const {
  std::size_t n = 0;
  for (const auto& l : links)
    if (l.is_producer) n += l.entries;
  return n;
}

std::size_t CountryLinks::all_raw_entries() const {
  std::size_t n = 0;
  for (const auto& l : links) n += l.entries;
  return n;
}

std::size_t CountryLinks::invalid_links() const {
  return static_cast<std::size_t>(
      std::count_if(links.begin(), links.end(), [](const CountryLink& l) { return !l.valid_iso; }));
}

std::size_t CountryLinks::producers_with_country() const {
  std::set<std::string_view> ids;
  for (const auto& l : links)
    if (l.is_producer) ids.insert(l.orcid_id);
  return ids.size();
}

std::size_t CountryLinks::profiles_with_country() const {
  std::set<std::string_view> ids;
  for (const auto& l : links) ids.insert(l.orcid_id);
  return ids.size();
}

std::map<std::string, CountryCount> CountryLinks::per_country() const {
  std::map<std::string, CountryCount> out;
  for (const auto& l : links) {
    auto& c = out[l.country];
    c.profiles++;
    if (l.is_producer) c.producers++;
  }
  return out;
}

}  // namespace orcidds
