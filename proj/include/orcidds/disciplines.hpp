#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "orcidds/model.hpp"

namespace orcidds {

/// DOI -> subject categories, and category -> high-level domain. Read-only
/// after construction.
class CategoryMap {
 public:
  CategoryMap() = default;
  /// Throws UnknownDomain when a category has no domain, SchemaError when the
  /// domain count differs from `expected_domains`.
  CategoryMap(std::map<std::string, std::vector<std::string>> doi_categories,
              std::map<std::string, std::string> category_domain,
              std::optional<std::size_t> expected_domains = std::nullopt);

  /// CSV `doi,categories` (categories ';'-separated) and CSV `category,domain`,
  /// both with header rows. Throws IoError / SchemaError / UnknownDomain.
  static CategoryMap load(const std::filesystem::path& doi_map, const std::filesystem::path& domain_map,
                          std::optional<std::size_t> expected_domains = std::nullopt);

  /// Categories of a normalized DOI, nullptr when unmatched.
  const std::vector<std::string>* categories_of(const std::string& doi) const;
  const std::string& domain_of(const std::string& category) const;
  std::set<std::string> domains() const;
  std::size_t doi_count() const { return doi_categories_.size(); }

 private:
  std::map<std::string, std::vector<std::string>> doi_categories_;
  std::map<std::string, std::string> category_domain_;
};

struct DisciplineProfile {
  std::string orcid_id;
  std::size_t matched_articles = 0;
  std::map<std::string, double> weights;  // domain -> share, sums to 1 when matched
  std::optional<std::string> modal_domain;
  bool tied = false;

  bool operator==(const DisciplineProfile&) const = default;
};

/// Two weights closer than this are a tie.
inline constexpr double kTieTolerance = 1e-12;

/// Each matched article (distinct DOI among the profile's journal articles)
/// carries 1/matched, split equally over its categories and summed into
/// domains. Ties for the maximum are flagged and resolved alphabetically.
DisciplineProfile fractional_weights(const ProfileRecord& profile, const CategoryMap& map);

/// Distinct matched article DOIs of a profile.
std::set<std::string> matched_article_dois(const ProfileRecord& profile, const CategoryMap& map);

struct DomainShare {
  std::string domain;
  std::size_t count = 0;
  double percent = 0;
};

/// Counts by modal domain over profiles with >= 1 matched article, ordered by
/// count descending then domain name.
std::vector<DomainShare> discipline_distribution(std::span<const DisciplineProfile> producers);

/// "Domain=weight;..." with round-trippable weights.
std::string format_weights(const std::map<std::string, double>& weights);
std::map<std::string, double> parse_weights(std::string_view text);

}  // namespace orcidds
