#include "orcidds/disciplines.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>

#include "orcidds/classifier.hpp"
#include "orcidds/store.hpp"

namespace orcidds {

namespace {

std::vector<Row> read_csv_file(const std::filesystem::path& path, const std::vector<std::string>& header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  csv::Reader reader(in);
  Row row;
  if (!reader.next(row)) throw Error(ErrorCode::SchemaError, path.string() + ": missing header row");
  for (auto& cell : row) cell = ascii_lower(trim(cell));
  if (row != header) throw Error(ErrorCode::SchemaError, path.string() + ": unexpected header");
  std::vector<Row> rows;
  while (reader.next(row)) {
    if (row.size() != header.size())
      throw Error(ErrorCode::SchemaError,
                  path.string() + ": line " + std::to_string(reader.line()) + " has " +
                      std::to_string(row.size()) + " cells");
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

CategoryMap::CategoryMap(std::map<std::string, std::vector<std::string>> doi_categories,
                         std::map<std::string, std::string> category_domain,
                         std::optional<std::size_t> expected_domains)
    : doi_categories_(std::move(doi_categories)), category_domain_(std::move(category_domain)) {
  for (auto& [doi, cats] : doi_categories_) {
    std::sort(cats.begin(), cats.end());
    cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
    for (const auto& c : cats)
      if (!category_domain_.contains(c))
        throw Error(ErrorCode::UnknownDomain, "category '" + c + "' (DOI " + doi + ") has no domain");
  }
  for (const auto& [cat, domain] : category_domain_)
    if (domain.empty() || domain.find_first_of(";=") != std::string::npos)
      throw Error(ErrorCode::SchemaError, "invalid domain label '" + domain + "' for category " + cat);
  if (expected_domains && domains().size() != *expected_domains)
    throw Error(ErrorCode::SchemaError, "domain map defines " + std::to_string(domains().size()) +
                                            " domains, expected " + std::to_string(*expected_domains));
}

CategoryMap CategoryMap::load(const std::filesystem::path& doi_map, const std::filesystem::path& domain_map,
                              std::optional<std::size_t> expected_domains) {
  std::map<std::string, std::string> category_domain;
  for (auto& row : read_csv_file(domain_map, {"category", "domain"})) {
    auto cat = std::string(trim(row[0]));
    auto domain = std::string(trim(row[1]));
    if (cat.empty()) throw Error(ErrorCode::SchemaError, domain_map.string() + ": empty category");
    auto [it, inserted] = category_domain.emplace(cat, domain);
    if (!inserted && it->second != domain)
      throw Error(ErrorCode::SchemaError, "category '" + cat + "' mapped to two domains");
  }
  std::map<std::string, std::vector<std::string>> doi_categories;
  for (auto& row : read_csv_file(doi_map, {"doi", "categories"})) {
    std::string doi;
    try {
      doi = normalize_doi(row[0]);
    } catch (const Error& e) {
      throw Error(ErrorCode::SchemaError, doi_map.string() + ": " + e.what());
    }
    auto cats = csv::split_list(row[1], ';');
    auto& slot = doi_categories[doi];
    slot.insert(slot.end(), cats.begin(), cats.end());
  }
  return CategoryMap(std::move(doi_categories), std::move(category_domain), expected_domains);
}

const std::vector<std::string>* CategoryMap::categories_of(const std::string& doi) const {
  auto it = doi_categories_.find(doi);
  if (it == doi_categories_.end() || it->second.empty()) return nullptr;
  return &it->second;
}

const std::string& CategoryMap::domain_of(const std::string& category) const {
  auto it = category_domain_.find(category);
  if (it == category_domain_.end()) throw Error(ErrorCode::UnknownDomain, "category '" + category + "' has no domain");
  return it->second;
}

std::set<std::string> CategoryMap::domains() const {
  std::set<std::string> out;
  for (const auto& [cat, domain] : category_domain_) out.insert(domain);
  return out;
}

std::set<std::string> matched_article_dois(const ProfileRecord& profile, const CategoryMap& map) {
  std::set<std::string> out;
  for (const auto& w : profile.works)
    if (is_journal_article(w) && w.doi && map.categories_of(*w.doi)) out.insert(*w.doi);
  return out;
}

DisciplineProfile fractional_weights(const ProfileRecord& profile, const CategoryMap& map) {
  DisciplineProfile out;
  out.orcid_id = profile.orcid_id;
  auto dois = matched_article_dois(profile, map);
  out.matched_articles = dois.size();
  if (dois.empty()) return out;

  const double m = static_cast<double>(dois.size());
  for (const auto& doi : dois) {
    const auto& cats = *map.categories_of(doi);
    const double share = 1.0 / (m * static_cast<double>(cats.size()));
    for (const auto& c : cats) out.weights[map.domain_of(c)] += share;
  }

  double best = 0;
  for (const auto& [domain, w] : out.weights) best = std::max(best, w);
  std::size_t at_best = 0;
  for (const auto& [domain, w] : out.weights) {
    if (best - w <= kTieTolerance) {
      if (!out.modal_domain) out.modal_domain = domain;  // map order: alphabetical
      at_best++;
    }
  }
  out.tied = at_best > 1;
  return out;
}

std::vector<DomainShare> discipline_distribution(std::span<const DisciplineProfile> producers) {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& p : producers) {
    if (p.matched_articles == 0 || !p.modal_domain) continue;
    counts[*p.modal_domain]++;
    total++;
  }
  std::vector<DomainShare> out;
  for (const auto& [domain, n] : counts)
    out.push_back(DomainShare{domain, n, 100.0 * static_cast<double>(n) / static_cast<double>(total)});
  std::stable_sort(out.begin(), out.end(), [](const DomainShare& a, const DomainShare& b) { return a.count > b.count; });
  return out;
}

std::string format_weights(const std::map<std::string, double>& weights) {
  std::string out;
  for (const auto& [domain, w] : weights) {
    if (!out.empty()) out.push_back(';');
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", w);
    out += domain + "=" + buf;
  }
  return out;
}

std::map<std::string, double> parse_weights(std::string_view text) {
  std::map<std::string, double> out;
  for (const auto& item : csv::split_list(text, ';')) {
    auto eq = item.rfind('=');
    if (eq == std::string::npos) throw Error(ErrorCode::SchemaError, "bad weight entry '" + item + "'");
    double w = 0;
    const char* begin = item.data() + eq + 1;
    const char* end = item.data() + item.size();
    auto [ptr, ec] = std::from_chars(begin, end, w);
    if (ec != std::errc() || ptr != end) throw Error(ErrorCode::SchemaError, "bad weight entry '" + item + "'");
    out[item.substr(0, eq)] = w;
  }
  return out;
}

}  // namespace orcidds
