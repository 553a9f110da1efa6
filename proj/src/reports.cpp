#include "orcidds/reports.hpp"

#include <algorithm>
#include <cstdio>
#include <json.hpp>
#include <stdexcept>

#include "orcidds/store.hpp"

namespace orcidds {

namespace {

std::int64_t count(std::size_t n) { return static_cast<std::int64_t>(n); }

Cell optional_real(const std::optional<double>& v) {
  if (!v) return std::monostate{};
  return *v;
}

double percent(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

}  // namespace

std::string_view to_string(ReportKind kind) {
  switch (kind) {
    case ReportKind::TableOne: return "TableOne";
    case ReportKind::SourceOverlap: return "SourceOverlap";
    case ReportKind::Country: return "Country";
    case ReportKind::Discipline: return "Discipline";
    case ReportKind::Cohort: return "Cohort";
  }
  return "?";
}

std::string_view report_file_stem(ReportKind kind) {
  switch (kind) {
    case ReportKind::TableOne: return "table_one";
    case ReportKind::SourceOverlap: return "source_overlap";
    case ReportKind::Country: return "countries";
    case ReportKind::Discipline: return "disciplines";
    case ReportKind::Cohort: return "cohorts";
  }
  return "report";
}

std::string format_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6f", v);
      return buf;
    }
    std::string operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, cell);
}

std::string IndicatorReport::to_csv() const {
  std::string out = csv::format_row(columns);
  for (const auto& row : rows) {
    std::vector<std::string> fields;
    fields.reserve(row.size());
    for (const auto& c : row) fields.push_back(format_cell(c));
    out += csv::format_row(fields);
  }
  return out;
}

std::string IndicatorReport::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = to_string(kind);
  j["columns"] = columns;
  auto rows_json = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size() && i < columns.size(); ++i) {
      const auto& c = row[i];
      if (std::holds_alternative<std::monostate>(c))
        r[columns[i]] = nullptr;
      else if (auto* n = std::get_if<std::int64_t>(&c))
        r[columns[i]] = *n;
      else if (std::holds_alternative<double>(c))
        r[columns[i]] = std::stod(format_cell(c));  // same rounding as the CSV
      else
        r[columns[i]] = std::get<std::string>(c);
    }
    rows_json.push_back(std::move(r));
  }
  j["rows"] = std::move(rows_json);
  j["provenance"]["config"] = provenance.config;
  j["provenance"]["inputs"] = provenance.inputs;
  return j.dump(2) + "\n";
}

IndicatorReport table_one(const CorpusAggregates& a) {
  IndicatorReport r;
  r.kind = ReportKind::TableOne;
  r.columns = {"metric", "value"};
  auto add = [&](const char* label, std::size_t v) { r.rows.push_back({std::string(label), count(v)}); };
  add("total_profiles", a.total_profiles);
  add("profiles_with_dataset", a.profiles_with_dataset);
  add("distinct_datasets", a.distinct_datasets);
  add("profiles_with_in_scope_dataset", a.producers);
  add("distinct_in_scope_datasets", a.distinct_in_scope_datasets);
  add("producer_country_links", a.producer_country_links);
  add("all_country_links", a.all_country_links);
  add("producers_with_matched_article", a.producers_with_matched_article);
  add("matched_articles", a.matched_articles);
  return r;
}

IndicatorReport source_overlap_report(std::span<const DatasetClassification> in_scope_datasets) {
  IndicatorReport r;
  r.kind = ReportKind::SourceOverlap;
  r.columns = {"repository", "datacite", "other"};
  std::map<Repository, std::pair<std::size_t, std::size_t>> per_repo;
  std::size_t datacite_total = 0;
  for (const auto& d : in_scope_datasets) {
    if (!d.in_scope) continue;
    if (d.source_is_datacite) datacite_total++;
    if (d.repository == Repository::Unknown) continue;
    auto& [dc, other] = per_repo[d.repository];
    (d.source_is_datacite ? dc : other)++;
  }
  for (auto repo : {Repository::Zenodo, Repository::Dryad, Repository::Figshare}) {
    auto [dc, other] = per_repo[repo];
    r.rows.push_back({std::string(to_string(repo)), count(dc), count(other)});
  }
  r.rows.push_back({std::string("all_datacite"), count(datacite_total), std::monostate{}});
  return r;
}

IndicatorReport country_report(const CountryLinks& links, int top_n) {
  if (top_n < 1) throw std::invalid_argument("top_n must be >= 1");
  IndicatorReport r;
  r.kind = ReportKind::Country;
  r.columns = {"country", "producers", "producer_share", "profiles", "overall_share"};
  const std::size_t producer_base = links.producers_with_country();
  const std::size_t profile_base = links.profiles_with_country();

  std::vector<std::pair<std::string, CountryCount>> ranked;
  for (const auto& [country, c] : links.per_country())
    if (c.producers > 0) ranked.emplace_back(country, c);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second.producers > b.second.producers; });
  if (ranked.size() > static_cast<std::size_t>(top_n)) ranked.resize(static_cast<std::size_t>(top_n));

  for (const auto& [country, c] : ranked) {
    r.rows.push_back({country, count(c.producers), percent(c.producers, producer_base), count(c.profiles),
                      percent(c.profiles, profile_base)});
  }
  r.provenance.config["share_denominator"] = "researchers";
  r.provenance.config["top_n"] = std::to_string(top_n);
  return r;
}

IndicatorReport discipline_report(std::span<const DomainShare> distribution) {
  IndicatorReport r;
  r.kind = ReportKind::Discipline;
  r.columns = {"domain", "count", "percent"};
  for (const auto& d : distribution) r.rows.push_back({d.domain, count(d.count), d.percent});
  return r;
}

IndicatorReport cohort_report(std::span<const CohortStat> stats) {
  IndicatorReport r;
  r.kind = ReportKind::Cohort;
  r.columns = {"cohort", "n_dataset", "mean_years_to_dataset", "n_article", "mean_years_to_article"};
  for (const auto& s : stats)
    r.rows.push_back({std::to_string(s.cohort_year), count(s.n_dataset), optional_real(s.mean_years_to_dataset),
                      count(s.n_article), optional_real(s.mean_years_to_article)});
  return r;
}

}  // namespace orcidds
