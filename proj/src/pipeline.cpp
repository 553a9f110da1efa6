#include "orcidds/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <stdexcept>

#include "orcidds/affiliations.hpp"
#include "orcidds/archive.hpp"
#include "orcidds/classifier.hpp"
#include "orcidds/disciplines.hpp"
#include "orcidds/reports.hpp"
#include "orcidds/store.hpp"

namespace fs = std::filesystem;

namespace orcidds {

namespace {

void log(const std::string& msg) { std::clog << "orcidds: " << msg << "\n"; }

std::string opt(const std::optional<std::string>& v) { return v.value_or(""); }
std::string opt(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }
std::string flag(bool b) { return b ? "1" : "0"; }

std::optional<std::string> opt_text(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

std::optional<int> opt_int(const std::string& s) {
  if (s.empty()) return std::nullopt;
  int v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

std::size_t to_size(const std::string& s) {
  std::size_t v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

std::vector<Row> read_stage(const PipelineConfig& config, const char* name) {
  return read_table(config.tables_dir(), stage_schema(name));
}

std::size_t write_stage(const PipelineConfig& config, const char* name, std::vector<Row> rows, StageResult& result) {
  std::size_t n = rows.size();
  result.outputs.push_back(write_table(config.tables_dir(), stage_schema(name), std::move(rows)));
  result.tables[name] = n;
  return n;
}

DatasetClassification dataset_from_row(const Row& r) {
  DatasetClassification c;
  c.orcid_id = r[0];
  c.put_code = r[1];
  c.doi = opt_text(r[2]);
  c.repository = parse_repository(r[3]);
  c.source = opt_text(r[4]);
  c.source_is_datacite = r[4] == "datacite";
  c.scenario = parse_scenario(r[5]);
  c.in_scope = r[6] == "1";
  return c;
}

std::vector<DatasetClassification> load_datasets(const PipelineConfig& config) {
  std::vector<DatasetClassification> out;
  for (const auto& r : read_stage(config, "datasets")) out.push_back(dataset_from_row(r));
  return out;
}

std::map<std::string, std::size_t> load_producers(const PipelineConfig& config) {
  std::map<std::string, std::size_t> out;
  for (const auto& r : read_stage(config, "producers")) out[r[0]] = to_size(r[1]);
  return out;
}

PhdLexicon lexicon_for(const PipelineConfig& config) {
  return config.phd_lexicon ? PhdLexicon::load(*config.phd_lexicon) : PhdLexicon();
}

std::string digest_or_default(const std::optional<fs::path>& p) { return p ? sha256_file(*p) : "default"; }

}  // namespace

void PipelineConfig::validate() const {
  if (window < 1) throw std::invalid_argument("--window must be >= 1");
  if (cohort_from > cohort_to) throw std::invalid_argument("--cohort-from must not exceed --cohort-to");
  if (top_n < 1) throw std::invalid_argument("--top-n must be >= 1");
  if (workers < 1) throw std::invalid_argument("--workers must be >= 1");
  if (category_map.has_value() != domain_map.has_value())
    throw std::invalid_argument("--category-map and --domain-map must be given together");
}

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

std::vector<ProfileRecord> load_profiles(const fs::path& tables_dir) {
  std::map<std::string, ProfileRecord> by_id;
  for (const auto& r : read_table(tables_dir, stage_schema("profiles"))) by_id[r[0]].orcid_id = r[0];
  for (const auto& r : read_table(tables_dir, stage_schema("works"))) {
    auto it = by_id.find(r[0]);
    if (it == by_id.end()) throw Error(ErrorCode::SchemaError, "work for unknown profile " + r[0]);
    it->second.works.push_back(WorkRecord{r[1], r[2], opt_text(r[3]), opt_text(r[4]), opt_int(r[5])});
  }
  for (const auto& r : read_table(tables_dir, stage_schema("affiliations"))) {
    auto it = by_id.find(r[0]);
    if (it == by_id.end()) throw Error(ErrorCode::SchemaError, "affiliation for unknown profile " + r[0]);
    it->second.affiliations.push_back(
        AffiliationRecord{parse_section(r[1]), opt_text(r[2]), opt_text(r[3]), opt_int(r[4]), opt_int(r[5])});
  }
  std::vector<ProfileRecord> out;
  out.reserve(by_id.size());
  for (auto& [id, p] : by_id) out.push_back(std::move(p));
  return out;
}

StageResult run_ingest(const PipelineConfig& config) {
  if (config.archive.empty()) throw Error(ErrorCode::IoError, "no --archive given");
  StageResult result{"ingest", {}, {}, {}, {}};
  const fs::path tables = config.tables_dir();
  TableWriter profiles(tables, stage_schema("profiles")), works(tables, stage_schema("works")),
      affiliations(tables, stage_schema("affiliations"));
  std::vector<std::string> failures;

  IngestOptions options;
  options.workers = config.workers;
  options.on_failure = [&](const IngestFailure& f) {
    failures.push_back(f.orcid_id + "\t" + f.reason + "\n");
    log("skipped record " + f.orcid_id + ": " + f.reason);
  };
  std::size_t seen = 0;
  auto stats = ingest(
      config.archive,
      [&](ProfileRecord&& p) {
        profiles.add({p.orcid_id});
        // Only the work types downstream stages read are kept.
        for (const auto& w : p.works)
          if (is_dataset(w) || is_journal_article(w))
            works.add({p.orcid_id, w.put_code, w.work_type, opt(w.doi), opt(w.source_name), opt(w.pub_year)});
        for (const auto& a : p.affiliations)
          affiliations.add({p.orcid_id, std::string(to_string(a.section)), opt(a.country), opt(a.role_title),
                            opt(a.start_year), opt(a.end_year)});
        if (++seen % 100000 == 0) log("parsed " + std::to_string(seen) + " records");
      },
      options);

  for (auto [name, writer] : std::initializer_list<std::pair<const char*, TableWriter*>>{
           {"profiles", &profiles}, {"works", &works}, {"affiliations", &affiliations}}) {
    result.outputs.push_back(writer->finish());
    result.tables[name] = writer->rows();
  }

  std::sort(failures.begin(), failures.end());
  std::string log_body;
  for (const auto& f : failures) log_body += f;
  auto log_path = config.out / "ingest_failures.tsv";
  write_file_atomic(log_path, log_body);
  result.outputs.push_back(log_path);

  result.counters = {{"records_seen", stats.records_seen},
                     {"records_parsed", stats.records_parsed},
                     {"records_failed", stats.records_failed},
                     {"bytes_read", stats.bytes_read}};
  return result;
}

StageResult run_classify(const PipelineConfig& config) {
  StageResult result{"classify", {}, {}, {}, {}};
  auto profiles = load_profiles(config.tables_dir());
  std::vector<DatasetClassification> all;
  for (const auto& p : profiles)
    for (const auto& w : p.works)
      if (is_dataset(w)) all.push_back(classify(w, p.orcid_id));

  std::vector<Row> dataset_rows;
  std::map<std::string, std::uint64_t> scenarios;
  for (const auto& c : all) {
    dataset_rows.push_back({c.orcid_id, c.put_code, opt(c.doi), std::string(to_string(c.repository)), opt(c.source),
                            std::string(to_string(c.scenario)), flag(c.in_scope)});
    scenarios["scenario_" + std::string(to_string(c.scenario))]++;
  }
  auto selection = select_in_scope(std::span<const DatasetClassification>(all));
  std::vector<Row> producer_rows;
  for (const auto& [id, n] : selection.producers) producer_rows.push_back({id, std::to_string(n)});

  write_stage(config, "datasets", std::move(dataset_rows), result);
  write_stage(config, "producers", std::move(producer_rows), result);
  result.counters = scenarios;
  result.counters["distinct_in_scope_datasets"] = selection.datasets.size();
  return result;
}

StageResult run_countries(const PipelineConfig& config) {
  StageResult result{"countries", {}, {}, {}, {}};
  auto profiles = load_profiles(config.tables_dir());
  auto producers = load_producers(config);
  auto links = build_country_links(profiles, producers);
  std::vector<Row> rows;
  for (const auto& l : links.links)
    rows.push_back({l.orcid_id, l.country, flag(l.is_producer), flag(l.valid_iso), std::to_string(l.entries)});
  write_stage(config, "country_links", std::move(rows), result);
  result.counters = {{"producer_links", links.producer_links()},
                     {"all_links", links.all_links()},
                     {"producer_raw_affiliations", links.producer_raw_entries()},
                     {"all_raw_affiliations", links.all_raw_entries()},
                     {"invalid_country_links", links.invalid_links()}};
  if (auto bad = links.invalid_links(); bad > 0)
    result.warnings.push_back(std::to_string(bad) + " country links use codes outside ISO-3166 alpha-2");
  return result;
}

StageResult run_careers(const PipelineConfig& config) {
  StageResult result{"careers", {}, {}, {}, {}};
  auto profiles = load_profiles(config.tables_dir());
  auto producers = load_producers(config);
  InScopeWorks in_scope;
  for (const auto& d : load_datasets(config))
    if (d.in_scope) in_scope.emplace(d.orcid_id, d.put_code);
  auto lexicon = lexicon_for(config);

  std::vector<Row> rows;
  std::uint64_t with_phd = 0, producers_with_phd = 0;
  for (const auto& p : profiles) {
    bool is_producer = producers.contains(p.orcid_id);
    auto career = career_of(p, is_producer, in_scope, lexicon);
    if (career.phd_start_year) {
      with_phd++;
      if (is_producer) producers_with_phd++;
    }
    if (!is_producer && !career.phd_start_year) continue;
    rows.push_back({career.orcid_id, flag(is_producer), opt(career.phd_start_year), opt(career.first_dataset_year),
                    opt(career.first_article_year)});
  }
  write_stage(config, "careers", std::move(rows), result);
  result.counters = {{"profiles_with_phd_start", with_phd}, {"producers_with_phd_start", producers_with_phd}};
  return result;
}

StageResult run_disciplines(const PipelineConfig& config) {
  StageResult result{"disciplines", {}, {}, {}, {}};
  auto profiles = load_profiles(config.tables_dir());
  auto producers = load_producers(config);
  CategoryMap map;
  if (config.category_map && config.domain_map)
    map = CategoryMap::load(*config.category_map, *config.domain_map);
  else
    result.warnings.push_back("no category map configured; no articles can be matched");

  std::vector<Row> rows;
  std::uint64_t matched_producers = 0;
  for (const auto& p : profiles) {
    if (!producers.contains(p.orcid_id)) continue;
    auto d = fractional_weights(p, map);
    if (d.matched_articles > 0) matched_producers++;
    rows.push_back({d.orcid_id, std::to_string(d.matched_articles), format_weights(d.weights), opt(d.modal_domain),
                    flag(d.tied)});
  }
  write_stage(config, "disciplines", std::move(rows), result);
  result.counters = {{"producers_with_matched_article", matched_producers}};
  return result;
}

StageResult run_report(const PipelineConfig& config) {
  StageResult result{"report", {}, {}, {}, {}};
  const fs::path tables = config.tables_dir();

  // Fail fast, naming the first stage table that is missing.
  for (const char* name : {"profiles", "works", "affiliations", "datasets", "producers", "country_links", "careers",
                           "disciplines"}) {
    if (!fs::exists(table_path(tables, stage_schema(name))))
      throw Error(ErrorCode::MissingTable, "missing table '" + std::string(name) + "' in " + tables.string() +
                                               "; run the stage that produces it first");
  }

  Provenance prov;
  for (const char* name : {"profiles", "works", "affiliations", "datasets", "producers", "country_links", "careers",
                           "disciplines"})
    prov.inputs[name] = sha256_file(table_path(tables, stage_schema(name)));
  prov.config = {{"window", std::to_string(config.window)},
                 {"cohort_from", std::to_string(config.cohort_from)},
                 {"cohort_to", std::to_string(config.cohort_to)},
                 {"top_n", std::to_string(config.top_n)},
                 {"phd_lexicon", digest_or_default(config.phd_lexicon)},
                 {"category_map", config.category_map ? sha256_file(*config.category_map) : "none"},
                 {"domain_map", config.domain_map ? sha256_file(*config.domain_map) : "none"},
                 {"share_denominator", "researchers"}};

  auto profile_rows = read_stage(config, "profiles");
  auto datasets = load_datasets(config);
  auto producers = load_producers(config);

  CountryLinks links;
  for (const auto& r : read_stage(config, "country_links"))
    links.links.push_back(CountryLink{r[0], r[1], r[2] == "1", r[3] == "1", to_size(r[4])});

  std::vector<CareerRecord> careers;
  for (const auto& r : read_stage(config, "careers"))
    if (r[1] == "1") careers.push_back(CareerRecord{r[0], true, opt_int(r[2]), opt_int(r[3]), opt_int(r[4])});

  std::vector<DisciplineProfile> disciplines;
  for (const auto& r : read_stage(config, "disciplines"))
    disciplines.push_back(DisciplineProfile{r[0], to_size(r[1]), parse_weights(r[2]), opt_text(r[3]), r[4] == "1"});

  CorpusAggregates agg;
  agg.total_profiles = profile_rows.size();
  {
    std::set<std::string> with_dataset;
    for (const auto& d : datasets) with_dataset.insert(d.orcid_id);
    agg.profiles_with_dataset = with_dataset.size();
  }
  agg.distinct_datasets = dedupe(datasets).datasets.size();
  auto selection = select_in_scope(std::span<const DatasetClassification>(datasets));
  agg.producers = producers.size();
  agg.distinct_in_scope_datasets = selection.datasets.size();
  agg.producer_country_links = links.producer_links();
  agg.all_country_links = links.all_links();
  for (const auto& d : disciplines) {
    if (d.matched_articles > 0) agg.producers_with_matched_article++;
    agg.matched_articles += d.matched_articles;
  }

  std::vector<IndicatorReport> reports;
  reports.push_back(table_one(agg));
  reports.push_back(source_overlap_report(selection.datasets));
  reports.push_back(country_report(links, config.top_n));
  auto distribution = discipline_distribution(disciplines);
  reports.push_back(discipline_report(distribution));
  auto cohorts = cohort_stats(careers, config.cohort_from, config.cohort_to, config.window);
  reports.push_back(cohort_report(cohorts));

  const fs::path dir = config.reports_dir();
  for (auto& report : reports) {
    for (const auto& [k, v] : prov.config) report.provenance.config.try_emplace(k, v);
    report.provenance.inputs = prov.inputs;
    auto stem = std::string(report_file_stem(report.kind));
    write_file_atomic(dir / (stem + ".csv"), report.to_csv());
    write_file_atomic(dir / (stem + ".json"), report.to_json());
    result.outputs.push_back(dir / (stem + ".csv"));
    result.tables[stem] = report.rows.size();
  }

  auto eras = era_breakdown(careers, config.window, config.cohort_from, config.cohort_to);
  auto share = [](const std::optional<double>& v) { return v ? format_cell(*v) : std::string(); };
  std::string era_csv = "era,count,share\n";
  era_csv += "before_" + std::to_string(config.cohort_from) + "," + std::to_string(eras.before) + "," +
             share(eras.share_before) + "\n";
  era_csv += std::to_string(config.cohort_from) + "_" + std::to_string(config.cohort_to) + "," +
             std::to_string(eras.during) + "," + share(eras.share_during) + "\n";
  era_csv += "after_" + std::to_string(config.cohort_to) + "," + std::to_string(eras.after) + "," +
             share(eras.share_after) + "\n";
  write_file_atomic(dir / "eras.csv", era_csv);
  result.outputs.push_back(dir / "eras.csv");
  result.counters["reports"] = reports.size();
  return result;
}

std::vector<StageResult> run(const std::string& subcommand, const PipelineConfig& config) {
  config.validate();
  using Stage = StageResult (*)(const PipelineConfig&);
  static const std::map<std::string, Stage> stages = {
      {"ingest", run_ingest},   {"classify", run_classify},       {"countries", run_countries},
      {"careers", run_careers}, {"disciplines", run_disciplines}, {"report", run_report},
  };
  std::vector<StageResult> results;
  if (subcommand == "all") {
    for (const char* name : kStages) {
      log("stage " + std::string(name));
      results.push_back(stages.at(name)(config));
      for (const auto& w : results.back().warnings) log("warning: " + w);
    }
    return results;
  }
  auto it = stages.find(subcommand);
  if (it == stages.end()) throw std::invalid_argument("unknown subcommand '" + subcommand + "'");
  results.push_back(it->second(config));
  for (const auto& w : results.back().warnings) log("warning: " + w);
  return results;
}

std::string summary_json(const std::string& subcommand, const std::vector<StageResult>& results) {
  nlohmann::ordered_json j;
  j["command"] = subcommand;
  j["status"] = "ok";
  auto stages = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json s;
    s["stage"] = r.stage;
    s["rows"] = r.tables;
    s["counters"] = r.counters;
    std::vector<std::string> outputs;
    for (const auto& p : r.outputs) outputs.push_back(p.string());
    s["outputs"] = outputs;
    s["warnings"] = r.warnings;
    stages.push_back(std::move(s));
  }
  j["stages"] = std::move(stages);
  return j.dump();
}

}  // namespace orcidds
