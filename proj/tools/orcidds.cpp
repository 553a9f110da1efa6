// orcidds: dataset-sharing indicators from an ORCID public data file.
//
//   orcidds all --archive ORCID_summaries.tar.gz --out out \
//       --category-map dois.csv --domain-map domains.csv
//
// Exit status: 0 success, 1 data error, 2 usage error.

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "orcidds/model.hpp"
#include "orcidds/pipeline.hpp"

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Identify dataset-sharing researchers in an ORCID public data file and build indicator reports"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Key-value config file; command-line flags take precedence");

  orcidds::PipelineConfig config;
  std::string archive, out = config.out.string();
  std::string category_map, domain_map, phd_lexicon;

  app.add_option("--archive", archive, "ORCID summaries tar.gz, or a directory of record XML files");
  app.add_option("--out", out, "Output directory (tables/ and reports/ are created inside)")->capture_default_str();
  app.add_option("--window", config.window, "Years after PhD start in which a first output counts")
      ->capture_default_str();
  app.add_option("--cohort-from", config.cohort_from, "First PhD-start cohort year")->capture_default_str();
  app.add_option("--cohort-to", config.cohort_to, "Last PhD-start cohort year")->capture_default_str();
  app.add_option("--top-n", config.top_n, "Countries listed in the country report")->capture_default_str();
  app.add_option("--category-map", category_map, "CSV doi,categories");
  app.add_option("--domain-map", domain_map, "CSV category,domain");
  app.add_option("--phd-lexicon", phd_lexicon, "Doctoral-status terms, one per line");
  app.add_option("--workers", config.workers, "Parser threads used during ingest")->capture_default_str();

  std::string command;
  for (const char* name : {"ingest", "classify", "countries", "careers", "disciplines", "report", "all"}) {
    auto* sub = app.add_subcommand(name);
    sub->callback([&command, name] { command = name; });
  }
  app.get_subcommand("ingest")->description("Parse the archive into profile, work and affiliation tables");
  app.get_subcommand("classify")->description("Classify dataset works and select producers");
  app.get_subcommand("countries")->description("Resolve most-recent countries into link tables");
  app.get_subcommand("careers")->description("Detect PhD start and first dataset/article years");
  app.get_subcommand("disciplines")->description("Fractional discipline weights from the category map");
  app.get_subcommand("report")->description("Write the indicator reports");
  app.get_subcommand("all")->description("Run every stage in order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  config.archive = archive;
  config.out = out;
  if (!category_map.empty()) config.category_map = category_map;
  if (!domain_map.empty()) config.domain_map = domain_map;
  if (!phd_lexicon.empty()) config.phd_lexicon = phd_lexicon;

  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "orcidds: usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    auto results = orcidds::run(command, config);
    std::cout << orcidds::summary_json(command, results) << std::endl;
  } catch (const orcidds::Error& e) {
    std::cerr << "orcidds: " << orcidds::to_string(e.code()) << ": " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "orcidds: error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
