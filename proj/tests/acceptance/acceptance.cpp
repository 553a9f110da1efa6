// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// gating criterion fails.

#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "../support/fixtures.hpp"
#include "orcidds/affiliations.hpp"
#include "orcidds/archive.hpp"
#include "orcidds/careers.hpp"
#include "orcidds/classifier.hpp"
#include "orcidds/disciplines.hpp"
#include "orcidds/pipeline.hpp"
#include "orcidds/reports.hpp"

using namespace orcidds;
using namespace orcidds::testing;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kGolden = fs::path(ORCIDDS_FIXTURES) / "golden";
const char* kReportFiles[] = {"table_one.csv", "source_overlap.csv", "countries.csv",
                              "disciplines.csv", "cohorts.csv",      "eras.csv"};

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

PipelineConfig golden_config(const fs::path& archive, const fs::path& out, unsigned workers = 1) {
  PipelineConfig c;
  c.archive = archive;
  c.out = out;
  c.window = 5;
  c.cohort_from = 2010;
  c.cohort_to = 2015;
  c.top_n = 4;
  c.category_map = kGolden / "category_map.csv";
  c.domain_map = kGolden / "domain_map.csv";
  c.phd_lexicon = kGolden / "phd_terms.txt";
  c.workers = workers;
  return c;
}

/// Every output file under `out`, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& out) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(out))
    if (e.is_regular_file()) files[fs::relative(e.path(), out).string()] = read_file(e.path());
  return files;
}

std::vector<fs::path> golden_records() {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(kGolden / "records"))
    if (e.path().extension() == ".xml") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

// 1 ------------------------------------------------------------------------

Verdict scenario_truth_table() {
  const std::pair<Repository, std::optional<std::string>> repos[] = {
      {Repository::Zenodo, "10.5281/zenodo.1206163"},
      {Repository::Dryad, "10.5061/dryad.9c50s"},
      {Repository::Figshare, "10.6084/m9.figshare.9988322"},
      {Repository::Unknown, "10.7910/dvn/abc"},
  };
  const std::optional<std::string> sources[] = {"DataCite", "Figshare", std::nullopt};
  int cases = 0, bad = 0;
  for (const auto& [repo, doi] : repos) {
    for (const auto& source : sources) {
      auto c = classify(WorkRecord{"1", "data-set", doi, source, 2015}, "0000-0000-0000-0001");
      cases++;
      bool known = repo != Repository::Unknown;
      bool dc = source && *source == "DataCite";
      Scenario want = known && dc ? Scenario::A_RepoAndDataCite
                      : known     ? Scenario::B_RepoOtherSource
                      : dc        ? Scenario::C_DataCiteOnly
                                  : Scenario::Excluded;
      int hits = 0;
      for (auto s : {Scenario::A_RepoAndDataCite, Scenario::B_RepoOtherSource, Scenario::C_DataCiteOnly,
                     Scenario::Excluded})
        hits += c.scenario == s;
      if (hits != 1 || c.scenario != want || c.repository != repo || c.in_scope != (known || dc)) bad++;
    }
  }
  return {bad == 0 && cases == 12, fmt("%d cases, %d mismatches", cases, bad)};
}

// 2 ------------------------------------------------------------------------

Verdict golden_equivalence() {
  auto dir = temp_dir("golden");
  run("all", golden_config(kGolden / "records", dir / "out"));
  int diffs = 0;
  std::string which;
  for (const char* f : kReportFiles) {
    if (read_file(dir / "out" / "reports" / f) != read_file(kGolden / "expected" / f)) {
      diffs++;
      which += std::string(" ") + f;
    }
  }
  fs::remove_all(dir);
  return {diffs == 0, diffs == 0 ? "6 report files byte-identical to oracle" : "differs:" + which};
}

// 3 ------------------------------------------------------------------------

Verdict order_and_parallelism() {
  auto dir = temp_dir("determinism");
  run("all", golden_config(kGolden / "records", dir / "ref"));
  auto reference = snapshot(dir / "ref");
  auto records = golden_records();
  std::mt19937 rng(7);
  int runs = 0, mismatches = 0;
  for (int shuffle = 0; shuffle < 3; ++shuffle) {
    std::shuffle(records.begin(), records.end(), rng);
    auto archive = dir / ("shuffled" + std::to_string(shuffle) + ".tar.gz");
    {
      TarGzWriter w(archive);
      for (const auto& r : records) w.add("ORCID_2019_summaries/" + r.filename().string(), read_file(r));
    }
    for (unsigned workers : {1u, 4u, 16u}) {
      auto out = dir / ("run" + std::to_string(runs++));
      run("all", golden_config(archive, out, workers));
      if (snapshot(out) != reference) mismatches++;
    }
  }
  fs::remove_all(dir);
  return {mismatches == 0 && reference.size() >= 20,
          fmt("%d runs (3 shuffles x workers 1/4/16), %zu files each, %d mismatches", runs, reference.size(),
              mismatches)};
}

// 4 ------------------------------------------------------------------------

Verdict dedup_oracle() {
  std::mt19937 rng(4);
  std::vector<DatasetClassification> all;
  std::set<std::string> oracle;
  const char* stems[] = {"10.5281/zenodo.", "10.5061/dryad.", "10.6084/m9.figshare.", "10.7910/dvn/"};
  for (int i = 0; i < 1000; ++i) {
    std::string orcid = orcid_for(rng() % 120);
    std::string put = std::to_string(i);
    std::optional<std::string> doi;
    if (rng() % 10 == 0) {
      oracle.insert("none|" + orcid + "|" + put);
    } else {
      std::string canonical = std::string(stems[rng() % 4]) + std::to_string(rng() % 350);
      oracle.insert(canonical);
      std::string shown = canonical;
      switch (rng() % 4) {
        case 0: shown = "https://doi.org/" + canonical; break;
        case 1: std::transform(shown.begin(), shown.end(), shown.begin(), ::toupper); break;
        case 2: shown = "doi:" + canonical; break;
        default: break;
      }
      doi = normalize_doi(shown);
    }
    all.push_back(classify(WorkRecord{put, "data-set", doi, rng() % 2 ? "DataCite" : "Other", 2015}, orcid));
  }
  auto once = dedupe(all);
  auto twice = dedupe(once.datasets);
  bool ok = once.datasets.size() == oracle.size() && twice.datasets == once.datasets;
  return {ok, fmt("1000 works, %zu distinct vs oracle %zu, idempotent=%s", once.datasets.size(), oracle.size(),
                  twice.datasets == once.datasets ? "yes" : "no")};
}

// 5 ------------------------------------------------------------------------

Verdict fractional_weights_oracle() {
  std::mt19937 rng(5);
  const int kDomains = 7;
  int bad = 0, ties = 0, matched_configs = 0;
  double worst = 0;
  for (int config = 0; config < 200; ++config) {
    int n_categories = 3 + static_cast<int>(rng() % 12);
    std::map<std::string, std::string> cat_domain;
    for (int c = 0; c < n_categories; ++c)
      cat_domain["K" + std::to_string(c)] = "dom" + std::to_string(rng() % kDomains);
    std::map<std::string, std::vector<std::string>> doi_cats;
    int n_dois = 1 + static_cast<int>(rng() % 25);
    for (int d = 0; d < n_dois; ++d) {
      int k = 1 + static_cast<int>(rng() % 4);
      std::set<std::string> picked;
      while (static_cast<int>(picked.size()) < std::min(k, n_categories))
        picked.insert("K" + std::to_string(rng() % n_categories));
      doi_cats["10.1/" + std::to_string(d)] = {picked.begin(), picked.end()};
    }
    CategoryMap map(doi_cats, cat_domain);

    ProfileRecord p{"0000-0000-0000-0001", {}, {}};
    int n_works = static_cast<int>(rng() % 12);
    for (int w = 0; w < n_works; ++w) {
      std::string doi = "10.1/" + std::to_string(rng() % (n_dois + 5));
      p.works.push_back(WorkRecord{std::to_string(w), rng() % 5 ? "journal-article" : "data-set", doi, "Crossref", 2015});
    }
    auto got = fractional_weights(p, map);

    // Naive recount: every contribution is an exact multiple of 1/(12*m).
    std::set<std::string> matched;
    for (const auto& w : p.works)
      if (w.work_type == "journal-article" && doi_cats.contains(*w.doi)) matched.insert(*w.doi);
    const long m = static_cast<long>(matched.size());
    std::map<std::string, long> numer;
    for (const auto& doi : matched) {
      const auto& cats = doi_cats.at(doi);
      for (const auto& c : cats) numer[cat_domain.at(c)] += 12 / static_cast<long>(cats.size());
    }
    if (m == 0) {
      if (got.matched_articles != 0 || !got.weights.empty() || got.modal_domain || got.tied) bad++;
      continue;
    }
    matched_configs++;
    long best = 0;
    for (const auto& [d, v] : numer) best = std::max(best, v);
    std::vector<std::string> argmax;
    for (const auto& [d, v] : numer)
      if (v == best) argmax.push_back(d);
    bool want_tied = argmax.size() > 1;
    ties += want_tied;

    double sum = 0;
    bool same_keys = got.weights.size() == numer.size();
    for (const auto& [d, v] : numer) {
      double want = static_cast<double>(v) / static_cast<double>(12 * m);
      auto it = got.weights.find(d);
      if (it == got.weights.end()) {
        same_keys = false;
        continue;
      }
      worst = std::max(worst, std::abs(it->second - want));
      sum += it->second;
    }
    if (!same_keys || std::abs(sum - 1.0) > 1e-9 || worst > 1e-9 ||
        got.matched_articles != static_cast<std::size_t>(m) || got.modal_domain != argmax.front() ||
        got.tied != want_tied)
      bad++;
  }
  return {bad == 0 && ties > 0, fmt("200 configs (%d matched, %d tied), max |dw| %.2e, %d mismatches",
                                    matched_configs, ties, worst, bad)};
}

// 6 ------------------------------------------------------------------------

Verdict cohort_oracle() {
  std::mt19937 rng(6);
  std::vector<CareerRecord> careers;
  for (int i = 0; i < 100; ++i) {
    CareerRecord c{orcid_for(static_cast<unsigned>(i)), true, {}, {}, {}};
    if (rng() % 6) c.phd_start_year = 2007 + static_cast<int>(rng() % 12);
    if (rng() % 5) c.first_dataset_year = 2006 + static_cast<int>(rng() % 16);
    if (rng() % 4) c.first_article_year = 2006 + static_cast<int>(rng() % 16);
    careers.push_back(c);
  }
  int bad = 0;
  double worst = 0;
  std::map<int, std::vector<std::size_t>> n_by_window;
  for (int window = 1; window <= 5; ++window) {
    auto stats = cohort_stats(careers, 2010, 2015, window);
    for (const auto& s : stats) {
      long ds = 0, dn = 0, as = 0, an = 0;
      for (const auto& c : careers) {
        if (!c.phd_start_year || *c.phd_start_year != s.cohort_year) continue;
        if (c.first_dataset_year) {
          int d = *c.first_dataset_year - *c.phd_start_year;
          if (d >= 0 && d <= window) ds += d, dn++;
        }
        if (c.first_article_year) {
          int d = *c.first_article_year - *c.phd_start_year;
          if (d >= 0 && d <= window) as += d, an++;
        }
      }
      if (s.n_dataset != static_cast<std::size_t>(dn) || s.n_article != static_cast<std::size_t>(an)) bad++;
      auto check_mean = [&](const std::optional<double>& got, long sum, long n) {
        if (n == 0) {
          if (got) bad++;
          return;
        }
        if (!got) {
          bad++;
          return;
        }
        double want = static_cast<double>(sum) / static_cast<double>(n);
        worst = std::max(worst, std::abs(*got - want));
        if (std::abs(*got - want) > 1e-9 || *got < 0 || *got > window) bad++;
      };
      check_mean(s.mean_years_to_dataset, ds, dn);
      check_mean(s.mean_years_to_article, as, an);
      n_by_window[window].push_back(s.n_dataset + s.n_article);
    }
    for (const auto& c : careers) {
      auto e = window_filter(c, window);
      for (const auto& d : {e.dataset_delta, e.article_delta})
        if (d && (*d < 0 || *d > window)) bad++;
    }
  }
  int monotone_breaks = 0;
  for (int window = 1; window < 5; ++window)
    for (std::size_t i = 0; i < n_by_window[window].size(); ++i)
      if (n_by_window[window][i] > n_by_window[window + 1][i]) monotone_breaks++;
  return {bad == 0 && monotone_breaks == 0,
          fmt("100 careers x windows 1..5, max |dmean| %.2e, %d mismatches, %d monotonicity breaks", worst, bad,
              monotone_breaks)};
}

// 7 ------------------------------------------------------------------------

std::string minimal_record(const std::string& orcid, unsigned long long n) {
  std::string xml =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<record:record xmlns:record=\"http://www.orcid.org/ns/record\" "
      "xmlns:common=\"http://www.orcid.org/ns/common\" xmlns:activities=\"http://www.orcid.org/ns/activities\" "
      "xmlns:work=\"http://www.orcid.org/ns/work\" path=\"/" +
      orcid + "\"><common:orcid-identifier><common:path>" + orcid +
      "</common:path></common:orcid-identifier><activities:activities-summary>";
  if (n % 10 == 0)
    xml += "<activities:works><activities:group><work:work-summary put-code=\"1\"><work:type>data-set</work:type>"
           "<common:external-ids><common:external-id><common:external-id-type>doi</common:external-id-type>"
           "<common:external-id-value>10.5281/zenodo." +
           std::to_string(n) +
           "</common:external-id-value></common:external-id></common:external-ids>"
           "</work:work-summary></activities:group></activities:works>";
  xml += "</activities:activities-summary></record:record>\n";
  return xml;
}

Verdict streaming_scale(unsigned long long n_records) {
  auto dir = temp_dir("scale");
  auto archive = dir / "summaries.tar.gz";
  auto t_gen = Clock::now();
  std::size_t largest = 0;
  {
    TarGzWriter w(archive, 1);
    for (unsigned long long i = 0; i < n_records; ++i) {
      auto orcid = orcid_for(i);
      auto xml = minimal_record(orcid, i);
      largest = std::max(largest, xml.size());
      w.add("summaries/" + orcid.substr(16) + "/" + orcid + ".xml", xml);
    }
  }
  double gen_s = seconds_since(t_gen);

  // Ingest in a child so the parent's allocations do not count towards the peak.
  int fds[2];
  if (::pipe(fds) != 0) return {false, "pipe failed"};
  pid_t pid = ::fork();
  if (pid == 0) {
    ::close(fds[0]);
    std::string line;
    try {
      PipelineConfig c;
      c.archive = archive;
      c.out = dir / "out";
      c.workers = 4;
      auto t0 = Clock::now();
      auto r = run_ingest(c);
      line = fmt("%llu %llu %llu %.3f", static_cast<unsigned long long>(r.counters["records_seen"]),
                 static_cast<unsigned long long>(r.counters["records_parsed"]),
                 static_cast<unsigned long long>(r.counters["records_failed"]), seconds_since(t0));
    } catch (const std::exception& e) {
      line = std::string("error ") + e.what();
    }
    [[maybe_unused]] auto n = ::write(fds[1], line.data(), line.size());
    ::close(fds[1]);
    std::_Exit(0);
  }
  ::close(fds[1]);
  std::string reply;
  char buf[256];
  ssize_t got;
  while ((got = ::read(fds[0], buf, sizeof buf)) > 0) reply.append(buf, static_cast<std::size_t>(got));
  ::close(fds[0]);
  int status = 0;
  ::waitpid(pid, &status, 0);
  rusage usage{};
  ::getrusage(RUSAGE_CHILDREN, &usage);
  double peak_mb = static_cast<double>(usage.ru_maxrss) / 1024.0;
  fs::remove_all(dir);

  unsigned long long seen = 0, parsed = 0, failed = 0;
  double ingest_s = 0;
  if (std::sscanf(reply.c_str(), "%llu %llu %llu %lf", &seen, &parsed, &failed, &ingest_s) != 4)
    return {false, "ingest failed: " + reply};
  bool ok = seen == n_records && parsed == n_records && failed == 0 && peak_mb < 256.0 && ingest_s < 600.0;
  return {ok, fmt("%llu records (largest %zu B): stats (%llu, %llu, %llu), peak RSS %.1f MB < 256 MB, "
                  "ingest %.1f s < 600 s (archive written in %.1f s)",
                  n_records, largest, seen, parsed, failed, peak_mb, ingest_s, gen_s)};
}

// 8 ------------------------------------------------------------------------

XmlRecord random_record(std::mt19937& rng, unsigned long long n) {
  XmlRecord r{orcid_for(1000 + n), {}, {}};
  const char* stems[] = {"10.5281/zenodo.", "10.5061/dryad.", "10.6084/m9.figshare.", "10.7910/dvn/"};
  const char* sources[] = {"DataCite", "Zenodo", "Crossref"};
  int nd = static_cast<int>(rng() % 3);
  for (int i = 0; i < nd; ++i)
    r.works.push_back({std::to_string(10 + i), "data-set",
                       {{"doi", std::string(stems[rng() % 4]) + std::to_string(rng() % 200)}},
                       std::string(sources[rng() % 3]), 2009 + static_cast<int>(rng() % 10)});
  int na = static_cast<int>(rng() % 3);
  for (int i = 0; i < na; ++i)
    r.works.push_back({std::to_string(20 + i), "journal-article",
                       {{"doi", "10.1000/j." + std::to_string(100 + rng() % 60).substr(1)}}, "Crossref",
                       2008 + static_cast<int>(rng() % 10)});
  const char* countries[] = {"NL", "ES", "US", "BR"};
  r.affiliations.push_back({Section::Employment, false, std::string(countries[rng() % 4]), "Researcher",
                            2012 + static_cast<int>(rng() % 6), std::nullopt});
  if (rng() % 2)
    r.affiliations.push_back({Section::EducationQualification, rng() % 2 == 0, std::string(countries[rng() % 4]),
                              "PhD", 2007 + static_cast<int>(rng() % 8), std::nullopt});
  return r;
}

Verdict corrupt_members() {
  auto dir = temp_dir("robust");
  std::mt19937 rng(8);
  std::vector<std::pair<std::string, std::string>> valid, corrupt;
  for (unsigned long long i = 0; i < 190; ++i) {
    auto r = random_record(rng, i);
    valid.emplace_back("summaries/" + r.orcid + ".xml", record_xml(r));
  }
  for (int i = 0; i < 10; ++i) {
    auto name = "summaries/" + orcid_for(5000 + static_cast<unsigned long long>(i)) + ".xml";
    std::string bytes;
    switch (i % 4) {
      case 0: bytes = valid[static_cast<std::size_t>(i)].second.substr(0, 300); break;  // truncated
      case 1: bytes = "\x1f\x8b\x08 binary \xff\xfe junk"; break;
      case 2: bytes = "<record:record xmlns:record=\"http://www.orcid.org/ns/record\"></record:record>"; break;
      default: bytes = "<record><unclosed></record>"; break;
    }
    corrupt.emplace_back(name, bytes);
  }
  auto mixed = dir / "mixed.tar.gz", clean = dir / "clean.tar.gz";
  {
    TarGzWriter w(mixed);
    for (std::size_t i = 0, c = 0; i < valid.size(); ++i) {
      w.add(valid[i].first, valid[i].second);
      if (i % 19 == 18 && c < corrupt.size()) w.add(corrupt[c].first, corrupt[c].second), c++;
    }
  }
  {
    TarGzWriter w(clean);
    for (const auto& [n, b] : valid) w.add(n, b);
  }
  auto mixed_res = run("all", golden_config(mixed, dir / "mixed", 4));
  run("all", golden_config(clean, dir / "clean", 4));

  auto& counters = mixed_res.front().counters;
  std::uint64_t seen = counters["records_seen"], parsed = counters["records_parsed"],
                failed = counters["records_failed"];
  auto a = snapshot(dir / "mixed"), b = snapshot(dir / "clean");
  auto failures = a["ingest_failures.tsv"];
  a.erase("ingest_failures.tsv");
  b.erase("ingest_failures.tsv");
  std::size_t failure_lines = static_cast<std::size_t>(std::count(failures.begin(), failures.end(), '\n'));
  fs::remove_all(dir);
  bool ok = seen == 200 && parsed + failed == seen && failed == 10 && failure_lines == 10 && a == b;
  return {ok, fmt("seen %llu = parsed %llu + failed %llu, %zu logged failures, outputs %s clean subset",
                  static_cast<unsigned long long>(seen), static_cast<unsigned long long>(parsed),
                  static_cast<unsigned long long>(failed), failure_lines, a == b ? "equal to" : "DIFFER from")};
}

// 9 ------------------------------------------------------------------------

Verdict real_dump(const std::string& path) {
  auto dir = temp_dir("real");
  PipelineConfig c;
  c.archive = path;
  c.out = dir / "out";
  c.workers = std::max(1u, std::thread::hardware_concurrency());
  run("all", c);
  auto t1 = read_file(c.reports_dir() / "table_one.csv");
  std::replace(t1.begin(), t1.end(), '\n', ' ');
  return {true, "table_one: " + t1 + "(reports under " + c.out.string() + ")"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::set<int> only;
  unsigned long long scale = 1000000;
  std::string dump;
  app.add_option("--only", only, "run only these criteria");
  app.add_option("--scale-records", scale, "record count for the streaming criterion");
  app.add_option("--real-dump", dump, "public data file for the non-gating stretch criterion")
      ->envname("ORCIDDS_REAL_DUMP");
  CLI11_PARSE(app, argc, argv);

  std::clog.rdbuf(nullptr);  // stage chatter off

  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Verdict()> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "scenario truth table", 1, scenario_truth_table},
      {2, "golden fixture equivalence", 5, golden_equivalence},
      {3, "order/parallelism determinism", 30, order_and_parallelism},
      {4, "dedup oracle", 1, dedup_oracle},
      {5, "fractional-weight correctness", 5, fractional_weights_oracle},
      {6, "cohort math", 5, cohort_oracle},
      {7, "streaming scale", 600, [&] { return streaming_scale(scale); }},
      {8, "robustness to corrupt members", 10, corrupt_members},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.contains(c.id)) continue;
    auto t0 = Clock::now();
    Verdict v;
    try {
      v = c.fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    double s = seconds_since(t0);
    if (s > c.budget_s) {
      v.pass = false;
      v.detail += fmt(" [over %.0f s budget]", c.budget_s);
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS " : "FAIL ") << c.id << " " << c.name << ": " << v.detail << fmt(" (%.2f s)", s)
              << std::endl;
  }
  if (only.empty() || only.contains(9)) {
    if (dump.empty()) {
      std::cout << "SKIP 9 real public data file (non-gating): set ORCIDDS_REAL_DUMP to run" << std::endl;
    } else {
      try {
        auto v = real_dump(dump);
        std::cout << "INFO 9 real public data file (non-gating): " << v.detail << std::endl;
      } catch (const std::exception& e) {
        std::cout << "INFO 9 real public data file (non-gating): failed: " << e.what() << std::endl;
      }
    }
  }
  return failed ? 1 : 0;
}
