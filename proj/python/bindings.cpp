#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "orcidds/affiliations.hpp"
#include "orcidds/archive.hpp"
#include "orcidds/careers.hpp"
#include "orcidds/classifier.hpp"
#include "orcidds/disciplines.hpp"
#include "orcidds/model.hpp"
#include "orcidds/pipeline.hpp"

namespace py = pybind11;
using namespace orcidds;

namespace {

void bind_model(py::module_& m) {
  py::enum_<Section>(m, "Section")
      .value("Employment", Section::Employment)
      .value("EducationQualification", Section::EducationQualification);
  py::enum_<Repository>(m, "Repository")
      .value("Zenodo", Repository::Zenodo)
      .value("Dryad", Repository::Dryad)
      .value("Figshare", Repository::Figshare)
      .value("Unknown", Repository::Unknown);
  py::enum_<Scenario>(m, "Scenario")
      .value("A", Scenario::A_RepoAndDataCite)
      .value("B", Scenario::B_RepoOtherSource)
      .value("C", Scenario::C_DataCiteOnly)
      .value("Excluded", Scenario::Excluded);

  py::class_<WorkRecord>(m, "WorkRecord", py::dynamic_attr())
      .def(py::init([](std::string put_code, std::string work_type, std::optional<std::string> doi,
                       std::optional<std::string> source_name, std::optional<int> pub_year) {
             return WorkRecord{std::move(put_code), std::move(work_type), std::move(doi), std::move(source_name),
                               pub_year};
           }),
           py::arg("put_code"), py::arg("work_type"), py::arg("doi") = py::none(),
           py::arg("source_name") = py::none(), py::arg("pub_year") = py::none())
      .def_readwrite("put_code", &WorkRecord::put_code)
      .def_readwrite("work_type", &WorkRecord::work_type)
      .def_readwrite("doi", &WorkRecord::doi)
      .def_readwrite("source_name", &WorkRecord::source_name)
      .def_readwrite("pub_year", &WorkRecord::pub_year)
      .def(py::self == py::self);

  py::class_<AffiliationRecord>(m, "AffiliationRecord")
      .def(py::init([](Section section, std::optional<std::string> country, std::optional<std::string> role_title,
                       std::optional<int> start_year, std::optional<int> end_year) {
             return AffiliationRecord{section, std::move(country), std::move(role_title), start_year, end_year};
           }),
           py::arg("section"), py::arg("country") = py::none(), py::arg("role_title") = py::none(),
           py::arg("start_year") = py::none(), py::arg("end_year") = py::none())
      .def_readwrite("section", &AffiliationRecord::section)
      .def_readwrite("country", &AffiliationRecord::country)
      .def_readwrite("role_title", &AffiliationRecord::role_title)
      .def_readwrite("start_year", &AffiliationRecord::start_year)
      .def_readwrite("end_year", &AffiliationRecord::end_year);

  py::class_<ProfileRecord>(m, "ProfileRecord")
      .def(py::init([](std::string orcid_id, std::vector<WorkRecord> works,
                       std::vector<AffiliationRecord> affiliations) {
             return ProfileRecord{std::move(orcid_id), std::move(works), std::move(affiliations)};
           }),
           py::arg("orcid_id"), py::arg("works") = std::vector<WorkRecord>{},
           py::arg("affiliations") = std::vector<AffiliationRecord>{})
      .def_readwrite("orcid_id", &ProfileRecord::orcid_id)
      .def_readwrite("works", &ProfileRecord::works)
      .def_readwrite("affiliations", &ProfileRecord::affiliations);

  m.def("normalize_doi", &normalize_doi, py::arg("raw"), "Canonical lowercase DOI; raises Error when not a DOI.");
  m.def(
      "normalize_source",
      [](std::optional<std::string> raw) -> std::optional<std::pair<std::string, bool>> {
        auto k = normalize_source(raw);
        if (!k) return std::nullopt;
        return std::make_pair(k->key, k->is_datacite);
      },
      py::arg("raw"), "(key, is_datacite) or None.");
  m.def("is_valid_orcid_id", &is_valid_orcid_id);
  m.def("is_iso_country", &is_iso_country);
}

void bind_classifier(py::module_& m) {
  py::class_<DatasetClassification>(m, "DatasetClassification")
      .def_readonly("orcid_id", &DatasetClassification::orcid_id)
      .def_readonly("put_code", &DatasetClassification::put_code)
      .def_readonly("doi", &DatasetClassification::doi)
      .def_readonly("repository", &DatasetClassification::repository)
      .def_readonly("source", &DatasetClassification::source)
      .def_readonly("source_is_datacite", &DatasetClassification::source_is_datacite)
      .def_readonly("scenario", &DatasetClassification::scenario)
      .def_readonly("in_scope", &DatasetClassification::in_scope);

  m.def("parse_record", [](py::bytes data) { return parse_record(std::string_view(data)); }, py::arg("xml"));
  m.def("parse_record", [](const std::string& data) { return parse_record(data); }, py::arg("xml"));
  m.def("is_dataset", &is_dataset, py::arg("work"));
  m.def("is_journal_article", &is_journal_article, py::arg("work"));
  m.def("repository_of", &repository_of, py::arg("doi"));
  m.def("scenario_for", &scenario_for, py::arg("repository"), py::arg("source_is_datacite"));
  m.def("classify", &classify, py::arg("work"), py::arg("orcid_id"));
  m.def(
      "dedupe",
      [](const std::vector<DatasetClassification>& cs) {
        auto r = dedupe(cs);
        return py::make_tuple(r.datasets, r.per_researcher);
      },
      py::arg("classifications"), "(distinct datasets, per-researcher distinct counts).");
  m.def(
      "select_in_scope",
      [](const std::vector<ProfileRecord>& ps) {
        auto r = select_in_scope(std::span<const ProfileRecord>(ps));
        return py::make_tuple(r.datasets, r.producers);
      },
      py::arg("profiles"));
}

void bind_analysis(py::module_& m) {
  m.def(
      "most_recent_countries",
      [](const ProfileRecord& p) { return most_recent_countries(merge_affiliations(p)); }, py::arg("profile"));

  m.def(
      "detect_phd_start",
      [](const std::vector<AffiliationRecord>& affs, std::optional<std::vector<std::string>> terms) {
        return terms ? detect_phd_start(affs, PhdLexicon(*terms)) : detect_phd_start(affs);
      },
      py::arg("affiliations"), py::arg("terms") = py::none());

  py::class_<CareerRecord>(m, "CareerRecord")
      .def(py::init([](std::string orcid_id, std::optional<int> phd, std::optional<int> ds, std::optional<int> art,
                       bool is_producer) { return CareerRecord{std::move(orcid_id), is_producer, phd, ds, art}; }),
           py::arg("orcid_id"), py::arg("phd_start_year") = py::none(), py::arg("first_dataset_year") = py::none(),
           py::arg("first_article_year") = py::none(), py::arg("is_producer") = true)
      .def_readwrite("orcid_id", &CareerRecord::orcid_id)
      .def_readwrite("phd_start_year", &CareerRecord::phd_start_year)
      .def_readwrite("first_dataset_year", &CareerRecord::first_dataset_year)
      .def_readwrite("first_article_year", &CareerRecord::first_article_year);

  py::class_<CohortStat>(m, "CohortStat")
      .def_readonly("cohort_year", &CohortStat::cohort_year)
      .def_readonly("n_dataset", &CohortStat::n_dataset)
      .def_readonly("mean_years_to_dataset", &CohortStat::mean_years_to_dataset)
      .def_readonly("n_article", &CohortStat::n_article)
      .def_readonly("mean_years_to_article", &CohortStat::mean_years_to_article);

  m.def(
      "cohort_stats",
      [](const std::vector<CareerRecord>& cs, int first, int last, int window) {
        return cohort_stats(cs, first, last, window);
      },
      py::arg("careers"), py::arg("first_year") = kDefaultCohortFrom, py::arg("last_year") = kDefaultCohortTo,
      py::arg("window") = kDefaultWindow);

  py::class_<CategoryMap>(m, "CategoryMap")
      .def(py::init<std::map<std::string, std::vector<std::string>>, std::map<std::string, std::string>,
                    std::optional<std::size_t>>(),
           py::arg("doi_categories"), py::arg("category_domain"), py::arg("expected_domains") = py::none())
      .def_static("load", &CategoryMap::load, py::arg("doi_map"), py::arg("domain_map"),
                  py::arg("expected_domains") = py::none())
      .def("domains", &CategoryMap::domains)
      .def("doi_count", &CategoryMap::doi_count);

  py::class_<DisciplineProfile>(m, "DisciplineProfile")
      .def_readonly("orcid_id", &DisciplineProfile::orcid_id)
      .def_readonly("matched_articles", &DisciplineProfile::matched_articles)
      .def_readonly("weights", &DisciplineProfile::weights)
      .def_readonly("modal_domain", &DisciplineProfile::modal_domain)
      .def_readonly("tied", &DisciplineProfile::tied);

  m.def("fractional_weights", &fractional_weights, py::arg("profile"), py::arg("category_map"));
  m.def(
      "discipline_distribution",
      [](const std::vector<DisciplineProfile>& ps) {
        std::vector<std::tuple<std::string, std::size_t, double>> out;
        for (const auto& d : discipline_distribution(ps)) out.emplace_back(d.domain, d.count, d.percent);
        return out;
      },
      py::arg("profiles"), "[(domain, count, percent)] by count descending.");
}

void bind_pipeline(py::module_& m) {
  m.def(
      "run_pipeline",
      [](const std::string& subcommand, std::filesystem::path archive, std::filesystem::path out, int window,
         int cohort_from, int cohort_to, int top_n, std::optional<std::filesystem::path> category_map,
         std::optional<std::filesystem::path> domain_map, std::optional<std::filesystem::path> phd_lexicon,
         unsigned workers) {
        PipelineConfig c;
        c.archive = std::move(archive);
        c.out = std::move(out);
        c.window = window;
        c.cohort_from = cohort_from;
        c.cohort_to = cohort_to;
        c.top_n = top_n;
        c.category_map = std::move(category_map);
        c.domain_map = std::move(domain_map);
        c.phd_lexicon = std::move(phd_lexicon);
        c.workers = workers;
        std::vector<StageResult> results;
        {
          py::gil_scoped_release release;
          results = run(subcommand, c);
        }
        return summary_json(subcommand, results);
      },
      py::arg("subcommand"), py::arg("archive") = std::filesystem::path(), py::arg("out") = "out",
      py::arg("window") = kDefaultWindow, py::arg("cohort_from") = kDefaultCohortFrom,
      py::arg("cohort_to") = kDefaultCohortTo, py::arg("top_n") = 15, py::arg("category_map") = py::none(),
      py::arg("domain_map") = py::none(), py::arg("phd_lexicon") = py::none(), py::arg("workers") = 1,
      "Runs one stage or 'all'; returns the JSON summary text.");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ORCID dataset-sharing indicators";
  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result([&] { return py::exception<Error>(m, "Error", PyExc_ValueError); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object& type = error_type.get_stored();
      py::object exc = type(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(type.ptr(), exc.ptr());
    }
  });
  bind_model(m);
  bind_classifier(m);
  bind_analysis(m);
  bind_pipeline(m);
}
