#include "orcidds/careers.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include "orcidds/classifier.hpp"

namespace orcidds {

std::string fold_role_text(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
    } else if (std::ispunct(c)) {
      continue;
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  return out;
}

PhdLexicon::PhdLexicon() : PhdLexicon({"phd", "ph d", "dphil", "doctorate", "doctoral"}) {}

PhdLexicon::PhdLexicon(std::vector<std::string> terms) {
  for (const auto& t : terms) {
    auto folded = fold_role_text(t);
    if (!folded.empty()) terms_.push_back(std::move(folded));
  }
}

PhdLexicon PhdLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read PhD lexicon " + path.string());
  std::vector<std::string> terms;
  for (std::string line; std::getline(in, line);) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    terms.emplace_back(t);
  }
  return PhdLexicon(std::move(terms));
}

bool PhdLexicon::matches(std::string_view role_title) const {
  std::string padded = " " + fold_role_text(role_title) + " ";
  return std::any_of(terms_.begin(), terms_.end(),
                     [&](const std::string& t) { return padded.find(" " + t + " ") != std::string::npos; });
}

std::optional<int> detect_phd_start(std::span<const AffiliationRecord> affiliations, const PhdLexicon& lexicon) {
  std::optional<int> earliest;
  for (const auto& a : affiliations) {
    if (a.section != Section::EducationQualification || !a.role_title || !a.start_year) continue;
    if (!lexicon.matches(*a.role_title)) continue;
    if (!earliest || *a.start_year < *earliest) earliest = a.start_year;
  }
  return earliest;
}

std::optional<int> first_output_year(const ProfileRecord& profile, OutputKind kind,
                                     const InScopeWorks& in_scope_datasets) {
  std::optional<int> first;
  for (const auto& w : profile.works) {
    if (!w.pub_year) continue;
    bool counts = kind == OutputKind::Dataset
                      ? is_dataset(w) && in_scope_datasets.contains({profile.orcid_id, w.put_code})
                      : is_journal_article(w);
    if (counts && (!first || *w.pub_year < *first)) first = w.pub_year;
  }
  return first;
}

CareerRecord career_of(const ProfileRecord& profile, bool is_producer, const InScopeWorks& in_scope_datasets,
                       const PhdLexicon& lexicon) {
  return CareerRecord{profile.orcid_id, is_producer, detect_phd_start(profile.affiliations, lexicon),
                      first_output_year(profile, OutputKind::Dataset, in_scope_datasets),
                      first_output_year(profile, OutputKind::JournalArticle, in_scope_datasets)};
}

Eligibility window_filter(const CareerRecord& career, int window) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  auto delta = [&](const std::optional<int>& first) -> std::optional<int> {
    if (!career.phd_start_year || !first) return std::nullopt;
    int d = *first - *career.phd_start_year;
    if (d < 0 || d > window) return std::nullopt;
    return d;
  };
  return Eligibility{delta(career.first_dataset_year), delta(career.first_article_year)};
}

CohortAccumulator::CohortAccumulator(int window) : window_(window) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
}

void CohortAccumulator::add(const CareerRecord& career) {
  auto e = window_filter(career, window_);
  if (!e.dataset_delta && !e.article_delta) return;
  auto& s = by_year_[*career.phd_start_year];
  if (e.dataset_delta) {
    s.dataset_sum += *e.dataset_delta;
    s.dataset_n++;
  }
  if (e.article_delta) {
    s.article_sum += *e.article_delta;
    s.article_n++;
  }
}

void CohortAccumulator::merge(const CohortAccumulator& other) {
  for (const auto& [year, o] : other.by_year_) {
    auto& s = by_year_[year];
    s.dataset_sum += o.dataset_sum;
    s.dataset_n += o.dataset_n;
    s.article_sum += o.article_sum;
    s.article_n += o.article_n;
  }
}

std::vector<CohortStat> CohortAccumulator::stats(int first_year, int last_year) const {
  if (first_year > last_year) throw std::invalid_argument("cohort range is reversed");
  std::vector<CohortStat> out;
  for (int year = first_year; year <= last_year; ++year) {
    CohortStat st;
    st.cohort_year = year;
    if (auto it = by_year_.find(year); it != by_year_.end()) {
      const auto& s = it->second;
      st.n_dataset = s.dataset_n;
      st.n_article = s.article_n;
      if (s.dataset_n > 0)
        st.mean_years_to_dataset = static_cast<double>(s.dataset_sum) / static_cast<double>(s.dataset_n);
      if (s.article_n > 0)
        st.mean_years_to_article = static_cast<double>(s.article_sum) / static_cast<double>(s.article_n);
    }
    out.push_back(st);
  }
  return out;
}

std::vector<CohortStat> cohort_stats(std::span<const CareerRecord> careers, int first_year, int last_year,
                                     int window) {
  CohortAccumulator acc(window);
  for (const auto& c : careers) acc.add(c);
  return acc.stats(first_year, last_year);
}

EraBreakdown era_breakdown(std::span<const CareerRecord> careers, int window, int first_year, int last_year) {
  EraBreakdown out;
  for (const auto& c : careers) {
    if (!window_filter(c, window).dataset_delta) continue;
    int start = *c.phd_start_year;
    if (start < first_year)
      out.before++;
    else if (start > last_year)
      out.after++;
    else
      out.during++;
  }
  std::size_t total = out.before + out.during + out.after;
  if (total > 0) {
    auto share = [&](std::size_t n) { return static_cast<double>(n) / static_cast<double>(total); };
    out.share_before = share(out.before);
    out.share_during = share(out.during);
    out.share_after = share(out.after);
  }
  return out;
}

}  // namespace orcidds
