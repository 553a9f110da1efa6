#include "orcidds/model.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace orcidds {

namespace {

// ISO 3166-1 alpha-2, officially assigned, sorted.
constexpr std::array<std::string_view, 249> kIsoCountries = {
    "AD", "AE", "AF", "AG", "AI", "AL", "AM", "AO", "AQ", "AR", "AS", "AT", "AU", "AW", "AX",
    "AZ", "BA", "BB", "BD", "BE", "BF", "BG", "BH", "BI", "BJ", "BL", "BM", "BN", "BO", "BQ",
    "BR", "BS", "BT", "BV", "BW", "BY", "BZ", "CA", "CC", "CD", "CF", "CG", "CH", "CI", "CK",
    "CL", "CM", "CN", "CO", "CR", "CU", "CV", "CW", "CX", "CY", "CZ", "DE", "DJ", "DK", "DM",
    "DO", "DZ", "EC", "EE", "EG", "EH", "ER", "ES", "ET", "FI", "FJ", "FK", "FM", "FO", "FR",
    "GA", "GB", "GD", "GE", "GF", "GG", "GH", "GI", "GL", "GM", "GN", "GP", "GQ", "GR", "GS",
    "GT", "GU", "GW", "GY", "HK", "HM", "HN", "HR", "HT", "HU", "ID", "IE", "IL", "IM", "IN",
    "IO", "IQ", "IR", "IS", "IT", "JE", "JM", "JO", "JP", "KE", "KG", "KH", "KI", "KM", "KN",
    "KP", "KR", "KW", "KY", "KZ", "LA", "LB", "LC", "LI", "LK", "LR", "LS", "LT", "LU", "LV",
    "LY", "MA", "MC", "MD", "ME", "MF", "MG", "MH", "MK", "ML", "MM", "MN", "MO", "MP", "MQ",
    "MR", "MS", "MT", "MU", "MV", "MW", "MX", "MY", "MZ", "NA", "NC", "NE", "NF", "NG", "NI",
    "NL", "NO", "NP", "NR", "NU", "NZ", "OM", "PA", "PE", "PF", "PG", "PH", "PK", "PL", "PM",
    "PN", "PR", "PS", "PT", "PW", "PY", "QA", "RE", "RO", "RS", "RU", "RW", "SA", "SB", "SC",
    "SD", "SE", "SG", "SH", "SI", "SJ", "SK", "SL", "SM", "SN", "SO", "SR", "SS", "ST", "SV",
    "SX", "SY", "SZ", "TC", "TD", "TF", "TG", "TH", "TJ", "TK", "TL", "TM", "TN", "TO", "TR",
    "TT", "TV", "TW", "TZ", "UA", "UG", "UM", "US", "UY", "UZ", "VA", "VC", "VE", "VG", "VI",
    "VN", "VU", "WF", "WS", "YE", "YT", "ZA", "ZM", "ZW",
};

constexpr std::array<std::string_view, 5> kDoiPrefixes = {
    "https://doi.org/", "http://doi.org/", "https://dx.doi.org/", "http://dx.doi.org/", "doi:",
};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NotADoi: return "NotADoi";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NotAnArchive: return "NotAnArchive";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::MissingOrcidId: return "MissingOrcidId";
    case ErrorCode::NotADataset: return "NotADataset";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::UnknownDomain: return "UnknownDomain";
    case ErrorCode::MissingTable: return "MissingTable";
  }
  return "?";
}

std::string_view to_string(Section s) {
  return s == Section::Employment ? "employment" : "education";
}

std::string_view to_string(Repository r) {
  switch (r) {
    case Repository::Zenodo: return "Zenodo";
    case Repository::Dryad: return "Dryad";
    case Repository::Figshare: return "Figshare";
    case Repository::Unknown: return "Unknown";
  }
  return "Unknown";
}

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::A_RepoAndDataCite: return "A";
    case Scenario::B_RepoOtherSource: return "B";
    case Scenario::C_DataCiteOnly: return "C";
    case Scenario::Excluded: return "Excluded";
  }
  return "Excluded";
}

Section parse_section(std::string_view s) {
  if (s == "employment") return Section::Employment;
  if (s == "education") return Section::EducationQualification;
  throw Error(ErrorCode::SchemaError, "unknown affiliation section '" + std::string(s) + "'");
}

Repository parse_repository(std::string_view s) {
  for (auto r : {Repository::Zenodo, Repository::Dryad, Repository::Figshare, Repository::Unknown})
    if (to_string(r) == s) return r;
  throw Error(ErrorCode::SchemaError, "unknown repository '" + std::string(s) + "'");
}

Scenario parse_scenario(std::string_view s) {
  for (auto sc : {Scenario::A_RepoAndDataCite, Scenario::B_RepoOtherSource,
                  Scenario::C_DataCiteOnly, Scenario::Excluded})
    if (to_string(sc) == s) return sc;
  throw Error(ErrorCode::SchemaError, "unknown scenario '" + std::string(s) + "'");
}

bool is_valid_orcid_id(std::string_view id) {
  if (id.size() != 19) return false;
  for (std::size_t i = 0; i < id.size(); ++i) {
    char c = id[i];
    if (i == 4 || i == 9 || i == 14) {
      if (c != '-') return false;
    } else if (i == 18) {
      if (!std::isdigit(static_cast<unsigned char>(c)) && c != 'X') return false;
    } else if (!std::isdigit(static_cast<unsigned char>(c))) {
      return false;
    }
  }
  return true;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string type_key(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s)
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
  return out;
}

std::string normalize_doi(std::string_view raw) {
  auto t = trim(raw);
  if (t.empty()) throw Error(ErrorCode::EmptyInput, "empty DOI");
  std::string doi = ascii_lower(t);
  for (auto prefix : kDoiPrefixes) {
    if (doi.starts_with(prefix)) {
      doi.erase(0, prefix.size());
      break;
    }
  }
  doi = std::string(trim(doi));
  if (!doi.starts_with("10.")) throw Error(ErrorCode::NotADoi, "not a DOI: '" + std::string(t) + "'");
  return doi;
}

std::optional<SourceKey> normalize_source(const std::optional<std::string>& raw) {
  if (!raw) return std::nullopt;
  SourceKey out;
  for (unsigned char c : *raw)
    if (!std::isspace(c)) out.key.push_back(static_cast<char>(std::tolower(c)));
  if (out.key.empty()) return std::nullopt;
  out.is_datacite = out.key == "datacite";
  return out;
}

bool is_iso_country(std::string_view code) {
  return std::binary_search(kIsoCountries.begin(), kIsoCountries.end(), code);
}

std::optional<int> checked_year(int year) {
  if (year < kMinYear || year > kMaxYear) return std::nullopt;
  return year;
}

}  // namespace orcidds
