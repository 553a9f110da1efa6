#pragma once

// Test-only builders: ORCID 3.0 record summaries and a streaming ustar+gzip writer.

#include <zlib.h>

#include <array>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unistd.h>

#include "orcidds/model.hpp"

namespace orcidds::testing {

namespace fs = std::filesystem;

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct XmlWork {
  std::string put_code;
  std::string type;
  std::vector<std::pair<std::string, std::string>> external_ids;  // (type, value)
  std::optional<std::string> source;
  std::optional<int> year;
  std::string title = "Untitled";
};

struct XmlAffiliation {
  orcidds::Section section = orcidds::Section::Employment;
  bool qualification = false;  // emit as qualification-summary
  std::optional<std::string> country;
  std::optional<std::string> role;
  std::optional<int> start;
  std::optional<int> end;
  std::string org = "Some University";
};

struct XmlRecord {
  std::string orcid;
  std::vector<XmlWork> works;
  std::vector<XmlAffiliation> affiliations;
};

inline std::string date_xml(const char* tag, const std::optional<int>& year) {
  if (!year) return {};
  return std::string("<common:") + tag + "><common:year>" + std::to_string(*year) +
         "</common:year><common:month>09</common:month></common:" + tag + ">\n";
}

inline std::string affiliation_xml(const XmlAffiliation& a, const std::string& orcid) {
  std::string kind = a.section == orcidds::Section::Employment ? "employment"
                     : a.qualification                          ? "qualification"
                                                                : "education";
  std::ostringstream os;
  os << "<activities:affiliation-group>\n"
     << "<" << kind << ":" << kind << "-summary put-code=\"1\" display-index=\"0\" visibility=\"public\" path=\"/"
     << orcid << "/" << kind << "/1\">\n"
     << "<common:created-date>2019-01-01T00:00:00.000Z</common:created-date>\n"
     << "<common:source><common:source-orcid><common:path>" << orcid
     << "</common:path></common:source-orcid><common:source-name>Someone</common:source-name></common:source>\n"
     << "<common:department-name>Dept</common:department-name>\n";
  if (a.role) os << "<common:role-title>" << xml_escape(*a.role) << "</common:role-title>\n";
  os << date_xml("start-date", a.start) << date_xml("end-date", a.end) << "<common:organization>\n"
     << "<common:name>" << xml_escape(a.org) << "</common:name>\n"
     << "<common:address><common:city>City</common:city>";
  if (a.country) os << "<common:country>" << xml_escape(*a.country) << "</common:country>";
  os << "</common:address>\n"
     << "<common:disambiguated-organization><common:disambiguated-organization-identifier>1"
        "</common:disambiguated-organization-identifier><common:disambiguation-source>RINGGOLD"
        "</common:disambiguation-source></common:disambiguated-organization>\n"
     << "</common:organization>\n"
     << "</" << kind << ":" << kind << "-summary>\n"
     << "</activities:affiliation-group>\n";
  return os.str();
}

inline std::string external_ids_xml(const XmlWork& w) {
  std::ostringstream os;
  os << "<common:external-ids>";
  for (const auto& [type, value] : w.external_ids)
    os << "<common:external-id><common:external-id-type>" << xml_escape(type)
       << "</common:external-id-type><common:external-id-value>" << xml_escape(value)
       << "</common:external-id-value><common:external-id-relationship>self"
          "</common:external-id-relationship></common:external-id>";
  os << "</common:external-ids>\n";
  return os.str();
}

/// ORCID 3.0 record summary document.
inline std::string record_xml(const XmlRecord& r) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n"
     << "<record:record path=\"/" << r.orcid << "\" xmlns:internal=\"http://www.orcid.org/ns/internal\" "
     << "xmlns:education=\"http://www.orcid.org/ns/education\" xmlns:qualification=\"http://www.orcid.org/ns/qualification\" "
     << "xmlns:work=\"http://www.orcid.org/ns/work\" xmlns:common=\"http://www.orcid.org/ns/common\" "
     << "xmlns:record=\"http://www.orcid.org/ns/record\" xmlns:employment=\"http://www.orcid.org/ns/employment\" "
     << "xmlns:activities=\"http://www.orcid.org/ns/activities\" xmlns:person=\"http://www.orcid.org/ns/person\" "
     << "xmlns:preferences=\"http://www.orcid.org/ns/preferences\" xmlns:history=\"http://www.orcid.org/ns/history\">\n"
     << "<common:orcid-identifier><common:uri>https://orcid.org/" << r.orcid << "</common:uri><common:path>"
     << r.orcid << "</common:path><common:host>orcid.org</common:host></common:orcid-identifier>\n"
     << "<preferences:preferences><preferences:locale>en</preferences:locale></preferences:preferences>\n"
     << "<person:person path=\"/" << r.orcid << "/person\"><person:name visibility=\"public\">"
     << "<personal-details:given-names xmlns:personal-details=\"http://www.orcid.org/ns/personal-details\">A</personal-details:given-names>"
     << "</person:name><person:addresses><address:address xmlns:address=\"http://www.orcid.org/ns/address\">"
     << "<address:country>ZZ</address:country></address:address></person:addresses></person:person>\n"
     << "<activities:activities-summary path=\"/" << r.orcid << "/activities\">\n";

  auto section = [&](const char* wrapper, auto pred) {
    os << "<activities:" << wrapper << " path=\"/" << r.orcid << "/" << wrapper << "\">\n";
    for (const auto& a : r.affiliations)
      if (pred(a)) os << affiliation_xml(a, r.orcid);
    os << "</activities:" << wrapper << ">\n";
  };
  section("educations", [](const XmlAffiliation& a) {
    return a.section == orcidds::Section::EducationQualification && !a.qualification;
  });
  section("employments", [](const XmlAffiliation& a) { return a.section == orcidds::Section::Employment; });
  section("qualifications", [](const XmlAffiliation& a) {
    return a.section == orcidds::Section::EducationQualification && a.qualification;
  });

  os << "<activities:works path=\"/" << r.orcid << "/works\">\n";
  for (const auto& w : r.works) {
    os << "<activities:group>" << external_ids_xml(w) << "<work:work-summary put-code=\"" << w.put_code
       << "\" path=\"/" << r.orcid << "/work/" << w.put_code << "\" visibility=\"public\" display-index=\"0\">\n"
       << "<common:created-date>2019-01-01T00:00:00.000Z</common:created-date>\n";
    if (w.source)
      os << "<common:source><common:source-client-id><common:path>0000-0001-0000-0000</common:path>"
            "</common:source-client-id><common:source-name>"
         << xml_escape(*w.source) << "</common:source-name></common:source>\n";
    os << "<work:title><common:title>" << xml_escape(w.title) << "</common:title></work:title>\n"
       << external_ids_xml(w) << "<work:type>" << xml_escape(w.type) << "</work:type>\n";
    if (w.year) os << "<common:publication-date><common:year>" << *w.year << "</common:year></common:publication-date>\n";
    os << "</work:work-summary></activities:group>\n";
  }
  os << "</activities:works>\n</activities:activities-summary>\n</record:record>\n";
  return os.str();
}

/// Streaming ustar writer over gzip; member bytes go straight to disk.
class TarGzWriter {
 public:
  explicit TarGzWriter(const fs::path& path, int level = 6) {
    std::string mode = "wb" + std::to_string(level);
    gz_ = gzopen(path.string().c_str(), mode.c_str());
    if (gz_ == nullptr) throw std::runtime_error("cannot create " + path.string());
    gzbuffer(gz_, 256 * 1024);
  }
  ~TarGzWriter() { close(); }
  TarGzWriter(const TarGzWriter&) = delete;
  TarGzWriter& operator=(const TarGzWriter&) = delete;

  void add(const std::string& name, std::string_view bytes, char type = '0') {
    std::array<char, 512> h{};
    if (name.size() > 99) throw std::runtime_error("tar name too long: " + name);
    std::memcpy(h.data(), name.data(), name.size());
    std::snprintf(h.data() + 100, 8, "%07o", 0644);
    std::snprintf(h.data() + 108, 8, "%07o", 0);
    std::snprintf(h.data() + 116, 8, "%07o", 0);
    std::snprintf(h.data() + 124, 12, "%011llo", static_cast<unsigned long long>(bytes.size()));
    std::snprintf(h.data() + 136, 12, "%011o", 0);
    h[156] = type;
    std::memcpy(h.data() + 257, "ustar", 6);
    std::memcpy(h.data() + 263, "00", 2);
    std::memset(h.data() + 148, ' ', 8);
    unsigned sum = 0;
    for (char c : h) sum += static_cast<unsigned char>(c);
    std::snprintf(h.data() + 148, 8, "%06o", sum);
    h[155] = ' ';
    write(h.data(), h.size());
    write(bytes.data(), bytes.size());
    static const std::array<char, 512> zeros{};
    if (auto rem = bytes.size() % 512) write(zeros.data(), 512 - rem);
  }

  void close() {
    if (gz_ == nullptr) return;
    static const std::array<char, 1024> zeros{};
    write(zeros.data(), zeros.size());
    gzclose(gz_);
    gz_ = nullptr;
  }

 private:
  void write(const char* data, std::size_t n) {
    if (n > 0 && gzwrite(gz_, data, static_cast<unsigned>(n)) != static_cast<int>(n))
      throw std::runtime_error("gzwrite failed");
  }
  gzFile gz_ = nullptr;
};

/// Fresh, empty directory under the system temp dir.
inline fs::path temp_dir(const std::string& tag) {
  static int counter = 0;
  auto dir = fs::temp_directory_path() /
             ("orcidds-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline void write_file(const fs::path& p, std::string_view bytes) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

/// Bare ORCID iD from an integer, e.g. 7 -> 0000-0000-0000-0007.
inline std::string orcid_for(unsigned long long n) {
  char buf[20];
  unsigned long long a = n / 1000000000000ULL % 10000, b = n / 100000000ULL % 10000, c = n / 10000 % 10000,
                     d = n % 10000;
  std::snprintf(buf, sizeof buf, "%04llu-%04llu-%04llu-%04llu", a, b, c, d);
  return buf;
}

}  // namespace orcidds::testing
