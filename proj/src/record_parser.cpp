#include <expat.h>

#include <charconv>
#include <limits>
#include <memory>

#include "orcidds/archive.hpp"

namespace orcidds {

namespace {

std::string_view local_name(const XML_Char* name) {
  std::string_view n(name);
  auto colon = n.rfind(':');
  return colon == std::string_view::npos ? n : n.substr(colon + 1);
}

std::optional<int> parse_year(std::string_view text) {
  text = trim(text);
  int year = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), year);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return checked_year(year);
}

std::optional<std::string> non_empty(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  return std::string(text);
}

const XML_Char* find_attribute(const XML_Char** attrs, std::string_view wanted) {
  for (int i = 0; attrs[i] != nullptr; i += 2)
    if (local_name(attrs[i]) == wanted) return attrs[i + 1];
  return nullptr;
}

// Element-stack driven extraction; everything outside the handful of paths
// below is ignored.
class SummaryHandler {
 public:
  void start(const XML_Char* raw_name, const XML_Char** attrs) {
    std::string_view name = local_name(raw_name);
    stack_.emplace_back(name);
    text_.clear();

    if (stack_.size() == 1) {
      if (const XML_Char* p = find_attribute(attrs, "path")) {
        std::string_view v(p);
        if (v.starts_with('/')) v.remove_prefix(1);
        attr_id_ = std::string(v);
      }
    } else if (name == "work-summary" && !work_ && !aff_) {
      work_.emplace();
      work_depth_ = stack_.size();
      const XML_Char* pc = find_attribute(attrs, "put-code");
      work_->put_code = pc ? std::string(pc) : "#" + std::to_string(profile_.works.size());
    } else if (!work_ && !aff_ &&
               (name == "employment-summary" || name == "education-summary" ||
                name == "qualification-summary")) {
      aff_.emplace();
      aff_->section = name == "employment-summary" ? Section::Employment
                                                   : Section::EducationQualification;
      aff_depth_ = stack_.size();
    } else if (work_ && name == "external-id") {
      ext_type_.clear();
      ext_value_.clear();
    }
  }

  void end() {
    std::string_view name = stack_.back();
    std::string_view parent = at(1);
    std::string_view grandparent = at(2);

    if (work_) {
      end_in_work(name, parent, grandparent);
    } else if (aff_) {
      end_in_affiliation(name, parent, grandparent);
    } else if (name == "path" && parent == "orcid-identifier") {
      path_id_ = non_empty(text_);
    }
    stack_.pop_back();
    text_.clear();
  }

  void characters(const XML_Char* s, int len) { text_.append(s, static_cast<std::size_t>(len)); }

  ProfileRecord finish() {
    auto id = path_id_ ? path_id_ : attr_id_;
    if (!id || id->empty()) throw Error(ErrorCode::MissingOrcidId, "record has no ORCID iD");
    if (!is_valid_orcid_id(*id)) throw Error(ErrorCode::MalformedRecord, "invalid ORCID iD '" + *id + "'");
    profile_.orcid_id = std::move(*id);
    return std::move(profile_);
  }

 private:
  std::string_view at(std::size_t up) const {
    return stack_.size() > up ? std::string_view(stack_[stack_.size() - 1 - up]) : std::string_view();
  }

  void end_in_work(std::string_view name, std::string_view parent, std::string_view grandparent) {
    bool direct = stack_.size() == work_depth_ + 1;
    if (stack_.size() == work_depth_) {
      profile_.works.push_back(std::move(*work_));
      work_.reset();
    } else if (name == "type" && direct) {
      work_->work_type = std::string(trim(text_));
    } else if (name == "source-name" && parent == "source" && grandparent == "work-summary") {
      work_->source_name = non_empty(text_);
    } else if (name == "external-id-type" && parent == "external-id") {
      ext_type_ = std::string(trim(text_));
    } else if (name == "external-id-value" && parent == "external-id") {
      ext_value_ = std::string(trim(text_));
    } else if (name == "external-id" && !work_->doi && ascii_lower(ext_type_) == "doi") {
      try {
        work_->doi = normalize_doi(ext_value_);
      } catch (const Error&) {
        // unusable value; a later doi identifier may still match
      }
    } else if (name == "year" && parent == "publication-date") {
      work_->pub_year = parse_year(text_);
    }
  }

  void end_in_affiliation(std::string_view name, std::string_view parent, std::string_view grandparent) {
    bool in_summary_date = stack_.size() == aff_depth_ + 2;
    if (stack_.size() == aff_depth_) {
      if (aff_->start_year && aff_->end_year && *aff_->start_year > *aff_->end_year)
        aff_->start_year.reset();
      profile_.affiliations.push_back(std::move(*aff_));
      aff_.reset();
    } else if (name == "role-title" && stack_.size() == aff_depth_ + 1) {
      aff_->role_title = non_empty(text_);
    } else if (name == "year" && in_summary_date && parent == "start-date") {
      aff_->start_year = parse_year(text_);
    } else if (name == "year" && in_summary_date && parent == "end-date") {
      aff_->end_year = parse_year(text_);
    } else if (name == "country" && parent == "address" && grandparent == "organization") {
      aff_->country = non_empty(text_);
    }
  }

  std::vector<std::string> stack_;
  std::string text_;
  ProfileRecord profile_;
  std::optional<std::string> path_id_;
  std::optional<std::string> attr_id_;
  std::optional<WorkRecord> work_;
  std::size_t work_depth_ = 0;
  std::string ext_type_;
  std::string ext_value_;
  std::optional<AffiliationRecord> aff_;
  std::size_t aff_depth_ = 0;
};

struct ParserDeleter {
  void operator()(XML_Parser p) const { XML_ParserFree(p); }
};

}  // namespace

ProfileRecord parse_record(std::string_view buffer) {
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, ParserDeleter> parser(XML_ParserCreate("UTF-8"));
  if (!parser) throw Error(ErrorCode::MalformedRecord, "cannot allocate XML parser");

  SummaryHandler handler;
  XML_SetUserData(parser.get(), &handler);
  XML_SetElementHandler(
      parser.get(),
      [](void* ud, const XML_Char* name, const XML_Char** attrs) {
        static_cast<SummaryHandler*>(ud)->start(name, attrs);
      },
      [](void* ud, const XML_Char*) { static_cast<SummaryHandler*>(ud)->end(); });
  XML_SetCharacterDataHandler(parser.get(), [](void* ud, const XML_Char* s, int len) {
    static_cast<SummaryHandler*>(ud)->characters(s, len);
  });

  if (buffer.size() > static_cast<std::size_t>(std::numeric_limits<int>::max()))
    throw Error(ErrorCode::MalformedRecord, "record too large");
  if (XML_Parse(parser.get(), buffer.data(), static_cast<int>(buffer.size()), XML_TRUE) ==
      XML_STATUS_ERROR) {
    throw Error(ErrorCode::MalformedRecord,
                std::string("XML error at line ") +
                    std::to_string(XML_GetCurrentLineNumber(parser.get())) + ": " +
                    XML_ErrorString(XML_GetErrorCode(parser.get())));
  }
  return handler.finish();
}

}  // namespace orcidds
