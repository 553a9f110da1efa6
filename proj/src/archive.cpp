#include "orcidds/archive.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <exception>
#include <fstream>
#include <iterator>
#include <mutex>
#include <regex>
#include <thread>
#include <vector>

namespace fs = std::filesystem;

namespace orcidds {

namespace {

constexpr std::size_t kBlock = 512;
constexpr std::size_t kScratch = 64 * 1024;

bool has_xml_extension(std::string_view name) {
  return name.size() >= 4 && ascii_lower(name.substr(name.size() - 4)) == ".xml";
}

std::uint64_t parse_octal(const char* field, std::size_t len) {
  // GNU base-256 extension for sizes >= 8 GiB.
  if (static_cast<unsigned char>(field[0]) & 0x80) {
    std::uint64_t v = static_cast<unsigned char>(field[0]) & 0x7f;
    for (std::size_t i = 1; i < len; ++i) v = (v << 8) | static_cast<unsigned char>(field[i]);
    return v;
  }
  std::uint64_t v = 0;
  std::size_t i = 0;
  while (i < len && (field[i] == ' ' || field[i] == '\0')) ++i;
  for (; i < len && field[i] >= '0' && field[i] <= '7'; ++i) v = v * 8 + (field[i] - '0');
  return v;
}

std::string field_string(const char* field, std::size_t len) {
  return std::string(field, strnlen(field, len));
}

class TarGzStream final : public RecordStream {
 public:
  explicit TarGzStream(const fs::path& path) : path_(path.string()) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw Error(ErrorCode::IoError, "cannot open " + path_);
    std::array<unsigned char, 2> magic{};
    probe.read(reinterpret_cast<char*>(magic.data()), 2);
    if (probe.gcount() != 2 || magic[0] != 0x1f || magic[1] != 0x8b)
      throw Error(ErrorCode::NotAnArchive, path_ + " is not gzip-compressed");
    gz_ = gzopen(path_.c_str(), "rb");
    if (gz_ == nullptr) throw Error(ErrorCode::IoError, "cannot open " + path_);
    gzbuffer(gz_, 256 * 1024);
    scratch_.resize(kScratch);
  }

  ~TarGzStream() override {
    if (gz_ != nullptr) gzclose(gz_);
  }

  TarGzStream(const TarGzStream&) = delete;
  TarGzStream& operator=(const TarGzStream&) = delete;

  std::optional<RawRecord> next() override {
    std::string long_name;
    while (!done_) {
      std::array<char, kBlock> header{};
      std::size_t got = read_some(header.data(), kBlock);
      if (got == 0) {
        done_ = true;
        break;
      }
      if (got < kBlock) fail("truncated tar header");
      if (std::all_of(header.begin(), header.end(), [](char c) { return c == '\0'; })) {
        done_ = true;
        break;
      }
      verify_checksum(header.data());
      headers_++;

      std::uint64_t size = parse_octal(header.data() + 124, 12);
      char type = header[156];
      std::string name = field_string(header.data(), 100);
      if (std::memcmp(header.data() + 257, "ustar", 5) == 0) {
        std::string prefix = field_string(header.data() + 345, 155);
        if (!prefix.empty()) name = prefix + "/" + name;
      }
      if (!long_name.empty()) {
        name = std::move(long_name);
        long_name.clear();
      }

      if (type == 'L' || type == 'x') {
        std::string data = read_member(size);
        if (type == 'L') {
          long_name = field_string(data.data(), data.size());
        } else if (auto path = pax_path(data)) {
          long_name = *path;
        }
        continue;
      }
      bool regular = type == '0' || type == '\0' || type == '7';
      if (regular && has_xml_extension(name)) return RawRecord{std::move(name), read_member(size)};
      skip_member(size);
    }
    return std::nullopt;
  }

  std::uint64_t bytes_read() const override { return bytes_; }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    // Garbage before the first header means the file was never a tar.gz.
    throw Error(headers_ == 0 ? ErrorCode::NotAnArchive : ErrorCode::IoError, path_ + ": " + why);
  }

  std::size_t read_some(char* out, std::size_t n) {
    std::size_t total = 0;
    while (total < n) {
      unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(n - total, 1u << 30));
      int r = gzread(gz_, out + total, chunk);
      if (r < 0) {
        int errnum = 0;
        const char* msg = gzerror(gz_, &errnum);
        fail(std::string("gzip error: ") + (msg ? msg : "unknown"));
      }
      if (r == 0) {
        int errnum = 0;
        const char* msg = gzerror(gz_, &errnum);
        if (errnum != Z_OK) fail(std::string("gzip error: ") + (msg ? msg : "unknown"));
        break;
      }
      total += static_cast<std::size_t>(r);
    }
    bytes_ += total;
    return total;
  }

  void verify_checksum(const char* header) const {
    std::uint64_t expected = parse_octal(header + 148, 8);
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < kBlock; ++i)
      sum += (i >= 148 && i < 156) ? ' ' : static_cast<unsigned char>(header[i]);
    if (sum != expected) fail("bad tar header checksum");
  }

  static std::uint64_t padded(std::uint64_t size) { return (size + kBlock - 1) / kBlock * kBlock; }

  std::string read_member(std::uint64_t size) {
    std::string data(size, '\0');
    if (read_some(data.data(), size) != size) fail("truncated tar member");
    skip_bytes(padded(size) - size);
    return data;
  }

  void skip_member(std::uint64_t size) { skip_bytes(padded(size)); }

  void skip_bytes(std::uint64_t n) {
    while (n > 0) {
      std::size_t step = static_cast<std::size_t>(std::min<std::uint64_t>(n, scratch_.size()));
      if (read_some(scratch_.data(), step) != step) fail("truncated tar member");
      n -= step;
    }
  }

  static std::optional<std::string> pax_path(const std::string& data) {
    std::size_t pos = 0;
    while (pos < data.size()) {
      std::size_t space = data.find(' ', pos);
      if (space == std::string::npos) break;
      std::size_t len = std::strtoull(data.c_str() + pos, nullptr, 10);
      if (len == 0 || pos + len > data.size()) break;
      std::string_view rec(data.data() + space + 1, pos + len - space - 2);
      if (rec.starts_with("path=")) return std::string(rec.substr(5));
      pos += len;
    }
    return std::nullopt;
  }

  std::string path_;
  gzFile gz_ = nullptr;
  std::vector<char> scratch_;
  std::uint64_t bytes_ = 0;
  std::uint64_t headers_ = 0;
  bool done_ = false;
};

class DirectoryStream final : public RecordStream {
 public:
  explicit DirectoryStream(const fs::path& dir) {
    std::error_code ec;
    for (fs::recursive_directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
      if (it->is_regular_file() && has_xml_extension(it->path().filename().string()))
        files_.push_back(it->path());
    }
    if (ec) throw Error(ErrorCode::IoError, "cannot list " + dir.string() + ": " + ec.message());
    std::sort(files_.begin(), files_.end());
  }

  std::optional<RawRecord> next() override {
    if (index_ >= files_.size()) return std::nullopt;
    const fs::path& file = files_[index_++];
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + file.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    bytes_ += bytes.size();
    return RawRecord{file.string(), std::move(bytes)};
  }

  std::uint64_t bytes_read() const override { return bytes_; }

 private:
  std::vector<fs::path> files_;
  std::size_t index_ = 0;
  std::uint64_t bytes_ = 0;
};

std::string one_line(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
  return s;
}

// Fixed-capacity handoff between the archive reader and parse workers.
class RecordQueue {
 public:
  explicit RecordQueue(std::size_t capacity) : capacity_(capacity) {}

  void push(RawRecord&& r) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_ || closed_; });
    if (closed_) return;
    items_.push_back(std::move(r));
    not_empty_.notify_one();
  }

  std::optional<RawRecord> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    RawRecord r = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return r;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

 private:
  std::size_t capacity_;
  std::deque<RawRecord> items_;
  bool closed_ = false;
  std::mutex mu_;
  std::condition_variable not_empty_, not_full_;
};

}  // namespace

std::unique_ptr<RecordStream> open_archive(const fs::path& path) {
  std::error_code ec;
  auto status = fs::status(path, ec);
  if (ec || !fs::exists(status)) throw Error(ErrorCode::IoError, "no such archive: " + path.string());
  if (fs::is_directory(status)) return std::make_unique<DirectoryStream>(path);
  return std::make_unique<TarGzStream>(path);
}

std::optional<std::string> orcid_from_path(std::string_view name) {
  static const std::regex pattern(R"(\d{4}-\d{4}-\d{4}-\d{3}[\dX])");
  std::match_results<std::string_view::const_iterator> m;
  if (std::regex_search(name.begin(), name.end(), m, pattern)) return m.str();
  return std::nullopt;
}

IngestStats ingest(const fs::path& archive, const std::function<void(ProfileRecord&&)>& sink,
                   const IngestOptions& options) {
  auto stream = open_archive(archive);
  IngestStats stats;
  std::mutex mu;

  auto process = [&](RawRecord&& raw) {
    std::optional<ProfileRecord> profile;
    IngestFailure failure;
    try {
      profile = parse_record(raw.bytes);
    } catch (const Error& e) {
      failure.orcid_id = orcid_from_path(raw.name).value_or("?");
      failure.reason = one_line(std::string(to_string(e.code())) + ": " + e.what());
    }
    std::lock_guard lock(mu);
    if (profile) {
      stats.records_parsed++;
      sink(std::move(*profile));
    } else {
      stats.records_failed++;
      if (options.on_failure) options.on_failure(failure);
    }
  };

  auto note = [&](const RawRecord& raw) {
    std::lock_guard lock(mu);
    stats.records_seen++;
    stats.largest_record = std::max<std::uint64_t>(stats.largest_record, raw.bytes.size());
  };

  if (options.workers <= 1) {
    while (auto raw = stream->next()) {
      note(*raw);
      process(std::move(*raw));
    }
  } else {
    RecordQueue queue(2 * static_cast<std::size_t>(options.workers));
    std::exception_ptr worker_error;
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < options.workers; ++i) {
      pool.emplace_back([&] {
        try {
          while (auto raw = queue.pop()) process(std::move(*raw));
        } catch (...) {
          std::lock_guard lock(mu);
          if (!worker_error) worker_error = std::current_exception();
          queue.close();
        }
      });
    }
    std::exception_ptr reader_error;
    try {
      while (auto raw = stream->next()) {
        note(*raw);
        queue.push(std::move(*raw));
        std::lock_guard lock(mu);
        if (worker_error) break;
      }
    } catch (...) {
      reader_error = std::current_exception();
    }
    queue.close();
    for (auto& t : pool) t.join();
    if (reader_error) std::rethrow_exception(reader_error);
    if (worker_error) std::rethrow_exception(worker_error);
  }
  stats.bytes_read = stream->bytes_read();
  return stats;
}

}  // namespace orcidds
