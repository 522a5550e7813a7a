#pragma once

#include "intentflow/error.hpp"
#include "intentflow/exec/value.hpp"
#include "intentflow/time.hpp"

#include <json.hpp>

#include <atomic>
#include <cctype>
#include <filesystem>
#include <memory>
#include <random>
#include <string>

namespace testing {

namespace fs = std::filesystem;

inline fs::path fixture(const std::string& rel) { return fs::path(INTENTFLOW_FIXTURES) / rel; }

inline nlohmann::json fixture_json(const std::string& rel) {
  return nlohmann::json::parse(intentflow::exec::read_file(fixture(rel)));
}

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("intentflow-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

private:
  fs::path path_;
};

inline intentflow::Timestamp ts(const char* text) { return intentflow::parse_utc(text); }

/// Step text compared "within normalization": case, capsule braces,
/// trailing punctuation and runs of whitespace are ignored.
inline std::string normalize_step(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '{' || c == '}') continue;
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
      continue;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  while (!out.empty() && (out.back() == ' ' || out.back() == '.' || out.back() == '!')) out.pop_back();
  return out;
}

/// A clock tests can move by hand.
struct ManualClock {
  std::shared_ptr<std::atomic<std::int64_t>> now =
      std::make_shared<std::atomic<std::int64_t>>(ts("2026-03-24T09:00:00Z").time_since_epoch().count());

  intentflow::Clock clock() const {
    auto n = now;
    return [n] { return intentflow::Timestamp(std::chrono::seconds(n->load())); };
  }
  void set(intentflow::Timestamp t) { now->store(t.time_since_epoch().count()); }
  void advance(std::chrono::seconds s) { now->fetch_add(s.count()); }
};

/// Copies the detector answers where the stub looks for them.
inline void install_riley_fixtures(const fs::path& data_dir) {
  fs::create_directories(data_dir / "fixtures");
  fs::copy_file(fixture("riley/person_detection.json"), data_dir / "fixtures/person_detection.json",
                fs::copy_options::overwrite_existing);
  fs::copy_file(fixture("riley/image_link.xlsx"), data_dir / "image_link.xlsx", fs::copy_options::overwrite_existing);
}

}  // namespace testing

/// Checks that `expr` throws intentflow::Error with `code`.
#define CHECK_ERROR_CODE(expr, code_)                                       \
  do {                                                                      \
    bool thrown_ = false;                                                   \
    try {                                                                   \
      (void)(expr);                                                         \
    } catch (const intentflow::Error& e_) {                                 \
      thrown_ = true;                                                       \
      CHECK_MESSAGE(e_.code() == (code_), e_.what());                       \
    }                                                                       \
    CHECK_MESSAGE(thrown_, "expected intentflow::Error from " #expr);       \
  } while (0)
