#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "prefopt/model.hpp"

namespace testing {

// Instance with ids in order (first is the depot), a row-major matrix and
// per-spot score/duration.
inline prefopt::OpInstance MakeOp(const std::vector<std::string>& ids, std::vector<double> matrix,
                                  std::vector<double> score, std::vector<double> duration, double budget) {
  prefopt::OpInstance inst;
  for (const auto& id : ids) {
    prefopt::Spot s;
    s.id = id;
    s.name = id;
    inst.spots.push_back(s);
  }
  inst.travel_time = prefopt::TimeMatrix(ids.size(), std::move(matrix));
  inst.score = std::move(score);
  inst.duration = std::move(duration);
  inst.budget_minutes = budget;
  return inst;
}

inline std::filesystem::path DataDir() { return PREFOPT_TEST_DATA_DIR; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("prefopt-" + tag + "-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
