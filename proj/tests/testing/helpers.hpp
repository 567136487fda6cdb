#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>

namespace testing_support {

/// Unique directory under the system temp root, removed on destruction.
class TempDir {
  public:
    TempDir() {
        static std::atomic<unsigned long> counter{0};
        const auto n = counter.fetch_add(1);
        path_ = std::filesystem::temp_directory_path() /
                ("faith_test_" + std::to_string(::getpid()) + "_" + std::to_string(n));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

}  // namespace testing_support
