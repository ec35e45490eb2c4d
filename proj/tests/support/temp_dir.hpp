#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

namespace testsupport {

// Unique directory under the system temp root, removed on destruction.
struct temp_dir {
    std::filesystem::path path;

    explicit temp_dir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        std::random_device rd;
        path = std::filesystem::temp_directory_path() /
               ("opssc-" + tag + "-" + std::to_string(rd()) + "-" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }

    ~temp_dir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }

    temp_dir(const temp_dir&) = delete;
    temp_dir& operator=(const temp_dir&) = delete;
};

} // namespace testsupport
