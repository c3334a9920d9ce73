#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "stagecraft/domain.hpp"
#include "stagecraft/gateway.hpp"

namespace testing {

inline std::filesystem::path fixture(const std::string& rel) {
    return std::filesystem::path(STAGECRAFT_FIXTURE_DIR) / rel;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "stagecraft") {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                (tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

// Gateway over a backend that never sleeps between retries.
inline std::unique_ptr<stagecraft::Gateway> gateway_for(std::shared_ptr<stagecraft::Backend> backend,
                                                       stagecraft::PriceTable prices = {}) {
    auto gw = std::make_unique<stagecraft::Gateway>(std::move(backend), stagecraft::RetryPolicy{},
                                                    std::move(prices));
    gw->set_sleeper([](std::chrono::milliseconds) {});
    return gw;
}

inline stagecraft::Scene two_hander() {
    stagecraft::Scene s;
    s.id = "t-01";
    s.title = "Test Piece";
    s.environment = {"Dusk", "A cave mouth", "A damp cave mouth with a low ceiling and a smouldering fire."};
    s.characters = {{"Wukong", "Monkey King", "Brash immortal with a staff.", "By the fire", "Restless"},
                    {"Sanzang", "Monk", "Gentle devout pilgrim.", "At the entrance", "Tired"}};
    return s;
}

inline std::string slurp(const std::filesystem::path& p) { return stagecraft::read_file(p); }

// Every regular file under root, relative path -> content.
inline std::vector<std::pair<std::string, std::string>> tree(const std::filesystem::path& root) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out.emplace_back(std::filesystem::relative(e.path(), root).string(), slurp(e.path()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace testing
