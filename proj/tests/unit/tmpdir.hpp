#pragma once

#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <string>

// RAII scratch directory under the system temp root.
struct tmpdir {
    std::filesystem::path path;

    tmpdir() {
        std::string tmpl =
            (std::filesystem::temp_directory_path() / "vrstream_test_XXXXXX").string();
        if (::mkdtemp(tmpl.data()) == nullptr)
            throw std::runtime_error("mkdtemp failed");
        path = tmpl;
    }
    ~tmpdir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    tmpdir(const tmpdir&) = delete;
    tmpdir& operator=(const tmpdir&) = delete;

    std::string file(const std::string& name) const { return (path / name).string(); }
};
