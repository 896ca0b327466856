#pragma once

#include <filesystem>
#include <string>

#ifndef MMCERT_FIXTURE_DIR
#error "MMCERT_FIXTURE_DIR must be defined by the build"
#endif

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(MMCERT_FIXTURE_DIR) / name;
}
