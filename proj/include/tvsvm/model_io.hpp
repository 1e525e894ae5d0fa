#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "tvsvm/tv_svm.hpp"

namespace tvsvm {

inline constexpr int kModelFormatVersion = 1;

// Versioned JSON document. Doubles are written as their shortest
// round-trip decimal text, so load(save(m)) reproduces every parameter
// bit for bit.
std::string model_to_json(const TvSvmModel& model);
TvSvmModel model_from_json(std::string_view text);

void save_model(const TvSvmModel& model, const std::filesystem::path& path);
TvSvmModel load_model(const std::filesystem::path& path);

}  // namespace tvsvm
