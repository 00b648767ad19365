#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "smm/model.hpp"

namespace smm {

inline constexpr int kModelSchemaVersion = 1;

struct ModelMetadata {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> fit_mode;
  std::optional<std::string> regime;
  std::optional<int> iterations;
  std::optional<double> encoding_rate;
  std::optional<double> log_likelihood;
};

struct ModelFile {
  ModelParams params;
  ModelMetadata metadata;
};

/// JSON document with 1-based simplex labels, sparse p, and V row-major.
std::string model_to_json(const ModelParams& params, const ModelMetadata& metadata = {});
/// Throws InputError on malformed documents or an unknown schema_version.
ModelFile model_from_json(std::string_view text);

void save_model(const std::filesystem::path& path, const ModelParams& params, const ModelMetadata& metadata = {});
ModelFile load_model(const std::filesystem::path& path);

}  // namespace smm
