#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "calib/recalib.hpp"

namespace calib {

inline constexpr int kRecalibratorFormatVersion = 1;

// Versioned JSON text tagged with the method name. Reals are written in
// shortest round-trip form, so loading reproduces them exactly.
std::string serialize_recalibrator(const RecalibratorState& state);
RecalibratorState deserialize_recalibrator(std::string_view text);

void save_recalibrator(const RecalibratorState& state, const std::filesystem::path& path);
RecalibratorState load_recalibrator(const std::filesystem::path& path);

}  // namespace calib
