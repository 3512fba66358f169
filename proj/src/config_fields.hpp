#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "calib/cli.hpp"

namespace calib::cli::detail {

struct FieldDef {
    std::string name;
    std::string help;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<void(RunConfig&, const RunConfig&)> fill;  // copy when unset in dst
};

const std::vector<FieldDef>& fields();
const FieldDef* find_field(std::string_view name);

}  // namespace calib::cli::detail
