#pragma once

#include <filesystem>
#include <string_view>

#include "panelmi/mice.hpp"

namespace panelmi::cli {

/// Reads the `chain,iteration,variable,mean,sd` layout written by format_trace_csv.
ChainTrace parse_trace_csv(std::string_view text);
ChainTrace read_trace_csv(const std::filesystem::path& path);

}  // namespace panelmi::cli
