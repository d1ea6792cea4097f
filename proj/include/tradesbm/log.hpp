#pragma once

#include <memory>

#include <spdlog/logger.h>

namespace tradesbm {

// Library-wide logger ("tradesbm"), stderr by default. Tests and the CLI may
// lower its level; nothing else is global.
std::shared_ptr<spdlog::logger> logger();

}  // namespace tradesbm
