#include "tradesbm/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

namespace tradesbm {

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_logger_mt("tradesbm");
    l->set_pattern("[%n] %l: %v");
    return l;
  }();
  return instance;
}

}  // namespace tradesbm
