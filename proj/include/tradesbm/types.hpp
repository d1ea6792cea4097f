#pragma once

#include <string>
#include <string_view>

namespace tradesbm {

// Which reported statistic a flow matrix is read from.
enum class Direction { exports, imports };

// The three network families: exports (X), imports (I), net exports (NX).
enum class NetworkKind { X, I, NX };

std::string_view to_string(Direction d);
std::string_view to_string(NetworkKind k);
NetworkKind parse_network_kind(std::string_view s);

}  // namespace tradesbm
