#include "tradesbm/types.hpp"

#include "tradesbm/error.hpp"

namespace tradesbm {

std::string_view to_string(Direction d) {
  return d == Direction::exports ? "exports" : "imports";
}

std::string_view to_string(NetworkKind k) {
  switch (k) {
    case NetworkKind::X: return "X";
    case NetworkKind::I: return "I";
    case NetworkKind::NX: return "NX";
  }
  return "?";
}

NetworkKind parse_network_kind(std::string_view s) {
  if (s == "X") return NetworkKind::X;
  if (s == "I") return NetworkKind::I;
  if (s == "NX") return NetworkKind::NX;
  throw InputError("unknown network kind '" + std::string(s) + "' (expected X, I or NX)");
}

}  // namespace tradesbm
