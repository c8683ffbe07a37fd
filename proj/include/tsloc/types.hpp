#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace tsloc {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

enum class Errc {
  DuplicateNodeId,
  MixedDimensionality,
  EmptyScene,
  UnknownNodeId,
  InvalidParams,
  NegativeDistance,
  NoTransmitters,
  MissingClock,
  SigmaForBlindNode,
  MismatchedReceiver,
  MismatchedPacket,
  IncompleteQuad,
  InsufficientCommonPackets,
  MissingDriftEstimate,
  InsufficientAnchors,
  DisconnectedTarget,
  SingularGeometry,
  NoConvergence,
  TooFewEntriesToFilter,
  UnlocatableNode,
  AllTrialsFailed,
  ScenarioError,
  IoError,
};

const char* errc_name(Errc code);

/// Exception carrying a machine-checkable error code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Node identifier, unique within a scene.
struct NodeId {
  std::string value;

  NodeId() = default;
  explicit NodeId(std::string v) : value(std::move(v)) {}
  NodeId(const char* v) : value(v) {}

  auto operator<=>(const NodeId&) const = default;
};

}  // namespace tsloc

template <>
struct std::hash<tsloc::NodeId> {
  std::size_t operator()(const tsloc::NodeId& id) const noexcept {
    return std::hash<std::string>{}(id.value);
  }
};
