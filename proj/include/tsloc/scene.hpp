#pragma once

#include <Eigen/Core>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tsloc/types.hpp"

namespace tsloc {

enum class NodeRole {
  FixedTransmitOnly,
  FixedReceiveOnly,
  FixedTransceiver,
  MobileGnss,
  Blind,
};

const char* node_role_name(NodeRole role);

enum class LinkFlag { Los, Nlos };

struct NodeConfig {
  NodeId id;
  NodeRole role = NodeRole::FixedTransceiver;
  Eigen::VectorXd coords;
  // Mobile roles may be transceivers or receive-only; fixed roles ignore this.
  // Defaults: MobileGnss transmits, Blind does not.
  std::optional<bool> can_transmit;
};

struct SceneConfig {
  std::vector<NodeConfig> nodes;
  std::vector<std::pair<NodeId, NodeId>> nlos_links;
};

/// Static world shared by the simulator and the estimators: node roles, true
/// positions and per-link LOS/NLOS flags. Immutable once built, safe to share
/// across concurrent trials.
class Scene {
 public:
  static Scene build(const SceneConfig& config);

  int dimension() const { return dimension_; }
  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<NodeId>& node_ids() const { return ids_; }

  bool contains(const NodeId& id) const;
  NodeRole role(const NodeId& id) const;
  const Eigen::VectorXd& position(const NodeId& id) const;
  bool can_transmit(const NodeId& id) const;
  bool can_receive(const NodeId& id) const;

  /// LOS unless the pair was listed as NLOS; symmetric.
  LinkFlag link_flag(const NodeId& a, const NodeId& b) const;

  /// Euclidean distance between two nodes.
  double distance(const NodeId& a, const NodeId& b) const;

 private:
  struct Node {
    NodeId id;
    NodeRole role;
    Eigen::VectorXd coords;
    bool can_tx;
    bool can_rx;
  };

  const Node& node_at(const NodeId& id) const;

  int dimension_ = 0;
  std::vector<Node> nodes_;
  std::vector<NodeId> ids_;
  std::unordered_map<NodeId, std::size_t> index_;
  // Symmetric NLOS pairs, stored with ids ordered.
  std::vector<std::pair<NodeId, NodeId>> nlos_links_;
};

}  // namespace tsloc
