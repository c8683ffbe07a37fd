#include "tsloc/scene.hpp"

#include <algorithm>
#include <cmath>

namespace tsloc {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::DuplicateNodeId: return "DuplicateNodeId";
    case Errc::MixedDimensionality: return "MixedDimensionality";
    case Errc::EmptyScene: return "EmptyScene";
    case Errc::UnknownNodeId: return "UnknownNodeId";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::NegativeDistance: return "NegativeDistance";
    case Errc::NoTransmitters: return "NoTransmitters";
    case Errc::MissingClock: return "MissingClock";
    case Errc::SigmaForBlindNode: return "SigmaForBlindNode";
    case Errc::MismatchedReceiver: return "MismatchedReceiver";
    case Errc::MismatchedPacket: return "MismatchedPacket";
    case Errc::IncompleteQuad: return "IncompleteQuad";
    case Errc::InsufficientCommonPackets: return "InsufficientCommonPackets";
    case Errc::MissingDriftEstimate: return "MissingDriftEstimate";
    case Errc::InsufficientAnchors: return "InsufficientAnchors";
    case Errc::DisconnectedTarget: return "DisconnectedTarget";
    case Errc::SingularGeometry: return "SingularGeometry";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::TooFewEntriesToFilter: return "TooFewEntriesToFilter";
    case Errc::UnlocatableNode: return "UnlocatableNode";
    case Errc::AllTrialsFailed: return "AllTrialsFailed";
    case Errc::ScenarioError: return "ScenarioError";
    case Errc::IoError: return "IoError";
  }
  return "UnknownError";
}

const char* node_role_name(NodeRole role) {
  switch (role) {
    case NodeRole::FixedTransmitOnly: return "fixed_tx";
    case NodeRole::FixedReceiveOnly: return "fixed_rx";
    case NodeRole::FixedTransceiver: return "fixed_transceiver";
    case NodeRole::MobileGnss: return "mobile_gnss";
    case NodeRole::Blind: return "blind";
  }
  return "unknown";
}

namespace {

bool default_can_transmit(NodeRole role) {
  switch (role) {
    case NodeRole::FixedTransmitOnly: return true;
    case NodeRole::FixedReceiveOnly: return false;
    case NodeRole::FixedTransceiver: return true;
    case NodeRole::MobileGnss: return true;
    case NodeRole::Blind: return false;
  }
  return false;
}

bool role_can_receive(NodeRole role) {
  return role != NodeRole::FixedTransmitOnly;
}

}  // namespace

Scene Scene::build(const SceneConfig& config) {
  if (config.nodes.empty()) {
    throw Error(Errc::EmptyScene, "scene has no nodes");
  }

  Scene scene;
  scene.dimension_ = static_cast<int>(config.nodes.front().coords.size());
  if (scene.dimension_ != 2 && scene.dimension_ != 3) {
    throw Error(Errc::MixedDimensionality,
                "coordinates must be 2- or 3-dimensional, got length " +
                    std::to_string(config.nodes.front().coords.size()));
  }

  for (const NodeConfig& nc : config.nodes) {
    if (nc.coords.size() != scene.dimension_) {
      throw Error(Errc::MixedDimensionality,
                  "node '" + nc.id.value + "' has dimension " +
                      std::to_string(nc.coords.size()) + ", scene uses " +
                      std::to_string(scene.dimension_));
    }
    if (!nc.coords.allFinite()) {
      throw Error(Errc::InvalidParams, "node '" + nc.id.value + "' has non-finite coordinates");
    }
    if (scene.index_.count(nc.id) != 0) {
      throw Error(Errc::DuplicateNodeId, "node id '" + nc.id.value + "' appears twice");
    }

    bool can_tx = nc.can_transmit.value_or(default_can_transmit(nc.role));
    if (nc.role == NodeRole::FixedTransmitOnly) can_tx = true;
    if (nc.role == NodeRole::FixedReceiveOnly) can_tx = false;

    scene.index_.emplace(nc.id, scene.nodes_.size());
    scene.ids_.push_back(nc.id);
    scene.nodes_.push_back(Node{nc.id, nc.role, nc.coords, can_tx, role_can_receive(nc.role)});
  }

  for (const auto& [a, b] : config.nlos_links) {
    if (!scene.contains(a)) throw Error(Errc::UnknownNodeId, "NLOS link references '" + a.value + "'");
    if (!scene.contains(b)) throw Error(Errc::UnknownNodeId, "NLOS link references '" + b.value + "'");
    auto pair = a.value < b.value ? std::make_pair(a, b) : std::make_pair(b, a);
    if (std::find(scene.nlos_links_.begin(), scene.nlos_links_.end(), pair) ==
        scene.nlos_links_.end()) {
      scene.nlos_links_.push_back(pair);
    }
  }

  return scene;
}

const Scene::Node& Scene::node_at(const NodeId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw Error(Errc::UnknownNodeId, "no node '" + id.value + "' in scene");
  }
  return nodes_[it->second];
}

bool Scene::contains(const NodeId& id) const { return index_.count(id) != 0; }

NodeRole Scene::role(const NodeId& id) const { return node_at(id).role; }

const Eigen::VectorXd& Scene::position(const NodeId& id) const { return node_at(id).coords; }

bool Scene::can_transmit(const NodeId& id) const { return node_at(id).can_tx; }

bool Scene::can_receive(const NodeId& id) const { return node_at(id).can_rx; }

LinkFlag Scene::link_flag(const NodeId& a, const NodeId& b) const {
  auto pair = a.value < b.value ? std::make_pair(a, b) : std::make_pair(b, a);
  bool nlos = std::find(nlos_links_.begin(), nlos_links_.end(), pair) != nlos_links_.end();
  return nlos ? LinkFlag::Nlos : LinkFlag::Los;
}

double Scene::distance(const NodeId& a, const NodeId& b) const {
  return (node_at(a).coords - node_at(b).coords).norm();
}

}  // namespace tsloc
