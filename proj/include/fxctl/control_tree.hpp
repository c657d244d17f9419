#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fxctl {

class Catalog;

enum class Level { conceptual, attribute, technical };

std::string_view to_string(Level level) noexcept;
Level parse_level(std::string_view text);

// Technical ranges run from the live current value (min) toward the goal
// value (max) and may be inverted. Concepts and attributes use 0..100.
struct ControlRange {
  double min = 0.0;
  double max = 100.0;

  bool inverted() const noexcept { return min > max; }
  bool operator==(const ControlRange&) const = default;
};

// (raw - min) / (max - min) clamped to [0, 1]. Throws on min == max.
double normalize(const ControlRange& range, double raw);
// Inverse of normalize; result is clamped to the range's span.
double denormalize(const ControlRange& range, double normalized);

struct ChildLink {
  std::string id;
  double weight = 0.0;

  bool operator==(const ChildLink&) const = default;
};

// Coordinates are in each child's own display units (0..100 for
// attributes, raw parameter values for technical children). A technical
// node's presets hold one pair keyed by its own id.
struct DropdownPreset {
  std::string label;
  std::vector<std::pair<std::string, double>> values;

  bool operator==(const DropdownPreset&) const = default;
};

struct ControlNode {
  std::string id;
  std::string name;
  Level level = Level::technical;
  std::string description;
  ControlRange range;
  double value = 0.0;  // normalized, in [0, 1]
  std::vector<ChildLink> children;
  std::vector<std::string> step_labels;
  std::vector<DropdownPreset> presets;
  bool locked = false;
  bool interacting = false;

  bool operator==(const ControlNode&) const = default;
};

struct PanelConfig {
  std::string panel_name;
  std::string system_type;  // template kind the bindings target
  std::vector<std::string> roots;
  std::vector<ControlNode> nodes;
  std::map<std::string, std::string> bindings;  // technical node id -> catalog parameter

  bool operator==(const PanelConfig&) const = default;
};

struct NodeChange {
  std::string id;
  double old_value = 0.0;
  double new_value = 0.0;
};

// Audit record of one propagation pass.
struct SyncEvent {
  std::string origin;
  std::vector<NodeChange> changes;
  int iterations = 0;
  double residual = 0.0;
};

// Divides by the sum when it is positive; absent, empty, or all-zero
// weights fall back to 1/n for n children.
std::vector<double> normalize_weights(std::span<const double> weights, std::size_t n);

// One child's proportional update before redistribution:
// clamp(child * target / current, 0, 1).
double proportional_child_value(double child, double current, double target);

inline constexpr int kMaxRedistributionIterations = 5;
inline constexpr double kRedistributionTolerance = 0.001;
inline constexpr double kDegenerateCurrent = 1e-6;

// Three-level synchronized hierarchy. Not thread-safe; callers serialize
// mutations (the service does this per session).
class ControlTree {
 public:
  ControlTree() = default;
  // Throws Error(validation) on structural problems.
  explicit ControlTree(PanelConfig config);

  const PanelConfig& config() const noexcept { return config_; }
  bool contains(std::string_view id) const;
  const ControlNode& node(std::string_view id) const;
  // Empty for roots.
  const std::string& parent_of(std::string_view id) const;
  double raw_value(std::string_view id) const;

  // Weighted mean over the node's current children: sum(w * c) / sum(w).
  double weighted_sum(std::string_view parent_id) const;

  // Recomputes the parent as the weighted mean of its children, then its ancestors. Nodes that are
  // interacting or locked keep their value; propagation continues past them.
  double aggregate_up(std::string_view parent_id);

  // Proportional scaling with clamping and bounded redistribution, recursing
  // to the leaves. Locked and interacting children are left untouched.
  SyncEvent distribute_down(std::string_view parent_id, double target);

  // User edit in display units. The origin keeps exactly the requested value.
  SyncEvent set_node_value(std::string_view id, double raw);
  SyncEvent set_normalized_value(std::string_view id, double normalized);

  SyncEvent apply_preset(std::string_view id, std::string_view label);

  void lock_node(std::string_view id, bool locked);

  // Recomputes every concept/attribute from its children, leaves first.
  void recompute_all();

  // Writes normalized values verbatim (replaying a changed-set).
  void assign_values(std::span<const NodeChange> changes);

  // Empty when every invariant holds; otherwise one line per violation.
  std::vector<std::string> check_invariants(const Catalog* catalog = nullptr) const;

 private:
  struct Redistribution {
    int iterations = 0;
    double residual = 0.0;
  };

  ControlNode& mut(std::string_view id);
  void write(ControlNode& node, double value);
  Redistribution distribute(ControlNode& parent, double target);
  void aggregate_from(std::string_view parent_id);
  SyncEvent finish(std::string origin, Redistribution r);

  PanelConfig config_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::string> parent_;
  std::vector<NodeChange> log_;
  std::unordered_map<std::string, std::size_t> log_index_;
};

}  // namespace fxctl
