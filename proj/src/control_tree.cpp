#include "fxctl/control_tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <unordered_set>

#include "fxctl/catalog.hpp"
#include "fxctl/error.hpp"

namespace fxctl {

namespace {

constexpr const char* kStage = "control_tree";

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

std::string_view to_string(Level level) noexcept {
  switch (level) {
    case Level::conceptual: return "concept";
    case Level::attribute: return "attribute";
    case Level::technical: return "technical";
  }
  return "technical";
}

Level parse_level(std::string_view text) {
  if (text == "concept") return Level::conceptual;
  if (text == "attribute") return Level::attribute;
  if (text == "technical") return Level::technical;
  throw Error(ErrorKind::parse, kStage, "unknown level '" + std::string(text) + "'");
}

double normalize(const ControlRange& range, double raw) {
  if (range.min == range.max) {
    throw Error(ErrorKind::validation, kStage, "degenerate control range (min == max)");
  }
  return clamp01((raw - range.min) / (range.max - range.min));
}

double denormalize(const ControlRange& range, double normalized) {
  const double n = clamp01(normalized);
  if (n == 0.0) return range.min;
  if (n == 1.0) return range.max;
  const double raw = range.min + n * (range.max - range.min);
  return std::clamp(raw, std::min(range.min, range.max), std::max(range.min, range.max));
}

double proportional_child_value(double child, double current, double target) {
  return clamp01(child * (target / current));
}

std::vector<double> normalize_weights(std::span<const double> weights, std::size_t n) {
  if (n == 0) return {};
  double sum = 0.0;
  bool usable = weights.size() == n;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) usable = false;
    sum += w;
  }
  if (!usable || !(sum > 0.0)) return std::vector<double>(n, 1.0 / static_cast<double>(n));
  std::vector<double> out(weights.begin(), weights.end());
  for (double& w : out) w /= sum;
  return out;
}

ControlTree::ControlTree(PanelConfig config) : config_(std::move(config)) {
  for (std::size_t i = 0; i < config_.nodes.size(); ++i) {
    const auto& n = config_.nodes[i];
    if (n.id.empty()) throw Error(ErrorKind::validation, kStage, "node with empty id");
    if (!index_.emplace(n.id, i).second) {
      throw Error(ErrorKind::validation, kStage, "duplicate node id '" + n.id + "'");
    }
  }
  for (const auto& n : config_.nodes) {
    if (n.range.min == n.range.max || !std::isfinite(n.range.min) || !std::isfinite(n.range.max)) {
      throw Error(ErrorKind::validation, kStage, "node '" + n.id + "' has a degenerate range");
    }
    if (n.level == Level::technical && !n.children.empty()) {
      throw Error(ErrorKind::validation, kStage, "technical node '" + n.id + "' has children");
    }
    for (const auto& c : n.children) {
      auto it = index_.find(c.id);
      if (it == index_.end()) {
        throw Error(ErrorKind::validation, kStage, "node '" + n.id + "' references unknown child '" + c.id + "'");
      }
      const Level child_level = config_.nodes[it->second].level;
      const bool ok = (n.level == Level::conceptual && child_level == Level::attribute) ||
                      (n.level == Level::attribute && child_level == Level::technical);
      if (!ok) {
        throw Error(ErrorKind::validation, kStage,
                    "node '" + c.id + "' cannot be a child of " + std::string(to_string(n.level)) + " '" +
                        n.id + "'");
      }
      if (!std::isfinite(c.weight) || c.weight < 0.0) {
        throw Error(ErrorKind::validation, kStage, "negative or non-finite weight on '" + c.id + "'");
      }
      if (!parent_.emplace(c.id, n.id).second) {
        throw Error(ErrorKind::validation, kStage, "node '" + c.id + "' has more than one parent");
      }
    }
  }
  for (const auto& r : config_.roots) {
    if (!index_.contains(r)) throw Error(ErrorKind::validation, kStage, "unknown root '" + r + "'");
    if (parent_.contains(r)) throw Error(ErrorKind::validation, kStage, "root '" + r + "' has a parent");
  }
}

bool ControlTree::contains(std::string_view id) const { return index_.contains(std::string(id)); }

const ControlNode& ControlTree::node(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw Error(ErrorKind::unknown_node, kStage, "unknown node '" + std::string(id) + "'");
  return config_.nodes[it->second];
}

ControlNode& ControlTree::mut(std::string_view id) { return const_cast<ControlNode&>(node(id)); }

const std::string& ControlTree::parent_of(std::string_view id) const {
  static const std::string kNone;
  auto it = parent_.find(std::string(id));
  return it == parent_.end() ? kNone : it->second;
}

double ControlTree::raw_value(std::string_view id) const {
  const auto& n = node(id);
  return denormalize(n.range, n.value);
}

double ControlTree::weighted_sum(std::string_view parent_id) const {
  const auto& p = node(parent_id);
  if (p.children.empty()) return p.value;
  double num = 0.0, den = 0.0;
  for (const auto& c : p.children) {
    num += c.weight * node(c.id).value;
    den += c.weight;
  }
  if (den > 0.0) return num / den;
  double sum = 0.0;
  for (const auto& c : p.children) sum += node(c.id).value;
  return sum / static_cast<double>(p.children.size());
}

void ControlTree::write(ControlNode& n, double value) {
  value = clamp01(value);
  if (n.value == value) return;
  auto [it, inserted] = log_index_.emplace(n.id, log_.size());
  if (inserted) {
    log_.push_back({n.id, n.value, value});
  } else {
    log_[it->second].new_value = value;
  }
  n.value = value;
}

void ControlTree::aggregate_from(std::string_view parent_id) {
  for (std::string id(parent_id); !id.empty(); id = parent_of(id)) {
    ControlNode& p = mut(id);
    if (p.children.empty() || p.interacting || p.locked) continue;
    write(p, weighted_sum(id));
  }
}

double ControlTree::aggregate_up(std::string_view parent_id) {
  log_.clear();
  log_index_.clear();
  aggregate_from(parent_id);
  return node(parent_id).value;
}

ControlTree::Redistribution ControlTree::distribute(ControlNode& parent, double target) {
  target = clamp01(target);
  Redistribution r;
  if (parent.children.empty()) return r;

  std::vector<ControlNode*> kids;
  std::vector<double> values, weights;
  std::vector<bool> free;
  for (const auto& c : parent.children) {
    ControlNode& k = mut(c.id);
    kids.push_back(&k);
    values.push_back(k.value);
    weights.push_back(c.weight);
    free.push_back(!k.locked && !k.interacting);
  }
  double total_weight = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total_weight > 0.0)) {
    std::fill(weights.begin(), weights.end(), 1.0);
    total_weight = static_cast<double>(weights.size());
  }
  auto sum_of = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += weights[i] * values[i];
    return s / total_weight;
  };

  const double current = sum_of();
  if (current < kDegenerateCurrent) {
    for (std::size_t i = 0; i < values.size(); ++i)
      if (free[i]) values[i] = target;
  } else if (target != current) {
    for (std::size_t i = 0; i < values.size(); ++i)
      if (free[i]) values[i] = proportional_child_value(values[i], current, target);
  }

  while (r.iterations < kMaxRedistributionIterations) {
    const double deficit = target - sum_of();
    if (std::abs(deficit) <= kRedistributionTolerance) break;
    double movable_weight = 0.0;
    std::vector<std::size_t> movable;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!free[i] || !(weights[i] > 0.0)) continue;
      if (deficit > 0.0 ? values[i] < 1.0 : values[i] > 0.0) {
        movable.push_back(i);
        movable_weight += weights[i];
      }
    }
    if (movable.empty()) break;
    // Each movable child takes a weight-proportional share of the deficit,
    // which is the same shift in normalized units for all of them.
    const double shift = deficit * total_weight / movable_weight;
    for (auto i : movable) values[i] = clamp01(values[i] + shift);
    ++r.iterations;
  }

  for (std::size_t i = 0; i < kids.size(); ++i) {
    if (!free[i]) continue;
    const double before = kids[i]->value;
    write(*kids[i], values[i]);
    if (!kids[i]->children.empty() && kids[i]->value != before) distribute(*kids[i], kids[i]->value);
  }
  r.residual = std::abs(weighted_sum(parent.id) - target);
  return r;
}

SyncEvent ControlTree::finish(std::string origin, Redistribution r) {
  SyncEvent ev;
  ev.origin = std::move(origin);
  ev.changes = std::move(log_);
  ev.iterations = r.iterations;
  ev.residual = r.residual;
  log_.clear();
  log_index_.clear();
  return ev;
}

SyncEvent ControlTree::distribute_down(std::string_view parent_id, double target) {
  log_.clear();
  log_index_.clear();
  ControlNode& p = mut(parent_id);
  auto r = distribute(p, target);
  return finish(p.id, r);
}

SyncEvent ControlTree::set_normalized_value(std::string_view id, double normalized) {
  log_.clear();
  log_index_.clear();
  ControlNode& n = mut(id);
  if (n.locked) throw Error(ErrorKind::locked, kStage, "node '" + n.id + "' is locked");
  const double requested = clamp01(normalized);

  n.interacting = true;
  write(n, requested);
  Redistribution r;
  if (!n.children.empty()) r = distribute(n, requested);
  aggregate_from(parent_of(n.id));
  n.interacting = false;
  return finish(n.id, r);
}

SyncEvent ControlTree::set_node_value(std::string_view id, double raw) {
  const auto& n = node(id);
  if (!std::isfinite(raw)) throw Error(ErrorKind::validation, kStage, "value for '" + n.id + "' is not finite");
  return set_normalized_value(id, normalize(n.range, raw));
}

SyncEvent ControlTree::apply_preset(std::string_view id, std::string_view label) {
  log_.clear();
  log_index_.clear();
  ControlNode& n = mut(id);
  if (n.locked) throw Error(ErrorKind::locked, kStage, "node '" + n.id + "' is locked");
  auto preset = std::find_if(n.presets.begin(), n.presets.end(),
                             [&](const DropdownPreset& p) { return p.label == label; });
  if (preset == n.presets.end()) {
    throw Error(ErrorKind::validation, kStage,
                "node '" + n.id + "' has no preset '" + std::string(label) + "'");
  }

  // Technical presets carry a single scalar for the node itself.
  if (n.children.empty()) {
    if (preset->values.size() != 1) {
      throw Error(ErrorKind::validation, kStage, "preset '" + preset->label + "' must hold one value");
    }
    const double raw = preset->values.front().second;
    return set_normalized_value(n.id, normalize(n.range, raw));
  }

  std::unordered_map<std::string, double> requested;
  for (const auto& [child_id, coordinate] : preset->values) {
    auto link = std::find_if(n.children.begin(), n.children.end(),
                             [&](const ChildLink& c) { return c.id == child_id; });
    if (link == n.children.end()) {
      throw Error(ErrorKind::validation, kStage, "preset '" + preset->label + "' names unknown child '" + child_id + "'");
    }
    requested[child_id] = normalize(node(child_id).range, coordinate);
  }

  n.interacting = true;
  for (const auto& c : n.children) {
    auto it = requested.find(c.id);
    if (it == requested.end()) continue;
    ControlNode& k = mut(c.id);
    if (k.locked || k.interacting) continue;
    write(k, it->second);
    if (!k.children.empty()) distribute(k, k.value);
  }
  n.interacting = false;
  aggregate_from(n.id);

  // Residual between the achieved weighted sum and the one the preset asked for.
  double want = 0.0, got = 0.0, den = 0.0;
  for (const auto& c : n.children) {
    const double actual = node(c.id).value;
    auto it = requested.find(c.id);
    want += c.weight * (it == requested.end() ? actual : it->second);
    got += c.weight * actual;
    den += c.weight;
  }
  Redistribution r;
  r.residual = den > 0.0 ? std::abs(got - want) / den : 0.0;
  return finish(n.id, r);
}

void ControlTree::lock_node(std::string_view id, bool locked) { mut(id).locked = locked; }

void ControlTree::recompute_all() {
  std::function<void(const std::string&)> visit = [&](const std::string& id) {
    ControlNode& n = mut(id);
    if (n.children.empty()) return;
    for (const auto& c : n.children) visit(c.id);
    n.value = clamp01(weighted_sum(id));
  };
  for (const auto& r : config_.roots) visit(r);
}

void ControlTree::assign_values(std::span<const NodeChange> changes) {
  for (const auto& c : changes) mut(c.id).value = c.new_value;
}

std::vector<std::string> ControlTree::check_invariants(const Catalog* catalog) const {
  std::vector<std::string> out;
  std::unordered_set<std::string> names;
  for (const auto& n : config_.nodes) {
    if (!(n.value >= 0.0 && n.value <= 1.0)) out.push_back("node '" + n.id + "' value outside [0,1]");
    if (n.range.min == n.range.max) out.push_back("node '" + n.id + "' has min == max");
    if (!names.insert(n.name).second) out.push_back("duplicate node name '" + n.name + "'");
    if (!n.children.empty()) {
      double sum = 0.0;
      for (const auto& c : n.children) sum += c.weight;
      if (std::abs(sum - 1.0) > 1e-9) out.push_back("weights of '" + n.id + "' do not sum to 1");
    }
    if (n.level != Level::technical && n.children.empty()) {
      out.push_back(std::string(to_string(n.level)) + " '" + n.id + "' has no children");
    }
    if (!n.step_labels.empty() && (n.step_labels.size() < 3 || n.step_labels.size() > 5)) {
      out.push_back("node '" + n.id + "' needs 3-5 step labels");
    }
    if (n.interacting) out.push_back("node '" + n.id + "' left in interacting state");
    if (n.level == Level::technical) {
      auto b = config_.bindings.find(n.id);
      if (b == config_.bindings.end()) {
        out.push_back("technical node '" + n.id + "' has no binding");
      } else if (catalog != nullptr) {
        const auto* spec = catalog->find(b->second);
        if (spec == nullptr) {
          out.push_back("binding '" + b->second + "' is not in the catalog");
        } else {
          const double lo = std::min(n.range.min, n.range.max), hi = std::max(n.range.min, n.range.max);
          if (lo < spec->min || hi > spec->max) out.push_back("range of '" + n.id + "' exceeds catalog bounds");
        }
      }
    }
  }
  for (const auto& r : config_.roots) {
    if (node(r).level != Level::conceptual) out.push_back("root '" + r + "' is not a concept");
  }
  return out;
}

}  // namespace fxctl
