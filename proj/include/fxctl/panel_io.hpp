#pragma once

#include <string>
#include <string_view>

#include "fxctl/control_tree.hpp"

namespace fxctl {

inline constexpr std::string_view kPanelFormat = "fxctl.panel";
inline constexpr int kPanelVersion = 1;

// Lossless: doubles are written in shortest round-trip form, so
// parse(serialize(p)) == p including locks, weights, ranges and values.
std::string serialize_panel(const PanelConfig& panel);
// Throws Error(version_mismatch) or Error(parse).
PanelConfig parse_panel(std::string_view document);

}  // namespace fxctl
