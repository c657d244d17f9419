#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fxctl {

// One technical parameter of the particle engine.
struct ParamSpec {
  std::string name;
  std::string description;
  double min = 0.0;
  double max = 1.0;
  double default_value = 0.0;
  // Engine path with an `{emitterIndex}` placeholder, or a group sentinel
  // such as `__group_position_x`.
  std::string path_template;
};

struct ParamPath {
  std::string text;
  bool group = false;

  bool operator==(const ParamPath&) const = default;
};

struct Violation {
  enum class Bound { unknown_name, below_min, above_max, not_finite };
  std::string name;
  Bound bound = Bound::unknown_name;
  double value = 0.0;
  double limit = 0.0;

  std::string message() const;
};

// Empty optional means the assignment is valid.
using ValidationReport = std::optional<Violation>;

inline constexpr std::string_view kEmitterIndexPlaceholder = "{emitterIndex}";
inline constexpr std::string_view kGroupPrefix = "__group_";

// Immutable after load.
class Catalog {
 public:
  Catalog() = default;
  Catalog(std::string version, std::vector<ParamSpec> specs);

  const std::string& version() const noexcept { return version_; }
  const std::vector<ParamSpec>& specs() const noexcept { return specs_; }
  std::size_t size() const noexcept { return specs_.size(); }

  bool contains(std::string_view name) const;
  const ParamSpec* find(std::string_view name) const;
  // Throws Error(unknown_parameter).
  const ParamSpec& at(std::string_view name) const;

  double clamp_to_range(std::string_view name, double value) const;
  ParamPath resolve_path(std::string_view name, int emitter_index) const;
  ValidationReport validate_assignment(std::string_view name, double value) const;

  std::vector<std::string> names() const;

 private:
  std::string version_;
  std::vector<ParamSpec> specs_;
  std::unordered_map<std::string, std::size_t> index_;
};

Catalog load_catalog(std::string_view document);
Catalog load_catalog_file(const std::filesystem::path& path);

// Text renderings used as prompt context.
std::string catalog_names_list(const Catalog& catalog);         // "a, b, c"
std::string catalog_details_lines(const Catalog& catalog);      // "- a: desc" per line
std::string catalog_descriptions_json(const Catalog& catalog);  // {"a": "desc", ...}

// Shortest round-trip decimal text for a double ("0.1", "180", "-50").
std::string format_number(double value);

}  // namespace fxctl
