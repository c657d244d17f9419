#include "fxctl/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fxctl/error.hpp"

namespace fxctl {

namespace {

constexpr const char* kStage = "catalog";

double read_number(const nlohmann::json& entry, const char* field, const std::string& who) {
  auto it = entry.find(field);
  if (it == entry.end() || !it->is_number()) {
    throw Error(ErrorKind::parse, kStage,
                "catalog entry '" + who + "': field '" + field + "' missing or not a number");
  }
  return it->get<double>();
}

std::string read_string(const nlohmann::json& entry, const char* field, const std::string& who) {
  auto it = entry.find(field);
  if (it == entry.end() || !it->is_string()) {
    throw Error(ErrorKind::parse, kStage,
                "catalog entry '" + who + "': field '" + field + "' missing or not a string");
  }
  return it->get<std::string>();
}

}  // namespace

std::string format_number(double value) {
  if (value == 0.0) return "0";  // also folds -0
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) return std::to_string(value);
  return std::string(buf, end);
}

std::string Violation::message() const {
  switch (bound) {
    case Bound::unknown_name:
      return "unknown parameter '" + name + "'";
    case Bound::below_min:
      return "parameter '" + name + "' value " + format_number(value) + " is below min " +
             format_number(limit);
    case Bound::above_max:
      return "parameter '" + name + "' value " + format_number(value) + " exceeds max " +
             format_number(limit);
    case Bound::not_finite:
      return "parameter '" + name + "' value is not finite";
  }
  return "invalid assignment";
}

Catalog::Catalog(std::string version, std::vector<ParamSpec> specs)
    : version_(std::move(version)), specs_(std::move(specs)) {
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const auto& s = specs_[i];
    if (!index_.emplace(s.name, i).second) {
      throw Error(ErrorKind::validation, kStage, "duplicate parameter name '" + s.name + "'");
    }
    if (!(s.min < s.max)) {
      throw Error(ErrorKind::validation, kStage, "parameter '" + s.name + "': min must be < max");
    }
    if (s.default_value < s.min || s.default_value > s.max) {
      throw Error(ErrorKind::validation, kStage,
                  "parameter '" + s.name + "': default outside [min, max]");
    }
  }
}

bool Catalog::contains(std::string_view name) const { return find(name) != nullptr; }

const ParamSpec* Catalog::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &specs_[it->second];
}

const ParamSpec& Catalog::at(std::string_view name) const {
  if (const auto* s = find(name)) return *s;
  throw Error(ErrorKind::unknown_parameter, kStage, "unknown parameter '" + std::string(name) + "'");
}

double Catalog::clamp_to_range(std::string_view name, double value) const {
  const auto& s = at(name);
  if (std::isnan(value)) return s.default_value;
  return std::clamp(value, s.min, s.max);
}

ParamPath Catalog::resolve_path(std::string_view name, int emitter_index) const {
  const auto& s = at(name);
  if (emitter_index < 0) {
    throw Error(ErrorKind::validation, kStage, "emitter index must be >= 0");
  }
  if (s.path_template.starts_with(kGroupPrefix)) {
    return ParamPath{s.path_template, true};
  }
  std::string text = s.path_template;
  const std::string idx = std::to_string(emitter_index);
  for (auto pos = text.find(kEmitterIndexPlaceholder); pos != std::string::npos;
       pos = text.find(kEmitterIndexPlaceholder, pos + idx.size())) {
    text.replace(pos, kEmitterIndexPlaceholder.size(), idx);
  }
  if (text.find('{') != std::string::npos) {
    throw Error(ErrorKind::validation, kStage,
                "parameter '" + s.name + "': unresolved placeholder in path '" + text + "'");
  }
  return ParamPath{std::move(text), false};
}

ValidationReport Catalog::validate_assignment(std::string_view name, double value) const {
  const auto* s = find(name);
  if (s == nullptr) return Violation{std::string(name), Violation::Bound::unknown_name, value, 0.0};
  if (!std::isfinite(value)) return Violation{s->name, Violation::Bound::not_finite, value, 0.0};
  if (value < s->min) return Violation{s->name, Violation::Bound::below_min, value, s->min};
  if (value > s->max) return Violation{s->name, Violation::Bound::above_max, value, s->max};
  return std::nullopt;
}

std::vector<std::string> Catalog::names() const {
  std::vector<std::string> out;
  out.reserve(specs_.size());
  for (const auto& s : specs_) out.push_back(s.name);
  return out;
}

Catalog load_catalog(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, kStage, std::string("catalog is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("parameters") || !doc["parameters"].is_array()) {
    throw Error(ErrorKind::parse, kStage, "catalog document needs a 'parameters' array");
  }
  const auto& entries = doc["parameters"];
  if (entries.empty()) throw Error(ErrorKind::parse, kStage, "catalog has no parameters");

  std::vector<ParamSpec> specs;
  specs.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const std::string who = e.is_object() && e.contains("name") && e["name"].is_string()
                                ? e["name"].get<std::string>()
                                : "#" + std::to_string(i);
    if (!e.is_object()) throw Error(ErrorKind::parse, kStage, "catalog entry " + who + " is not an object");
    ParamSpec s;
    s.name = read_string(e, "name", who);
    s.description = read_string(e, "description", who);
    s.min = read_number(e, "min", who);
    s.max = read_number(e, "max", who);
    s.default_value = read_number(e, "default", who);
    s.path_template = read_string(e, "path", who);
    specs.push_back(std::move(s));
  }
  std::string version = doc.value("version", std::string("0"));
  return Catalog(std::move(version), std::move(specs));
}

Catalog load_catalog_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, kStage, "cannot open catalog '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_catalog(ss.str());
}

std::string catalog_names_list(const Catalog& catalog) {
  std::string out;
  for (const auto& s : catalog.specs()) {
    if (!out.empty()) out += ", ";
    out += s.name;
  }
  return out;
}

std::string catalog_details_lines(const Catalog& catalog) {
  std::string out;
  for (const auto& s : catalog.specs()) {
    if (!out.empty()) out += '\n';
    out += "- " + s.name + ": " + s.description;
  }
  return out;
}

std::string catalog_descriptions_json(const Catalog& catalog) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& s : catalog.specs()) j[s.name] = s.description;
  return j.dump(2);
}

}  // namespace fxctl
