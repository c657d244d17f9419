#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fxctl/catalog.hpp"
#include "fxctl/rng.hpp"

namespace fxctl {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool operator==(const Vec3&) const = default;
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
double dot(Vec3 a, Vec3 b);
double length(Vec3 a);

enum class TemplateKind { fire, fountain, firework, bubbles, trail };

inline constexpr TemplateKind kAllTemplates[] = {TemplateKind::fire, TemplateKind::fountain,
                                                 TemplateKind::firework, TemplateKind::bubbles,
                                                 TemplateKind::trail};

std::string_view to_string(TemplateKind kind) noexcept;
// Accepts the five canonical names plus "trail-effect". Throws Error(validation).
TemplateKind parse_template_kind(std::string_view name);
std::optional<TemplateKind> try_parse_template_kind(std::string_view name);
std::string template_library_list();  // "fire, fountain, firework, bubbles, trail-effect"

// One field per catalog parameter; names match the catalog.
struct EmitterConfig {
  double emission_time = 0.1;
  double particles_count = 10;
  double particle_mass = 10;
  double particle_lifetime = 1;
  double velocity_theta = 0;
  double velocity_radius = 5;
  double alpha_start = 1;
  double alpha_end = 0.1;
  double color_start_red = 255;
  double color_start_green = 100;
  double color_start_blue = 0;
  double color_end_red = 255;
  double color_end_green = 0;
  double color_end_blue = 0;
  double scale_start = 1;
  double scale_end = 0.5;
  double force_x = 0;
  double force_y = 0;
  double force_z = 0;
  double position_x = 0;
  double position_y = 0;
  double position_z = 0;

  bool operator==(const EmitterConfig&) const = default;
};

// Reads/writes an EmitterConfig field by catalog name; nullptr if the name
// has no backing field.
double* emitter_field(EmitterConfig& config, std::string_view name);
const double* emitter_field(const EmitterConfig& config, std::string_view name);

struct Emitter {
  EmitterConfig config;
  Vec3 axis{0, 1, 0};         // emission cone axis (unit)
  double speed_scale = 1.0;   // initial speed = velocity_radius * speed_scale
  double emission_accumulator = 0.0;

  bool operator==(const Emitter&) const = default;
};

// Interpolation endpoints captured at spawn time.
struct BirthConfig {
  double alpha_start = 1, alpha_end = 1;
  Vec3 color_start, color_end;
  double scale_start = 1, scale_end = 1;

  bool operator==(const BirthConfig&) const = default;
};

struct Particle {
  Vec3 position;
  Vec3 velocity;
  double age = 0.0;
  double lifetime = 1.0;
  double mass = 1.0;
  std::uint32_t emitter = 0;  // force behaviour is read live from this emitter
  BirthConfig birth;

  bool operator==(const Particle&) const = default;
};

struct SystemState {
  TemplateKind template_kind = TemplateKind::fire;
  std::vector<Emitter> emitters;
  std::vector<Particle> particles;
  CounterRng rng;
  double sim_time = 0.0;
  std::uint64_t total_spawned = 0;

  bool operator==(const SystemState&) const = default;
};

struct ParticleView {
  Vec3 position;
  Vec3 velocity;
  double alpha = 0.0;
  Vec3 color;
  double scale = 0.0;

  bool operator==(const ParticleView&) const = default;
};

struct Snapshot {
  double sim_time = 0.0;
  std::size_t particle_count = 0;
  std::vector<ParticleView> particles;
  Vec3 mean_position;
  double mean_speed = 0.0;
  double mean_alpha = 0.0;

  bool operator==(const Snapshot&) const = default;
};

// Preset EmitterConfig for a template kind (documented in README).
EmitterConfig template_preset(TemplateKind kind);

// Throws Error(validation) if a preset field falls outside the catalog.
SystemState instantiate_template(TemplateKind kind, const Catalog& catalog, std::uint64_t seed);

// Writes `value` to the field addressed by the catalog path of `name`.
// Group paths (emitter position) apply to every emitter. Existing particles
// keep their birth state; future spawns see the new value.
void apply_parameter(SystemState& state, std::string_view name, double value, const Catalog& catalog,
                     int emitter_index = 0);

// Reads the current value of `name` from emitter `emitter_index`.
double read_parameter(const SystemState& state, std::string_view name, int emitter_index = 0);

// Fixed order: spawn -> integrate -> cull. Returns number of particles spawned.
std::size_t step(SystemState& state, double dt);

Snapshot snapshot(const SystemState& state);

// Linear blend of start/end at t = age / lifetime.
ParticleView view_of(const Particle& p);

}  // namespace fxctl

namespace fxctl {

// Frame document: {"sim_time", "particle_count", "metrics", "particles"}.
// Compact JSON; identical snapshots serialize to identical bytes.
std::string frame_document(const Snapshot& snap);

}  // namespace fxctl
