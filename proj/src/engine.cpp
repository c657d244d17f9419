#include "fxctl/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "fxctl/error.hpp"

namespace fxctl {

namespace {

constexpr const char* kStage = "engine";

struct FieldBinding {
  std::string_view name;
  std::string_view path_suffix;  // path after "emitters[N]." or the group sentinel
  double EmitterConfig::*member;
};

constexpr std::array<FieldBinding, 22> kFields{{
    {"emission_time", "rate.timePan", &EmitterConfig::emission_time},
    {"particles_count", "rate.numPan", &EmitterConfig::particles_count},
    {"particle_mass", "initializers[mass].massPan", &EmitterConfig::particle_mass},
    {"particle_lifetime", "initializers[life].lifePan", &EmitterConfig::particle_lifetime},
    {"velocity_theta", "initializers[velocity].tha", &EmitterConfig::velocity_theta},
    {"velocity_radius", "initializers[velocity].radiusPan", &EmitterConfig::velocity_radius},
    {"alpha_start", "behaviours[alpha].alphaA", &EmitterConfig::alpha_start},
    {"alpha_end", "behaviours[alpha].alphaB", &EmitterConfig::alpha_end},
    {"color_start_red", "behaviours[color].colorA.r", &EmitterConfig::color_start_red},
    {"color_start_green", "behaviours[color].colorA.g", &EmitterConfig::color_start_green},
    {"color_start_blue", "behaviours[color].colorA.b", &EmitterConfig::color_start_blue},
    {"color_end_red", "behaviours[color].colorB.r", &EmitterConfig::color_end_red},
    {"color_end_green", "behaviours[color].colorB.g", &EmitterConfig::color_end_green},
    {"color_end_blue", "behaviours[color].colorB.b", &EmitterConfig::color_end_blue},
    {"scale_start", "behaviours[scale].scaleA", &EmitterConfig::scale_start},
    {"scale_end", "behaviours[scale].scaleB", &EmitterConfig::scale_end},
    {"force_x", "behaviours[force].force.x", &EmitterConfig::force_x},
    {"force_y", "behaviours[force].force.y", &EmitterConfig::force_y},
    {"force_z", "behaviours[force].force.z", &EmitterConfig::force_z},
    {"position_x", "__group_position_x", &EmitterConfig::position_x},
    {"position_y", "__group_position_y", &EmitterConfig::position_y},
    {"position_z", "__group_position_z", &EmitterConfig::position_z},
}};

const FieldBinding* field_by_name(std::string_view name) {
  for (const auto& f : kFields)
    if (f.name == name) return &f;
  return nullptr;
}

const FieldBinding* field_by_suffix(std::string_view suffix) {
  for (const auto& f : kFields)
    if (f.path_suffix == suffix) return &f;
  return nullptr;
}

// Splits "emitters[3].behaviours[force].force.x" into (3, "behaviours[force].force.x").
bool split_emitter_path(std::string_view path, std::size_t& index, std::string_view& suffix) {
  constexpr std::string_view prefix = "emitters[";
  if (!path.starts_with(prefix)) return false;
  auto close = path.find(']', prefix.size());
  if (close == std::string_view::npos || close + 1 >= path.size() || path[close + 1] != '.') return false;
  std::size_t value = 0;
  for (auto i = prefix.size(); i < close; ++i) {
    if (path[i] < '0' || path[i] > '9') return false;
    value = value * 10 + static_cast<std::size_t>(path[i] - '0');
  }
  index = value;
  suffix = path.substr(close + 2);
  return true;
}

struct TemplateTraits {
  Vec3 axis;
  double speed_scale;
};

TemplateTraits template_traits(TemplateKind kind) {
  switch (kind) {
    case TemplateKind::trail:
      return {{0, 0, -1}, 1.0};
    default:
      return {{0, 1, 0}, 1.0};
  }
}

Vec3 origin_of(const EmitterConfig& c) { return {c.position_x, c.position_y, c.position_z}; }

// Uniform direction in the spherical cone of half-angle `theta_deg` around `axis`.
Vec3 sample_cone(CounterRng& rng, Vec3 axis, double theta_deg) {
  const double cos_max = std::cos(theta_deg * std::numbers::pi / 180.0);
  const double u1 = rng.next_unit();
  const double u2 = rng.next_unit();
  const double cos_t = 1.0 - u1 * (1.0 - cos_max);
  const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
  const double phi = 2.0 * std::numbers::pi * u2;

  // Orthonormal basis (t, axis, b).
  Vec3 helper = std::abs(axis.y) < 0.9 ? Vec3{0, 1, 0} : Vec3{1, 0, 0};
  Vec3 t{helper.y * axis.z - helper.z * axis.y, helper.z * axis.x - helper.x * axis.z,
         helper.x * axis.y - helper.y * axis.x};
  t = t * (1.0 / length(t));
  Vec3 b{axis.y * t.z - axis.z * t.y, axis.z * t.x - axis.x * t.z, axis.x * t.y - axis.y * t.x};
  return t * (sin_t * std::cos(phi)) + axis * cos_t + b * (sin_t * std::sin(phi));
}

void spawn(SystemState& state, std::uint32_t emitter_index) {
  const Emitter& e = state.emitters[emitter_index];
  const EmitterConfig& c = e.config;
  Particle p;
  p.position = origin_of(c);
  p.velocity = sample_cone(state.rng, e.axis, c.velocity_theta) * (c.velocity_radius * e.speed_scale);
  p.lifetime = c.particle_lifetime;
  p.mass = c.particle_mass;
  p.emitter = emitter_index;
  p.birth = BirthConfig{c.alpha_start,
                        c.alpha_end,
                        {c.color_start_red, c.color_start_green, c.color_start_blue},
                        {c.color_end_red, c.color_end_green, c.color_end_blue},
                        c.scale_start,
                        c.scale_end};
  state.particles.push_back(p);
  ++state.total_spawned;
}

// Exact at both endpoints.
double lerp(double a, double b, double t) { return (1.0 - t) * a + t * b; }

}  // namespace

double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
double length(Vec3 a) { return std::sqrt(dot(a, a)); }

std::string_view to_string(TemplateKind kind) noexcept {
  switch (kind) {
    case TemplateKind::fire: return "fire";
    case TemplateKind::fountain: return "fountain";
    case TemplateKind::firework: return "firework";
    case TemplateKind::bubbles: return "bubbles";
    case TemplateKind::trail: return "trail";
  }
  return "fire";
}

std::optional<TemplateKind> try_parse_template_kind(std::string_view name) {
  for (auto k : kAllTemplates)
    if (to_string(k) == name) return k;
  if (name == "trail-effect") return TemplateKind::trail;
  return std::nullopt;
}

TemplateKind parse_template_kind(std::string_view name) {
  if (auto k = try_parse_template_kind(name)) return *k;
  throw Error(ErrorKind::validation, kStage,
              "unknown particle system type '" + std::string(name) + "' (library: " +
                  template_library_list() + ")");
}

std::string template_library_list() {
  std::string out;
  for (auto k : kAllTemplates) {
    if (!out.empty()) out += ", ";
    // The prompt-facing name of the trail template carries the "-effect" suffix.
    out += k == TemplateKind::trail ? std::string("trail-effect") : std::string(to_string(k));
  }
  return out;
}

double* emitter_field(EmitterConfig& config, std::string_view name) {
  const auto* f = field_by_name(name);
  return f ? &(config.*(f->member)) : nullptr;
}

const double* emitter_field(const EmitterConfig& config, std::string_view name) {
  const auto* f = field_by_name(name);
  return f ? &(config.*(f->member)) : nullptr;
}

EmitterConfig template_preset(TemplateKind kind) {
  EmitterConfig c;
  switch (kind) {
    case TemplateKind::fire:
      c.emission_time = 0.05, c.particles_count = 6, c.particle_mass = 1, c.particle_lifetime = 1.2;
      c.velocity_theta = 20, c.velocity_radius = 4;
      c.alpha_start = 1, c.alpha_end = 0.1;
      c.color_start_red = 255, c.color_start_green = 160, c.color_start_blue = 40;
      c.color_end_red = 200, c.color_end_green = 30, c.color_end_blue = 0;
      c.scale_start = 1.5, c.scale_end = 0.3;
      c.force_x = 0, c.force_y = 4, c.force_z = 0;
      break;
    case TemplateKind::fountain:
      c.emission_time = 0.05, c.particles_count = 8, c.particle_mass = 5, c.particle_lifetime = 4;
      c.velocity_theta = 12, c.velocity_radius = 10;
      c.alpha_start = 0.9, c.alpha_end = 0.3;
      c.color_start_red = 120, c.color_start_green = 180, c.color_start_blue = 255;
      c.color_end_red = 220, c.color_end_green = 240, c.color_end_blue = 255;
      c.scale_start = 0.8, c.scale_end = 0.4;
      c.force_x = 0, c.force_y = -25, c.force_z = 0;
      break;
    case TemplateKind::firework:
      c.emission_time = 1.0, c.particles_count = 60, c.particle_mass = 1, c.particle_lifetime = 1.5;
      c.velocity_theta = 180, c.velocity_radius = 12;
      c.alpha_start = 1, c.alpha_end = 0.1;
      c.color_start_red = 255, c.color_start_green = 220, c.color_start_blue = 80;
      c.color_end_red = 255, c.color_end_green = 60, c.color_end_blue = 120;
      c.scale_start = 1, c.scale_end = 0.2;
      c.force_x = 0, c.force_y = -3, c.force_z = 0;
      c.position_y = 10;
      break;
    case TemplateKind::bubbles:
      c.emission_time = 0.3, c.particles_count = 3, c.particle_mass = 2, c.particle_lifetime = 4;
      c.velocity_theta = 30, c.velocity_radius = 1.5;
      c.alpha_start = 0.6, c.alpha_end = 0.2;
      c.color_start_red = 180, c.color_start_green = 220, c.color_start_blue = 255;
      c.color_end_red = 230, c.color_end_green = 245, c.color_end_blue = 255;
      c.scale_start = 0.5, c.scale_end = 1.2;
      c.force_x = 0, c.force_y = 2, c.force_z = 0;
      break;
    case TemplateKind::trail:
      c.emission_time = 0.02, c.particles_count = 2, c.particle_mass = 1, c.particle_lifetime = 0.8;
      c.velocity_theta = 5, c.velocity_radius = 1;
      c.alpha_start = 1, c.alpha_end = 0.1;
      c.color_start_red = 255, c.color_start_green = 255, c.color_start_blue = 255;
      c.color_end_red = 80, c.color_end_green = 120, c.color_end_blue = 255;
      c.scale_start = 0.6, c.scale_end = 0.1;
      c.force_x = 0, c.force_y = 0, c.force_z = 0;
      break;
  }
  return c;
}

SystemState instantiate_template(TemplateKind kind, const Catalog& catalog, std::uint64_t seed) {
  Emitter e;
  e.config = template_preset(kind);
  const auto traits = template_traits(kind);
  e.axis = traits.axis;
  e.speed_scale = traits.speed_scale;
  for (const auto& f : kFields) {
    if (!catalog.contains(f.name)) continue;
    if (auto v = catalog.validate_assignment(f.name, e.config.*(f.member))) {
      throw Error(ErrorKind::validation, kStage,
                  std::string("template '") + std::string(to_string(kind)) + "': " + v->message());
    }
  }
  SystemState s;
  s.template_kind = kind;
  s.emitters.push_back(e);
  s.rng = CounterRng{seed, 0};
  return s;
}

void apply_parameter(SystemState& state, std::string_view name, double value, const Catalog& catalog,
                     int emitter_index) {
  if (auto v = catalog.validate_assignment(name, value)) {
    const auto kind = v->bound == Violation::Bound::unknown_name ? ErrorKind::unknown_parameter
                                                                 : ErrorKind::range_violation;
    throw Error(kind, kStage, v->message());
  }
  const ParamPath path = catalog.resolve_path(name, emitter_index);
  if (path.group) {
    const auto* f = field_by_suffix(path.text);
    if (f == nullptr) throw Error(ErrorKind::unknown_parameter, kStage, "no engine group '" + path.text + "'");
    for (auto& e : state.emitters) e.config.*(f->member) = value;
    return;
  }
  std::size_t index = 0;
  std::string_view suffix;
  if (!split_emitter_path(path.text, index, suffix)) {
    throw Error(ErrorKind::unknown_parameter, kStage, "malformed engine path '" + path.text + "'");
  }
  const auto* f = field_by_suffix(suffix);
  if (f == nullptr) throw Error(ErrorKind::unknown_parameter, kStage, "no engine field at '" + path.text + "'");
  if (index >= state.emitters.size()) {
    throw Error(ErrorKind::validation, kStage, "emitter index " + std::to_string(index) + " out of range");
  }
  state.emitters[index].config.*(f->member) = value;
}

double read_parameter(const SystemState& state, std::string_view name, int emitter_index) {
  if (emitter_index < 0 || static_cast<std::size_t>(emitter_index) >= state.emitters.size()) {
    throw Error(ErrorKind::validation, kStage, "emitter index out of range");
  }
  const auto* v = emitter_field(state.emitters[static_cast<std::size_t>(emitter_index)].config, name);
  if (v == nullptr) throw Error(ErrorKind::unknown_parameter, kStage, "unknown parameter '" + std::string(name) + "'");
  return *v;
}

std::size_t step(SystemState& state, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorKind::validation, kStage, "step dt must be positive and finite");
  }
  std::size_t spawned = 0;

  for (std::uint32_t i = 0; i < state.emitters.size(); ++i) {
    Emitter& e = state.emitters[i];
    e.emission_accumulator += dt;
    const double period = e.config.emission_time;
    auto bursts = static_cast<std::uint64_t>(std::floor(e.emission_accumulator / period));
    // Division can land one ulp short of an integer boundary (e.g. 0.3 / 0.1).
    if (e.emission_accumulator - static_cast<double>(bursts + 1) * period > -1e-12 * period) ++bursts;
    e.emission_accumulator = std::max(0.0, e.emission_accumulator - static_cast<double>(bursts) * period);
    const auto per_burst = static_cast<std::uint64_t>(std::llround(e.config.particles_count));
    for (std::uint64_t b = 0; b < bursts * per_burst; ++b) {
      spawn(state, i);
      ++spawned;
    }
  }

  for (auto& p : state.particles) {
    const EmitterConfig& c = state.emitters[p.emitter].config;
    p.velocity.x += (c.force_x / p.mass) * dt;
    p.velocity.y += (c.force_y / p.mass) * dt;
    p.velocity.z += (c.force_z / p.mass) * dt;
    p.position = p.position + p.velocity * dt;
    p.age += dt;
  }

  std::erase_if(state.particles, [](const Particle& p) { return p.age >= p.lifetime; });
  state.sim_time += dt;
  return spawned;
}

ParticleView view_of(const Particle& p) {
  const double t = std::clamp(p.age / p.lifetime, 0.0, 1.0);
  const auto& b = p.birth;
  return ParticleView{p.position,
                      p.velocity,
                      lerp(b.alpha_start, b.alpha_end, t),
                      {lerp(b.color_start.x, b.color_end.x, t), lerp(b.color_start.y, b.color_end.y, t),
                       lerp(b.color_start.z, b.color_end.z, t)},
                      lerp(b.scale_start, b.scale_end, t)};
}

Snapshot snapshot(const SystemState& state) {
  Snapshot s;
  s.sim_time = state.sim_time;
  s.particle_count = state.particles.size();
  s.particles.reserve(state.particles.size());
  Vec3 pos_sum;
  double speed_sum = 0.0, alpha_sum = 0.0;
  for (const auto& p : state.particles) {
    auto v = view_of(p);
    pos_sum = pos_sum + v.position;
    speed_sum += length(v.velocity);
    alpha_sum += v.alpha;
    s.particles.push_back(v);
  }
  if (!state.particles.empty()) {
    const double inv = 1.0 / static_cast<double>(state.particles.size());
    s.mean_position = pos_sum * inv;
    s.mean_speed = speed_sum * inv;
    s.mean_alpha = alpha_sum * inv;
  }
  return s;
}

}  // namespace fxctl
