#include <json.hpp>

#include "fxctl/engine.hpp"

namespace fxctl {

namespace {

nlohmann::ordered_json vec(Vec3 v) { return nlohmann::ordered_json::array({v.x, v.y, v.z}); }

}  // namespace

std::string frame_document(const Snapshot& snap) {
  nlohmann::ordered_json j;
  j["sim_time"] = snap.sim_time;
  j["particle_count"] = snap.particle_count;
  j["metrics"] = {{"mean_position", vec(snap.mean_position)},
                  {"mean_speed", snap.mean_speed},
                  {"mean_alpha", snap.mean_alpha}};
  auto& particles = j["particles"] = nlohmann::ordered_json::array();
  for (const auto& p : snap.particles) {
    particles.push_back({{"position", vec(p.position)},
                         {"velocity", vec(p.velocity)},
                         {"alpha", p.alpha},
                         {"color", vec(p.color)},
                         {"scale", p.scale}});
  }
  return j.dump();
}

}  // namespace fxctl
