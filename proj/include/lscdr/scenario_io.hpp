#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "lscdr/world.hpp"

namespace lscdr {

inline nlohmann::json range_to_json(double r_c) {
  return std::isinf(r_c) ? nlohmann::json("inf") : nlohmann::json(r_c);
}

/// Parses "inf" (any case) or a positive number.
inline double parse_range(const std::string& text) {
  std::string t;
  for (char c : text) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t == "inf" || t == "infinity") return kInf;
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size() || !(v > 0.0)) throw ConfigError("communication range must be positive");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("bad communication range '" + text + "'");
  }
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  j["env"] = s.env;
  j["grid_size"] = s.world.grid_size();
  j["grid_origin"] = {s.world.origin().x(), s.world.origin().y()};
  j["grid_width"] = s.world.width();
  j["grid_height"] = s.world.height();
  j["agent_radius"] = s.agent_radius;
  j["comm_range"] = range_to_json(s.comm_range);
  j["v_max"] = s.v_max;
  j["a_max"] = s.a_max;
  j["seed"] = s.seed;
  j["obstacles"] = nlohmann::json::array();
  for (const auto& b : s.obstacles.boxes)
    j["obstacles"].push_back({{"min", {b.lo.x(), b.lo.y()}}, {"max", {b.hi.x(), b.hi.y()}}});
  j["agents"] = nlohmann::json::array();
  for (int i = 0; i < s.num_agents(); ++i) {
    const Vec2 a = s.start(i), g = s.goal(i);
    j["agents"].push_back({{"start", {a.x(), a.y()}}, {"goal", {g.x(), g.y()}}});
  }
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  try {
    auto vec = [](const nlohmann::json& v) {
      if (!v.is_array() || v.size() != 2) throw ConfigError("expected a 2-element point");
      return Vec2(v[0].get<double>(), v[1].get<double>());
    };
    Scenario s;
    s.env = j.value("env", std::string("custom"));
    const double d = j.at("grid_size").get<double>();
    s.agent_radius = j.at("agent_radius").get<double>();
    s.v_max = j.at("v_max").get<double>();
    s.a_max = j.at("a_max").get<double>();
    s.seed = j.value("seed", std::uint64_t{0});
    const auto& rc = j.at("comm_range");
    s.comm_range = rc.is_string() ? parse_range(rc.get<std::string>()) : rc.get<double>();
    for (const auto& o : j.at("obstacles")) s.obstacles.boxes.push_back({vec(o.at("min")), vec(o.at("max"))});
    std::vector<std::pair<Vec2, Vec2>> agents;
    for (const auto& a : j.at("agents")) agents.emplace_back(vec(a.at("start")), vec(a.at("goal")));

    Vec2 origin;
    int w, h;
    if (j.contains("grid_origin")) {
      origin = vec(j.at("grid_origin"));
      w = j.at("grid_width").get<int>();
      h = j.at("grid_height").get<int>();
    } else {
      // Smallest grid through the first start that covers every agent and obstacle.
      if (agents.empty()) throw ConfigError("scenario without grid needs agents");
      Vec2 lo = agents[0].first, hi = lo;
      for (const auto& [a, g] : agents) {
        lo = lo.cwiseMin(a).cwiseMin(g);
        hi = hi.cwiseMax(a).cwiseMax(g);
      }
      for (const auto& b : s.obstacles.boxes) {
        lo = lo.cwiseMin(b.lo);
        hi = hi.cwiseMax(b.hi);
      }
      const Vec2 ref = agents[0].first;
      origin = ref - d * ((ref - lo) / d).array().ceil().matrix();
      const Vec2 span = ((hi - origin) / d).array().ceil().matrix();
      w = static_cast<int>(span.x()) + 1;
      h = static_cast<int>(span.y()) + 1;
    }
    s.world = GridWorld(origin, d, w, h, s.obstacles, s.agent_radius);
    for (const auto& [a, g] : agents) {
      const auto va = s.world.vertex_at(a, 1e-6), vg = s.world.vertex_at(g, 1e-6);
      if (!va || !vg) throw ConfigError("agent start/goal is not a grid vertex");
      s.agents.push_back({*va, *vg});
    }
    validate(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  try {
    return scenario_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
}

inline void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << scenario_to_json(s).dump(2) << '\n';
}

}  // namespace lscdr
