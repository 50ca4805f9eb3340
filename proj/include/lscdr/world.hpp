#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "lscdr/common.hpp"
#include "lscdr/geometry.hpp"

namespace lscdr {

using VertexId = int;

struct ObstacleSet {
  std::vector<Box> boxes;
};

/// True iff the open disc of radius `clearance` around p misses every box.
inline bool point_free(const ObstacleSet& obstacles, const Vec2& p, double clearance) {
  for (const auto& b : obstacles.boxes)
    if (signed_distance(b, p) < clearance) return false;
  return true;
}

/// Same test for every point of an axis-aligned box region.
inline bool box_free(const ObstacleSet& obstacles, const Box& region, double clearance) {
  for (const auto& b : obstacles.boxes)
    if (box_distance(b, region) < clearance) return false;
  return true;
}

/// Uniform 4-connected grid of vertices origin + (ix, iy) * d.
class GridWorld {
 public:
  GridWorld() = default;
  GridWorld(Vec2 origin, double d, int width, int height, const ObstacleSet& obstacles,
            double radius)
      : origin_(std::move(origin)), d_(d), width_(width), height_(height), radius_(radius) {
    if (!(d > 0.0) || width < 1 || height < 1) throw ConfigError("grid dimensions must be positive");
    blocked_.assign(static_cast<std::size_t>(width) * height, 0);
    for (int v = 0; v < size(); ++v)
      blocked_[v] = point_free(obstacles, position(v), radius) ? 0 : 1;
    adjacency_.assign(size(), {});
    for (int v = 0; v < size(); ++v) {
      if (blocked_[v]) continue;
      const int ix = v % width_, iy = v / width_;
      const std::pair<int, int> dirs[4] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
      for (auto [dx, dy] : dirs) {
        const int jx = ix + dx, jy = iy + dy;
        if (jx < 0 || jy < 0 || jx >= width_ || jy >= height_) continue;
        const int u = jy * width_ + jx;
        if (blocked_[u]) continue;
        // Axis-aligned edge: its swept disc is clear iff the degenerate box
        // spanned by the endpoints keeps distance r from every obstacle.
        const Vec2 a = position(v), b = position(u);
        if (box_free(obstacles, Box{a.cwiseMin(b), a.cwiseMax(b)}, radius))
          adjacency_[v].push_back(u);
      }
      std::sort(adjacency_[v].begin(), adjacency_[v].end());
    }
  }

  const Vec2& origin() const { return origin_; }
  double grid_size() const { return d_; }
  int width() const { return width_; }
  int height() const { return height_; }
  int size() const { return width_ * height_; }
  double radius() const { return radius_; }

  Vec2 position(VertexId v) const {
    return origin_ + d_ * Vec2(static_cast<double>(v % width_), static_cast<double>(v / width_));
  }
  bool blocked(VertexId v) const { return blocked_[v] != 0; }
  const std::vector<VertexId>& neighbors(VertexId v) const { return adjacency_[v]; }
  bool has_edge(VertexId a, VertexId b) const {
    const auto& n = adjacency_[a];
    return std::binary_search(n.begin(), n.end(), b);
  }

  /// Vertex whose position equals p up to tol, if any.
  std::optional<VertexId> vertex_at(const Vec2& p, double tol = 1e-9) const {
    const Vec2 rel = (p - origin_) / d_;
    const long ix = std::lround(rel.x()), iy = std::lround(rel.y());
    if (ix < 0 || iy < 0 || ix >= width_ || iy >= height_) return std::nullopt;
    const VertexId v = static_cast<VertexId>(iy * width_ + ix);
    if ((position(v) - p).norm() > tol) return std::nullopt;
    return v;
  }

  /// Nearest vertex to p; ties go to smaller x, then smaller y.
  VertexId nearest_vertex(const Vec2& p) const {
    VertexId best = 0;
    double bd = kInf;
    for (int iy = 0; iy < height_; ++iy)
      for (int ix = 0; ix < width_; ++ix) {
        const VertexId v = iy * width_ + ix;
        const double dist = (position(v) - p).norm();
        const Vec2 q = position(v), bq = position(best);
        if (dist < bd - 1e-12 ||
            (std::abs(dist - bd) <= 1e-12 &&
             (q.x() < bq.x() || (q.x() == bq.x() && q.y() < bq.y())))) {
          bd = dist;
          best = v;
        }
      }
    return best;
  }

  /// Bounding box of all vertex positions; corridors are clipped to it.
  Box workspace() const {
    return {origin_, origin_ + d_ * Vec2(width_ - 1, height_ - 1)};
  }

  /// Hop distances from `source` (-1 where unreachable).
  std::vector<int> bfs(VertexId source) const {
    std::vector<int> dist(size(), -1);
    if (blocked(source)) return dist;
    std::queue<VertexId> q;
    dist[source] = 0;
    q.push(source);
    while (!q.empty()) {
      const VertexId v = q.front();
      q.pop();
      for (VertexId u : adjacency_[v])
        if (dist[u] < 0) {
          dist[u] = dist[v] + 1;
          q.push(u);
        }
    }
    return dist;
  }

 private:
  Vec2 origin_ = Vec2::Zero();
  double d_ = 0.5;
  int width_ = 1;
  int height_ = 1;
  double radius_ = 0.15;
  std::vector<std::uint8_t> blocked_;
  std::vector<std::vector<VertexId>> adjacency_;
};

struct AgentSpec {
  VertexId start = 0;
  VertexId goal = 0;
};

struct Scenario {
  std::string env = "custom";
  GridWorld world;
  ObstacleSet obstacles;
  std::vector<AgentSpec> agents;
  double agent_radius = 0.15;
  double v_max = 1.0;
  double a_max = 2.0;
  double comm_range = kInf;
  std::uint64_t seed = 0;

  Vec2 start(int i) const { return world.position(agents[i].start); }
  Vec2 goal(int i) const { return world.position(agents[i].goal); }
  int num_agents() const { return static_cast<int>(agents.size()); }
};

/// Machine-checks the scenario assumptions; throws ConfigError on the first failure.
inline void validate(const Scenario& s) {
  const double r = s.agent_radius;
  const double d = s.world.grid_size();
  if (!(r > 0.0)) throw ConfigError("agent radius must be positive");
  if (!(d > 2.0 * std::numbers::sqrt2 * r)) throw ConfigError("grid size must exceed 2*sqrt(2)*r");
  if (!(s.comm_range > 2.0 * d)) throw ConfigError("communication range must exceed 2*d");
  if (!(s.v_max > 0.0) || !(s.a_max > 0.0)) throw ConfigError("dynamic limits must be positive");
  for (const auto& b : s.obstacles.boxes)
    if (!(b.area() > 0.0) || !is_finite(b.lo) || !is_finite(b.hi))
      throw ConfigError("obstacle boxes must have positive finite area");
  const int n = s.num_agents();
  for (int i = 0; i < n; ++i) {
    const auto& a = s.agents[i];
    if (a.start < 0 || a.start >= s.world.size() || a.goal < 0 || a.goal >= s.world.size())
      throw ConfigError("agent start/goal outside grid");
    if (s.world.blocked(a.start) || s.world.blocked(a.goal))
      throw ConfigError("agent start/goal on blocked vertex");
    for (int j = 0; j < i; ++j) {
      if ((s.start(i) - s.start(j)).norm() < 2.0 * r)
        throw ConfigError("agent starts closer than 2r");
      if (a.goal == s.agents[j].goal) throw ConfigError("duplicate agent goals");
    }
    if (s.world.bfs(a.start)[a.goal] < 0) throw ConfigError("goal unreachable on grid");
  }
}

struct ForestParams {
  int n_obstacles = 40;
  int n_agents = 10;
  double circle_radius = 4.0;
  double half_extent = 5.0;      // grid spans [-5, 5]^2
  double obstacle_extent = 4.0;  // obstacle centres in [-4, 4]^2
  double side_min = 0.3;
  double side_max = 0.6;
  double grid_size = 0.5;
  double radius = 0.15;
  int max_retries = 1000;
};

inline Scenario generate_forest(std::uint64_t seed, const ForestParams& p = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> centre(-p.obstacle_extent, p.obstacle_extent);
  std::uniform_real_distribution<double> side(p.side_min, p.side_max);

  const int w = static_cast<int>(std::lround(2.0 * p.half_extent / p.grid_size)) + 1;
  const Vec2 origin(-p.half_extent, -p.half_extent);

  Scenario s;
  s.env = "forest";
  s.seed = seed;
  s.agent_radius = p.radius;

  const GridWorld empty(origin, p.grid_size, w, w, {}, p.radius);
  for (int i = 0; i < p.n_agents; ++i) {
    const double th = 2.0 * std::numbers::pi * i / p.n_agents;
    const Vec2 c = p.circle_radius * Vec2(std::cos(th), std::sin(th));
    const VertexId a = empty.nearest_vertex(c);
    const VertexId b = empty.nearest_vertex(-empty.position(a));
    s.agents.push_back({a, b});
  }

  auto acceptable = [&](const ObstacleSet& obs) {
    GridWorld g(origin, p.grid_size, w, w, obs, p.radius);
    for (const auto& a : s.agents)
      if (g.blocked(a.start) || g.blocked(a.goal)) return false;
    for (const auto& a : s.agents)
      if (g.bfs(a.start)[a.goal] < 0) return false;
    return true;
  };

  for (int k = 0; k < p.n_obstacles; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < p.max_retries && !placed; ++attempt) {
      const Vec2 c(centre(rng), centre(rng));
      const double h = 0.5 * side(rng);
      s.obstacles.boxes.push_back({c - Vec2(h, h), c + Vec2(h, h)});
      if (acceptable(s.obstacles)) placed = true;
      else s.obstacles.boxes.pop_back();
    }
    if (!placed) throw GenerationError("forest obstacle placement exhausted retries");
  }
  s.world = GridWorld(origin, p.grid_size, w, w, s.obstacles, p.radius);
  return s;
}

struct MazeParams {
  int cells = 9;
  double cell_size = 0.5;
  int n_agents = 10;
  double wall_thickness = 0.1;
  double outside_width = 1.5;  // open area left and right of the maze
  double grid_size = 0.5;
  double radius = 0.15;
};

inline MazeParams sparse_maze_params() {
  MazeParams p;
  p.cells = 6;
  p.cell_size = 1.0;
  return p;
}

inline MazeParams dense_maze_params() { return MazeParams{}; }

/// Perfect maze by randomized Prim on a C x C cell graph. open_east[c] and
/// open_north[c] mark carved passages out of cell c = row * C + col.
struct MazeLayout {
  int cells = 0;
  std::vector<std::uint8_t> open_east;
  std::vector<std::uint8_t> open_north;
  int carved = 0;
};

inline MazeLayout randomized_prim(int C, std::mt19937_64& rng) {
  MazeLayout m;
  m.cells = C;
  m.open_east.assign(C * C, 0);
  m.open_north.assign(C * C, 0);
  std::vector<std::uint8_t> in(C * C, 0);
  struct Wall {
    int from, to;
  };
  std::vector<Wall> frontier;
  auto add = [&](int c) {
    in[c] = 1;
    const int col = c % C, row = c / C;
    if (col > 0) frontier.push_back({c, c - 1});
    if (col < C - 1) frontier.push_back({c, c + 1});
    if (row > 0) frontier.push_back({c, c - C});
    if (row < C - 1) frontier.push_back({c, c + C});
  };
  add(static_cast<int>(std::uniform_int_distribution<int>(0, C * C - 1)(rng)));
  while (!frontier.empty()) {
    const std::size_t k = std::uniform_int_distribution<std::size_t>(0, frontier.size() - 1)(rng);
    const Wall wl = frontier[k];
    frontier[k] = frontier.back();
    frontier.pop_back();
    if (in[wl.to]) continue;
    const int a = std::min(wl.from, wl.to), b = std::max(wl.from, wl.to);
    if (b == a + 1) m.open_east[a] = 1;
    else m.open_north[a] = 1;
    ++m.carved;
    add(wl.to);
  }
  return m;
}

inline Scenario generate_maze(std::uint64_t seed, const MazeParams& p = {}) {
  std::mt19937_64 rng(seed);
  const int C = p.cells;
  const double s = p.cell_size, t = 0.5 * p.wall_thickness, span = C * s;
  const MazeLayout maze = randomized_prim(C, rng);
  const int entrance_row = C / 2;

  // Wall pieces on the cell boundary lattice. Horizontal piece (col, j) lies on
  // y = j*s over column col; vertical piece (i, row) on x = i*s over row `row`.
  auto h_wall = [&](int col, int j) {
    if (j == 0 || j == C) return true;
    return !maze.open_north[(j - 1) * C + col];
  };
  auto v_wall = [&](int i, int row) {
    if (i == 0 || i == C) return row != entrance_row;
    return !maze.open_east[row * C + (i - 1)];
  };

  Scenario sc;
  sc.env = p.cell_size >= 1.0 ? "sparse" : "dense";
  sc.seed = seed;
  sc.agent_radius = p.radius;
  // Collinear runs are merged; ends extend by half a thickness to cover posts.
  for (int j = 0; j <= C; ++j)
    for (int col = 0; col < C;) {
      if (!h_wall(col, j)) {
        ++col;
        continue;
      }
      int end = col;
      while (end < C && h_wall(end, j)) ++end;
      sc.obstacles.boxes.push_back({Vec2(col * s - t, j * s - t), Vec2(end * s + t, j * s + t)});
      col = end;
    }
  for (int i = 0; i <= C; ++i)
    for (int row = 0; row < C;) {
      if (!v_wall(i, row)) {
        ++row;
        continue;
      }
      int end = row;
      while (end < C && v_wall(i, end)) ++end;
      sc.obstacles.boxes.push_back({Vec2(i * s - t, row * s - t), Vec2(i * s + t, end * s + t)});
      row = end;
    }

  // Vertices sit on cell centres; the grid covers the maze interior rows and
  // the two side areas, so the side areas only connect through the entrances.
  const double d = p.grid_size;
  const double y0 = 0.5 * s;
  const double x0 = y0 - d * std::floor((y0 + p.outside_width) / d + 1e-9);
  const int width = static_cast<int>(std::lround((span - 2.0 * x0) / d)) + 1;
  const int height = static_cast<int>(std::lround((span - s) / d)) + 1;
  const Vec2 origin(x0, y0);
  sc.world = GridWorld(origin, d, width, height, sc.obstacles, p.radius);

  // Agents: the vertices outside the left entrance closest to it, mirrored on the right.
  const double ye = (entrance_row + 0.5) * s;
  std::vector<VertexId> left;
  for (VertexId v = 0; v < sc.world.size(); ++v)
    if (sc.world.position(v).x() < -t && !sc.world.blocked(v)) left.push_back(v);
  const Vec2 door(x0 + d * std::floor((-t - x0) / d), ye);
  std::stable_sort(left.begin(), left.end(), [&](VertexId a, VertexId b) {
    const Vec2 pa = sc.world.position(a), pb = sc.world.position(b);
    const double da = (pa - door).norm(), db = (pb - door).norm();
    if (std::abs(da - db) > 1e-12) return da < db;
    if (pa.x() != pb.x()) return pa.x() < pb.x();
    return pa.y() < pb.y();
  });
  const int per_side = p.n_agents / 2;
  if (static_cast<int>(left.size()) < per_side) throw GenerationError("maze side area too small");
  std::vector<VertexId> lv(left.begin(), left.begin() + per_side), rv;
  for (VertexId v : lv) {
    const Vec2 q = sc.world.position(v);
    const auto m = sc.world.vertex_at(Vec2(span - q.x(), q.y()));
    if (!m) throw GenerationError("maze grid is not mirror symmetric");
    rv.push_back(*m);
  }
  for (int i = 0; i < per_side; ++i) sc.agents.push_back({lv[i], rv[i]});
  for (int i = 0; i < per_side; ++i) sc.agents.push_back({rv[i], lv[i]});
  return sc;
}

}  // namespace lscdr
