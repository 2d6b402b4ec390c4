#include "ghostdet/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ghostdet::sim {

namespace {

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("scenario.") + field + ": " + what);
}

constexpr int kPlacementAttempts = 10000;

Vec2 heading(const Vehicle& v) {
  return v.axis == Axis::Horizontal ? Vec2{static_cast<double>(v.dir), 0.0}
                                    : Vec2{0.0, static_cast<double>(v.dir)};
}

}  // namespace

void ScenarioConfig::validate() const {
  require(area_width_m > 0 && area_height_m > 0, "area_size", "components must be > 0");
  require(sim_duration_s > 0, "sim_duration", "must be > 0");
  require(fleet_size > 0, "fleet_size", "must be > 0");
  require(beacon_interval_s > 0, "beacon_interval", "must be > 0");
  require(packet_length_bytes > 0, "packet_length", "must be > 0");
  require(grid_spacing_m > 0, "grid_spacing", "must be > 0");
  require(street_width_m > 0 && street_width_m < grid_spacing_m, "street_width",
          "must be in (0, grid_spacing)");
  require(building_setback_m >= 0, "building_setback", "must be >= 0");
  require(park_fraction >= 0 && park_fraction <= 1, "park_fraction", "must be in [0, 1]");
  require(wall_loss_db >= 0, "wall_loss", "must be >= 0");
  require(interior_loss_db_per_m >= 0, "interior_loss", "must be >= 0");
  require(speed_min_mps >= 0 && speed_max_mps >= speed_min_mps, "speed",
          "need 0 <= speed_min <= speed_max");
  require(min_vehicle_gap_m >= 0, "min_vehicle_gap", "must be >= 0");
  for (const auto& ob : obstacles)
    require(ob.bounds.x1 > ob.bounds.x0 && ob.bounds.y1 > ob.bounds.y0, "obstacles",
            "rectangles need x1 > x0 and y1 > y0");
}

bool StreetGrid::on_street(Vec2 p) const {
  const double hw = half_width;
  if (p.y >= -hw && p.y <= y_extent() + hw) {
    const double i = std::round(p.x / spacing);
    if (i >= 0 && i < nx && std::abs(p.x - i * spacing) <= hw) return true;
  }
  if (p.x >= -hw && p.x <= x_extent() + hw) {
    const double j = std::round(p.y / spacing);
    if (j >= 0 && j < ny && std::abs(p.y - j * spacing) <= hw) return true;
  }
  return false;
}

Vec2 Scenario::position(const Vehicle& v) const {
  const double line = v.street * grid.spacing;
  Vec2 center = v.axis == Axis::Horizontal ? Vec2{v.along, line} : Vec2{line, v.along};
  const Vec2 h = heading(v);
  const Vec2 right{h.y, -h.x};
  Vec2 p = center + v.lane_offset_m * right;
  p.x = std::clamp(p.x, grid.area.x0, grid.area.x1);
  p.y = std::clamp(p.y, grid.area.y0, grid.area.y1);
  return p;
}

Vec2 Scenario::velocity(const Vehicle& v) const { return v.speed_mps * heading(v); }

bool Scenario::accessible(Vec2 p) const {
  return grid.area.contains_closed(p) && grid.on_street(p) && !obstacles.inside_any(p);
}

Scenario build_scenario(const ScenarioConfig& config) {
  config.validate();
  Scenario s;
  s.config = config;
  s.grid.spacing = config.grid_spacing_m;
  s.grid.half_width = config.street_width_m / 2.0;
  s.grid.nx = static_cast<int>(std::floor(config.area_width_m / config.grid_spacing_m)) + 1;
  s.grid.ny = static_cast<int>(std::floor(config.area_height_m / config.grid_spacing_m)) + 1;
  s.grid.area = config.area();
  if (s.grid.nx < 2 || s.grid.ny < 2)
    throw std::invalid_argument("scenario: area smaller than one grid block, streets cannot host the fleet");
  if (s.grid.total_length() < config.fleet_size * config.min_vehicle_gap_m)
    throw std::invalid_argument("scenario: total street length " + std::to_string(s.grid.total_length()) +
                                " m cannot host " + std::to_string(config.fleet_size) + " vehicles");

  std::vector<Obstacle> obstacles;
  if (config.auto_obstacles) {
    std::mt19937_64 rng(derive_seed(config.seed, "obstacles"));
    const double inset = s.grid.half_width + config.building_setback_m;
    for (int j = 0; j + 1 < s.grid.ny; ++j) {
      for (int i = 0; i + 1 < s.grid.nx; ++i) {
        const bool park = uniform01(rng) < config.park_fraction;
        Rect r{i * s.grid.spacing + inset, j * s.grid.spacing + inset,
               (i + 1) * s.grid.spacing - inset, (j + 1) * s.grid.spacing - inset};
        if (park || r.width() <= 0 || r.height() <= 0) continue;
        obstacles.push_back({r, config.wall_loss_db, config.interior_loss_db_per_m});
      }
    }
  }
  obstacles.insert(obstacles.end(), config.obstacles.begin(), config.obstacles.end());
  s.obstacles = ObstacleIndex(std::move(obstacles), s.grid.area, s.grid.spacing);

  std::mt19937_64 rng(derive_seed(config.seed, "placement"));
  const double horizontal_total = s.grid.ny * s.grid.x_extent();
  const double p_horizontal = horizontal_total / s.grid.total_length();
  const double hw = s.grid.half_width;
  for (std::uint32_t id = 0; id < config.fleet_size; ++id) {
    Vehicle v;
    v.node_id = id;
    int attempt = 0;
    for (; attempt < kPlacementAttempts; ++attempt) {
      v.axis = uniform01(rng) < p_horizontal ? Axis::Horizontal : Axis::Vertical;
      const int lines = v.axis == Axis::Horizontal ? s.grid.ny : s.grid.nx;
      const double length = v.axis == Axis::Horizontal ? s.grid.x_extent() : s.grid.y_extent();
      v.street = std::min(lines - 1, static_cast<int>(uniform01(rng) * lines));
      v.along = uniform01(rng) * length;
      v.dir = uniform01(rng) < 0.5 ? 1 : -1;
      v.speed_mps = config.speed_min_mps + uniform01(rng) * (config.speed_max_mps - config.speed_min_mps);
      v.lane_offset_m = hw * (0.2 + 0.6 * uniform01(rng));
      if (s.accessible(s.position(v))) break;
    }
    if (attempt == kPlacementAttempts)
      throw std::invalid_argument("scenario: could not place vehicle " + std::to_string(id) +
                                  " outside obstacles");
    s.vehicles.push_back(v);
  }
  s.mobility_rng.seed(derive_seed(config.seed, "mobility"));
  return s;
}

namespace {

void turn_at(Scenario& s, Vehicle& v, int node_i, int node_j) {
  // node_i indexes vertical streets (x), node_j horizontal streets (y).
  struct Option {
    Axis axis;
    int dir;
  };
  Option options[4];
  int count = 0;
  const auto allowed = [&](Axis axis, int dir) {
    if (axis == v.axis && dir == -v.dir) return false;  // no U-turn
    if (axis == Axis::Horizontal) return dir > 0 ? node_i + 1 < s.grid.nx : node_i > 0;
    return dir > 0 ? node_j + 1 < s.grid.ny : node_j > 0;
  };
  for (Axis axis : {Axis::Horizontal, Axis::Vertical})
    for (int dir : {1, -1})
      if (allowed(axis, dir)) options[count++] = {axis, dir};
  Option pick{v.axis, -v.dir};  // dead end: reverse
  if (count > 0) {
    const int k = std::min(count - 1, static_cast<int>(uniform01(s.mobility_rng) * count));
    pick = options[k];
  }
  v.axis = pick.axis;
  v.dir = pick.dir;
  if (v.axis == Axis::Horizontal) {
    v.street = node_j;
    v.along = node_i * s.grid.spacing;
  } else {
    v.street = node_i;
    v.along = node_j * s.grid.spacing;
  }
}

}  // namespace

void advance_mobility(Scenario& s, double dt) {
  const double sp = s.grid.spacing;
  for (Vehicle& v : s.vehicles) {
    double remaining = v.speed_mps * dt;
    while (remaining > 0.0) {
      const double cell = v.along / sp;
      // Index of the next intersection strictly ahead.
      double next = v.dir > 0 ? std::floor(cell) + 1.0 : std::ceil(cell) - 1.0;
      if (v.dir > 0 && next * sp - v.along <= 1e-9) next += 1.0;
      if (v.dir < 0 && v.along - next * sp <= 1e-9) next -= 1.0;
      const int last = (v.axis == Axis::Horizontal ? s.grid.nx : s.grid.ny) - 1;
      if (next < 0 || next > last) {
        // Sitting on the outermost intersection facing off the grid.
        const int at = static_cast<int>(std::clamp(std::round(cell), 0.0, static_cast<double>(last)));
        turn_at(s, v, v.axis == Axis::Horizontal ? at : v.street, v.axis == Axis::Horizontal ? v.street : at);
        continue;
      }
      const double gap = std::abs(next * sp - v.along);
      if (remaining < gap) {
        v.along += v.dir * remaining;
        break;
      }
      remaining -= gap;
      const int along_idx = static_cast<int>(next);
      const int node_i = v.axis == Axis::Horizontal ? along_idx : v.street;
      const int node_j = v.axis == Axis::Horizontal ? v.street : along_idx;
      turn_at(s, v, node_i, node_j);
    }
  }
  s.time_s += dt;
}

Scenario step_mobility(Scenario scenario, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("step_mobility: dt must be > 0");
  advance_mobility(scenario, dt);
  return scenario;
}

std::string interface_id(std::uint32_t node_id) {
  return "Scenario.node[" + std::to_string(node_id) + "].wlan[0].radio";
}

}  // namespace ghostdet::sim
