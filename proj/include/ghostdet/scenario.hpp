#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ghostdet/channel.hpp"
#include "ghostdet/geometry.hpp"

namespace ghostdet::sim {

/// Scenario geometry, fleet and beaconing regime. Defaults reproduce the
/// reference regime: 2 km x 2 km, 150 vehicles, 1 beacon/s of 140 bytes
/// for 1800 s.
struct ScenarioConfig {
  double area_width_m = 2000.0;
  double area_height_m = 2000.0;
  double sim_duration_s = 1800.0;
  std::uint32_t fleet_size = 150;
  double beacon_interval_s = 1.0;
  std::uint32_t packet_length_bytes = 140;
  std::uint64_t seed = 1;

  double grid_spacing_m = 200.0;
  double street_width_m = 12.0;
  double building_setback_m = 2.0;
  /// Probability that a block is left open (no building).
  double park_fraction = 0.15;
  double wall_loss_db = 6.0;
  double interior_loss_db_per_m = 1.0;
  /// When true, one building is generated per non-park block. Explicit
  /// obstacles are added on top.
  bool auto_obstacles = true;
  std::vector<Obstacle> obstacles;

  double speed_min_mps = 8.0;
  double speed_max_mps = 14.0;
  double min_vehicle_gap_m = 5.0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  Rect area() const { return {0.0, 0.0, area_width_m, area_height_m}; }
  std::uint32_t packet_bits() const { return packet_length_bytes * 8U; }
};

/// Manhattan street grid: vertical streets at x = i * spacing and horizontal
/// streets at y = j * spacing, each street_width wide.
struct StreetGrid {
  int nx = 0;  ///< number of vertical streets
  int ny = 0;  ///< number of horizontal streets
  double spacing = 0.0;
  double half_width = 0.0;
  Rect area;

  double x_extent() const { return (nx - 1) * spacing; }
  double y_extent() const { return (ny - 1) * spacing; }
  double total_length() const { return ny * x_extent() + nx * y_extent(); }
  /// Within half a street width of some street centerline.
  bool on_street(Vec2 p) const;
};

enum class Axis : std::uint8_t { Horizontal, Vertical };

struct Vehicle {
  std::uint32_t node_id = 0;
  Axis axis = Axis::Horizontal;
  int street = 0;        ///< index of the street line the vehicle drives on
  double along = 0.0;    ///< coordinate along the street (x for horizontal)
  int dir = 1;           ///< +1 towards increasing coordinate, -1 otherwise
  double speed_mps = 0.0;
  double lane_offset_m = 0.0;  ///< lateral offset to the right of the heading
};

struct Scenario {
  ScenarioConfig config;
  StreetGrid grid;
  ObstacleIndex obstacles;
  std::vector<Vehicle> vehicles;
  double time_s = 0.0;
  std::mt19937_64 mobility_rng;

  Vec2 position(const Vehicle& v) const;
  Vec2 velocity(const Vehicle& v) const;
  /// True if p is inside the area, on a street and outside every obstacle.
  bool accessible(Vec2 p) const;
};

Scenario build_scenario(const ScenarioConfig& config);

/// Advances every vehicle by dt along its street, turning uniformly at random
/// among the non-reversing directions at each intersection it reaches.
void advance_mobility(Scenario& scenario, double dt);

Scenario step_mobility(Scenario scenario, double dt);

std::string interface_id(std::uint32_t node_id);

}  // namespace ghostdet::sim
