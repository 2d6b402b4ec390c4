#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ghostdet/scenario.hpp"
#include "ghostdet/trace_io.hpp"

namespace ghostdet::inject {

/// Real interval with explicit endpoint closure; hi may be +inf.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
  bool hi_closed = false;

  bool contains(double v) const {
    return (lo_closed ? v >= lo : v > lo) && (hi_closed ? v <= hi : v < hi);
  }
  bool empty() const { return hi < lo || (hi == lo && !(lo_closed && hi_closed)); }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Parses interval notation such as "[0,10)", "(30,inf)" or "[10,20]".
Interval parse_interval(std::string_view text);
std::string to_string(const Interval& iv);

/// Anomaly band: the allowed ghost-to-true-transmitter distance and, for
/// direction anomalies, the allowed |D(T,R) - D(T',R)| gap.
struct BandSpec {
  std::string name;
  Interval d_tt;
  std::optional<Interval> annulus;
  std::uint32_t sample_count = 1000;

  void validate() const;
};

/// AD1..AD8 distance bands followed by the AD9/AD10 direction bands.
std::vector<BandSpec> default_bands();

/// Places a vehicle may legally be: on the street network, inside the area,
/// outside every building.
class AccessibleRegion {
 public:
  explicit AccessibleRegion(const sim::Scenario& scenario) : scenario_(&scenario) {}
  bool contains(Vec2 p) const { return scenario_->accessible(p); }
  const Rect& bounds() const { return scenario_->grid.area; }
  double diagonal() const { return std::hypot(bounds().width(), bounds().height()); }

 private:
  const sim::Scenario* scenario_;
};

inline bool accessible(Vec2 p, const AccessibleRegion& region) { return region.contains(p); }

class InfeasibleBandError : public std::runtime_error {
 public:
  InfeasibleBandError(const std::string& band, const std::string& detail, std::size_t failures = 0)
      : std::runtime_error("band " + band + " infeasible: " + detail), band_(band), failures_(failures) {}
  const std::string& band() const { return band_; }
  std::size_t failures() const { return failures_; }

 private:
  std::string band_;
  std::size_t failures_;
};

inline constexpr int kMaxAttempts = 100000;

/// Ghost location uniform over the accessible region restricted to the
/// band's D(T,T') range. Candidates are drawn uniformly from the annulus
/// around l_T (capped by the area diagonal) and rejected if inaccessible,
/// which yields the same distribution as filtering uniform region samples.
Vec2 sample_ghost(Vec2 tx, const BandSpec& band, const AccessibleRegion& region, std::mt19937_64& rng);

/// Direction anomaly: accessible ghost with D(T,T') in band.d_tt and the gap
/// |D(T,R) - D(T',R)| in band.annulus. Candidates come from the annulus
/// around l_R that contains every admissible point.
Vec2 sample_ghost_directional(Vec2 tx, Vec2 rx, const BandSpec& band, const AccessibleRegion& region,
                              std::mt19937_64& rng);

struct AnomalyDataset {
  std::string band;
  std::vector<trace::FeatureVector> samples;
  /// Source packets skipped because no ghost could be placed for them.
  std::size_t infeasible_sources = 0;
};

/// Draws band.sample_count source packets without replacement and replaces
/// each reported transmitter location by a ghost. A source for which the
/// band is geometrically infeasible is skipped and another one drawn; the
/// build fails only if the pool runs out.
AnomalyDataset build_anomaly_dataset(const std::vector<trace::FeatureVector>& sources, const BandSpec& band,
                                     const AccessibleRegion& region, std::uint64_t seed);

/// True if the sample satisfies the band predicate and the ghost is accessible.
bool satisfies(const trace::FeatureVector& sample, const BandSpec& band, const AccessibleRegion& region);

}  // namespace ghostdet::inject
