#include "ghostdet/anomaly.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "ghostdet/rng.hpp"

namespace ghostdet::inject {

namespace {

double parse_bound(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw std::invalid_argument("interval: bad bound '" + std::string(s) + "'");
  return v;
}

// Uniform point in the annulus r in [r0, r1] around c.
Vec2 annulus_point(Vec2 c, double r0, double r1, std::mt19937_64& rng) {
  const double u = uniform01(rng);
  const double r = std::sqrt(r0 * r0 + u * (r1 * r1 - r0 * r0));
  const double theta = 2.0 * std::numbers::pi * uniform01(rng);
  return {c.x + r * std::cos(theta), c.y + r * std::sin(theta)};
}

}  // namespace

Interval parse_interval(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.size() < 5) throw std::invalid_argument("interval: '" + std::string(text) + "' too short");
  const char open = text.front();
  const char close = text.back();
  if ((open != '[' && open != '(') || (close != ']' && close != ')'))
    throw std::invalid_argument("interval: '" + std::string(text) + "' needs [ or ( and ] or )");
  const auto body = text.substr(1, text.size() - 2);
  const auto comma = body.find(',');
  if (comma == std::string_view::npos) throw std::invalid_argument("interval: missing comma");
  Interval iv{parse_bound(body.substr(0, comma)), parse_bound(body.substr(comma + 1)), open == '[', close == ']'};
  if (std::isinf(iv.hi)) iv.hi_closed = false;
  if (iv.empty()) throw std::invalid_argument("interval: '" + std::string(text) + "' is empty");
  return iv;
}

std::string to_string(const Interval& iv) {
  const auto num = [](double v) {
    if (std::isinf(v)) return std::string("inf");
    return trace::format_double(v);
  };
  return std::string(iv.lo_closed ? "[" : "(") + num(iv.lo) + "," + num(iv.hi) + (iv.hi_closed ? "]" : ")");
}

void BandSpec::validate() const {
  if (name.empty()) throw std::invalid_argument("band: empty name");
  if (d_tt.empty() || d_tt.lo < 0) throw std::invalid_argument("band " + name + ": bad d_tt range");
  if (annulus && (annulus->empty() || annulus->lo < 0)) throw std::invalid_argument("band " + name + ": bad gap range");
  if (sample_count == 0) throw std::invalid_argument("band " + name + ": sample_count must be > 0");
}

std::vector<BandSpec> default_bands() {
  const double inf = std::numeric_limits<double>::infinity();
  const double edges[] = {0, 10, 20, 30, 40, 50, 100, 500, inf};
  std::vector<BandSpec> bands;
  for (int i = 0; i < 8; ++i)
    bands.push_back({"AD" + std::to_string(i + 1), Interval{edges[i], edges[i + 1], true, false}, std::nullopt, 1000});
  bands.push_back({"AD9", Interval{30, inf, false, false}, Interval{0, 1, true, false}, 1000});
  bands.push_back({"AD10", Interval{30, inf, false, false}, Interval{10, 20, true, true}, 1000});
  return bands;
}

Vec2 sample_ghost(Vec2 tx, const BandSpec& band, const AccessibleRegion& region, std::mt19937_64& rng) {
  if (band.annulus) throw std::invalid_argument("sample_ghost: band " + band.name + " is directional");
  const double r0 = band.d_tt.lo;
  const double r1 = std::min(band.d_tt.hi, region.diagonal());
  if (!(r1 >= r0)) throw InfeasibleBandError(band.name, "d_tt range beyond the area diagonal");
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const Vec2 p = annulus_point(tx, r0, r1, rng);
    if (band.d_tt.contains(distance(tx, p)) && region.contains(p)) return p;
  }
  throw InfeasibleBandError(band.name, "no accessible ghost within " + std::to_string(kMaxAttempts) +
                                           " attempts for transmitter at (" + trace::format_double(tx.x) + ", " +
                                           trace::format_double(tx.y) + ")");
}

Vec2 sample_ghost_directional(Vec2 tx, Vec2 rx, const BandSpec& band, const AccessibleRegion& region,
                              std::mt19937_64& rng) {
  if (!band.annulus) throw std::invalid_argument("sample_ghost_directional: band " + band.name + " has no gap range");
  const double d_tr = distance(tx, rx);
  const Interval& gap = *band.annulus;
  const double r0 = std::max(0.0, d_tr - gap.hi);
  const double r1 = std::min(d_tr + gap.hi, region.diagonal());
  // Every candidate satisfies D(T,T') <= D(T,R) + D(R,T') <= 2 D(T,R) + gap.hi.
  if (!(r1 >= r0) || 2.0 * d_tr + gap.hi < band.d_tt.lo || (2.0 * d_tr + gap.hi == band.d_tt.lo && !band.d_tt.lo_closed))
    throw InfeasibleBandError(band.name, "D(T,R) = " + trace::format_double(d_tr) +
                                             " m leaves no room for the required D(T,T')");
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const Vec2 p = annulus_point(rx, r0, r1, rng);
    if (gap.contains(std::abs(d_tr - distance(p, rx))) && band.d_tt.contains(distance(tx, p)) && region.contains(p))
      return p;
  }
  throw InfeasibleBandError(band.name, "no accessible ghost within " + std::to_string(kMaxAttempts) +
                                           " attempts for D(T,R) = " + trace::format_double(d_tr) + " m");
}

bool satisfies(const trace::FeatureVector& s, const BandSpec& band, const AccessibleRegion& region) {
  if (!region.contains(s.tx_reported)) return false;
  if (!band.d_tt.contains(distance(s.tx_true, s.tx_reported))) return false;
  if (band.annulus) {
    const double gap = std::abs(distance(s.tx_true, s.rx) - distance(s.tx_reported, s.rx));
    if (!band.annulus->contains(gap)) return false;
  }
  return true;
}

AnomalyDataset build_anomaly_dataset(const std::vector<trace::FeatureVector>& sources, const BandSpec& band,
                                     const AccessibleRegion& region, std::uint64_t seed) {
  band.validate();
  if (sources.size() < band.sample_count)
    throw InfeasibleBandError(band.name, "only " + std::to_string(sources.size()) + " source packets for " +
                                             std::to_string(band.sample_count) + " samples");
  std::mt19937_64 order_rng(derive_seed(seed, "order"));
  std::vector<std::size_t> order(sources.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), order_rng);

  AnomalyDataset ds;
  ds.band = band.name;
  ds.samples.reserve(band.sample_count);
  for (std::size_t k = 0; k < order.size() && ds.samples.size() < band.sample_count; ++k) {
    const trace::FeatureVector& src = sources[order[k]];
    std::mt19937_64 rng(derive_seed(seed, order[k]));
    try {
      const Vec2 ghost = band.annulus ? sample_ghost_directional(src.tx_true, src.rx, band, region, rng)
                                      : sample_ghost(src.tx_true, band, region, rng);
      trace::FeatureVector f = src;
      f.tx_reported = ghost;
      f.label = trace::Label::Anomalous;
      ds.samples.push_back(f);
    } catch (const InfeasibleBandError&) {
      ++ds.infeasible_sources;
    }
  }
  if (ds.samples.size() < band.sample_count)
    throw InfeasibleBandError(band.name,
                              "source pool exhausted with " + std::to_string(ds.samples.size()) + " of " +
                                  std::to_string(band.sample_count) + " samples",
                              ds.infeasible_sources);
  return ds;
}

}  // namespace ghostdet::inject
