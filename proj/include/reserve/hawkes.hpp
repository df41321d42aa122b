#pragma once

// Marked self-exciting mint/redemption streams with an exponential kernel.
//
// Each stream keeps an exact event-driven filter of its intensity:
//   at an event      lambda <- lambda + kappa
//   between events   lambda <- lambda0 + (lambda - lambda0) * exp(-theta * dt)
// The redemption stream additionally sees the peg feedback zeta * dP(t)^2.

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace reserve {

using Rng = std::mt19937_64;

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HawkesParams {
  double lambda0 = 0.0;    // baseline intensity, events/hour
  double kappa = 0.0;      // jump per event, events/hour
  double theta = 1.0;      // excitation decay, 1/hour
  double mark_mean = 1.0;  // mean transaction size, dollars
};

struct IntensityState {
  double current = 0.0;      // events/hour, excluding peg feedback
  double last_update = 0.0;  // hours
};

enum class EventKind { mint, redemption };

struct MarkedEvent {
  double time = 0.0;
  EventKind kind = EventKind::redemption;
  double size = 0.0;
};

struct PegFeedback {
  double zeta = 0.0;  // events/hour per squared peg unit
};

// Throws std::invalid_argument on parameters outside their domain. Does not
// enforce subcriticality; see check_subcritical.
void validate(const HawkesParams& params);
void check_subcritical(const HawkesParams& params, const std::string& stream);

IntensityState decay_intensity(const IntensityState& state,
                               const HawkesParams& params, double dt);
IntensityState apply_event_jump(const IntensityState& state,
                                const HawkesParams& params);
double branching_ratio(const HawkesParams& params);
double stationary_intensity(const HawkesParams& params);

double sample_mark(double mark_mean, Rng& rng);

struct StreamPair {
  IntensityState redemption;
  IntensityState mint;
};

using PegLookup = std::function<double(double)>;

struct ThinningOptions {
  // Height of one layer of the dominating Poisson random measure. Must be
  // identical between runs that are meant to be coupled.
  double band_height = 64.0;
  // Peg lookups are treated as constant on this grid.
  double refresh_step = 0.1;
  double explosion_limit = 1e6;
};

// Intensity observed just before each accepted event (peg term excluded).
struct FilterSample {
  double time;
  EventKind kind;
  double intensity_before;
};

struct SegmentResult {
  std::vector<MarkedEvent> events;
  StreamPair states;
};

// Simulates both streams on [t0, t1) by thinning a layered Poisson random
// measure. Two calls that share the rng state and band height are coupled:
// pointwise larger intensities never accept fewer points.
SegmentResult simulate_stream_segment(const HawkesParams& params_r,
                                      const HawkesParams& params_m,
                                      PegFeedback feedback,
                                      const PegLookup& peg_lookup, double t0,
                                      double t1, StreamPair states, Rng& rng,
                                      const ThinningOptions& options = {},
                                      std::vector<FilterSample>* trace = nullptr);

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace reserve
