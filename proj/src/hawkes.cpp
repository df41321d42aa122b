#include "reserve/hawkes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace reserve {

void validate(const HawkesParams& params) {
  if (!(params.lambda0 >= 0.0) || !std::isfinite(params.lambda0))
    throw std::invalid_argument("hawkes: lambda0 must be finite and >= 0");
  if (!(params.kappa >= 0.0) || !std::isfinite(params.kappa))
    throw std::invalid_argument("hawkes: kappa must be finite and >= 0");
  if (!(params.theta > 0.0) || !std::isfinite(params.theta))
    throw std::invalid_argument("hawkes: theta must be > 0");
  if (!(params.mark_mean > 0.0) || !std::isfinite(params.mark_mean))
    throw std::invalid_argument("hawkes: mark_mean must be > 0");
}

void check_subcritical(const HawkesParams& params, const std::string& stream) {
  if (branching_ratio(params) >= 1.0)
    throw std::invalid_argument("hawkes: " + stream +
                                " stream is not subcritical (kappa/theta >= 1)");
}

IntensityState decay_intensity(const IntensityState& state,
                               const HawkesParams& params, double dt) {
  if (!(dt >= 0.0)) throw std::invalid_argument("decay_intensity: dt < 0");
  if (dt == 0.0) return state;
  const double excess = state.current - params.lambda0;
  return {params.lambda0 + excess * std::exp(-params.theta * dt),
          state.last_update + dt};
}

IntensityState apply_event_jump(const IntensityState& state,
                                const HawkesParams& params) {
  return {state.current + params.kappa, state.last_update};
}

double branching_ratio(const HawkesParams& params) {
  if (!(params.theta > 0.0))
    throw std::invalid_argument("branching_ratio: theta must be > 0");
  return params.kappa / params.theta;
}

double stationary_intensity(const HawkesParams& params) {
  const double n = branching_ratio(params);
  if (n >= 1.0) return std::numeric_limits<double>::infinity();
  return params.lambda0 / (1.0 - n);
}

double sample_mark(double mark_mean, Rng& rng) {
  std::exponential_distribution<double> exp1(1.0);
  double e = 0.0;
  do {
    e = exp1(rng);
  } while (!(e > 0.0));
  return mark_mean * e;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined word
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

// One horizontal layer [index*H, (index+1)*H) of a unit-rate Poisson random
// measure on time x intensity. Every point consumes the same three draws, so
// the point sequence never depends on which points were accepted.
struct Band {
  Rng eng;
  double height;
  double next_time = 0.0;
  double level = 0.0;  // uniform position inside the band
  double mark_unit = 0.0;

  Band(std::uint64_t seed, double h, double t0) : eng(seed), height(h) {
    next_time = t0;
    advance();
  }

  void advance() {
    std::exponential_distribution<double> gap(height);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    next_time += gap(eng);
    level = unit(eng);
    mark_unit = sample_mark(1.0, eng);
  }
};

class LayeredMeasure {
 public:
  LayeredMeasure(std::uint64_t seed, double t0, double band_height)
      : seed_(seed), t0_(t0), h_(band_height) {}

  // Earliest point strictly after t among the first n bands.
  Band* earliest_after(double t, std::size_t n) {
    while (bands_.size() < n)
      bands_.emplace_back(mix_seed(seed_, bands_.size()), h_, t0_);
    Band* best = nullptr;
    for (std::size_t i = 0; i < n; ++i) {
      Band& b = bands_[i];
      while (b.next_time <= t) b.advance();
      if (!best || b.next_time < best->next_time) best = &b;
    }
    return best;
  }

  std::size_t index_of(const Band* b) const {
    return static_cast<std::size_t>(b - bands_.data());
  }

  double band_height() const { return h_; }

 private:
  std::uint64_t seed_;
  double t0_;
  double h_;
  std::vector<Band> bands_;
};

void advance_to(IntensityState& state, const HawkesParams& params, double time) {
  state = decay_intensity(state, params, std::max(0.0, time - state.last_update));
  state.last_update = time;
}

double next_refresh(double t, double step, double t1) {
  if (!(step > 0.0)) return t1;
  double k = std::floor(t / step + 1e-9) + 1.0;
  double b = k * step;
  if (b <= t) b = (k + 1.0) * step;
  return std::min(b, t1);
}

void simulate_one(const HawkesParams& params, EventKind kind, double zeta,
                  const PegLookup& peg_lookup, double t0, double t1,
                  IntensityState& state, std::uint64_t seed,
                  const ThinningOptions& options,
                  std::vector<MarkedEvent>& out,
                  std::vector<FilterSample>* trace) {
  if (state.last_update > t0 + 1e-9)
    throw std::invalid_argument("simulate_stream_segment: state is ahead of t0");
  advance_to(state, params, t0);

  LayeredMeasure measure(seed, t0, options.band_height);
  const double h = options.band_height;
  double t = t0;
  double boundary = t0;
  double peg_term = 0.0;

  while (t < t1) {
    if (t >= boundary) {
      boundary = next_refresh(t, options.refresh_step, t1);
      if (zeta > 0.0) {
        const double dp = peg_lookup(t);
        if (!std::isfinite(dp))
          throw SimulationError("simulate_stream_segment: non-finite peg lookup");
        peg_term = zeta * dp * dp;
      }
    }
    advance_to(state, params, t);
    const double bound = std::max(state.current, params.lambda0) + peg_term;
    if (!(bound <= options.explosion_limit))
      throw SimulationError("simulate_stream_segment: intensity above explosion guard (" +
                            std::to_string(bound) + " events/hour)");
    if (bound <= 0.0) {
      t = boundary;
      continue;
    }
    const auto layers = static_cast<std::size_t>(std::ceil(bound / h));
    Band* band = measure.earliest_after(t, layers);
    const double tc = band->next_time;
    if (tc >= boundary) {
      t = boundary;
      continue;
    }
    advance_to(state, params, tc);
    const double lambda = state.current + peg_term;
    const double height =
        (static_cast<double>(measure.index_of(band)) + band->level) * h;
    if (height < lambda) {
      if (trace) trace->push_back({tc, kind, state.current});
      out.push_back({tc, kind, params.mark_mean * band->mark_unit});
      state = apply_event_jump(state, params);
    }
    band->advance();
    t = tc;
  }
  advance_to(state, params, t1);
}

}  // namespace

SegmentResult simulate_stream_segment(const HawkesParams& params_r,
                                      const HawkesParams& params_m,
                                      PegFeedback feedback,
                                      const PegLookup& peg_lookup, double t0,
                                      double t1, StreamPair states, Rng& rng,
                                      const ThinningOptions& options,
                                      std::vector<FilterSample>* trace) {
  if (!(t0 < t1)) throw std::invalid_argument("simulate_stream_segment: t0 >= t1");
  if (!(options.band_height > 0.0))
    throw std::invalid_argument("simulate_stream_segment: band_height must be > 0");
  if (feedback.zeta < 0.0)
    throw std::invalid_argument("simulate_stream_segment: zeta must be >= 0");
  validate(params_r);
  validate(params_m);

  const std::uint64_t seed_r = rng();
  const std::uint64_t seed_m = rng();

  SegmentResult result;
  std::vector<MarkedEvent> mints;
  simulate_one(params_r, EventKind::redemption, feedback.zeta, peg_lookup, t0, t1,
               states.redemption, seed_r, options, result.events, trace);
  simulate_one(params_m, EventKind::mint, 0.0, peg_lookup, t0, t1, states.mint,
               seed_m, options, mints, trace);

  std::vector<MarkedEvent> merged;
  merged.reserve(result.events.size() + mints.size());
  std::merge(result.events.begin(), result.events.end(), mints.begin(), mints.end(),
             std::back_inserter(merged),
             [](const MarkedEvent& a, const MarkedEvent& b) { return a.time < b.time; });
  result.events = std::move(merged);
  result.states = states;
  if (trace)
    std::stable_sort(trace->begin(), trace->end(),
                     [](const FilterSample& a, const FilterSample& b) { return a.time < b.time; });
  return result;
}

}  // namespace reserve
