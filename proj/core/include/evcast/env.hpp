#pragma once

#include "evcast/lstm.hpp"
#include "evcast/numerics.hpp"
#include "evcast/transformer.hpp"

#include <cstddef>
#include <vector>

namespace evcast {

/// One decision point for the scale-choosing agent: the recurrent cell vector
/// observed after reading a window, the point forecast it produced for the
/// next hour, and the value that actually materialized there.
struct EnvRecord {
    Tensor cell;
    double y_hat_next = 0.0;
    double y_next = 0.0;
};

/// Joins extracted cell records with the frame series they were computed
/// from: each record keeps its cell vector and point forecast and picks up
/// the realized energy of the following hour. Every record's hour must appear
/// in the frames with a contiguous successor.
std::vector<EnvRecord> make_env_records(const std::vector<CellRecord>& cells,
                                        const std::vector<FeatureFrame>& frames);

/// A finite-horizon walk over a slice of the record series. The agent visits
/// the records in order, choosing one forecast scale per hour; the slice also
/// carries the successor record when one exists so the final transition has a
/// well-defined next state.
struct Episode {
    std::vector<EnvRecord> records;
    std::size_t horizon = 0;
    std::size_t cursor = 0;
    double zeta = 0.75;
};

struct StepResult {
    Tensor next_state;
    double reward = 0.0;
    bool done = false;
};

/// Cuts the episode [start, start + t_ep) out of the record series and
/// validates it. zeta scales the reward magnitude.
Episode env_reset(const std::vector<EnvRecord>& series, std::size_t start, std::size_t t_ep,
                  double zeta = 0.75);

/// Cell vector the agent currently observes. Throws once the episode is done.
const Tensor& env_state(const Episode& ep);

/// Cell vector at an arbitrary in-horizon position, for batch sampling.
const Tensor& env_state_at(const Episode& ep, std::size_t index);

/// Maps the unconstrained action to a strictly positive forecast scale:
/// softplus(a_raw) + 1e-3. The floor keeps the predictive distribution from
/// collapsing to a point.
double delta_from_raw(double a_raw);

/// Reward the agent would receive for playing a_raw at the given position,
/// without advancing anything: -zeta times the score of N(y_hat_next, delta)
/// against y_next.
double env_peek_reward_at(const Episode& ep, std::size_t index, double a_raw);

/// Same at the current cursor.
double env_peek_reward(const Episode& ep, double a_raw);

/// Consumes the current record: scores the action, advances the cursor and
/// reports the next cell vector. When the slice has no successor record the
/// terminal next state repeats the last cell; it is never bootstrapped from.
StepResult env_step(Episode& ep, double a_raw);

} // namespace evcast
