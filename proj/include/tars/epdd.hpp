#pragma once

#include <cstdint>

#include "tars/paths.hpp"

namespace tars {

// Retransmission-delay model parameters. Each loss on a segment costs
// rto_multiplier times the segment's one-way delay on top of the final
// traversal, so with the default multiplier of 2 a single loss triples the
// segment's delivery time.
struct DelayModelConfig {
  double tail_epsilon = 1e-12;  // truncation threshold for the (a,b) sum
  int max_retx = 64;            // cap on retransmissions per segment
  double rto_multiplier = 2.0;  // timeout as a multiple of segment one-way delay

  void check() const;  // throws std::invalid_argument on bad values
};

// (a, b): packet lost a times before the TA, b times after it.
struct LossSplit {
  int a = 0;
  int b = 0;
};

// Delivery time for one packet given its loss counts and segment delays.
double delta(const LossSplit& s, double d1_ms, double d2_ms,
             const DelayModelConfig& cfg = {});

// Probability of exactly (a, b) losses under independent per-traversal
// segment losses q1, q2: q1^a (1-q1) * q2^b (1-q2).
double joint_prob(const LossSplit& s, double q1, double q2);

// Expected packet delivery delay over the truncated (a,b) grid. The per-
// segment sums stop once the remaining geometric tail mass drops below
// tail_epsilon, or at max_retx.
double epdd_segments(double d1_ms, double q1, double d2_ms, double q2,
                     const DelayModelConfig& cfg = {});

// Analytic limit of the sum above: d1(1 + m q1/(1-q1)) + d2(1 + m q2/(1-q2)).
double epdd_closed_form_segments(double d1_ms, double q1, double d2_ms, double q2,
                                 const DelayModelConfig& cfg = {});

// EPDD for path p with the TA at `ta` (a node on p, or the path's fictive id
// meaning no TA: the whole path is one segment).
double epdd(const PathCandidate& p, int ta, const DelayModelConfig& cfg = {});
double epdd_closed_form(const PathCandidate& p, int ta, const DelayModelConfig& cfg = {});

struct McEstimate {
  double mean_ms = 0.0;
  double std_err_ms = 0.0;
};

// Independent oracle: simulates geometric per-segment retransmission counts
// for n_packets packets and averages delta(). Each packet draws from its own
// seed-derived stream, so the result is identical for any thread count.
McEstimate monte_carlo_epdd(const PathCandidate& p, int ta, long n_packets,
                            std::uint64_t seed, const DelayModelConfig& cfg = {},
                            bool parallel = true);

McEstimate monte_carlo_epdd_segments(double d1_ms, double q1, double d2_ms, double q2,
                                     long n_packets, std::uint64_t seed,
                                     const DelayModelConfig& cfg = {}, bool parallel = true);

}  // namespace tars
