#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "schwarznet/solve.hpp"
#include "schwarznet/types.hpp"

namespace schwarznet {

// Staleness model for the asynchronous iteration: which blocks update at
// which global steps, and how old the information from each peer is.
// Total asynchronism requires every block to update infinitely often and
// old information to be discarded eventually; bounded delays and periodic
// update sets satisfy both by construction.
struct DelaySchedule {
  enum class Kind { zero, bounded_random, trace };

  Kind kind = Kind::zero;
  int max_delay = 0;
  std::uint64_t seed = 0;

  // Block k updates at step t iff (t - offset[k]) % period[k] == 0.
  // Empty vectors mean every block updates at every step.
  std::vector<int> update_period;
  std::vector<int> update_offset;

  // Replayed schedules: at step t, block k updates using iterate tau[k']
  // from each peer k'. Steps with no event carry all blocks.
  struct Event {
    int t = 0;
    Index k = 0;
    std::vector<int> tau;
  };
  std::vector<Event> events;  // sorted by (t, k)

  static DelaySchedule zero_delay() { return {}; }
  static DelaySchedule bounded(int max_delay, std::uint64_t seed);

  bool updates_at(Index k, int t) const;
  void validate(Index k_blocks) const;
};

// Deterministic event-driven simulation of the asynchronous scheme: a single
// logical timeline where updating blocks solve their subproblem against a
// stale assembly of peer blocks. With zero delays and all blocks updating,
// the iterates (and trace residuals) are bitwise those of sync_solve.
IterationState async_solve_sim(const StructuredMatrix& h,
                               std::span<const double> f,
                               const OverlapBlocks& blocks,
                               const BackendOptions& backend,
                               const DelaySchedule& schedule,
                               const SolveOptions& opts);

// Threaded execution with one worker per block and a shared board holding
// each block's published solution and local error. Writers take the entry
// lock exclusively, readers share it, mirroring one-sided put/get with
// lock/unlock; readers never observe torn values. Workers exit when the
// maximum published error they observe falls below tol; the exact residual
// is recomputed at exit and reported through IterationState::exit_slack.
IterationState async_solve_threaded(const StructuredMatrix& h,
                                    std::span<const double> f,
                                    const OverlapBlocks& blocks,
                                    const BackendOptions& backend,
                                    const SolveOptions& opts);

}  // namespace schwarznet
