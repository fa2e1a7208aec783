#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <thread>

#include "schwarznet/async.hpp"
#include "schwarznet/subdomain.hpp"

namespace schwarznet {

namespace {
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}
}  // namespace

DelaySchedule DelaySchedule::bounded(int max_delay, std::uint64_t seed) {
  DelaySchedule s;
  s.kind = Kind::bounded_random;
  s.max_delay = max_delay;
  s.seed = seed;
  return s;
}

bool DelaySchedule::updates_at(Index k, int t) const {
  if (kind == Kind::trace) {
    return std::any_of(events.begin(), events.end(), [&](const Event& e) {
      return e.t == t && e.k == k;
    });
  }
  if (update_period.empty()) return true;
  const int period = std::max(1, update_period[k]);
  const int offset = update_offset.empty() ? 0 : update_offset[k];
  return (t - offset) % period == 0 && t >= offset;
}

void DelaySchedule::validate(Index k_blocks) const {
  if (max_delay < 0) throw input_error("delay schedule: max_delay must be >= 0");
  if (!update_period.empty() &&
      static_cast<Index>(update_period.size()) != k_blocks)
    throw input_error("delay schedule: update_period length != K");
  for (int p : update_period)
    if (p < 1)
      throw input_error("delay schedule: update periods must be >= 1 "
                        "(every update set must be infinite)");
  if (kind == Kind::trace) {
    for (const auto& e : events) {
      if (e.k < 0 || e.k >= k_blocks)
        throw input_error("delay schedule: event block id out of range");
      if (static_cast<Index>(e.tau.size()) != k_blocks)
        throw input_error("delay schedule: event tau length != K");
      for (int tau : e.tau)
        if (tau < 0 || tau > e.t)
          throw input_error("delay schedule: need 0 <= tau <= t");
    }
  }
}

IterationState async_solve_sim(const StructuredMatrix& h,
                               std::span<const double> f,
                               const OverlapBlocks& blocks,
                               const BackendOptions& backend,
                               const DelaySchedule& schedule,
                               const SolveOptions& opts) {
  if (opts.tol <= 0.0) throw input_error("solve: tol must be positive");
  const Index k_blocks = blocks.k_blocks();
  schedule.validate(k_blocks);

  const auto t0 = Clock::now();
  auto subs = project_all(h, f, blocks, 1);
  auto solvers = make_block_solvers(subs, backend);

  // Ring of recent iterates; capacity covers the largest possible lag.
  int capacity = 1;
  if (schedule.kind == DelaySchedule::Kind::bounded_random)
    capacity = schedule.max_delay + 1;
  int last_event_t = -1;
  if (schedule.kind == DelaySchedule::Kind::trace) {
    for (const auto& e : schedule.events) {
      last_event_t = std::max(last_event_t, e.t);
      for (int tau : e.tau) capacity = std::max(capacity, e.t - tau + 1);
    }
  }

  IterationState state;
  state.x = opts.x0.empty() ? std::vector<double>(h.n(), 0.0) : opts.x0;
  if (static_cast<Index>(state.x.size()) != h.n())
    throw input_error("solve: x0 dimension mismatch");
  state.initial_residual = residual_inf(h, state.x, f);
  if (opts.record_history) {
    state.history.push_back(state.x);
    state.epochs.push_back(0);
  }

  std::vector<std::vector<double>> ring(capacity, state.x);
  std::vector<std::vector<double>> y(k_blocks);
  for (Index k = 0; k < k_blocks; ++k) {
    y[k].resize(subs[k].local_size());
    for (Index lr = 0; lr < subs[k].local_size(); ++lr)
      y[k][lr] = state.x[subs[k].block[lr]];
  }

  std::mt19937_64 rng(schedule.seed);
  double eps_min = state.initial_residual;
  std::vector<double> stale(h.n());

  // Contraction-envelope accounting: level[k] is the index L with block k's
  // current value guaranteed inside the L-th contraction set X(L). An update
  // from stale inputs at guarantee level V lands in X(V + 1); the vector as
  // a whole sits in X(min_k level[k]). Levels are kept per ring slot so
  // delayed reads carry the level their iterate had.
  std::vector<std::vector<int>> ring_levels(
      capacity, std::vector<int>(k_blocks, 0));
  std::vector<int> level(k_blocks, 0);

  for (int t = 0; t < opts.max_iter; ++t) {
    if (schedule.kind == DelaySchedule::Kind::trace && t > last_event_t)
      throw input_error("delay schedule exhausted at t=" + std::to_string(t) +
                        " before convergence");

    std::vector<double> x_next = state.x;
    std::vector<int> level_next = level;
    for (Index k = 0; k < k_blocks; ++k) {
      if (!schedule.updates_at(k, t)) continue;

      // tau_{k,k'}(t) per peer; own block is always current.
      int input_level = std::numeric_limits<int>::max();
      for (Index kp = 0; kp < k_blocks; ++kp) {
        int tau = t;
        if (kp != k) {
          switch (schedule.kind) {
            case DelaySchedule::Kind::zero:
              break;
            case DelaySchedule::Kind::bounded_random: {
              const int d = std::min(schedule.max_delay, t);
              tau = t - static_cast<int>(rng() % (static_cast<std::uint64_t>(d) + 1));
              break;
            }
            case DelaySchedule::Kind::trace: {
              for (const auto& e : schedule.events)
                if (e.t == t && e.k == k) tau = e.tau[kp];
              break;
            }
          }
        }
        if (tau < t - capacity + 1)
          throw input_error("delay schedule: lag exceeds ring capacity");
        const int src_level =
            kp == k ? level[k] : ring_levels[tau % capacity][kp];
        input_level = std::min(input_level, src_level);
        const auto& src = ring[tau % capacity];
        for (Index v : blocks.interior[kp]) stale[v] = src[v];
      }

      auto rhs = subs[k].boundary_rhs(stale);
      solvers[k].solve(rhs, y[k]);
      for (std::size_t r = 0; r < subs[k].interior.size(); ++r)
        x_next[subs[k].interior[r]] = y[k][subs[k].restrict_rows[r]];
      level_next[k] = input_level + 1;
    }

    state.x = std::move(x_next);
    level = std::move(level_next);
    ring[(t + 1) % capacity] = state.x;
    ring_levels[(t + 1) % capacity] = level;
    const int epoch_count = *std::min_element(level.begin(), level.end());

    double eps = 0.0;
    for (Index k = 0; k < k_blocks; ++k)
      eps = std::max(eps, subs[k].local_residual_inf(state.x));

    state.iterations = t + 1;
    state.residual = eps;
    if (opts.record_history) {
      state.history.push_back(state.x);
      state.epochs.push_back(epoch_count);
    }
    if ((t + 1) % std::max(1, opts.log_interval) == 0 || eps <= opts.tol)
      state.trace.push_back({t + 1, seconds_since(t0), eps,
                             std::numeric_limits<double>::quiet_NaN(), -1, -1});
    if (eps <= opts.tol) {
      state.converged = true;
      break;
    }
    if (!std::isfinite(eps))
      throw divergence_error("scheme diverging (non-finite residual)");
    if (eps_min > 0.0 && eps > opts.divergence_factor * eps_min)
      throw divergence_error("scheme diverging (residual grew " +
                             std::to_string(eps / eps_min) +
                             "x from its minimum; rho(S^omega) >= 1 likely)");
    eps_min = std::min(eps_min, eps);
  }
  return state;
}

namespace {

struct BoardEntry {
  mutable std::shared_mutex lock;
  std::vector<double> x;
  double eps = std::numeric_limits<double>::infinity();
  std::uint64_t version = 0;
};

// Shared board modeling one-sided put/get: exclusive writes, shared reads,
// per-block locking. Readers always see a consistent (x, eps, version).
class PublicBoard {
public:
  explicit PublicBoard(Index k_blocks) : entries_(k_blocks) {
    for (auto& e : entries_) e = std::make_unique<BoardEntry>();
  }

  void publish(Index k, std::span<const double> x_block, double eps) {
    auto& e = *entries_[k];
    std::unique_lock guard(e.lock);
    e.x.assign(x_block.begin(), x_block.end());
    e.eps = eps;
    ++e.version;
  }

  std::uint64_t read(Index k, std::vector<double>& x_block, double& eps) const {
    const auto& e = *entries_[k];
    std::shared_lock guard(e.lock);
    x_block = e.x;
    eps = e.eps;
    return e.version;
  }

private:
  std::vector<std::unique_ptr<BoardEntry>> entries_;
};

}  // namespace

IterationState async_solve_threaded(const StructuredMatrix& h,
                                    std::span<const double> f,
                                    const OverlapBlocks& blocks,
                                    const BackendOptions& backend,
                                    const SolveOptions& opts) {
  if (opts.tol <= 0.0) throw input_error("solve: tol must be positive");
  const Index k_blocks = blocks.k_blocks();
  const auto t0 = Clock::now();
  auto subs = project_all(h, f, blocks);
  auto solvers = make_block_solvers(subs, backend);

  std::vector<double> x0 = opts.x0.empty() ? std::vector<double>(h.n(), 0.0)
                                           : opts.x0;
  if (static_cast<Index>(x0.size()) != h.n())
    throw input_error("solve: x0 dimension mismatch");

  const double wall_limit = opts.wall_limit_s > 0 ? opts.wall_limit_s : 600.0;
  PublicBoard board(k_blocks);
  // Seed every entry before workers start: a fast worker may read a slow
  // peer's slot before that peer's first publish.
  for (Index k = 0; k < k_blocks; ++k) {
    std::vector<double> init(blocks.interior[k].size());
    for (std::size_t r = 0; r < init.size(); ++r)
      init[r] = x0[blocks.interior[k][r]];
    board.publish(k, init, std::numeric_limits<double>::infinity());
  }
  std::atomic<bool> deadline_hit{false};
  std::vector<std::vector<TraceRow>> traces(k_blocks);
  std::vector<char> voluntary(k_blocks, 0);

  auto worker = [&](Index k) {
    const auto& sd = subs[k];
    std::vector<double> x_full = x0;
    std::vector<double> y(sd.local_size());
    for (Index lr = 0; lr < sd.local_size(); ++lr) y[lr] = x0[sd.block[lr]];
    std::vector<double> own(sd.interior.size());
    for (std::size_t r = 0; r < sd.interior.size(); ++r)
      own[r] = x0[sd.interior[r]];
    double eps_own = std::numeric_limits<double>::infinity();
    std::vector<double> peer_block;
    int local_iter = 0;

    while (true) {
      board.publish(k, own, eps_own);
      double eps_view = eps_own;
      for (Index kp = 0; kp < k_blocks; ++kp) {
        if (kp == k) continue;
        double peer_eps;
        board.read(kp, peer_block, peer_eps);
        for (std::size_t r = 0; r < blocks.interior[kp].size(); ++r)
          x_full[blocks.interior[kp][r]] = peer_block[r];
        eps_view = std::max(eps_view, peer_eps);
      }

      // Local error of the pre-update iterate (Algorithm order), then the
      // block update against the just-read boundary.
      eps_own = sd.local_residual_inf(x_full);
      eps_view = std::max(eps_view, eps_own);
      auto rhs = sd.boundary_rhs(x_full);
      solvers[k].solve(rhs, y);
      for (std::size_t r = 0; r < sd.interior.size(); ++r) {
        own[r] = y[sd.restrict_rows[r]];
        x_full[sd.interior[r]] = own[r];
      }

      ++local_iter;
      traces[k].push_back({local_iter, seconds_since(t0), eps_own,
                           std::numeric_limits<double>::quiet_NaN(),
                           static_cast<int>(k), local_iter});

      if (eps_view <= opts.tol) {
        voluntary[k] = 1;
        break;
      }
      if (seconds_since(t0) > wall_limit) {
        deadline_hit.store(true);
        break;
      }
      if (deadline_hit.load()) break;
    }
    // Publish the final block state with its exact local error.
    board.publish(k, own, sd.local_residual_inf(x_full));
  };

  std::vector<std::thread> threads;
  threads.reserve(k_blocks);
  for (Index k = 0; k < k_blocks; ++k) threads.emplace_back(worker, k);
  for (auto& th : threads) th.join();

  IterationState state;
  state.x = x0;
  std::vector<double> block_vals;
  double eps_unused;
  for (Index k = 0; k < k_blocks; ++k) {
    board.read(k, block_vals, eps_unused);
    for (std::size_t r = 0; r < blocks.interior[k].size(); ++r)
      state.x[blocks.interior[k][r]] = block_vals[r];
  }
  state.initial_residual = residual_inf(h, x0, f);
  state.residual = residual_inf(h, state.x, f);
  state.exit_slack = std::max(0.0, state.residual / opts.tol - 1.0);
  state.timed_out = deadline_hit.load();
  state.converged = !state.timed_out &&
                    std::all_of(voluntary.begin(), voluntary.end(),
                                [](char v) { return v != 0; });
  for (Index k = 0; k < k_blocks; ++k) {
    state.iterations = std::max(
        state.iterations,
        traces[k].empty() ? 0 : traces[k].back().local_iter);
    state.trace.insert(state.trace.end(), traces[k].begin(), traces[k].end());
  }
  std::sort(state.trace.begin(), state.trace.end(),
            [](const TraceRow& a, const TraceRow& b) { return a.time_s < b.time_s; });
  return state;
}

}  // namespace schwarznet
