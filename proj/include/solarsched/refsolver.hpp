#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "solarsched/domain.hpp"

namespace solarsched {

// Utility of a fractional allocation (no whole-slot restriction):
// sum_n log2(sum_t time[t][n] * rate(p_t, g_n)).
double allocation_utility(const Allocation& alloc, const SystemConfig& cfg);

// Euclidean projection onto {x >= 0, sum x = total} (sorting based).
std::vector<double> project_to_slot_simplex(const std::vector<double>& v,
                                            double total);

// Euclidean projection onto the energy-causality polytope
// {p >= 0, sum_{i<=t} p_i * T <= sum_{i<=t} E_i for every t} via cyclic
// Dykstra over the prefix half-spaces and the nonnegative orthant.
std::vector<double> project_to_causality_polytope(
    const std::vector<double>& p, const std::vector<double>& energy_j,
    double slot_length_s, int max_cycles = 10000);

struct PgOptions {
  int max_iters = 5000;
  double kkt_tol = 1e-6;     // see kkt residual definition below
  double armijo_slope = 1e-4;
  double backtrack = 0.5;
};

// Block solvers: projected gradient ascent with Armijo backtracking on one
// block while the other is held fixed. Both start from the allocation given
// and never accept a worse iterate, so the block utility is nondecreasing.
// An init that violates its block's constraints by more than 1e-7 relative
// raises InvalidInputError. The stopping KKT residual is the
// projected-gradient fixed-point gap
//   || P_C(x + grad U) - x ||_inf / (1 + ||grad U||_inf),
// zero exactly at a KKT point of the block problem.
Allocation optimize_tau_given_p(const Allocation& alloc,
                                const SystemConfig& cfg,
                                const PgOptions& options = {});
Allocation optimize_p_given_tau(const Allocation& alloc,
                                const EnergySeries& energies,
                                const SystemConfig& cfg,
                                const PgOptions& options = {});

struct BcdTracePoint {
  int sweep = 0;
  double utility = 0.0;
  double max_violation = 0.0;  // max relative feasibility violation
};

// Full block-coordinate trace: per-sweep utilities (nondecreasing), the
// final allocation, and the sweep count.
struct BcdTrace {
  Allocation allocation;
  std::vector<BcdTracePoint> points;
  double utility = 0.0;
  int sweeps = 0;
  bool converged = false;
};

struct BcdOptions {
  int max_sweeps = 500;
  double sweep_improvement_tol = 1e-8;
  PgOptions pg;
};

// Alternates the two block solvers until a full sweep improves the utility
// by less than the tolerance. When no initial allocation is given (or the
// given one has undefined utility) it starts from uniform time sharing and
// the flat power profile.
BcdTrace bcd_solve(const EnergySeries& energies, const SystemConfig& cfg,
                   const std::optional<Allocation>& init = std::nullopt,
                   const BcdOptions& options = {});

// Random causality-feasible allocation (per-slot Dirichlet time shares,
// partial forward spend); used for restarts.
Allocation random_feasible_allocation(const EnergySeries& energies,
                                      const SystemConfig& cfg,
                                      std::uint64_t seed);

// Best of `restarts` runs: the default start plus restarts-1 random ones,
// seeds derived deterministically from base_seed.
BcdTrace bcd_solve_best(const EnergySeries& energies, const SystemConfig& cfg,
                        int restarts, std::uint64_t base_seed,
                        const BcdOptions& options = {});

// CSV with columns iteration,utility,violation.
void save_bcd_trace_csv(const BcdTrace& trace, const std::string& path);

}  // namespace solarsched
