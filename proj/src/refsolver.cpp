#include "solarsched/refsolver.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include "solarsched/scheduler.hpp"

namespace solarsched {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.6931471805599453;

std::string fmt_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double utility_or_ninf(const Allocation& alloc, const SystemConfig& cfg) {
  const auto bits = bits_per_gateway(alloc, cfg);
  double u = 0.0;
  for (double b : bits) {
    if (!(b > 0.0)) return kNegInf;
    u += std::log2(b);
  }
  return u;
}

// Shared projected-gradient ascent. x is a flat vector; proj must return a
// point of the feasible set; objective returns -inf outside the utility
// domain. Only improving steps are accepted.
struct PgOutcome {
  std::vector<double> x;
  double f = kNegInf;
  double kkt = std::numeric_limits<double>::infinity();
  int iters = 0;
};

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

PgOutcome projected_gradient_ascent(
    std::vector<double> x0,
    const std::function<double(const std::vector<double>&)>& objective,
    const std::function<std::vector<double>(const std::vector<double>&)>& grad,
    const std::function<std::vector<double>(const std::vector<double>&)>& proj,
    const PgOptions& options) {
  PgOutcome out;
  out.x = proj(x0);
  out.f = objective(out.x);
  if (out.f == kNegInf) return out;  // cannot ascend from outside the domain

  const std::size_t dim = out.x.size();
  double step = 1.0;
  {
    const auto g0 = grad(out.x);
    const double gn = inf_norm(g0);
    if (gn > 0.0) step = (1.0 + inf_norm(out.x)) / gn;
  }

  for (int iter = 0; iter < options.max_iters; ++iter) {
    out.iters = iter;
    const auto g = grad(out.x);

    // Fixed-point gap of x = P(x + g), scale-normalized.
    std::vector<double> probe(dim);
    for (std::size_t i = 0; i < dim; ++i) probe[i] = out.x[i] + g[i];
    probe = proj(probe);
    double gap = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      gap = std::max(gap, std::abs(probe[i] - out.x[i]));
    }
    out.kkt = gap / (1.0 + inf_norm(g));
    if (out.kkt <= options.kkt_tol) break;

    bool accepted = false;
    double s = step;
    const double s_floor = step * 1e-18;
    while (s > s_floor) {
      std::vector<double> trial(dim);
      for (std::size_t i = 0; i < dim; ++i) trial[i] = out.x[i] + s * g[i];
      trial = proj(trial);
      const double ft = objective(trial);
      double along = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        along += g[i] * (trial[i] - out.x[i]);
      }
      if (ft != kNegInf && ft >= out.f + options.armijo_slope * along &&
          ft >= out.f) {
        out.x = std::move(trial);
        out.f = ft;
        accepted = true;
        break;
      }
      s *= options.backtrack;
    }
    if (!accepted) break;  // stalled at numerical resolution
    step = s * 2.0;
  }
  return out;
}

std::vector<std::vector<double>> slot_rate_table(const std::vector<double>& p,
                                                 const SystemConfig& cfg) {
  const int k = static_cast<int>(p.size());
  const int n = cfg.num_gateways();
  std::vector<std::vector<double>> r(k, std::vector<double>(n));
  for (int t = 0; t < k; ++t) {
    for (int g = 0; g < n; ++g) {
      r[t][g] = rate_bits_per_sec(p[t], cfg.gateways[g], cfg);
    }
  }
  return r;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr double kInitTolRel = 1e-7;

void require_tau_feasible(const Allocation& alloc, const SystemConfig& cfg) {
  const double T = cfg.slot_length_s;
  for (const auto& slot : alloc.time_s) {
    double sum = 0.0;
    for (double tau : slot) {
      if (!std::isfinite(tau) || tau < -kInitTolRel * T) {
        throw InvalidInputError("initial time allocation is infeasible");
      }
      sum += tau;
    }
    if (std::abs(sum - T) > kInitTolRel * T) {
      throw InvalidInputError(
          "initial time allocation does not fill its slots");
    }
  }
}

void require_p_feasible(const std::vector<double>& p,
                        const std::vector<double>& e, double T) {
  double cum_e = 0.0;
  for (double x : e) cum_e += x;
  const double tol = kInitTolRel * std::max(cum_e, 1.0);
  cum_e = 0.0;
  double cum_spend = 0.0;
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (!std::isfinite(p[t]) || p[t] * T < -tol) {
      throw InvalidInputError("initial power vector is infeasible");
    }
    cum_e += e[t];
    cum_spend += p[t] * T;
    if (cum_spend > cum_e + tol) {
      throw InvalidInputError(
          "initial power vector violates energy causality");
    }
  }
}

}  // namespace

double allocation_utility(const Allocation& alloc, const SystemConfig& cfg) {
  return log_utility(bits_per_gateway(alloc, cfg));
}

std::vector<double> project_to_slot_simplex(const std::vector<double>& v,
                                            double total) {
  if (!(total >= 0.0) || !std::isfinite(total)) {
    throw InvalidInputError("simplex total must be finite and nonnegative");
  }
  const std::size_t n = v.size();
  if (n == 0) throw InvalidInputError("cannot project an empty vector");
  std::vector<double> u(v);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    css += u[i];
    const double cand = (css - total) / static_cast<double>(i + 1);
    if (u[i] - cand > 0.0) theta = cand;
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::max(0.0, v[i] - theta);
  return x;
}

std::vector<double> project_to_causality_polytope(
    const std::vector<double>& p, const std::vector<double>& energy_j,
    double slot_length_s, int max_cycles) {
  const int k = static_cast<int>(p.size());
  if (k == 0 || static_cast<int>(energy_j.size()) != k) {
    throw InvalidInputError("power and energy vectors must match in length");
  }
  if (!(slot_length_s > 0.0)) {
    throw InvalidInputError("slot length must be positive");
  }
  std::vector<double> b(k);  // prefix budgets in power units
  double acc = 0.0;
  for (int t = 0; t < k; ++t) {
    acc += energy_j[t];
    b[t] = acc / slot_length_s;
  }

  // Dykstra over k prefix half-spaces plus the nonnegative orthant.
  std::vector<double> x(p);
  std::vector<std::vector<double>> corr(k + 1, std::vector<double>(k, 0.0));
  const double scale = std::max({1.0, inf_norm(p), b[k - 1]});
  for (int cycle = 0; cycle < max_cycles; ++cycle) {
    double change = 0.0;
    for (int set = 0; set <= k; ++set) {
      std::vector<double> y(k);
      for (int i = 0; i < k; ++i) y[i] = x[i] + corr[set][i];
      std::vector<double> z(y);
      if (set < k) {
        double s = 0.0;
        for (int i = 0; i <= set; ++i) s += y[i];
        if (s > b[set]) {
          const double shift = (s - b[set]) / static_cast<double>(set + 1);
          for (int i = 0; i <= set; ++i) z[i] -= shift;
        }
      } else {
        for (int i = 0; i < k; ++i) z[i] = std::max(0.0, y[i]);
      }
      for (int i = 0; i < k; ++i) {
        corr[set][i] = y[i] - z[i];
        change = std::max(change, std::abs(z[i] - x[i]));
      }
      x = std::move(z);
    }
    if (change <= 1e-14 * scale) break;
  }
  return x;
}

Allocation optimize_tau_given_p(const Allocation& alloc,
                                const SystemConfig& cfg,
                                const PgOptions& options) {
  cfg.validate();
  const int k = alloc.num_slots();
  const int n = cfg.num_gateways();
  if (k == 0 || alloc.num_gateways() != n) {
    throw InvalidInputError("allocation does not match the config");
  }
  require_tau_feasible(alloc, cfg);
  const double T = cfg.slot_length_s;
  const auto rates = slot_rate_table(alloc.power_w, cfg);

  const auto unflatten = [&](const std::vector<double>& x) {
    Allocation a = alloc;
    for (int t = 0; t < k; ++t) {
      for (int g = 0; g < n; ++g) a.time_s[t][g] = x[t * n + g];
    }
    return a;
  };
  const auto objective = [&](const std::vector<double>& x) {
    std::vector<double> bits(n, 0.0);
    for (int t = 0; t < k; ++t) {
      for (int g = 0; g < n; ++g) bits[g] += x[t * n + g] * rates[t][g];
    }
    double u = 0.0;
    for (double bel : bits) {
      if (!(bel > 0.0)) return kNegInf;
      u += std::log2(bel);
    }
    return u;
  };
  const auto grad = [&](const std::vector<double>& x) {
    std::vector<double> bits(n, 0.0);
    for (int t = 0; t < k; ++t) {
      for (int g = 0; g < n; ++g) bits[g] += x[t * n + g] * rates[t][g];
    }
    std::vector<double> g_out(k * n, 0.0);
    for (int t = 0; t < k; ++t) {
      for (int g = 0; g < n; ++g) {
        g_out[t * n + g] = rates[t][g] / (bits[g] * kLn2);
      }
    }
    return g_out;
  };
  const auto proj = [&](const std::vector<double>& x) {
    std::vector<double> out(x.size());
    for (int t = 0; t < k; ++t) {
      std::vector<double> slot(x.begin() + t * n, x.begin() + (t + 1) * n);
      slot = project_to_slot_simplex(slot, T);
      std::copy(slot.begin(), slot.end(), out.begin() + t * n);
    }
    return out;
  };

  std::vector<double> x0(k * n);
  for (int t = 0; t < k; ++t) {
    for (int g = 0; g < n; ++g) x0[t * n + g] = alloc.time_s[t][g];
  }
  PgOutcome res = projected_gradient_ascent(x0, objective, grad, proj, options);
  return unflatten(res.x);
}

Allocation optimize_p_given_tau(const Allocation& alloc,
                                const EnergySeries& energies,
                                const SystemConfig& cfg,
                                const PgOptions& options) {
  cfg.validate();
  const int k = alloc.num_slots();
  const int n = cfg.num_gateways();
  if (k == 0 || alloc.num_gateways() != n || energies.size() != k) {
    throw InvalidInputError("allocation/energies do not match the config");
  }
  const double W = cfg.bandwidth_hz;
  const double noise = cfg.noise_density_w_per_hz * W;
  const std::vector<double> e = energies.energies();
  require_p_feasible(alloc.power_w, e, cfg.slot_length_s);

  const auto objective = [&](const std::vector<double>& p) {
    std::vector<double> bits(n, 0.0);
    for (int t = 0; t < k; ++t) {
      for (int g = 0; g < n; ++g) {
        if (alloc.time_s[t][g] != 0.0) {
          bits[g] += alloc.time_s[t][g] * W *
                     std::log2(1.0 + p[t] * cfg.gateways[g].gain / noise);
        }
      }
    }
    double u = 0.0;
    for (double bel : bits) {
      if (!(bel > 0.0)) return kNegInf;
      u += std::log2(bel);
    }
    return u;
  };
  const auto grad = [&](const std::vector<double>& p) {
    std::vector<double> bits(n, 0.0);
    for (int t = 0; t < k; ++t) {
      for (int g = 0; g < n; ++g) {
        if (alloc.time_s[t][g] != 0.0) {
          bits[g] += alloc.time_s[t][g] * W *
                     std::log2(1.0 + p[t] * cfg.gateways[g].gain / noise);
        }
      }
    }
    std::vector<double> g_out(k, 0.0);
    for (int t = 0; t < k; ++t) {
      double acc = 0.0;
      for (int g = 0; g < n; ++g) {
        const double tau = alloc.time_s[t][g];
        if (tau != 0.0 && bits[g] > 0.0) {
          const double gain = cfg.gateways[g].gain;
          acc += tau * W * gain /
                 ((noise + p[t] * gain) * kLn2 * bits[g] * kLn2);
        }
      }
      g_out[t] = acc;
    }
    return g_out;
  };
  const auto proj = [&](const std::vector<double>& p) {
    return project_to_causality_polytope(p, e, cfg.slot_length_s);
  };

  PgOutcome res =
      projected_gradient_ascent(alloc.power_w, objective, grad, proj, options);
  Allocation out = alloc;
  out.power_w = res.x;
  return out;
}

BcdTrace bcd_solve(const EnergySeries& energies, const SystemConfig& cfg,
                   const std::optional<Allocation>& init,
                   const BcdOptions& options) {
  cfg.validate();
  const int k = cfg.slots_per_frame;
  const int n = cfg.num_gateways();
  if (energies.size() != k) {
    throw InvalidInputError("energy series length must equal slots_per_frame");
  }

  const auto default_start = [&]() {
    Allocation a;
    a.power_w = flat_power_allocation(energies.energies(), cfg);
    a.time_s.assign(k, std::vector<double>(n, cfg.slot_length_s / n));
    return a;
  };

  Allocation alloc;
  if (init.has_value()) {
    if (init->num_slots() != k || init->num_gateways() != n) {
      throw InvalidInputError("initial allocation does not match the config");
    }
    alloc = utility_or_ninf(*init, cfg) != kNegInf ? *init : default_start();
  } else {
    alloc = default_start();
  }

  double u = utility_or_ninf(alloc, cfg);
  if (u == kNegInf) {
    throw UtilityUndefinedError(
        "block-coordinate solve cannot start: every feasible allocation of "
        "this instance leaves some gateway at zero bits");
  }

  BcdTrace trace;
  const auto violation = [&](const Allocation& a) {
    return check_feasibility(a, energies, cfg).max_relative_violation();
  };
  trace.points.push_back({0, u, violation(alloc)});

  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    alloc = optimize_tau_given_p(alloc, cfg, options.pg);
    alloc = optimize_p_given_tau(alloc, energies, cfg, options.pg);
    const double u_new = utility_or_ninf(alloc, cfg);
    trace.points.push_back({sweep, u_new, violation(alloc)});
    trace.sweeps = sweep;
    if (u_new - u < options.sweep_improvement_tol) {
      u = std::max(u, u_new);
      trace.converged = true;
      break;
    }
    u = u_new;
  }
  trace.allocation = std::move(alloc);
  trace.utility = trace.points.back().utility;
  return trace;
}

Allocation random_feasible_allocation(const EnergySeries& energies,
                                      const SystemConfig& cfg,
                                      std::uint64_t seed) {
  cfg.validate();
  const int k = cfg.slots_per_frame;
  const int n = cfg.num_gateways();
  if (energies.size() != k) {
    throw InvalidInputError("energy series length must equal slots_per_frame");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Allocation a;
  a.time_s.assign(k, std::vector<double>(n, 0.0));
  for (int t = 0; t < k; ++t) {
    double sum = 0.0;
    std::vector<double> e(n);
    for (int g = 0; g < n; ++g) {
      e[g] = -std::log(1.0 - unif(rng));  // Exp(1), Dirichlet via normalize
      sum += e[g];
    }
    for (int g = 0; g < n; ++g) {
      a.time_s[t][g] = cfg.slot_length_s * e[g] / sum;
    }
  }

  a.power_w.assign(k, 0.0);
  double spent = 0.0;
  double harvested = 0.0;
  for (int t = 0; t < k; ++t) {
    harvested += energies.entries[t].energy_j;
    const double budget = std::max(0.0, harvested - spent);
    const double frac = 0.2 + 0.75 * unif(rng);
    a.power_w[t] = frac * budget / cfg.slot_length_s;
    spent += a.power_w[t] * cfg.slot_length_s;
  }
  return a;
}

BcdTrace bcd_solve_best(const EnergySeries& energies, const SystemConfig& cfg,
                        int restarts, std::uint64_t base_seed,
                        const BcdOptions& options) {
  if (restarts < 1) throw InvalidInputError("need at least one restart");
  BcdTrace best = bcd_solve(energies, cfg, std::nullopt, options);
  for (int r = 1; r < restarts; ++r) {
    const std::uint64_t seed = splitmix64(base_seed + static_cast<std::uint64_t>(r));
    Allocation start = random_feasible_allocation(energies, cfg, seed);
    BcdTrace t = bcd_solve(energies, cfg, start, options);
    if (t.utility > best.utility) best = std::move(t);
  }
  return best;
}

void save_bcd_trace_csv(const BcdTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write trace CSV: " + path);
  out << "iteration,utility,violation\n";
  for (const auto& p : trace.points) {
    out << p.sweep << "," << fmt_double(p.utility) << ","
        << fmt_double(p.max_violation) << "\n";
  }
}

}  // namespace solarsched
