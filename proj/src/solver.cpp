#include "homog/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "homog/errors.hpp"
#include "homog/quadrature.hpp"

namespace homog {

std::vector<double> laplacian_dirichlet(const Grid1D& grid, std::span<const double> v) {
  const std::size_t n = v.size();
  const double inv = 1.0 / (grid.dx() * grid.dx());
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i == 0 ? -v[0] : v[i - 1];
    const double right = i + 1 == n ? -v[n - 1] : v[i + 1];
    out[i] = (left - 2.0 * v[i] + right) * inv;
  }
  return out;
}

Field laplacian_dirichlet(const Field& v) {
  return Field(v.grid, laplacian_dirichlet(v.grid, v.values), Role::Pressure);
}

std::vector<double> solve_tridiagonal(std::span<const double> sub,
                                      std::span<const double> diag,
                                      std::span<const double> super,
                                      std::span<const double> rhs) {
  const std::size_t n = diag.size();
  std::vector<double> c(n), d(n), x(n);
  double pivot = diag[0];
  if (std::abs(pivot) < 1e-300) throw SingularSystem("zero pivot in row 0");
  c[0] = n > 1 ? super[0] / pivot : 0.0;
  d[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = diag[i] - sub[i] * c[i - 1];
    if (std::abs(pivot) < 1e-300) {
      std::ostringstream msg;
      msg << "zero pivot in row " << i;
      throw SingularSystem(msg.str());
    }
    c[i] = i + 1 < n ? super[i] / pivot : 0.0;
    d[i] = (rhs[i] - sub[i] * d[i - 1]) / pivot;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

namespace {

struct System {
  const CellFlux& flux;
  std::span<const double> un;
  double dt, sigma, inv_dx2;
  std::size_t n;

  double w(std::size_t i, double u) const { return flux.w(i, u, sigma); }
  double coupling(std::size_t i) const { return (i == 0 || i + 1 == n) ? 3.0 : 2.0; }
  // n == 1 cannot happen (N >= 8); the end rows carry the ghost reflection.

  std::vector<double> residual(const std::vector<double>& u, std::vector<double>& wv) const {
    for (std::size_t i = 0; i < n; ++i) wv[i] = w(i, u[i]);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double left = i == 0 ? -wv[0] : wv[i - 1];
      const double right = i + 1 == n ? -wv[n - 1] : wv[i + 1];
      r[i] = u[i] - un[i] - dt * inv_dx2 * (left - 2.0 * wv[i] + right);
    }
    return r;
  }

  // Point of the graph of w_i with u + w_i(u) = s. The map has slope >= 1,
  // so the root lies within |residual| of the guess.
  double u_of_s(std::size_t i, double s, double guess) const {
    double x = guess;
    double p = x + w(i, x) - s;
    double lo = x - std::abs(p), hi = x + std::abs(p);
    for (int it = 0; it < 100 && std::abs(p) > 1e-15 * (1.0 + std::abs(s)); ++it) {
      if (p > 0.0) hi = x; else lo = x;
      double next = x - p / (1.0 + std::max(flux.df(i, x) + sigma, 0.0));
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (next == x) break;
      x = next;
      p = x + w(i, x) - s;
    }
    return x;
  }

  // One Gauss-Seidel pass: each cell equation is strictly increasing in its
  // own unknown with slope >= 1, so the scalar root is bracketed by the
  // current residual.
  void sweep(std::vector<double>& u, std::vector<double>& wv, bool forward) const {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = forward ? k : n - 1 - k;
      const double c = coupling(i) * dt * inv_dx2;
      const double neighbours =
          dt * inv_dx2 * ((i > 0 ? wv[i - 1] : 0.0) + (i + 1 < n ? wv[i + 1] : 0.0));
      const auto phi = [&](double x) { return x + c * w(i, x) - un[i] - neighbours; };
      double x = u[i];
      double p = phi(x);
      double lo = x - std::abs(p), hi = x + std::abs(p);
      for (int it = 0; it < 100 && std::abs(p) > 1e-15 * (1.0 + std::abs(x)); ++it) {
        if (p > 0.0) hi = x; else lo = x;
        const double slope = 1.0 + c * std::max(flux.df(i, x) + sigma, 0.0);
        double next = x - p / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == x) break;
        x = next;
        p = phi(x);
      }
      u[i] = x;
      wv[i] = w(i, x);
    }
  }
};

double inf_norm(const std::vector<double>& r) {
  double m = 0.0;
  for (double x : r) m = std::max(m, std::abs(x));
  return m;
}

double two_norm(const std::vector<double>& r) {
  double s = 0.0;
  for (double x : r) s += x * x;
  return std::sqrt(s);
}

}  // namespace

std::vector<double> step_implicit(const CellFlux& flux, std::span<const double> un,
                                  double dt, double sigma, const StepOptions& opts,
                                  StepStats* stats) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_implicit: dt must be positive");
  if (!(sigma >= 0.0)) throw std::invalid_argument("step_implicit: sigma must be >= 0");
  const std::size_t n = un.size();
  const double dx = flux.grid().dx();
  const System sys{flux, un, dt, sigma, 1.0 / (dx * dx), n};

  StepStats local;
  StepStats& st = stats ? *stats : local;
  st = StepStats{};
  std::vector<double> u(un.begin(), un.end()), wv(n);
  std::vector<double> r = sys.residual(u, wv);
  double res = inf_norm(r);
  st.history.push_back(res);
  // Newton runs on the graph parameter s = u + w(u): u and w are both
  // 1-Lipschitz in s, on flat and on steep pieces of the law alike.
  std::vector<double> s(n), du(n), dw(n);
  std::vector<double> sub(n), diag(n), super(n), rhs(n), strial(n), trial(n), wtrial(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = u[i] + wv[i];
  const double k = dt * sys.inv_dx2;

  while (res >= opts.tol) {
    if (st.newton_iterations >= opts.max_iterations) {
      std::ostringstream msg;
      msg << "implicit step did not converge: residual " << res << " after "
          << st.newton_iterations << " Newton iterations and " << st.sweeps << " sweeps";
      throw NonlinearSolveFailure(msg.str(), st.history);
    }
    ++st.newton_iterations;
    for (std::size_t i = 0; i < n; ++i) {
      const double slope = std::max(flux.df(i, u[i]) + sigma, 0.0);
      du[i] = 1.0 / (1.0 + slope);
      dw[i] = slope / (1.0 + slope);
    }
    for (std::size_t i = 0; i < n; ++i) {
      diag[i] = du[i] + k * sys.coupling(i) * dw[i];
      sub[i] = i > 0 ? -k * dw[i - 1] : 0.0;
      super[i] = i + 1 < n ? -k * dw[i + 1] : 0.0;
      rhs[i] = -r[i];
    }
    std::vector<double> delta;
    try {
      delta = solve_tridiagonal(sub, diag, super, rhs);
    } catch (const SingularSystem& e) {
      if (sigma == 0.0) throw NeedsRegularization(e.what());
      throw;
    }

    const double merit = two_norm(r);
    double lambda = 1.0;
    bool accepted = false;
    std::vector<double> rt;
    for (int ls = 0; ls < 12; ++ls, lambda *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) {
        strial[i] = s[i] + lambda * delta[i];
        trial[i] = sys.u_of_s(i, strial[i], u[i]);
      }
      rt = sys.residual(trial, wtrial);
      if (two_norm(rt) <= (1.0 - 1e-4 * lambda) * merit) {
        accepted = true;
        break;
      }
    }
    if (accepted) {
      u.swap(trial);
      r.swap(rt);
      wv.swap(wtrial);
    } else {
      for (int sweep = 0; sweep < opts.sweeps_per_fallback; ++sweep) {
        sys.sweep(u, wv, sweep % 2 == 0);
        ++st.sweeps;
      }
      r = sys.residual(u, wv);
    }
    for (std::size_t i = 0; i < n; ++i) s[i] = u[i] + wv[i];
    res = inf_norm(r);
    st.history.push_back(res);
  }
  st.residual = res;
  return u;
}

Field step_implicit(const CellFlux& flux, const Field& un, double dt, double sigma,
                    const StepOptions& opts, StepStats* stats) {
  return Field(un.grid, step_implicit(flux, std::span<const double>(un.values), dt, sigma,
                                      opts, stats));
}

Trajectory evolve(const CellFlux& flux, std::span<const double> u0, double sigma,
                  const SolveOptions& opts) {
  if (!(opts.T > 0.0) || !(opts.dt > 0.0))
    throw std::invalid_argument("evolve: T and dt must be positive");
  if (u0.size() != flux.grid().N) throw std::invalid_argument("evolve: size mismatch");
  const std::size_t steps =
      static_cast<std::size_t>(std::max(1.0, std::ceil(opts.T / opts.dt - 1e-9)));
  const double dt = opts.T / static_cast<double>(steps);
  std::vector<bool> keep(steps + 1, opts.store_times.empty());
  keep[0] = keep[steps] = true;
  for (double t : opts.store_times) {
    const double s = std::round(t / dt);
    if (s >= 0.0 && s <= static_cast<double>(steps)) keep[static_cast<std::size_t>(s)] = true;
  }

  Trajectory traj;
  traj.grid = flux.grid();
  traj.dt = dt;
  traj.sigma = sigma;
  traj.flux_id = flux.id();
  traj.times.push_back(0.0);
  traj.u.emplace_back(u0.begin(), u0.end());
  std::vector<double> u(u0.begin(), u0.end());
  for (std::size_t s = 1; s <= steps; ++s) {
    StepStats st;
    u = step_implicit(flux, u, dt, sigma, opts.step, &st);
    traj.newton_iterations.push_back(st.newton_iterations);
    traj.residuals.push_back(st.residual);
    if (keep[s]) {
      traj.times.push_back(static_cast<double>(s) * dt);
      traj.u.push_back(u);
    }
  }
  return traj;
}

Trajectory solve(const CellFlux& flux, std::span<const double> u0,
                 const SolveOptions& opts) {
  for (double x : u0)
    if (!std::isfinite(x)) throw std::invalid_argument("solve: non-finite initial data");
  if (flux.type() == 1) return evolve(flux, u0, 0.0, opts);

  const std::vector<double>& sig = opts.sigma_schedule;
  if (sig.size() < 3)
    throw std::invalid_argument("solve: a type-2 flux needs at least three sigma levels");
  for (std::size_t k = 0; k < sig.size(); ++k)
    if (!(sig[k] > 0.0) || (k > 0 && !(sig[k] < sig[k - 1])))
      throw std::invalid_argument("solve: sigma schedule must be positive and decreasing");

  std::vector<Trajectory> runs;
  for (double s : sig) runs.push_back(evolve(flux, u0, s, opts));
  CauchyRecord rec;
  rec.sigmas = sig;
  for (std::size_t k = 0; k + 1 < runs.size(); ++k)
    rec.distances.push_back(
        weighted_l1_distance(flux.grid(), runs[k].final(), runs[k + 1].final()));
  double worst_required = 0.0;
  for (std::size_t k = 0; k + 1 < rec.distances.size(); ++k) {
    const double ratio = rec.distances[k] / std::max(rec.distances[k + 1], 1e-300);
    const double required = 0.5 * opts.cauchy_factor * (sig[k] - sig[k + 1]) /
                            (sig[k + 1] - sig[k + 2]);
    worst_required = std::max(worst_required, required);
    rec.ratios.push_back(ratio);
    // Distances at round-off level carry no trend.
    const bool negligible = rec.distances[k] < 1e-12;
    if (!negligible && ratio < required) rec.passed = false;
  }
  rec.required_ratio = worst_required;
  if (!rec.passed) {
    std::ostringstream msg;
    msg << "sigma-continuation is not contracting; distances";
    for (double d : rec.distances) msg << ' ' << d;
    throw SigmaCauchyFailure(msg.str(), rec.distances);
  }
  Trajectory out = std::move(runs.back());
  out.cauchy = std::move(rec);
  return out;
}

Field stationary_profile(const CellFlux& flux, double alpha) {
  const Grid1D& grid = flux.grid();
  std::vector<double> u(grid.N);
  for (std::size_t i = 0; i < grid.N; ++i) u[i] = flux.g(i, alpha);
  return Field(grid, std::move(u));
}

double weighted_l1_distance(const Grid1D& grid, std::span<const double> u1,
                            std::span<const double> u2) {
  if (u1.size() != grid.N || u2.size() != grid.N)
    throw std::invalid_argument("weighted_l1_distance: size mismatch");
  const std::vector<double> xi = grid.eigen_weight();
  std::vector<double> terms(grid.N);
  for (std::size_t i = 0; i < grid.N; ++i) terms[i] = std::abs(u1[i] - u2[i]) * xi[i];
  return quad::pairwise_sum(terms) * grid.dx();
}

double weighted_l1_distance(const Field& u1, const Field& u2) {
  if (!(u1.grid == u2.grid)) throw std::invalid_argument("weighted_l1_distance: grids differ");
  return weighted_l1_distance(u1.grid, u1.values, u2.values);
}

double l1_distance(const Grid1D& grid, std::span<const double> u1,
                   std::span<const double> u2) {
  std::vector<double> terms(u1.size());
  for (std::size_t i = 0; i < u1.size(); ++i) terms[i] = std::abs(u1[i] - u2[i]);
  return quad::pairwise_sum(terms) * grid.dx();
}

double boundary_flux(const Grid1D& grid, std::span<const double> w) {
  return -2.0 * (w.front() + w.back()) / grid.dx();
}

std::size_t comparison_check(const CellFlux& flux, std::span<const double> u01,
                             std::span<const double> u02, double T, double dt,
                             double sigma, const StepOptions& opts) {
  for (std::size_t i = 0; i < u01.size(); ++i)
    if (u01[i] > u02[i]) throw std::invalid_argument("comparison_check: data not ordered");
  const std::size_t steps =
      static_cast<std::size_t>(std::max(1.0, std::ceil(T / dt - 1e-9)));
  const double h = T / static_cast<double>(steps);
  std::vector<double> a(u01.begin(), u01.end()), b(u02.begin(), u02.end());
  std::size_t violations = 0;
  for (std::size_t s = 0; s < steps; ++s) {
    a = step_implicit(flux, a, h, sigma, opts);
    b = step_implicit(flux, b, h, sigma, opts);
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] > b[i] + 1e-10) ++violations;
  }
  return violations;
}

EntropyResidual kruzhkov_residual(const Trajectory& traj, const CellFlux& flux, double k,
                                  const SpaceTimeFn& phi, double C) {
  const Grid1D& grid = traj.grid;
  const std::size_t n = grid.N;
  const double dx = grid.dx();
  const double sigma = traj.sigma;
  for (std::size_t m = 1; m < traj.levels(); ++m)
    if (std::abs(traj.times[m] - traj.times[m - 1] - traj.dt) > 1e-9 * traj.dt)
      throw std::invalid_argument("kruzhkov_residual: every time step must be stored");
  const std::vector<double> xs = grid.centers();
  std::vector<double> wk(n);
  for (std::size_t i = 0; i < n; ++i) wk[i] = flux.w(i, k, sigma);
  const std::vector<double> lwk = laplacian_dirichlet(grid, wk);

  std::vector<double> level_terms;
  std::vector<double> phi_now(n), phi_next(n), W(n), terms(n);
  for (std::size_t i = 0; i < n; ++i) phi_now[i] = phi(xs[i], traj.times[0]);
  for (std::size_t m = 0; m + 1 < traj.levels(); ++m) {
    const std::vector<double>& u = traj.u[m];
    const std::vector<double>& un = traj.u[m + 1];
    for (std::size_t i = 0; i < n; ++i) {
      phi_next[i] = phi(xs[i], traj.times[m + 1]);
      W[i] = flux.w(i, un[i], sigma) - wk[i];
    }
    const std::vector<double> lphi = laplacian_dirichlet(grid, phi_next);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = un[i] > k ? 1.0 : (un[i] < k ? -1.0 : 0.0);
      terms[i] = std::abs(u[i] - k) * (phi_next[i] - phi_now[i]) +
                 traj.dt * (std::abs(W[i]) * lphi[i] + s * lwk[i] * phi_next[i]);
    }
    level_terms.push_back(quad::pairwise_sum(terms) * dx);
    phi_now.swap(phi_next);
  }
  return {quad::pairwise_sum(level_terms), C * (dx + traj.dt)};
}

double translation_modulus(const Field& u, std::size_t m) {
  if (m == 0) throw std::invalid_argument("translation_modulus: shift must be >= 1");
  const std::size_t n = u.size();
  const std::vector<double> xi = u.grid.eigen_weight();
  std::vector<double> terms;
  for (std::size_t i = 0; i + m < n; ++i) terms.push_back(std::abs(u[i + m] - u[i]) * xi[i]);
  return quad::pairwise_sum(terms) * u.grid.dx();
}

double time_modulus(const Trajectory& traj, std::size_t lag) {
  if (lag == 0) throw std::invalid_argument("time_modulus: lag must be >= 1");
  double worst = 0.0;
  for (std::size_t m = 0; m + lag < traj.levels(); ++m)
    worst = std::max(worst, weighted_l1_distance(traj.grid, traj.u[m + lag], traj.u[m]));
  return worst;
}

std::string trajectory_csv(const Trajectory& traj, const CellFlux& flux) {
  std::ostringstream out;
  out.precision(17);
  out << "t,x,u,v\n";
  for (std::size_t m = 0; m < traj.levels(); ++m) {
    const std::vector<double> v = flux.pressure(traj.u[m], traj.sigma);
    for (std::size_t i = 0; i < traj.grid.N; ++i)
      out << traj.times[m] << ',' << traj.grid.x(i) << ',' << traj.u[m][i] << ',' << v[i]
          << '\n';
  }
  return out.str();
}

}  // namespace homog
