#include "expembed/pathsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>

#include "expembed/error.hpp"

namespace expembed {

namespace {

constexpr double kSnapSlack = 1e-9;

void check_step(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::InvalidArgument, "grid step must be positive");
}

}  // namespace

GridSpeed discretize_speed(const SpeedMeasure& sm, double h) {
  check_step(h);
  GridSpeed g;
  g.h = h;
  g.origin = sm.origin();
  const double x0 = sm.origin();

  auto snap = [&](double x) { return static_cast<std::int64_t>(std::llround((x - x0) / h)); };
  // first site at or beyond each bound
  std::int64_t k_hi = static_cast<std::int64_t>(std::ceil((sm.upper() - x0) / h - kSnapSlack));
  std::int64_t k_lo = static_cast<std::int64_t>(std::floor((sm.lower() - x0) / h + kSnapSlack));
  if (sm.absorbing_right()) k_hi = std::min(k_hi, snap(sm.upper()));
  if (sm.absorbing_left()) k_lo = std::max(k_lo, snap(sm.lower()));
  for (const auto& a : sm.atoms()) {
    if (!a.infinite) continue;
    const auto k = snap(a.x);
    if (a.x > x0) k_hi = std::min(k_hi, k);
    if (a.x < x0) k_lo = std::max(k_lo, k);
  }
  if (!(k_lo < 0 && 0 < k_hi)) throw Error(ErrorCode::GridTooCoarse, "no interior site around the origin");
  if (k_hi - k_lo > 50'000'000) throw Error(ErrorCode::InvalidArgument, "grid too fine");

  const auto n = static_cast<std::size_t>(k_hi - k_lo + 1);
  g.first_index = k_lo;
  g.mass.assign(n, 0.0);
  g.trap.assign(n, 0);
  g.trap.front() = 1;
  g.trap.back() = 1;
  g.start = static_cast<std::size_t>(-k_lo);

  std::map<std::int64_t, double> snapped;
  for (const auto& a : sm.atoms()) {
    if (a.infinite) continue;
    const auto k = snap(a.x);
    if (k <= k_lo || k >= k_hi) throw Error(ErrorCode::GridTooCoarse, "atom snaps onto a trap site");
    if (snapped.count(k)) throw Error(ErrorCode::GridTooCoarse, "two atoms snap to one site");
    snapped[k] = a.weight;
    g.mass[static_cast<std::size_t>(k - k_lo)] += a.weight;
  }

  if (sm.has_segments()) {
    const auto segs = sm.segments();
    std::size_t first = 0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double c = g.position(i);
      const double lo = std::max(c - 0.5 * h, sm.lower());
      const double hi = std::min(c + 0.5 * h, sm.upper());
      while (first < segs.size() && segs[first].right <= lo) ++first;
      for (std::size_t s = first; s < segs.size() && segs[s].left < hi; ++s) {
        const double l = std::max(lo, segs[s].left);
        const double r = std::min(hi, segs[s].right);
        if (l < r) g.mass[i] += sm.density(0.5 * (l + r)) * (r - l);
      }
    }
  }
  return g;
}

double default_grid_step(const SpeedMeasure& sm) {
  std::vector<double> pts{sm.origin(), sm.lower(), sm.upper()};
  for (const auto& a : sm.atoms()) pts.push_back(a.x);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double gap = sm.upper() - sm.lower();
  for (std::size_t i = 1; i < pts.size(); ++i) gap = std::min(gap, pts[i] - pts[i - 1]);
  double h = gap / 100.0;
  if (sm.has_segments()) h = std::min(h, (sm.upper() - sm.lower()) / 200.0);
  return h;
}

// ---------------------------------------------------------------------------

double sigma_coefficient(const PotentialProfile& profile, const Measure& mu, double x) {
  if (!(x > mu.lower().value && x < mu.upper().value))
    throw Error(ErrorCode::OutOfInterval, "x must lie strictly inside the support");
  if (mu.atom_mass(x) > 0.0) throw Error(ErrorCode::NoDensityAt, "x carries an atom");
  const double f = mu.density(x);
  if (!(f > 0.0)) throw Error(ErrorCode::NoDensityAt, "no density at x");
  return std::sqrt(profile.excess_potential(x) / f);
}

SigmaField::SigmaField(const PotentialProfile& profile) {
  const Measure& mu = profile.measure();
  lower_ = mu.lower().value;
  upper_ = mu.upper().value;
  origin_ = mu.mean();
  for (const auto& a : mu.atoms())
    if (a.x > lower_ && a.x < upper_) throw Error(ErrorCode::InvalidArgument, "SDE route needs no interior atoms");
  const auto segs = mu.segments();
  if (segs.empty() || segs.front().left != lower_ || segs.back().right != upper_)
    throw Error(ErrorCode::InvalidArgument, "SDE route needs density on the whole support");
  for (std::size_t i = 1; i < segs.size(); ++i)
    if (segs[i].left != segs[i - 1].right) throw Error(ErrorCode::InvalidArgument, "SDE route needs a gap-free density");

  for (const auto& s : segs) {
    std::vector<double> cuts{s.left};
    if (origin_ > s.left && origin_ < s.right) cuts.push_back(origin_);
    cuts.push_back(s.right);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double l = cuts[i];
      pieces_.push_back({l, cuts[i + 1], s.density, profile.excess_potential(l), profile.excess_slope_right(l)});
    }
  }
}

double SigmaField::operator()(double x, std::size_t& piece) const {
  while (piece > 0 && x < pieces_[piece].left) --piece;
  while (piece + 1 < pieces_.size() && x >= pieces_[piece].right) ++piece;
  const Piece& p = pieces_[piece];
  const double d = x - p.left;
  const double U = p.u_left + p.slope_left * d + p.density * d * d;
  return std::sqrt(std::max(U, 0.0) / p.density);
}

double simulate_sde(const SigmaField& field, double dt, rng::Engine& eng, double rate, std::uint64_t step_cap) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const double T = rng::exponential(eng, rate);
  rng::Gaussian normal(eng);
  double x = field.origin();
  double t = 0.0;
  std::size_t piece = 0;
  const double sqrt_dt = std::sqrt(dt);
  std::uint64_t steps = 0;
  while (t < T) {
    if (++steps > step_cap) throw Error(ErrorCode::StepCapExceeded, "SDE step cap");
    const double step = std::min(dt, T - t);
    const double root = step == dt ? sqrt_dt : std::sqrt(step);
    x += field(x, piece) * root * normal.next();
    t += step;
    if (x <= field.lower()) return field.lower();
    if (x >= field.upper()) return field.upper();
  }
  return x;
}

std::vector<double> simulate_sde_batch(const SigmaField& field, double dt, std::size_t paths, std::uint64_t seed,
                                       Execution exec) {
  std::vector<double> out(paths);
  for_each_path(paths, exec, [&](std::size_t k) {
    auto eng = rng::make_engine(seed, rng::Stream::Sde, k);
    out[k] = simulate_sde(field, dt, eng);
  });
  return out;
}

// ---------------------------------------------------------------------------

double expected_local_time(double x, double y, double a, double b) {
  const double lo = std::min(x, y);
  const double hi = std::max(x, y);
  if (!(a < lo && hi < b)) throw Error(ErrorCode::OutOfRange, "need a < min(x,y) <= max(x,y) < b");
  return 2.0 * (lo - a) * (b - hi) / (b - a);
}

double local_time_at_exit(double x, double y, double a, double b, double h, rng::Engine& eng,
                          std::uint64_t step_cap) {
  check_step(h);
  const auto nb = std::llround((b - a) / h);
  const auto nx = std::llround((x - a) / h);
  const auto ny = std::llround((y - a) / h);
  if (!(0 < nx && nx < nb && 0 < ny && ny < nb)) throw Error(ErrorCode::OutOfRange, "x, y must be interior grid points");
  rng::CoinFlips coin(eng);
  long long pos = nx;
  std::uint64_t visits = 0, steps = 0;
  while (pos > 0 && pos < nb) {
    if (++steps > step_cap) throw Error(ErrorCode::StepCapExceeded, "local time walk step cap");
    if (pos == ny) ++visits;
    pos += coin.next() ? 1 : -1;
  }
  return h * static_cast<double>(visits);
}

std::vector<double> local_time_batch(double x, double y, double a, double b, double h, std::size_t paths,
                                     std::uint64_t seed, Execution exec) {
  std::vector<double> out(paths);
  for_each_path(paths, exec, [&](std::size_t k) {
    auto eng = rng::make_engine(seed, rng::Stream::LocalTime, k);
    out[k] = local_time_at_exit(x, y, a, b, h, eng);
  });
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> simulate_gap_diffusion(const GridSpeed& grid, std::span<const double> times, rng::Engine& eng,
                                           std::uint64_t step_cap) {
  if (!std::is_sorted(times.begin(), times.end())) throw Error(ErrorCode::InvalidArgument, "times must be sorted");
  std::vector<double> out;
  out.reserve(times.size());
  rng::CoinFlips coin(eng);
  std::size_t site = grid.start;
  double phi = 0.0;
  std::uint64_t steps = 0;
  for (double t : times) {
    for (;;) {
      if (grid.trap[site]) break;
      const double inc = grid.h * grid.mass[site];
      if (phi + inc > t) break;
      phi += inc;
      if (++steps > step_cap) throw Error(ErrorCode::StepCapExceeded, "time-change walk step cap");
      site = coin.next() ? site + 1 : site - 1;
    }
    out.push_back(grid.position(site));
  }
  return out;
}

std::vector<double> simulate_gap_diffusion(const SpeedMeasure& sm, std::span<const double> times, double h,
                                           std::uint64_t seed) {
  const GridSpeed grid = discretize_speed(sm, h);
  auto eng = rng::make_engine(seed, rng::Stream::TimeChange, 0);
  return simulate_gap_diffusion(grid, times, eng);
}

double gap_diffusion_at_exp(const GridSpeed& grid, rng::Engine& eng, double rate, std::uint64_t step_cap) {
  const double T = rng::exponential(eng, rate);
  return simulate_gap_diffusion(grid, std::span<const double>(&T, 1), eng, step_cap).front();
}

std::vector<double> gap_diffusion_batch(const GridSpeed& grid, std::size_t paths, std::uint64_t seed, Execution exec,
                                        double rate) {
  std::vector<double> out(paths);
  for_each_path(paths, exec, [&](std::size_t k) {
    auto eng = rng::make_engine(seed, rng::Stream::TimeChange, k);
    out[k] = gap_diffusion_at_exp(grid, eng, rate);
  });
  return out;
}

double holding_time_at_start(const GridSpeed& grid, rng::Engine& eng, std::uint64_t step_cap) {
  rng::CoinFlips coin(eng);
  const std::size_t start = grid.start;
  if (grid.trap[start]) return std::numeric_limits<double>::infinity();
  std::size_t site = start;
  double phi = 0.0;
  std::uint64_t steps = 0;
  for (;;) {
    if (site != start && (grid.trap[site] || grid.mass[site] > 0.0)) return phi;
    phi += grid.h * grid.mass[site];
    if (++steps > step_cap) throw Error(ErrorCode::StepCapExceeded, "holding walk step cap");
    site = coin.next() ? site + 1 : site - 1;
  }
}

std::vector<double> holding_time_batch(const GridSpeed& grid, std::size_t paths, std::uint64_t seed,
                                       Execution exec) {
  std::vector<double> out(paths);
  for_each_path(paths, exec, [&](std::size_t k) {
    auto eng = rng::make_engine(seed, rng::Stream::Holding, k);
    out[k] = holding_time_at_start(grid, eng);
  });
  return out;
}

TimeChangeTrace trace_time_change(const GridSpeed& grid, std::size_t steps, rng::Engine& eng) {
  TimeChangeTrace tr;
  rng::CoinFlips coin(eng);
  std::size_t site = grid.start;
  double phi = 0.0;
  for (std::size_t n = 0; n < steps && !grid.trap[site]; ++n) {
    tr.phi.push_back(phi);
    tr.site.push_back(grid.position(site));
    tr.increment.push_back(grid.h * grid.mass[site]);
    phi += tr.increment.back();
    site = coin.next() ? site + 1 : site - 1;
  }
  return tr;
}

std::size_t time_change_inverse(const TimeChangeTrace& trace, double t) {
  const std::size_t n = trace.phi.size();
  for (std::size_t i = 0; i < n; ++i)
    if (trace.phi[i] + trace.increment[i] > t) return i;
  return n;
}

// ---------------------------------------------------------------------------

PoissonStop poisson_stop(const GridSpeed& grid, rng::Engine& eng, std::uint64_t step_cap) {
  const std::size_t n = grid.size();
  std::vector<double> threshold(n, -1.0);
  std::vector<std::uint32_t> visits(n, 0);
  rng::CoinFlips coin(eng);
  std::size_t site = grid.start;
  double phi = 0.0;
  std::uint64_t steps = 0;
  for (;;) {
    if (grid.trap[site]) {
      PoissonStop out{grid.position(site), 0.0, phi, true};
      out.phi = phi + rng::exponential(eng, 1.0);
      return out;
    }
    const double m = grid.mass[site];
    if (m > 0.0) {
      if (threshold[site] < 0.0) threshold[site] = rng::exponential(eng, m);
      const double before = grid.h * static_cast<double>(visits[site]);
      if (before + grid.h > threshold[site]) {
        phi += (threshold[site] - before) * m;
        return PoissonStop{grid.position(site), phi, phi, false};
      }
      phi += grid.h * m;
      ++visits[site];
    }
    if (++steps > step_cap) throw Error(ErrorCode::StepCapExceeded, "Poisson-stop walk step cap");
    site = coin.next() ? site + 1 : site - 1;
  }
}

std::vector<PoissonStop> poisson_stop_batch(const GridSpeed& grid, std::size_t paths, std::uint64_t seed,
                                            Execution exec) {
  std::vector<PoissonStop> out(paths);
  for_each_path(paths, exec, [&](std::size_t k) {
    auto eng = rng::make_engine(seed, rng::Stream::Poisson, k);
    out[k] = poisson_stop(grid, eng);
  });
  return out;
}

// ---------------------------------------------------------------------------

void write_stop_csv(std::ostream& os, const std::vector<PoissonStop>& stops) {
  os << "path_id,stop_position,phi_at_stop\n";
  char buf[128];
  for (std::size_t i = 0; i < stops.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, stops[i].position, stops[i].phi);
    os << buf;
  }
}

void write_histogram_csv(std::ostream& os, const std::vector<double>& samples, const Measure& target,
                         std::size_t bins) {
  os << "bin_left,bin_right,empirical_mass,target_mass\n";
  if (bins == 0) return;
  const double lo = target.lower().value;
  const double hi = target.upper().value;
  const double w = (hi - lo) / static_cast<double>(bins);
  std::vector<double> counts(bins, 0.0);
  for (double x : samples) {
    if (x < lo || x > hi) continue;
    auto b = static_cast<std::size_t>(std::ceil((x - lo) / w)) ;
    b = b == 0 ? 0 : std::min(b - 1, bins - 1);
    counts[b] += 1.0;
  }
  const double n = samples.empty() ? 1.0 : static_cast<double>(samples.size());
  char buf[160];
  for (std::size_t b = 0; b < bins; ++b) {
    const double l = lo + w * static_cast<double>(b);
    const double r = b + 1 == bins ? hi : lo + w * static_cast<double>(b + 1);
    const double tm = target.cdf(r) - (b == 0 ? target.cdf_left(l) : target.cdf(l));
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", l, r, counts[b] / n, tm);
    os << buf;
  }
}

}  // namespace expembed
