#include "mobius_mono/quadrature.hpp"

#include <Eigen/LU>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numbers>
#include <string>
#include <thread>

namespace mobius_mono {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct Cell {
  ParamVec lo;
  ParamVec hi;
  int depth;

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const { return (hi - lo).prod(); }
};

std::vector<Cell> split(const Cell& c) {
  const int k = c.dim();
  const ParamVec mid = 0.5 * (c.lo + c.hi);
  std::vector<Cell> out;
  out.reserve(std::size_t{1} << k);
  for (int mask = 0; mask < (1 << k); ++mask) {
    Cell child{c.lo, c.hi, c.depth + 1};
    for (int d = 0; d < k; ++d) {
      if ((mask >> d) & 1) {
        child.lo(d) = mid(d);
      } else {
        child.hi(d) = mid(d);
      }
    }
    out.push_back(std::move(child));
  }
  return out;
}

std::vector<Cell> initial_cells(const ParamBox& box, int depth) {
  std::vector<Cell> cells{Cell{box.lo, box.hi, 0}};
  for (int d = 0; d < depth; ++d) {
    std::vector<Cell> next;
    for (const auto& c : cells) {
      auto children = split(c);
      next.insert(next.end(), children.begin(), children.end());
    }
    cells = std::move(next);
  }
  return cells;
}

bool near_point(const Cell& c, const ParamVec& p, double radius) {
  double d2 = 0.0;
  for (int i = 0; i < c.dim(); ++i) {
    const double v = std::clamp(p(i), c.lo(i), c.hi(i)) - p(i);
    d2 += v * v;
  }
  return d2 <= radius * radius;
}

bool contains_point(const Cell& c, const ParamVec& p) {
  for (int i = 0; i < c.dim(); ++i) {
    if (p(i) < c.lo(i) || p(i) > c.hi(i)) return false;
  }
  return true;
}

struct Constraint {
  double level;
  bool below;  // satisfied iff g < level, otherwise iff g >= level

  bool satisfied(double g) const { return below ? g < level : g >= level; }
};

std::vector<Constraint> constraints_of(const RegionSpec& region) {
  switch (region.kind) {
    case RegionSpec::Kind::Whole: return {};
    case RegionSpec::Kind::Sublevel: return {{region.s_hi, true}};
    case RegionSpec::Kind::Band: return {{region.s_hi, true}, {region.s_lo, false}};
  }
  return {};
}

bool all_satisfied(const std::vector<Constraint>& cs, double g) {
  return std::all_of(cs.begin(), cs.end(), [g](const Constraint& c) { return c.satisfied(g); });
}

enum class LevelStatus { AllBelow, AllAbove, Ambiguous };

// Range estimate of G over the cell from a 3^k sample grid widened by a
// Lipschitz margin built from the sampled differences.
class RangeEstimate {
 public:
  template <typename G>
  RangeEstimate(const Cell& c, const G& g) {
    const int k = c.dim();
    int count = 1;
    for (int d = 0; d < k; ++d) count *= 3;
    std::vector<double> values(static_cast<std::size_t>(count));
    ParamVec u(k);
    for (int idx = 0; idx < count; ++idx) {
      int rem = idx;
      for (int d = 0; d < k; ++d) {
        u(d) = c.lo(d) + 0.5 * (rem % 3) * (c.hi(d) - c.lo(d));
        rem /= 3;
      }
      values[static_cast<std::size_t>(idx)] = g(u);
    }
    min_ = *std::min_element(values.begin(), values.end());
    max_ = *std::max_element(values.begin(), values.end());
    double margin2 = 0.0;
    int stride = 1;
    for (int d = 0; d < k; ++d) {
      const double half = 0.5 * (c.hi(d) - c.lo(d));
      double slope = 0.0;
      for (int idx = 0; idx < count; ++idx) {
        if ((idx / stride) % 3 == 2) continue;
        const double diff = values[static_cast<std::size_t>(idx + stride)] -
                            values[static_cast<std::size_t>(idx)];
        slope = std::max(slope, std::abs(diff) / half);
      }
      const double m = slope * 0.5 * half;  // every point is within half/2 of a sample
      margin2 += m * m;
      stride *= 3;
    }
    margin_ = 2.0 * std::sqrt(margin2);
    finite_ = std::isfinite(min_) && std::isfinite(max_) && std::isfinite(margin_);
  }

  LevelStatus status(double level) const {
    if (!finite_) return LevelStatus::Ambiguous;
    if (max_ + margin_ < level) return LevelStatus::AllBelow;
    if (min_ - margin_ > level) return LevelStatus::AllAbove;
    return LevelStatus::Ambiguous;
  }

 private:
  double min_ = 0.0;
  double max_ = 0.0;
  double margin_ = 0.0;
  bool finite_ = true;
};

struct RuleResult {
  enum class Kind { Zero, Value, Unresolved };
  Kind kind = Kind::Zero;
  double value = 0.0;
  double abs = 0.0;
  // Rule-internal error, for rules whose nodes can coincide with a child's.
  double err = 0.0;

  static RuleResult zero() { return {}; }
  static RuleResult unresolved() { return {Kind::Unresolved, 0.0, 0.0, 0.0}; }
  static RuleResult of(double v, double a, double e = 0.0) { return {Kind::Value, v, a, e}; }
};

struct Accumulator {
  CompensatedSum value;
  double error = 0.0;
  std::size_t cells = 0;
  bool depth_hit = false;
};

double rounding_allowance(double abs_sum) { return 16.0 * kEps * abs_sum; }

template <typename F>
void parallel_for(std::size_t count, unsigned workers, const F& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  std::vector<std::exception_ptr> errors(count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Bracketed root of fn on [a, b] given endpoint values of opposite sign.
template <typename Fn>
double bracketed_root(const Fn& fn, double a, double b, double fa, double fb) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  std::uintmax_t iterations = 100;
  const auto bracket = boost::math::tools::toms748_solve(
      fn, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(50), iterations);
  return 0.5 * (bracket.first + bracket.second);
}

// All sign changes of fn on [a, b] detected on `pieces` equal subintervals.
template <typename Fn>
void collect_roots(const Fn& fn, double a, double b, int pieces, std::vector<double>& out) {
  double x0 = a;
  double f0 = fn(x0);
  for (int i = 1; i <= pieces; ++i) {
    const double x1 = a + (b - a) * i / pieces;
    const double f1 = fn(x1);
    if (std::isfinite(f0) && std::isfinite(f1) && ((f0 < 0.0) != (f1 < 0.0))) {
      out.push_back(bracketed_root(fn, x0, x1, f0, f1));
    }
    x0 = x1;
    f0 = f1;
  }
}

void sort_unique(std::vector<double>& v, double span) {
  std::sort(v.begin(), v.end());
  const double gap = 1e-14 * span;
  v.erase(std::unique(v.begin(), v.end(), [gap](double x, double y) { return y - x <= gap; }),
          v.end());
}

// Shared machinery for one integration run.
class CellIntegrator {
 public:
  CellIntegrator(const ParametricPatch& patch, const Integrand& integrand,
                 const QuadratureOptions& options)
      : patch_(patch),
        integrand_(integrand),
        options_(options),
        gauss_(gauss_legendre(options.gauss_points)) {}

  double weighted_integrand(const ParamVec& u) const {
    const SurfaceSample s = sample(patch_, u);
    const double v = integrand_(s) * s.area_element;
    if (!std::isfinite(v)) {
      std::string where;
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        where += (i ? ", " : "") + std::to_string(u(i));
      }
      throw Error(ErrorCode::NonFiniteIntegrand, "integrand is not finite at parameter (" + where + ")");
    }
    return v;
  }

  // Tensor Gauss rule over a full cell.
  RuleResult tensor(const Cell& c) const {
    const int k = c.dim();
    const int m = static_cast<int>(gauss_.nodes.size());
    int count = 1;
    for (int d = 0; d < k; ++d) count *= m;
    const ParamVec half = 0.5 * (c.hi - c.lo);
    const ParamVec mid = 0.5 * (c.hi + c.lo);
    const double jac = half.prod();
    double value = 0.0;
    double abs = 0.0;
    ParamVec u(k);
    for (int idx = 0; idx < count; ++idx) {
      int rem = idx;
      double w = jac;
      for (int d = 0; d < k; ++d) {
        const auto q = static_cast<std::size_t>(rem % m);
        u(d) = mid(d) + half(d) * gauss_.nodes[q];
        w *= gauss_.weights[q];
        rem /= m;
      }
      const double f = w * weighted_integrand(u);
      value += f;
      abs += std::abs(f);
    }
    return RuleResult::of(value, abs);
  }

  // Gauss rule on [a, b] along axis `h` at fixed tangential coordinate.
  template <typename Body>
  void gauss_segment(double a, double b, const Body& body) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    for (std::size_t q = 0; q < gauss_.nodes.size(); ++q) {
      body(mid + half * gauss_.nodes[q], half * gauss_.weights[q]);
    }
  }

  struct SegmentSum {
    double value = 0.0;
    double abs = 0.0;
    double err = 0.0;
  };

  // Gauss rule on [a, b] and on its two halves; `body` returns one node's
  // contribution. The halves are kept, their gap to the whole is the error.
  template <typename Body>
  SegmentSum split_segment(double a, double b, const Body& body) const {
    const auto run = [&](double lo, double hi) {
      SegmentSum out;
      gauss_segment(lo, hi, [&](double tv, double wt) {
        const double f = body(tv, wt);
        out.value += f;
        out.abs += std::abs(f);
      });
      return out;
    };
    const double m = 0.5 * (a + b);
    const SegmentSum whole = run(a, b);
    SegmentSum out = run(a, m);
    const SegmentSum right = run(m, b);
    out.value += right.value;
    out.abs += right.abs;
    out.err = std::abs(out.value - whole.value);
    return out;
  }

  const GaussRule& gauss() const { return gauss_; }
  const ParametricPatch& patch() const { return patch_; }
  const QuadratureOptions& options() const { return options_; }

 private:
  const ParametricPatch& patch_;
  const Integrand& integrand_;
  const QuadratureOptions& options_;
  const GaussRule& gauss_;
};

ParamVec point2(int t, double tv, int h, double hv) {
  ParamVec u(2);
  u(t) = tv;
  u(h) = hv;
  return u;
}

// Chooses the axis along which G is strictly monotone across the cell, using
// gradients sampled on an interior 3x3 grid.
template <typename Grad>
std::optional<int> height_axis(const Cell& c, const Grad& grad) {
  std::array<double, 2> min_abs{std::numeric_limits<double>::infinity(),
                                std::numeric_limits<double>::infinity()};
  std::array<double, 2> lo_d{std::numeric_limits<double>::infinity(),
                             std::numeric_limits<double>::infinity()};
  std::array<double, 2> hi_d{-std::numeric_limits<double>::infinity(),
                             -std::numeric_limits<double>::infinity()};
  double max_grad = 0.0;
  constexpr std::array<double, 3> kFractions{0.05, 0.5, 0.95};
  for (double fx : kFractions) {
    for (double fy : kFractions) {
      ParamVec u(2);
      u(0) = c.lo(0) + fx * (c.hi(0) - c.lo(0));
      u(1) = c.lo(1) + fy * (c.hi(1) - c.lo(1));
      const ParamVec g = grad(u);
      if (!g.allFinite()) return std::nullopt;
      max_grad = std::max(max_grad, g.norm());
      for (int d = 0; d < 2; ++d) {
        min_abs[static_cast<std::size_t>(d)] = std::min(min_abs[static_cast<std::size_t>(d)], std::abs(g(d)));
        lo_d[static_cast<std::size_t>(d)] = std::min(lo_d[static_cast<std::size_t>(d)], g(d));
        hi_d[static_cast<std::size_t>(d)] = std::max(hi_d[static_cast<std::size_t>(d)], g(d));
      }
    }
  }
  if (!(max_grad > 0.0)) return std::nullopt;
  std::optional<int> best;
  double best_score = 0.0;
  for (int d = 0; d < 2; ++d) {
    const auto i = static_cast<std::size_t>(d);
    const bool same_sign = lo_d[i] > 0.0 || hi_d[i] < 0.0;
    // The derivative must stay well away from zero relative to its variation.
    const bool steady = (hi_d[i] - lo_d[i]) < min_abs[i];
    const double score = min_abs[i] / max_grad;
    if (same_sign && steady && score >= 0.1 && score > best_score) {
      best = d;
      best_score = score;
    }
  }
  return best;
}

template <typename G>
ParamVec fd_param_gradient(const G& g, const ParamVec& u, const ParamVec& step) {
  ParamVec grad(u.size());
  for (Eigen::Index d = 0; d < u.size(); ++d) {
    ParamVec up = u;
    ParamVec um = u;
    up(d) += step(d);
    um(d) -= step(d);
    grad(d) = (g(up) - g(um)) / (2.0 * step(d));
  }
  return grad;
}

// Height-function quadrature on a cut cell (k = 2): roots along the height
// axis at tangential Gauss nodes, with tangential breakpoints where a level
// curve leaves through the cell's height-faces.
template <typename G>
RuleResult cut_area_rule(const CellIntegrator& ci, const Cell& c, int h,
                         const std::vector<Constraint>& cs, const G& g) {
  const int t = 1 - h;
  const double t0 = c.lo(t);
  const double t1 = c.hi(t);
  const double h0 = c.lo(h);
  const double h1 = c.hi(h);

  std::vector<double> tb{t0, t1};
  for (const auto& con : cs) {
    for (double edge : {h0, h1}) {
      collect_roots([&](double tv) { return g(point2(t, tv, h, edge)) - con.level; }, t0, t1, 64, tb);
    }
  }
  sort_unique(tb, t1 - t0);

  double value = 0.0;
  double abs = 0.0;
  double err = 0.0;
  std::vector<double> hb;
  for (std::size_t p = 0; p + 1 < tb.size(); ++p) {
    const auto seg = ci.split_segment(tb[p], tb[p + 1], [&](double tv, double wt) {
      double column = 0.0;
      hb.assign({h0, h1});
      const double g0 = g(point2(t, tv, h, h0));
      const double g1 = g(point2(t, tv, h, h1));
      for (const auto& con : cs) {
        const double f0 = g0 - con.level;
        const double f1 = g1 - con.level;
        if ((f0 < 0.0) != (f1 < 0.0)) {
          hb.push_back(bracketed_root(
              [&](double hv) { return g(point2(t, tv, h, hv)) - con.level; }, h0, h1, f0, f1));
        }
      }
      sort_unique(hb, h1 - h0);
      for (std::size_t q = 0; q + 1 < hb.size(); ++q) {
        const double mid = 0.5 * (hb[q] + hb[q + 1]);
        if (!all_satisfied(cs, g(point2(t, tv, h, mid)))) continue;
        ci.gauss_segment(hb[q], hb[q + 1], [&](double hv, double wh) {
          column += wt * wh * ci.weighted_integrand(point2(t, tv, h, hv));
        });
      }
      return column;
    });
    value += seg.value;
    abs += seg.abs;
    err += seg.err;
  }
  return RuleResult::of(value, abs, err);
}

// Node-wise indicator weighting for cells that cannot be resolved.
template <typename G>
Estimate sample_fraction(const CellIntegrator& ci, const Cell& c,
                         const std::vector<Constraint>& cs, const G& g) {
  const int k = c.dim();
  const auto& gauss = ci.gauss();
  const int m = static_cast<int>(gauss.nodes.size());
  int count = 1;
  for (int d = 0; d < k; ++d) count *= m;
  const ParamVec half = 0.5 * (c.hi - c.lo);
  const ParamVec mid = 0.5 * (c.hi + c.lo);
  const double jac = half.prod();
  double value = 0.0;
  double inside_abs = 0.0;
  double inside_weight = 0.0;
  double total_weight = 0.0;
  ParamVec u(k);
  for (int idx = 0; idx < count; ++idx) {
    int rem = idx;
    double w = jac;
    for (int d = 0; d < k; ++d) {
      const auto q = static_cast<std::size_t>(rem % m);
      u(d) = mid(d) + half(d) * gauss.nodes[q];
      w *= gauss.weights[q];
      rem /= m;
    }
    total_weight += w;
    if (!all_satisfied(cs, g(u))) continue;
    const double f = w * ci.weighted_integrand(u);
    value += f;
    inside_abs += std::abs(f);
    inside_weight += w;
  }
  if (inside_weight == 0.0) {
    // The region still meets the cell; bound it by one node's share.
    double peak = 0.0;
    for (int idx = 0; idx < count; ++idx) {
      int rem = idx;
      for (int d = 0; d < k; ++d) {
        u(d) = mid(d) + half(d) * gauss.nodes[static_cast<std::size_t>(rem % m)];
        rem /= m;
      }
      try {
        peak = std::max(peak, std::abs(ci.weighted_integrand(u)));
      } catch (const Error&) {
      }
    }
    return {0.0, peak * total_weight / count};
  }
  const double frac = inside_weight / total_weight;
  const double mean_abs = inside_abs / inside_weight;
  const double uncertain = std::max(std::min(frac, 1.0 - frac), 1.0 / count);
  return {value, mean_abs * total_weight * uncertain};
}

// Adaptive refinement shared by area and line integrals. `rule` returns an
// estimate for a cell (or Zero / Unresolved); a cell is accepted when its
// children's sum agrees with its own estimate to the cell tolerance.
template <typename Rule, typename Fallback, typename CellTol>
class Refiner {
 public:
  Refiner(const Rule& rule, const Fallback& fallback, const CellTol& cell_tol,
          const QuadratureOptions& options)
      : rule_(rule), fallback_(fallback), cell_tol_(cell_tol), options_(options) {}

  void process(const Cell& cell, const RuleResult& own, Accumulator& acc) const {
    const auto children = split(cell);
    std::vector<RuleResult> results;
    results.reserve(children.size());
    bool resolved = own.kind != RuleResult::Kind::Unresolved;
    double sum = 0.0;
    double abs = 0.0;
    double inner = 0.0;
    for (const auto& child : children) {
      results.push_back(rule_(child));
      const auto& r = results.back();
      if (r.kind == RuleResult::Kind::Unresolved) resolved = false;
      sum += r.value;
      abs += r.abs;
      inner += r.err;
    }
    const bool forced = options_.singular_param &&
                        near_point(cell, *options_.singular_param, options_.singular_radius);
    if (resolved && !forced) {
      const double diff = std::abs(sum - own.value);
      if (diff + inner <= cell_tol_(cell)) {
        acc.value.add(sum);
        acc.error += diff + inner + rounding_allowance(abs);
        acc.cells += children.size();
        return;
      }
    }
    if (cell.depth + 1 >= options_.max_depth) {
      acc.depth_hit = true;
      if (resolved) acc.error += std::abs(sum - own.value);
      for (std::size_t i = 0; i < children.size(); ++i) {
        const auto& r = results[i];
        ++acc.cells;
        if (r.kind == RuleResult::Kind::Unresolved) {
          const Estimate e = fallback_(children[i]);
          acc.value.add(e.value);
          acc.error += e.error;
          continue;
        }
        acc.value.add(r.value);
        acc.error += r.err + rounding_allowance(r.abs);
        if (!resolved) acc.error += lookahead_error(children[i], r);
        if (forced && contains_point(children[i], *options_.singular_param)) acc.error += r.abs;
      }
      return;
    }
    for (std::size_t i = 0; i < children.size(); ++i) {
      if (results[i].kind == RuleResult::Kind::Zero) {
        ++acc.cells;
        continue;
      }
      process(children[i], results[i], acc);
    }
  }

 private:
  // Without a trustworthy parent estimate, compare a depth-limited cell
  // against its own children.
  double lookahead_error(const Cell& cell, const RuleResult& own) const {
    double sum = 0.0;
    for (const auto& child : split(cell)) {
      const RuleResult r = rule_(child);
      if (r.kind == RuleResult::Kind::Unresolved) {
        const Estimate e = fallback_(cell);
        return std::abs(e.value - own.value) + e.error;
      }
      sum += r.value;
    }
    return std::abs(sum - own.value);
  }

  const Rule& rule_;
  const Fallback& fallback_;
  const CellTol& cell_tol_;
  const QuadratureOptions& options_;
};

template <typename Rule, typename Fallback, typename CellTol>
QuadratureResult run_adaptive(const ParamBox& box, const QuadratureOptions& options,
                              const Rule& rule, const Fallback& fallback, const CellTol& cell_tol) {
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidParameter, "quadrature tol must be positive");
  if (options.max_depth < 1) throw Error(ErrorCode::InvalidParameter, "max_depth must be >= 1");
  QuadratureOptions opts = options;
  opts.min_depth = std::clamp(opts.min_depth, 0, opts.max_depth - 1);

  const auto cells = initial_cells(box, opts.min_depth);
  std::vector<Accumulator> partial(cells.size());
  const Refiner<Rule, Fallback, CellTol> refiner(rule, fallback, cell_tol, opts);
  const unsigned workers = opts.threads ? opts.threads : default_worker_count();
  parallel_for(cells.size(), workers, [&](std::size_t i) {
    const RuleResult own = rule(cells[i]);
    if (own.kind == RuleResult::Kind::Zero) {
      partial[i].cells = 1;
      return;
    }
    refiner.process(cells[i], own, partial[i]);
  });

  // Fixed-order reduction keeps results independent of scheduling.
  CompensatedSum value;
  QuadratureResult result;
  for (const auto& p : partial) {
    value.add(p.value.value());
    result.error_estimate += p.error;
    result.cells_used += p.cells;
    result.depth_hit = result.depth_hit || p.depth_hit;
  }
  result.value = value.value();
  result.tol_met = !(result.depth_hit && result.error_estimate > opts.tol);
  return result;
}

}  // namespace

RegionSpec RegionSpec::whole() { return RegionSpec{}; }

RegionSpec RegionSpec::sublevel(std::function<double(const VecN&)> fn, double s) {
  if (!(s > 0.0)) throw Error(ErrorCode::InvalidParameter, "sublevel needs s > 0");
  if (!fn) throw Error(ErrorCode::InvalidParameter, "sublevel needs a region function");
  return RegionSpec{Kind::Sublevel, std::move(fn), 0.0, s};
}

RegionSpec RegionSpec::band(std::function<double(const VecN&)> fn, double s_lo, double s_hi) {
  if (!(s_lo < s_hi)) throw Error(ErrorCode::InvalidParameter, "band needs s_lo < s_hi");
  if (!fn) throw Error(ErrorCode::InvalidParameter, "band needs a region function");
  return RegionSpec{Kind::Band, std::move(fn), s_lo, s_hi};
}

bool RegionSpec::contains_value(double g) const {
  switch (kind) {
    case Kind::Whole: return true;
    case Kind::Sublevel: return g < s_hi;
    case Kind::Band: return g >= s_lo && g < s_hi;
  }
  return false;
}

const GaussRule& gauss_legendre(int points) {
  static const std::vector<GaussRule> rules = [] {
    std::vector<GaussRule> all(33);
    for (int m = 1; m <= 32; ++m) {
      GaussRule& r = all[static_cast<std::size_t>(m)];
      r.nodes.resize(static_cast<std::size_t>(m));
      r.weights.resize(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
        double dp = 1.0;
        for (int iter = 0; iter < 100; ++iter) {
          double p0 = 1.0;
          double p1 = x;
          for (int j = 2; j <= m; ++j) {
            const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
          }
          if (m == 1) p0 = 1.0;
          dp = m * (x * p1 - p0) / (x * x - 1.0);
          const double dx = p1 / dp;
          x -= dx;
          if (std::abs(dx) < 1e-16) break;
        }
        r.nodes[static_cast<std::size_t>(i)] = x;
        r.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
      }
    }
    return all;
  }();
  if (points < 1 || points > 32) {
    throw Error(ErrorCode::InvalidParameter, "Gauss-Legendre rule supports 1..32 points");
  }
  return rules[static_cast<std::size_t>(points)];
}

unsigned default_worker_count() {
  if (const char* env = std::getenv("MOBIUS_MONO_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

QuadratureResult integrate_region(const ParametricPatch& patch, const Integrand& integrand,
                                  const RegionSpec& region, const QuadratureOptions& options) {
  if (!integrand) throw Error(ErrorCode::InvalidParameter, "integrate_region: missing integrand");
  const CellIntegrator ci(patch, integrand, options);
  const std::vector<Constraint> cs = constraints_of(region);
  const auto g = [&](const ParamVec& u) { return region.region_fn(patch.eval(u)); };
  const int k = patch.k();

  const auto rule = [&](const Cell& c) -> RuleResult {
    if (cs.empty()) return ci.tensor(c);
    const RangeEstimate range(c, g);
    bool ambiguous = false;
    for (const auto& con : cs) {
      const LevelStatus st = range.status(con.level);
      if (st == LevelStatus::Ambiguous) {
        ambiguous = true;
      } else if ((st == LevelStatus::AllBelow) != con.below) {
        return RuleResult::zero();
      }
    }
    if (!ambiguous) return ci.tensor(c);
    if (k != 2) return RuleResult::unresolved();
    const ParamVec step = 1e-3 * (c.hi - c.lo);
    const auto axis = height_axis(c, [&](const ParamVec& u) { return fd_param_gradient(g, u, step); });
    if (!axis) return RuleResult::unresolved();
    return cut_area_rule(ci, c, *axis, cs, g);
  };
  const auto fallback = [&](const Cell& c) { return sample_fraction(ci, c, cs, g); };
  const double box_volume = patch.domain().volume();
  const auto cell_tol = [&](const Cell& c) { return options.tol * c.volume() / box_volume; };
  return run_adaptive(patch.domain(), options, rule, fallback, cell_tol);
}

QuadratureResult level_curve_integral(const ParametricPatch& patch, const ScalarField& f,
                                      double level, const Integrand& integrand,
                                      const QuadratureOptions& options) {
  if (patch.k() != 2) {
    throw Error(ErrorCode::InvalidParameter, "level_curve_integral needs a 2-dimensional patch");
  }
  if (!f.value || !integrand) {
    throw Error(ErrorCode::InvalidParameter, "level_curve_integral: missing field or integrand");
  }
  const CellIntegrator ci(patch, integrand, options);
  const auto g = [&](const ParamVec& u) { return f.value(patch.eval(u)); };
  const ParamVec fd_step = ParamVec::Constant(2, 1e-6 * patch.domain().max_extent());
  const auto param_grad = [&](const ParamVec& u) -> ParamVec {
    if (f.gradient) return patch.jacobian(u).transpose() * f.gradient(patch.eval(u));
    return fd_param_gradient(g, u, fd_step);
  };

  const auto rule = [&](const Cell& c) -> RuleResult {
    const RangeEstimate range(c, g);
    if (range.status(level) != LevelStatus::Ambiguous) return RuleResult::zero();
    const auto axis = height_axis(c, param_grad);
    if (!axis) return RuleResult::unresolved();
    const int h = *axis;
    const int t = 1 - h;
    const double t0 = c.lo(t);
    const double t1 = c.hi(t);
    const double h0 = c.lo(h);
    const double h1 = c.hi(h);
    const auto line = [&](double tv) {
      return [&, tv](double hv) { return g(point2(t, tv, h, hv)) - level; };
    };
    std::vector<double> tb{t0, t1};
    for (double edge : {h0, h1}) {
      collect_roots([&](double tv) { return g(point2(t, tv, h, edge)) - level; }, t0, t1, 8, tb);
    }
    sort_unique(tb, t1 - t0);

    double value = 0.0;
    double abs = 0.0;
    double err = 0.0;
    for (std::size_t p = 0; p + 1 < tb.size(); ++p) {
      const double tm = 0.5 * (tb[p] + tb[p + 1]);
      if ((line(tm)(h0) < 0.0) == (line(tm)(h1) < 0.0)) continue;
      const auto seg = ci.split_segment(tb[p], tb[p + 1], [&](double tv, double wt) {
        const auto fn = line(tv);
        const double f0 = fn(h0);
        const double f1 = fn(h1);
        if ((f0 < 0.0) == (f1 < 0.0)) return 0.0;
        const double hv = bracketed_root(fn, h0, h1, f0, f1);
        const ParamVec u = point2(t, tv, h, hv);
        const ParamVec du = param_grad(u);
        const MatN jac = patch.jacobian(u);
        const MatN gram = jac.transpose() * jac;
        const double surf_grad = std::sqrt(std::max(0.0, du.dot(gram.inverse() * du)));
        if (!(surf_grad > 1e-8)) {
          throw Error(ErrorCode::NonRegularLevel,
                      "|grad f| = " + std::to_string(surf_grad) + " on the level curve");
        }
        ParamVec tangent(2);
        tangent(t) = 1.0;
        tangent(h) = -du(t) / du(h);
        const double speed = (jac * tangent).norm();
        const SurfaceSample s = sample(patch, u);
        const double val = wt * speed * integrand(s);
        if (!std::isfinite(val)) {
          throw Error(ErrorCode::NonFiniteIntegrand, "line integrand is not finite");
        }
        return val;
      });
      value += seg.value;
      abs += seg.abs;
      err += seg.err;
    }
    return RuleResult::of(value, abs, err);
  };
  const auto fallback = [&](const Cell&) -> Estimate {
    throw Error(ErrorCode::NonRegularLevel, "level curve is not a graph at max_depth");
  };
  const double box_extent = patch.domain().max_extent();
  const auto cell_tol = [&](const Cell& c) {
    return options.tol * (c.hi - c.lo).maxCoeff() / (8.0 * box_extent);
  };
  return run_adaptive(patch.domain(), options, rule, fallback, cell_tol);
}

namespace {

template <typename Inner>
RadialResult radial_impl(const Inner& inner, double lo, double hi, int nodes, double tol,
                         int max_panels) {
  if (!(lo < hi)) throw Error(ErrorCode::InvalidParameter, "radial_integral needs lo < hi");
  const GaussRule& rule = gauss_legendre(nodes);
  const auto composite = [&](int panels, double& inner_err) {
    CompensatedSum sum;
    inner_err = 0.0;
    const double width = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
      const double a = lo + p * width;
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double x = a + 0.5 * width * (rule.nodes[q] + 1.0);
        const double w = 0.5 * width * rule.weights[q];
        const Estimate e = inner(x);
        sum.add(w * e.value);
        inner_err += w * std::abs(e.error);
      }
    }
    return sum.value();
  };
  RadialResult result;
  double inner_err = 0.0;
  double previous = composite(1, inner_err);
  for (int panels = 2; panels <= max_panels; panels *= 2) {
    const double current = composite(panels, inner_err);
    result = {current, std::abs(current - previous), inner_err, panels, false};
    if (result.error_estimate <= tol) {
      result.tol_met = true;
      return result;
    }
    previous = current;
  }
  return result;
}

}  // namespace

RadialResult radial_integral(const std::function<Estimate(double)>& inner, double lo, double hi,
                             int nodes, double tol, int max_panels) {
  return radial_impl(inner, lo, hi, nodes, tol, max_panels);
}

RadialResult radial_integral(const std::function<double(double)>& inner, double lo, double hi,
                             int nodes, double tol, int max_panels) {
  return radial_impl([&](double x) { return Estimate{inner(x), 0.0}; }, lo, hi, nodes, tol,
                     max_panels);
}

}  // namespace mobius_mono
