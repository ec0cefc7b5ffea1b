#include "klish/lbfgs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>

#include "klish/error.hpp"

namespace klish {

namespace {

// Minimizer of the cubic interpolating (x1,f1,g1) and (x2,f2,g2), clamped to bounds.
double cubic_interpolate(double x1, double f1, double g1, double x2, double f2, double g2, double lo, double hi) {
  const double d1 = g1 + g2 - 3.0 * (f1 - f2) / (x1 - x2);
  const double d2_square = d1 * d1 - g1 * g2;
  if (d2_square >= 0.0) {
    const double d2 = std::sqrt(d2_square);
    double min_pos;
    if (x1 <= x2) {
      min_pos = x2 - (x2 - x1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2));
    } else {
      min_pos = x1 - (x1 - x2) * ((g1 + d2 - d1) / (g1 - g2 + 2.0 * d2));
    }
    if (std::isfinite(min_pos)) return std::min(std::max(min_pos, lo), hi);
  }
  return 0.5 * (lo + hi);
}

struct Point {
  double t = 0.0;
  double f = 0.0;
  Vector g;
  double gtd = 0.0;
};

struct LineSearch {
  Point best;
  int evaluations = 0;
};

LineSearch strong_wolfe(const Objective& f, const Vector& x, const Vector& d, const Point& start, double t,
                        const LbfgsOptions& opts) {
  constexpr double kTolChange = 1e-12;
  const double d_norm = d.cwiseAbs().maxCoeff();
  Vector trial(x.size());
  LineSearch ls;

  auto evaluate = [&](double step) {
    Point p;
    p.t = step;
    p.g.resize(x.size());
    trial.noalias() = x + step * d;
    p.f = f(trial, p.g);
    ++ls.evaluations;
    // Treat non-finite values as "too far": they always fail sufficient decrease.
    if (!std::isfinite(p.f)) {
      p.f = std::numeric_limits<double>::infinity();
      p.gtd = std::numeric_limits<double>::infinity();
    } else {
      p.gtd = p.g.dot(d);
    }
    return p;
  };

  Point prev = start;
  Point cur = evaluate(t);
  std::array<Point, 2> bracket;
  bool have_bracket = false;
  bool done = false;
  int iter = 0;

  while (iter < opts.max_line_search) {
    if (cur.f > start.f + opts.c1 * cur.t * start.gtd || (iter > 1 && cur.f >= prev.f)) {
      bracket = {prev, cur};
      have_bracket = true;
      break;
    }
    if (std::fabs(cur.gtd) <= -opts.c2 * start.gtd) {
      ls.best = cur;
      done = true;
      break;
    }
    if (cur.gtd >= 0.0) {
      bracket = {prev, cur};
      have_bracket = true;
      break;
    }
    const double min_step = cur.t + 0.01 * (cur.t - prev.t);
    const double max_step = cur.t * 10.0;
    const double next = cubic_interpolate(prev.t, prev.f, prev.gtd, cur.t, cur.f, cur.gtd, min_step, max_step);
    prev = std::move(cur);
    cur = evaluate(next);
    ++iter;
  }
  if (done) return ls;
  if (!have_bracket) bracket = {start, cur};

  // Zoom.
  bool insufficient_progress = false;
  int low = bracket[0].f <= bracket[1].f ? 0 : 1;
  while (iter < opts.max_line_search) {
    const double lo_t = std::min(bracket[0].t, bracket[1].t);
    const double hi_t = std::max(bracket[0].t, bracket[1].t);
    if ((hi_t - lo_t) * d_norm < kTolChange) break;
    double step;
    if (std::isfinite(bracket[0].f) && std::isfinite(bracket[1].f)) {
      step = cubic_interpolate(bracket[0].t, bracket[0].f, bracket[0].gtd, bracket[1].t, bracket[1].f, bracket[1].gtd,
                               lo_t, hi_t);
    } else {
      step = 0.5 * (lo_t + hi_t);
    }
    const double eps = 0.1 * (hi_t - lo_t);
    if (std::min(hi_t - step, step - lo_t) < eps) {
      if (insufficient_progress || step >= hi_t || step <= lo_t) {
        step = std::fabs(step - hi_t) < std::fabs(step - lo_t) ? hi_t - eps : lo_t + eps;
        insufficient_progress = false;
      } else {
        insufficient_progress = true;
      }
    } else {
      insufficient_progress = false;
    }
    Point p = evaluate(step);
    ++iter;
    const int high = 1 - low;
    if (p.f > start.f + opts.c1 * p.t * start.gtd || p.f >= bracket[low].f) {
      bracket[high] = std::move(p);
      low = bracket[0].f <= bracket[1].f ? 0 : 1;
    } else {
      if (std::fabs(p.gtd) <= -opts.c2 * start.gtd) {
        done = true;
      } else if (p.gtd * (bracket[high].t - bracket[low].t) >= 0.0) {
        bracket[high] = bracket[low];
      }
      bracket[low] = std::move(p);
      if (done) break;
    }
  }
  ls.best = bracket[low];
  return ls;
}

}  // namespace

LbfgsResult minimize_lbfgs(const Objective& f, Vector x0, const LbfgsOptions& opts) {
  LbfgsResult out;
  out.x = std::move(x0);
  const Eigen::Index n = out.x.size();
  Vector g(n);
  out.value = f(out.x, g);
  out.evaluations = 1;
  if (!std::isfinite(out.value) || !g.allFinite()) throw NumericError("objective is not finite at the initial point");
  if (n == 0 || g.cwiseAbs().maxCoeff() == 0.0) {
    out.converged = true;
    return out;
  }

  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;
  Vector d(n);
  std::vector<double> alpha(static_cast<std::size_t>(opts.history));

  for (int it = 1; it <= opts.max_iter; ++it) {
    out.iterations = it;

    // Two-loop recursion for d = -H g.
    d = -g;
    const int m = static_cast<int>(s_hist.size());
    for (int i = m - 1; i >= 0; --i) {
      alpha[static_cast<std::size_t>(i)] = rho_hist[static_cast<std::size_t>(i)] * s_hist[static_cast<std::size_t>(i)].dot(d);
      d -= alpha[static_cast<std::size_t>(i)] * y_hist[static_cast<std::size_t>(i)];
    }
    if (m > 0) {
      const auto& y = y_hist.back();
      d *= s_hist.back().dot(y) / y.dot(y);
    }
    for (int i = 0; i < m; ++i) {
      const double beta = rho_hist[static_cast<std::size_t>(i)] * y_hist[static_cast<std::size_t>(i)].dot(d);
      d += (alpha[static_cast<std::size_t>(i)] - beta) * s_hist[static_cast<std::size_t>(i)];
    }

    double gtd = g.dot(d);
    if (!(gtd < 0.0)) {
      // Lost descent (curvature pairs went stale): restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g;
      gtd = g.dot(d);
    }
    const double t0 = s_hist.empty() ? std::min(1.0, 1.0 / g.lpNorm<1>()) * opts.initial_step : opts.initial_step;

    Point start{0.0, out.value, g, gtd};
    LineSearch ls = strong_wolfe(f, out.x, d, start, t0, opts);
    out.evaluations += ls.evaluations;
    if (!std::isfinite(ls.best.f)) throw NumericError("objective diverged during line search");
    if (ls.best.t <= 0.0 || ls.best.f > out.value) {
      // No acceptable point along d; if d was already steepest descent we are stuck.
      if (s_hist.empty()) {
        out.last_step = 0.0;
        // Converged when the predicted decrease is lost in the rounding of f.
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(out.value));
        out.converged = g.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, std::fabs(out.value)) ||
                        std::fabs(t0 * gtd) <= floor;
        break;
      }
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      continue;
    }

    Vector s = ls.best.t * d;
    Vector y = ls.best.g - g;
    const double ys = y.dot(s);
    out.x += s;
    out.value = ls.best.f;
    g = std::move(ls.best.g);
    out.last_step = s.cwiseAbs().maxCoeff();

    if (ys > 1e-10 * y.squaredNorm()) {
      if (static_cast<int>(s_hist.size()) == opts.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      rho_hist.push_back(1.0 / ys);
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
    }

    if (out.last_step < opts.step_tol || g.cwiseAbs().maxCoeff() == 0.0) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace klish
