#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "supind/core.hpp"

namespace supind {

template <typename Scalar, int Dim>
using StateT = Eigen::Matrix<Scalar, Dim, 1>;

template <int Dim>
using State = StateT<double, Dim>;

enum class Termination { end_of_interval, event, blow_up_guard };

/// Adaptive step size collapsed below the configured floor.
class StiffnessFailure : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

struct IvpOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  double initial_step = 0.0;  ///< 0 picks a starting step automatically
  double max_step = std::numeric_limits<double>::infinity();
  int max_steps = 1000000;
  double blow_up_cap = 1e8;
  int guarded_components = -1;  ///< leading components checked against the cap; -1 = all
  double event_time_tol = 1e-12;
  bool record_steps = true;             ///< keep every accepted step in the result
  std::vector<double> sample_times;     ///< dense-output samples (monotone in the direction of travel)
};

/**
 * Scalar event function. `terminal` events stop the integration at their
 * first sign change; others are only logged.
 */
template <typename Scalar, int Dim>
struct EventT {
  std::function<Scalar(Scalar, const StateT<Scalar, Dim>&)> g;
  bool terminal = true;
};

template <int Dim>
using Event = EventT<double, Dim>;

template <typename Scalar, int Dim>
struct EventHit {
  int index;
  Scalar time;
  StateT<Scalar, Dim> state;
};

template <typename Scalar, int Dim>
struct IvpResultT {
  std::vector<Scalar> times;
  std::vector<StateT<Scalar, Dim>> states;
  Scalar terminal_time{};
  StateT<Scalar, Dim> terminal;
  int accepted = 0;
  int rejected = 0;
  Termination reason = Termination::end_of_interval;
  std::vector<EventHit<Scalar, Dim>> events;  ///< in order of occurrence
};

template <int Dim>
using IvpResult = IvpResultT<double, Dim>;

namespace detail {

// Dormand-Prince 5(4) tableau.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

// Continuous extension of one accepted step.
template <typename Scalar, int Dim>
struct DenseStep {
  Scalar t0{};
  Scalar h{};
  StateT<Scalar, Dim> r1, r2, r3, r4, r5;

  StateT<Scalar, Dim> operator()(Scalar t) const {
    const Scalar theta = (t - t0) / h;
    const Scalar theta1 = Scalar(1) - theta;
    return r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
  }
};

template <typename Scalar, int Dim>
bool finite_state(const StateT<Scalar, Dim>& y) {
  return y.allFinite();
}

}  // namespace detail

/**
 * Adaptive Dormand-Prince 5(4) integration of y' = field(t, y) from t0 to t1
 * (t1 < t0 integrates backward). Stops at t1, at the first sign change of a
 * terminal event (located by bisection on the dense output), or when the
 * guarded components exceed `blow_up_cap` in absolute value.
 */
template <typename Scalar, int Dim, typename Field>
IvpResultT<Scalar, Dim> integrate_ivp(Field&& field, Scalar t0, Scalar t1,
                                      const StateT<Scalar, Dim>& y0, const IvpOptions& opt = {},
                                      std::span<const EventT<Scalar, Dim>> events = {}) {
  using Vec = StateT<Scalar, Dim>;
  using T = detail::Dopri5;
  if (t0 == t1) throw InvalidParameter("integrate_ivp: t0 == t1");

  IvpResultT<Scalar, Dim> res;
  const Scalar dir = t1 > t0 ? Scalar(1) : Scalar(-1);
  const Scalar span = std::abs(t1 - t0);
  const int guarded = opt.guarded_components < 0 ? static_cast<int>(y0.size())
                                                 : std::min<int>(opt.guarded_components, y0.size());

  auto over_cap = [&](const Vec& y) {
    for (int i = 0; i < guarded; ++i) {
      if (!(std::abs(y[i]) <= opt.blow_up_cap)) return true;
    }
    return false;
  };
  auto err_norm = [&](const Vec& ya, const Vec& yb, const Vec& err) {
    Scalar acc = 0;
    for (int i = 0; i < ya.size(); ++i) {
      const Scalar sk = opt.abs_tol + opt.rel_tol * std::max(std::abs(ya[i]), std::abs(yb[i]));
      const Scalar r = err[i] / sk;
      acc += r * r;
    }
    return std::sqrt(acc / ya.size());
  };

  Scalar t = t0;
  Vec y = y0;
  Vec k1 = field(t, y);
  if (opt.record_steps) {
    res.times.push_back(t);
    res.states.push_back(y);
  }

  // Event bookkeeping.
  std::vector<Scalar> g_prev(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) g_prev[i] = events[i].g(t, y);

  std::size_t next_sample = 0;
  const auto& samples = opt.sample_times;
  auto emit_samples_upto = [&](Scalar t_end, const detail::DenseStep<Scalar, Dim>* dense,
                               bool inclusive) {
    while (next_sample < samples.size()) {
      const Scalar ts = samples[next_sample];
      const Scalar rel = (ts - t_end) * dir;
      if (rel > 0 || (!inclusive && rel == 0)) break;
      Vec ys = dense ? (*dense)(ts) : y;
      res.times.push_back(ts);
      res.states.push_back(ys);
      ++next_sample;
    }
  };
  // Samples coinciding with t0 come straight from the initial state.
  if (!samples.empty()) {
    while (next_sample < samples.size() && samples[next_sample] == t0) {
      res.times.push_back(t0);
      res.states.push_back(y0);
      ++next_sample;
    }
  }

  Scalar h = opt.initial_step;
  if (h <= 0) {
    const Scalar d0 = y.norm();
    const Scalar d1 = k1.norm();
    h = (d0 > 1e-10 && d1 > 1e-10) ? Scalar(0.01) * d0 / d1 : Scalar(1e-6) * std::max(span, Scalar(1));
    h = std::min<Scalar>(h, span);
    h = std::min<Scalar>(h, opt.max_step);
  }

  const Scalar h_floor = Scalar(1e-14) * std::max<Scalar>(Scalar(1), std::abs(t1));
  Vec k2, k3, k4, k5, k6, k7, y_new, y_stage;

  for (int step = 0; step < opt.max_steps; ++step) {
    const Scalar remaining = (t1 - t) * dir;
    if (remaining <= 0) break;
    bool last = false;
    if (h >= remaining) {
      h = remaining;
      last = true;
    }
    const Scalar hs = h * dir;

    y_stage = y + hs * (T::a21 * k1);
    k2 = field(t + T::c2 * hs, y_stage);
    y_stage = y + hs * (T::a31 * k1 + T::a32 * k2);
    k3 = field(t + T::c3 * hs, y_stage);
    y_stage = y + hs * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3);
    k4 = field(t + T::c4 * hs, y_stage);
    y_stage = y + hs * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4);
    k5 = field(t + T::c5 * hs, y_stage);
    y_stage = y + hs * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5);
    k6 = field(t + hs, y_stage);
    y_new = y + hs * (T::a71 * k1 + T::a73 * k3 + T::a74 * k4 + T::a75 * k5 + T::a76 * k6);
    k7 = field(t + hs, y_new);

    const Vec err = hs * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * k7);
    const bool finite = detail::finite_state<Scalar, Dim>(y_new) &&
                        detail::finite_state<Scalar, Dim>(k7) && detail::finite_state<Scalar, Dim>(err);
    const Scalar en = finite ? err_norm(y, y_new, err) : std::numeric_limits<Scalar>::infinity();

    if (!(en <= 1)) {
      ++res.rejected;
      const Scalar fac = std::isfinite(en) ? std::max<Scalar>(0.2, 0.9 * std::pow(en, -0.2)) : 0.2;
      h *= std::min<Scalar>(fac, 1.0);
      if (h < h_floor) {
        if (over_cap(y) || !finite) {
          res.reason = Termination::blow_up_guard;
          break;
        }
        throw StiffnessFailure("integrate_ivp: step size underflow (stiffness failure)");
      }
      continue;
    }

    detail::DenseStep<Scalar, Dim> dense;
    dense.t0 = t;
    dense.h = hs;
    dense.r1 = y;
    dense.r2 = y_new - y;
    dense.r3 = hs * k1 - dense.r2;
    dense.r4 = dense.r2 - hs * k7 - dense.r3;
    dense.r5 = hs * (T::d1 * k1 + T::d3 * k3 + T::d4 * k4 + T::d5 * k5 + T::d6 * k6 + T::d7 * k7);

    const Scalar t_new = last ? t1 : t + hs;

    // Locate the earliest event in this step.
    int fired = -1;
    Scalar t_event = t_new;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const Scalar g1 = events[i].g(t_new, y_new);
      const Scalar g0 = g_prev[i];
      if (g0 == 0 || std::signbit(g0) == std::signbit(g1)) continue;
      Scalar lo = t;
      Scalar hi = t_new;
      while (std::abs(hi - lo) > opt.event_time_tol) {
        const Scalar mid = Scalar(0.5) * (lo + hi);
        const Scalar gm = events[i].g(mid, dense(mid));
        if (gm == 0 || std::signbit(gm) != std::signbit(g0)) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      const Scalar te = hi;
      if (events[i].terminal) {
        if (fired < 0 || (te - t_event) * dir < 0) {
          fired = static_cast<int>(i);
          t_event = te;
        }
      } else {
        res.events.push_back({static_cast<int>(i), te, dense(te)});
      }
    }

    ++res.accepted;
    if (fired >= 0) {
      const Vec ye = dense(t_event);
      emit_samples_upto(t_event, &dense, true);
      res.events.push_back({fired, t_event, ye});
      t = t_event;
      y = ye;
      if (opt.record_steps) {
        res.times.push_back(t);
        res.states.push_back(y);
      }
      res.reason = Termination::event;
      res.terminal_time = t;
      res.terminal = y;
      return res;
    }

    emit_samples_upto(t_new, &dense, true);
    for (std::size_t i = 0; i < events.size(); ++i) g_prev[i] = events[i].g(t_new, y_new);
    t = t_new;
    y = y_new;
    k1 = k7;
    if (opt.record_steps) {
      res.times.push_back(t);
      res.states.push_back(y);
    }
    if (over_cap(y)) {
      res.reason = Termination::blow_up_guard;
      res.terminal_time = t;
      res.terminal = y;
      return res;
    }
    if (last) break;

    const Scalar fac = en > 0 ? std::min<Scalar>(5.0, std::max<Scalar>(0.2, 0.9 * std::pow(en, -0.2)))
                              : Scalar(5.0);
    h = std::min<Scalar>(h * fac, opt.max_step);
  }

  if (res.reason != Termination::blow_up_guard && (t1 - t) * dir > 0) {
    throw NumericalFailure("integrate_ivp: step budget exhausted before the end of the interval");
  }
  res.terminal_time = t;
  res.terminal = y;
  return res;
}

}  // namespace supind
