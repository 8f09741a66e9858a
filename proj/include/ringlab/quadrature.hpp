#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <span>
#include <vector>

namespace ringlab {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
  bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gauss_kronrod_15(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int k = 0; k < 7; ++k) {
    const double dx = half * kKronrodNodes[k];
    const double pair = f(centre - dx) + f(centre + dx);
    kronrod += kKronrodWeights[k] * pair;
    if (k % 2 == 1) gauss += kGaussWeights[k / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Integrates f over [a, b] split initially at `breaks` (interior points,
/// ascending). Bisects the worst segment until the summed error estimate is
/// at most max(abs_tol, rel_tol * |I|) or max_intervals is reached.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double abs_tol,
                                    double rel_tol, int max_intervals,
                                    std::span<const double> breaks = {}) {
  std::vector<detail::Segment> heap;
  heap.reserve(static_cast<std::size_t>(max_intervals) + breaks.size() + 2);
  double lo = a;
  for (double x : breaks) {
    if (x > lo && x < b) {
      heap.push_back(detail::gauss_kronrod_15(f, lo, x));
      lo = x;
    }
  }
  heap.push_back(detail::gauss_kronrod_15(f, lo, b));
  std::make_heap(heap.begin(), heap.end());

  auto totals = [&heap] {
    double v = 0.0, e = 0.0;
    for (const auto& s : heap) {
      v += s.value;
      e += s.error;
    }
    return std::pair{v, e};
  };

  auto [value, error] = totals();
  while (error > std::max(abs_tol, rel_tol * std::abs(value)) &&
         static_cast<int>(heap.size()) < max_intervals) {
    std::pop_heap(heap.begin(), heap.end());
    const detail::Segment worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval cannot be split further in double precision.
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end());
      break;
    }
    heap.push_back(detail::gauss_kronrod_15(f, worst.a, mid));
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(detail::gauss_kronrod_15(f, mid, worst.b));
    std::push_heap(heap.begin(), heap.end());
    std::tie(value, error) = totals();
  }
  const bool ok = error <= std::max(abs_tol, rel_tol * std::abs(value));
  return {value, error, static_cast<int>(heap.size()), ok};
}

}  // namespace ringlab
