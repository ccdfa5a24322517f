#include "qplab/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "qplab/cocycle.hpp"
#include "qplab/util.hpp"

namespace qplab {

namespace {

using ordered_json = nlohmann::ordered_json;

void check_schedule(const std::vector<int>& sched, int lo) {
  if (sched.empty()) throw std::invalid_argument("lyapunov: empty schedule");
  if (sched.front() < lo)
    throw std::invalid_argument("lyapunov: schedule entries too small");
  for (std::size_t i = 1; i < sched.size(); ++i) {
    if (sched[i] <= sched[i - 1])
      throw std::invalid_argument("lyapunov: schedule must be strictly increasing");
  }
}

// Grid average of (1/n) log||T_n|| at every schedule mark, one pass per theta.
std::vector<double> norm_marks(const AnalyticPotential& f, double alpha, double E,
                               const std::vector<int>& sched, int grid,
                               int threads) {
  const std::size_t S = sched.size();
  const std::size_t G = static_cast<std::size_t>(grid);
  const int n_max = sched.back();
  std::vector<double> slots(G * S, 0.0);
  parallel_fill(G, threads, [&](std::size_t g) {
    double theta = (static_cast<double>(g) + 0.5) / static_cast<double>(G);
    ScaledTransfer T;
    std::size_t si = 0;
    for (int i = 0; i < n_max; ++i) {
      double v = f.evaluate(std::fma(static_cast<double>(i), alpha, theta));
      detail::advance(T.m, E, v);
      T.maybe_rescale();
      if (si < S && i + 1 == sched[si]) {
        slots[g * S + si] = T.log_frobenius() / static_cast<double>(sched[si]);
        ++si;
      }
    }
  });
  std::vector<double> avg(S, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    double acc = 0.0;
    for (std::size_t g = 0; g < G; ++g) acc += slots[g * S + s];
    avg[s] = acc / static_cast<double>(G);
  }
  return avg;
}

// Shared mu_k kernel: theta-grid average of (1/k) log max of the four
// determinant-polynomial moduli; returns the average and the number of grid
// points dropped because all four vanished.
std::pair<double, int> mu_average(const AnalyticPotential& f, double alpha,
                                  double E, int k, int grid, int threads) {
  if (k < 2) throw std::invalid_argument("gamma_mu: depth must be >= 2");
  if (grid < 1) throw std::invalid_argument("gamma_mu: empty theta grid");
  TruncatedPotential fk = truncate(f, k);
  const std::size_t G = static_cast<std::size_t>(grid);
  std::vector<double> slots(G);
  parallel_fill(G, threads, [&](std::size_t g) {
    double theta = (static_cast<double>(g) + 0.5) / static_cast<double>(G);
    DetPair a = truncated_det_pair(fk, alpha, theta, E);
    DetPair b = detail::det_pair_impl(fk, alpha, mod1(theta + alpha), E, k - 1,
                                      fk.tail_bound());
    double m = std::max(std::max(a.pk.log_abs(), a.pk_prev.log_abs()),
                        std::max(b.pk.log_abs(), b.pk_prev.log_abs()));
    slots[g] = m;
  });
  double acc = 0.0;
  int kept = 0, dropped = 0;
  for (std::size_t g = 0; g < G; ++g) {
    if (std::isinf(slots[g]) && slots[g] < 0.0) { ++dropped; continue; }
    acc += slots[g];
    ++kept;
  }
  if (kept == 0)
    throw numeric_error("gamma_mu: all grid points had vanishing polynomials");
  return {acc / static_cast<double>(kept) / static_cast<double>(k), dropped};
}

}  // namespace

LyapunovEstimate gamma_norm_average(const AnalyticPotential& f, double alpha,
                                    double E, const std::vector<int>& n_schedule,
                                    int theta_grid, int threads) {
  check_schedule(n_schedule, 1);
  if (theta_grid < 1) throw std::invalid_argument("lyapunov: empty theta grid");

  std::vector<double> avg = norm_marks(f, alpha, E, n_schedule, theta_grid, threads);

  LyapunovEstimate est;
  est.alpha = alpha;
  est.energy = E;
  est.method = "norm-average";
  est.norm = "frobenius";
  for (std::size_t s = 0; s < avg.size(); ++s) {
    est.schedule.push_back({n_schedule[s], theta_grid, avg[s]});
  }
  est.gamma = *std::min_element(avg.begin(), avg.end());

  // Statistical grid sensitivity at the largest n: double the grid once.
  std::vector<int> last = {n_schedule.back()};
  double fine = norm_marks(f, alpha, E, last, 2 * theta_grid, threads)[0];
  est.grid_jitter = std::abs(fine - avg.back());
  double spread = avg.size() >= 2
                      ? 0.5 * std::abs(avg[avg.size() - 1] - avg[avg.size() - 2])
                      : 0.0;
  est.uncertainty = spread + est.grid_jitter;

  double allowed = 3.0 / std::sqrt(static_cast<double>(theta_grid));
  for (std::size_t s = 1; s < avg.size(); ++s) {
    if (avg[s] > avg[s - 1] + allowed) {
      est.flags.push_back("monotone-violation at n=" + std::to_string(n_schedule[s]));
    }
  }
  return est;
}

double gamma_mu(const AnalyticPotential& f, double alpha, double E, int k,
                int theta_grid, int threads) {
  return mu_average(f, alpha, E, k, theta_grid, threads).first;
}

LyapunovEstimate gamma_mu_estimate(const AnalyticPotential& f, double alpha,
                                   double E, const std::vector<int>& k_schedule,
                                   int theta_grid, int threads) {
  check_schedule(k_schedule, 2);
  if (theta_grid < 1) throw std::invalid_argument("lyapunov: empty theta grid");

  LyapunovEstimate est;
  est.alpha = alpha;
  est.energy = E;
  est.method = "mu_k";
  est.norm = "determinant-max";
  std::vector<double> avg;
  for (int k : k_schedule) {
    auto [val, dropped] = mu_average(f, alpha, E, k, theta_grid, threads);
    avg.push_back(val);
    est.schedule.push_back({k, theta_grid, val});
    if (dropped > 0) {
      est.flags.push_back("dropped-zero-points at k=" + std::to_string(k) + " (" +
                          std::to_string(dropped) + ")");
    }
  }
  est.gamma = *std::min_element(avg.begin(), avg.end());

  double fine = mu_average(f, alpha, E, k_schedule.back(), 2 * theta_grid, threads).first;
  est.grid_jitter = std::abs(fine - avg.back());
  double spread = avg.size() >= 2
                      ? 0.5 * std::abs(avg[avg.size() - 1] - avg[avg.size() - 2])
                      : 0.0;
  est.uncertainty = spread + est.grid_jitter;

  double allowed = 3.0 / std::sqrt(static_cast<double>(theta_grid));
  for (std::size_t s = 1; s < avg.size(); ++s) {
    if (avg[s] > avg[s - 1] + allowed) {
      est.flags.push_back("monotone-violation at k=" + std::to_string(k_schedule[s]));
    }
  }
  return est;
}

std::string LyapunovEstimate::to_json_text() const {
  ordered_json j;
  j["alpha"] = alpha;
  j["energy"] = energy;
  j["gamma"] = gamma;
  j["method"] = method;
  j["norm"] = norm;
  ordered_json sj = ordered_json::array();
  for (const auto& e : schedule) {
    sj.push_back({{"n", e.n}, {"theta_grid", e.theta_grid}, {"average", e.average}});
  }
  j["schedule"] = sj;
  j["uncertainty"] = uncertainty;
  j["grid_jitter"] = grid_jitter;
  j["flags"] = flags;
  return j.dump(2);
}

}  // namespace qplab
