#include "rocs/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rocs {

void RefinementOptions::validate() const {
  if (n_min < 2) throw std::invalid_argument("n_min must be at least 2");
  if (n_max < n_min) throw std::invalid_argument("n_max must be >= n_min");
  if (!(mesh_tolerance > 0)) throw std::invalid_argument("mesh tolerance must be positive");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
  if (!(sim.tolerance > 0)) throw std::invalid_argument("ode tolerance must be positive");
}

int p_refine_count(double e_max, double eps) {
  if (!(e_max > eps))
    throw std::invalid_argument("point increase requires the error to exceed tolerance");
  const int p = static_cast<int>(std::ceil(std::log10(e_max / eps)));
  return std::max(1, p);
}

std::vector<double> h_refine_split(int n_next, int n_min, double tau_left,
                                   double tau_right) {
  if (!(tau_right > tau_left)) throw std::invalid_argument("degenerate interval");
  const int h = std::max(2, static_cast<int>(std::ceil(double(n_next) / n_min)));
  std::vector<double> pts(h + 1);
  for (int i = 0; i <= h; ++i)
    pts[i] = tau_left + (tau_right - tau_left) * double(i) / h;
  pts.front() = tau_left;
  pts.back() = tau_right;
  return pts;
}

int p_reduce_count(double e_max, double eps, int n_k, int n_min, int n_max) {
  if (e_max > eps)
    throw std::invalid_argument("point reduction requires the error to be within tolerance");
  const double floor_e = std::max(e_max, 1e-16);
  const int delta = n_min + n_max - n_k;
  const double p = std::floor(std::log10(eps / floor_e) / delta);
  return std::max(0, static_cast<int>(p));
}

std::vector<std::pair<int, double>> plan_merges(
    const ErrorReport& report, const std::vector<std::pair<int, double>>& merged_errors,
    double eps) {
  struct Candidate {
    int k;
    double pair_error;
    double score;
  };
  std::vector<Candidate> cands;
  for (const auto& [k, ebar] : merged_errors) {
    if (!(ebar <= eps)) continue;
    const auto& a = report.intervals[k];
    const auto& b = report.intervals[k + 1];
    if (!a.usable() || !b.usable()) continue;
    if (a.e_max > eps || b.e_max > eps) continue;
    cands.push_back({k, ebar, std::max({a.e_max, b.e_max, ebar})});
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
    if (x.score != y.score) return x.score < y.score;
    return x.k < y.k;
  });
  std::vector<std::pair<int, double>> chosen;
  std::vector<bool> taken(report.intervals.size(), false);
  for (const auto& c : cands) {
    if (taken[c.k] || taken[c.k + 1]) continue;
    taken[c.k] = taken[c.k + 1] = true;
    chosen.emplace_back(c.k, c.pair_error);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

RefinementPlan refine(const Mesh& mesh, const ErrorReport& report,
                      const std::vector<std::pair<int, double>>& merged_errors,
                      const RefinementOptions& opts) {
  const int K = mesh.intervals();
  if (static_cast<int>(report.intervals.size()) != K)
    throw std::invalid_argument("error report does not match the mesh");

  RefinementPlan plan;
  plan.actions.assign(K, {});
  plan.merged_pairs = plan_merges(report, merged_errors, opts.mesh_tolerance);
  std::vector<int> merge_left(K, 0);
  for (const auto& [k, ebar] : plan.merged_pairs) merge_left[k] = 1;

  auto& pts = plan.next_mesh.points;
  auto& cnt = plan.next_mesh.colloc;
  pts.push_back(mesh.points.front());
  for (int k = 0; k < K; ++k) {
    const auto& info = report.intervals[k];
    const int n_k = mesh.colloc[k];
    if (!info.usable()) {
      // No estimate at all: split in half to shorten whatever made both
      // propagations fail.
      const auto split =
          h_refine_split(2 * opts.n_min, opts.n_min, mesh.points[k], mesh.points[k + 1]);
      plan.actions[k] = {ActionKind::h_refine, static_cast<int>(split.size()) - 1};
      for (size_t i = 1; i < split.size(); ++i) {
        pts.push_back(split[i]);
        cnt.push_back(opts.n_min);
      }
      continue;
    }
    if (info.e_max > opts.mesh_tolerance) {
      const int p = p_refine_count(info.e_max, opts.mesh_tolerance);
      if (n_k + p > opts.n_max) {
        const auto split = h_refine_split(n_k + p, opts.n_min, mesh.points[k],
                                          mesh.points[k + 1]);
        plan.actions[k] = {ActionKind::h_refine, static_cast<int>(split.size()) - 1};
        for (size_t i = 1; i < split.size(); ++i) {
          pts.push_back(split[i]);
          cnt.push_back(opts.n_min);
        }
      } else {
        plan.actions[k] = {ActionKind::p_refine, p};
        pts.push_back(mesh.points[k + 1]);
        cnt.push_back(n_k + p);
      }
      continue;
    }
    if (merge_left[k]) {
      // Merged intervals keep the larger count and skip reduction this round.
      plan.actions[k] = {ActionKind::merge_with_next, 0};
      plan.actions[k + 1] = {ActionKind::none, 0};
      pts.push_back(mesh.points[k + 2]);
      cnt.push_back(std::max(n_k, mesh.colloc[k + 1]));
      ++k;
      continue;
    }
    const int p =
        p_reduce_count(info.e_max, opts.mesh_tolerance, n_k, opts.n_min, opts.n_max);
    const int reduced = std::max(opts.n_min, n_k - p);
    plan.actions[k] = {reduced < n_k ? ActionKind::p_reduce : ActionKind::none,
                       n_k - reduced};
    pts.push_back(mesh.points[k + 1]);
    cnt.push_back(reduced);
  }
  plan.next_mesh.validate();
  for (int n : cnt)
    if (n < opts.n_min || n > opts.n_max)
      throw std::logic_error("planned collocation count escapes the configured range");
  return plan;
}

}  // namespace rocs
