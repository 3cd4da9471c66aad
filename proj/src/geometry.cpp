// SPDX-License-Identifier: Apache-2.0

#include "thzirs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "thzirs/channel.hpp"

namespace thz {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec3 checked_incident_leg(const IrsPlacement& placement, const Scene& scene) {
  const Vec3 r0 = placement.anchor(scene.ceiling_height_m) - scene.ap;
  if (norm(r0) == 0.0) throw std::domain_error("AP coincides with the IRS reference element");
  return r0;
}

Vec3 checked_departure_leg(const IrsPlacement& placement, const Scene& scene, std::size_t ue) {
  if (ue >= scene.ues.size()) throw std::out_of_range("UE index " + std::to_string(ue) + " out of range");
  const Vec3 ru = scene.ues[ue] - placement.anchor(scene.ceiling_height_m);
  if (norm(ru) == 0.0) throw std::domain_error("UE coincides with the IRS reference element");
  return ru;
}

void check_element(const IrsPlacement& placement, std::size_t n) {
  if (n >= placement.element_count) throw std::out_of_range("IRS element index out of range");
}

}  // namespace

double norm(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

void Scene::validate() const {
  if (!(length_m > 0.0) || !(width_m > 0.0) || !(ceiling_height_m > 0.0))
    throw std::invalid_argument("room dimensions must be positive");
  if (!(ap.z <= ceiling_height_m)) throw std::invalid_argument("AP must not be above the ceiling");
  for (std::size_t u = 0; u < ues.size(); ++u) {
    const Vec3& w = ues[u];
    const bool inside = w.x >= 0.0 && w.x <= width_m && w.y >= 0.0 && w.y <= length_m && w.z >= 0.0 &&
                        w.z < ceiling_height_m;
    if (!inside) throw std::invalid_argument("UE " + std::to_string(u) + " lies outside the room");
  }
}

PlacementBox PlacementBox::for_array(const Scene& scene, std::size_t element_count, double spacing_m) {
  if (element_count == 0) throw std::invalid_argument("IRS needs at least one element");
  if (!(spacing_m > 0.0)) throw std::invalid_argument("IRS element spacing must be positive");
  const double span = static_cast<double>(element_count - 1) * spacing_m;
  if (span >= scene.length_m) throw std::invalid_argument("IRS array longer than the room");
  return {0.0, scene.width_m, 0.0, scene.length_m - span};
}

double wrap_angle(double radians) {
  double r = std::fmod(radians, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;  // fmod rounding at the top edge
  return r;
}

PhaseVector::PhaseVector(std::vector<double> angles) : angles_(std::move(angles)) {
  for (double& a : angles_) {
    if (!std::isfinite(a)) throw std::domain_error("non-finite phase");
    a = wrap_angle(a);
  }
}

PhaseVector PhaseVector::from_coefficients(std::span<const std::complex<double>> coefficients) {
  std::vector<double> angles(coefficients.size());
  std::transform(coefficients.begin(), coefficients.end(), angles.begin(),
                 [](std::complex<double> c) { return std::arg(c); });
  return PhaseVector(std::move(angles));
}

double phase_distance(const PhaseVector& a, const PhaseVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("phase vectors differ in length");
  double sum = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) sum += std::norm(a.coefficient(n) - b.coefficient(n));
  return std::sqrt(sum);
}

double incident_steering_phase(double frequency_hz, const IrsPlacement& placement, const Scene& scene,
                               std::size_t n) {
  check_element(placement, n);
  const Vec3 r0 = checked_incident_leg(placement, scene);
  return kTwoPi * frequency_hz / kSpeedOfLight * (placement.y - scene.ap.y) * static_cast<double>(n) *
         placement.spacing_m / norm(r0);
}

double departure_steering_phase(double frequency_hz, const IrsPlacement& placement, const Scene& scene,
                                std::size_t ue, std::size_t n) {
  check_element(placement, n);
  const Vec3 ru = checked_departure_leg(placement, scene, ue);
  return kTwoPi * frequency_hz / kSpeedOfLight * (scene.ues[ue].y - placement.y) * static_cast<double>(n) *
         placement.spacing_m / norm(ru);
}

double path_length(const IrsPlacement& placement, const Scene& scene, std::size_t ue) {
  return norm(checked_incident_leg(placement, scene)) + norm(checked_departure_leg(placement, scene, ue));
}

PhaseVector optimal_single_ue_phases(double frequency_hz, const IrsPlacement& placement, const Scene& scene,
                                     std::size_t ue) {
  const Vec3 r0 = checked_incident_leg(placement, scene);
  const Vec3 ru = checked_departure_leg(placement, scene, ue);
  const double slope = (scene.ues[ue].y - placement.y) / norm(ru) + (placement.y - scene.ap.y) / norm(r0);
  std::vector<double> angles(placement.element_count);
  for (std::size_t n = 0; n < angles.size(); ++n)
    angles[n] = kTwoPi * frequency_hz * static_cast<double>(n) * placement.spacing_m / kSpeedOfLight * slope;
  return PhaseVector(std::move(angles));
}

// ---------------------------------------------------------------------------
// Projected gradient descent on a sum of Euclidean distances.

namespace {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

double distance_sum(std::span<const DistanceTerm> terms, Point2 p) {
  double f = 0.0;
  for (const auto& t : terms) f += t.weight * std::hypot(p.x - t.x, p.y - t.y, t.height);
  return f;
}

Point2 distance_sum_gradient(std::span<const DistanceTerm> terms, Point2 p) {
  Point2 g;
  for (const auto& t : terms) {
    const double d = std::hypot(p.x - t.x, p.y - t.y, t.height);
    if (d <= 1e-300) continue;  // kink: zero is a valid subgradient component
    g.x += t.weight * (p.x - t.x) / d;
    g.y += t.weight * (p.y - t.y) / d;
  }
  return g;
}

Point2 project(const PlacementBox& box, Point2 p) {
  return {std::clamp(p.x, box.x_min, box.x_max), std::clamp(p.y, box.y_min, box.y_max)};
}

double projected_gradient_norm(const PlacementBox& box, Point2 p, Point2 g) {
  const Point2 q = project(box, {p.x - g.x, p.y - g.y});
  return std::hypot(q.x - p.x, q.y - p.y);
}

}  // namespace

PlacementResult minimize_distance_sum(std::span<const DistanceTerm> terms, const PlacementBox& box,
                                      double tolerance, int max_iterations) {
  if (terms.empty()) throw std::invalid_argument("distance objective needs at least one term");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (box.x_min > box.x_max || box.y_min > box.y_max) throw std::invalid_argument("empty placement box");

  // Start at the weighted centroid of the anchors, projected into the box.
  double wsum = 0.0;
  Point2 p;
  for (const auto& t : terms) {
    p.x += t.weight * t.x;
    p.y += t.weight * t.y;
    wsum += t.weight;
  }
  p = project(box, {p.x / wsum, p.y / wsum});

  constexpr double kArmijo = 1e-4;
  double f = distance_sum(terms, p);
  Point2 g = distance_sum_gradient(terms, p);
  double step = 1.0;

  PlacementResult result;
  int it = 0;
  for (; it < max_iterations; ++it) {
    const double residual = projected_gradient_norm(box, p, g);
    if (residual <= tolerance) {
      result.converged = true;
      break;
    }
    Point2 next;
    double f_next = 0.0;
    double trial = step;
    for (int bt = 0; bt < 60; ++bt) {
      next = project(box, {p.x - trial * g.x, p.y - trial * g.y});
      f_next = distance_sum(terms, next);
      const double moved2 = (next.x - p.x) * (next.x - p.x) + (next.y - p.y) * (next.y - p.y);
      if (f_next <= f - kArmijo / trial * moved2) break;
      trial *= 0.5;
    }
    const Point2 g_next = distance_sum_gradient(terms, next);
    // Barzilai-Borwein step for the next trial.
    const double sx = next.x - p.x;
    const double sy = next.y - p.y;
    const double yx = g_next.x - g.x;
    const double yy = g_next.y - g.y;
    const double sy_dot = sx * yx + sy * yy;
    step = sy_dot > 0.0 ? std::clamp((sx * sx + sy * sy) / sy_dot, 1e-6, 1e6) : std::min(2.0 * trial, 1e6);
    if (sx == 0.0 && sy == 0.0) {
      // No progress possible at machine precision.
      p = next;
      g = g_next;
      f = f_next;
      result.converged = projected_gradient_norm(box, p, g) <= std::max(tolerance, 1e-12);
      break;
    }
    p = next;
    f = f_next;
    g = g_next;
  }

  result.x = p.x;
  result.y = p.y;
  result.objective = f;
  result.projected_gradient = projected_gradient_norm(box, p, g);
  result.iterations = it;
  constexpr double kEdge = 1e-12;
  result.on_boundary = p.x <= box.x_min + kEdge || p.x >= box.x_max - kEdge || p.y <= box.y_min + kEdge ||
                       p.y >= box.y_max - kEdge;
  return result;
}

namespace {

DistanceTerm ap_term(const Scene& scene, double weight) {
  return {scene.ap.x, scene.ap.y, scene.ceiling_height_m - scene.ap.z, weight};
}

DistanceTerm ue_term(const Scene& scene, std::size_t u) {
  const Vec3& w = scene.ues.at(u);
  return {w.x, w.y, scene.ceiling_height_m - w.z, 1.0};
}

}  // namespace

PlacementResult solve_single_ue_placement(const Scene& scene, std::size_t ue, const PlacementBox& box,
                                          double tolerance) {
  const DistanceTerm terms[] = {ap_term(scene, 1.0), ue_term(scene, ue)};
  return minimize_distance_sum(terms, box, tolerance);
}

PlacementResult solve_min_total_distance(const Scene& scene, const PlacementBox& box, double tolerance) {
  if (scene.ues.empty()) throw std::invalid_argument("scene has no UEs");
  std::vector<DistanceTerm> terms;
  terms.reserve(scene.ues.size() + 1);
  // sum_u (D_0 + D_u) = U * D_0 + sum_u D_u
  terms.push_back(ap_term(scene, static_cast<double>(scene.ues.size())));
  for (std::size_t u = 0; u < scene.ues.size(); ++u) terms.push_back(ue_term(scene, u));
  return minimize_distance_sum(terms, box, tolerance);
}

}  // namespace thz
