// SPDX-License-Identifier: Apache-2.0
//
// Room geometry, IRS array layout, steering phases and the convex
// placement problems (closest IRS for one UE, least total distance).

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace thz {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
double norm(const Vec3& v);

/// Rectangular service area [0, width] x [0, length] under a flat ceiling.
/// x runs along the width, y along the length; the IRS is parallel to y.
struct Scene {
  double length_m = 8.0;
  double width_m = 5.0;
  double ceiling_height_m = 3.0;
  Vec3 ap{0.0, 0.0, 2.0};
  std::vector<Vec3> ues;

  void validate() const;
};

/// Uniform linear array on the ceiling; element n (0-based) sits at
/// (x, y + n * spacing, H).
struct IrsPlacement {
  std::size_t element_count = 1;
  double spacing_m = 0.005;
  double x = 0.0;
  double y = 0.0;

  [[nodiscard]] Vec3 element(std::size_t n, double ceiling_height_m) const {
    return {x, y + static_cast<double>(n) * spacing_m, ceiling_height_m};
  }
  [[nodiscard]] Vec3 anchor(double ceiling_height_m) const { return element(0, ceiling_height_m); }
};

/// Closed box of admissible anchor positions: the whole array must fit
/// inside the room along the y wall.
struct PlacementBox {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  static PlacementBox for_array(const Scene& scene, std::size_t element_count, double spacing_m);
  [[nodiscard]] bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
};

/// Unit-modulus reflection coefficients stored as angles in [0, 2pi),
/// so |Gamma_n| = 1 holds exactly.
class PhaseVector {
 public:
  PhaseVector() = default;
  explicit PhaseVector(std::vector<double> angles);
  static PhaseVector zeros(std::size_t n) { return PhaseVector(std::vector<double>(n, 0.0)); }
  static PhaseVector from_coefficients(std::span<const std::complex<double>> coefficients);

  [[nodiscard]] std::size_t size() const { return angles_.size(); }
  [[nodiscard]] double angle(std::size_t n) const { return angles_[n]; }
  [[nodiscard]] std::complex<double> coefficient(std::size_t n) const { return std::polar(1.0, angles_[n]); }
  [[nodiscard]] const std::vector<double>& angles() const { return angles_; }

 private:
  std::vector<double> angles_;
};

/// Euclidean distance between coefficient vectors; wrap-safe.
double phase_distance(const PhaseVector& a, const PhaseVector& b);

double wrap_angle(double radians);  // into [0, 2pi)

/// Per-element phase lag of the incoming wave relative to the first element.
double incident_steering_phase(double frequency_hz, const IrsPlacement& placement,
                               const Scene& scene, std::size_t n);
/// Per-element phase lag of the departing wave towards UE `ue`.
double departure_steering_phase(double frequency_hz, const IrsPlacement& placement,
                                const Scene& scene, std::size_t ue, std::size_t n);

/// |r0| + |ru| from AP via the reference element to the UE.
double path_length(const IrsPlacement& placement, const Scene& scene, std::size_t ue);

/// Phases aligning every element's contribution for one UE (N^2 array gain).
PhaseVector optimal_single_ue_phases(double frequency_hz, const IrsPlacement& placement,
                                     const Scene& scene, std::size_t ue);

struct PlacementResult {
  double x = 0.0;
  double y = 0.0;
  double objective = 0.0;          // summed path length, m
  double projected_gradient = 0.0;  // first-order residual at (x, y)
  int iterations = 0;
  bool converged = false;
  bool on_boundary = false;
};

/// Point minimising sum_k weight_k * sqrt((X - x_k)^2 + (Y - y_k)^2 + h_k^2)
/// over a closed box by projected gradient descent with backtracking.
struct DistanceTerm {
  double x = 0.0;
  double y = 0.0;
  double height = 0.0;  // vertical offset to the ceiling
  double weight = 1.0;
};

PlacementResult minimize_distance_sum(std::span<const DistanceTerm> terms, const PlacementBox& box,
                                      double tolerance = 1e-8, int max_iterations = 100000);

/// IRS anchor minimising d_u for one UE.
PlacementResult solve_single_ue_placement(const Scene& scene, std::size_t ue, const PlacementBox& box,
                                          double tolerance = 1e-8);

/// IRS anchor minimising sum_u d_u over all UEs.
PlacementResult solve_min_total_distance(const Scene& scene, const PlacementBox& box,
                                         double tolerance = 1e-8);

}  // namespace thz
