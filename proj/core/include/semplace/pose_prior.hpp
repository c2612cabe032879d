#ifndef SEMPLACE_POSE_PRIOR_HPP
#define SEMPLACE_POSE_PRIOR_HPP

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "semplace/geometry.hpp"
#include "semplace/predicates.hpp"
#include "semplace/rng.hpp"

namespace semplace {

struct GmmComponent {
    double alpha = 1.0;                    // mixture weight
    std::array<double, 4> mu{};            // (dx, dy, dz, yaw)
    std::array<double, 4> sigma{};         // per-dimension std dev, > 0
};

/// Diagonal Gaussian mixture over pose offsets — the pose prior's output
/// contract. A trained mixture-density network can be dropped in by filling
/// these fields instead of calling build_heuristic_prior.
struct GmmPrior {
    std::vector<GmmComponent> components;

    /// When false the prior is 3-DoF: samples carry yaw = mu_yaw of the chosen
    /// component (no draw) and log_density integrates over xyz only.
    bool rotation_enabled = true;

    /// Throws std::invalid_argument when empty, weights don't sum to 1 within
    /// 1e-9, any weight is non-positive, or any sigma is non-positive.
    void validate() const;

    std::size_t sample_component(Rng& rng) const;

    /// Categorical component pick, then an independent Gaussian draw per
    /// dimension (order dx, dy, dz, yaw). Yaw is wrapped into (-pi, pi].
    PoseOffset sample(Rng& rng) const;

    /// Log of the mixture density at delta (sum over components of alpha
    /// times the diagonal-Gaussian density).
    double log_density(const PoseOffset& delta) const;

    /// Text block "K / one line per component: alpha mu[4] sigma[4]".
    std::string serialize() const;
    static GmmPrior deserialize(const std::string& text);
};

struct PriorConfig {
    double sigma_xy = 0.05;       // meters
    double sigma_z = 0.02;
    double sigma_yaw = M_PI / 8;  // radians
    double clearance = 0.02;      // gap between query and anchor boxes, meters
    std::size_t max_components = 5;
    bool planar_only = false;     // 3-DoF parity mode: no rotation dimension
};

/// Goal-conditioned heuristic mixture built from scene geometry, standing in
/// for the trained prior network:
///  - one component per required directional predicate, its mean moving the
///    query just past the anchor box along that axis (half query extent plus
///    clearance), cross axes aligned to the anchor centroid;
///  - a ring of components around the anchor for near (at half the near
///    threshold) and touching (at 1 mm), plus a stacked-on-top component for
///    touching;
///  - a coaxial component when centered is required;
///  - every mean's dz chosen so the query's lowest point meets the support
///    height under the component's xy position.
///
/// `scene` must not contain the query's own points (pass the scene with the
/// query segment removed); its clouds provide the support heights. Throws
/// std::invalid_argument for an empty or contradictory goal ("unsatisfiable
/// goal") and propagates empty-cloud errors.
GmmPrior build_heuristic_prior(const PointCloud& query, const PointCloud& anchor,
                               const SegmentedScene& scene, const PredicateGoal& goal,
                               const PriorConfig& cfg = {});

}  // namespace semplace

#endif  // SEMPLACE_POSE_PRIOR_HPP
