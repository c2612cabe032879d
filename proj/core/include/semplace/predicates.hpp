#ifndef SEMPLACE_PREDICATES_HPP
#define SEMPLACE_PREDICATES_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "semplace/geometry.hpp"

namespace semplace {

/// The nine spatial relations, in wire order. The order is part of the file
/// and CLI contract — do not reorder.
enum class Predicate : std::size_t {
    LeftOf = 0,
    RightOf,
    InFrontOf,
    Behind,
    Above,
    Below,
    Near,
    Touching,
    Centered,
};

inline constexpr std::size_t kNumPredicates = 9;

/// Lowercase snake-case name, e.g. "left_of". Throws on a bad index.
const std::string& predicate_name(std::size_t index);
inline const std::string& predicate_name(Predicate p) {
    return predicate_name(static_cast<std::size_t>(p));
}

std::optional<std::size_t> predicate_index(const std::string& name);

/// Ordered predicate values in [0,1]. The rule engine emits only 0 or 1;
/// the contract admits probabilities so a learned classifier can slot in.
struct PredicateVector {
    std::array<double, kNumPredicates> values{};

    double operator[](std::size_t i) const { return values[i]; }
    double operator[](Predicate p) const { return values[static_cast<std::size_t>(p)]; }
    double& operator[](std::size_t i) { return values[i]; }

    bool operator==(const PredicateVector&) const = default;
};

/// Set of predicate indices that must be true at the goal pose.
struct PredicateGoal {
    std::vector<std::size_t> required;

    bool contains(Predicate p) const;

    /// Throws std::invalid_argument when empty, out of range, duplicated, or
    /// self-contradictory (opposite directions, or a lateral direction
    /// combined with centered).
    void validate() const;

    /// Parses a comma-separated name list, e.g. "left_of,near".
    static PredicateGoal parse(const std::string& csv);
    std::string to_string() const;
};

struct DirectionalConfig {
    double theta = M_PI / 4;  // trapezoid half-angle, in (0, pi/2)
};

struct PredicateConfig {
    DirectionalConfig directional;
    double touching_threshold = 0.0025;  // meters, sampled-cloud evaluation
    double near_threshold = 0.05;
    double centered_threshold = 0.001;   // xy centroid distance
};

struct DirectionalResult {
    bool left_of = false;
    bool right_of = false;
    bool in_front_of = false;
    bool behind = false;
    bool above = false;
    bool below = false;

    bool operator==(const DirectionalResult&) const = default;
};

/// Precomputed bounding-box summary of one cloud, enough to run the six
/// directional rules without touching the points again.
struct BoxSummary {
    Point3 centroid;
    Aabb box;
};

BoxSummary summarize(const PointCloud& cloud);

/// The six-rule directional test for one direction. `axis` is 0/1/2 for
/// x/y/z; `positive` picks the +axis side. True iff:
///   rule 5:   the query centroid lies strictly beyond the anchor box face,
///   rules 1-4: in both cross axes the query centroid stays inside the
///              anchor box extended by tan(theta) times the rule-5 slack,
///   rule 6:   every query box corner lies strictly beyond the anchor centroid.
bool directional_rule(const BoxSummary& query, const BoxSummary& anchor, int axis, bool positive,
                      const DirectionalConfig& cfg);

/// All six directions for the ordered pair (query, anchor). left/front are
/// the -x/-y sides of the anchor, above the +z side; each opposite relation
/// is the same rule with the roles swapped, which makes antisymmetry exact:
/// right_of(a,b) == left_of(b,a) by construction.
DirectionalResult eval_directional(const PointCloud& query, const PointCloud& anchor,
                                   const DirectionalConfig& cfg = {});

/// min_distance(query, anchor) <= threshold.
bool eval_touching(const PointCloud& query, const PointCloud& anchor, double threshold);
bool eval_near(const PointCloud& query, const PointCloud& anchor, double threshold);

/// Horizontal (xy) centroid distance <= threshold.
bool eval_centered(const PointCloud& query, const PointCloud& anchor, double threshold);

/// Assembles the full nine-value vector from the evaluators above.
PredicateVector classify(const PointCloud& query, const PointCloud& anchor,
                         const PredicateConfig& cfg = {});

/// Anchor-side state cached once so many query poses can be classified
/// against the same anchor cheaply (the planner's inner loop).
class PredicateEvaluator {
  public:
    PredicateEvaluator(PointCloud anchor, PredicateConfig cfg = {});

    PredicateVector classify(const PointCloud& query) const;

    /// True iff every goal-required predicate value exceeds eps_rho.
    bool goal_satisfied(const PointCloud& query, const PredicateGoal& goal,
                        double eps_rho) const;

    const PredicateConfig& config() const { return cfg_; }
    const BoxSummary& anchor_summary() const { return anchor_summary_; }

  private:
    PredicateVector classify_summary(const BoxSummary& query, bool near_hit,
                                     bool touch_hit) const;

    PointCloud anchor_;
    BoxSummary anchor_summary_;
    VoxelIndex proximity_;  // cell = near threshold; serves near and touching
    PredicateConfig cfg_;
};

}  // namespace semplace

#endif  // SEMPLACE_PREDICATES_HPP
