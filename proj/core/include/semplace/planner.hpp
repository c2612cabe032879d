#ifndef SEMPLACE_PLANNER_HPP
#define SEMPLACE_PLANNER_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semplace/geometry.hpp"
#include "semplace/pose_prior.hpp"
#include "semplace/predicates.hpp"
#include "semplace/realism.hpp"

namespace semplace {

enum class PlanMode {
    Full,       // constrained CEM with the realism cost term
    MeanOnly,   // evaluate the prior component means, no CEM refinement
    PriorCost,  // -log prior density replaces the realism cost term
};

struct PlannerConfig {
    double lambda_f = 100.0;  // realism cost weight
    double lambda_rho = 1.0;  // predicate residual weight
    double eps_f = 0.5;       // realism constraint threshold; 0 disables the check
    double eps_rho = 0.5;     // goal-predicate constraint threshold
    std::size_t batch = 100;  // accepted samples per iteration (B)
    std::size_t iters = 5;    // CEM iterations (N)
    std::size_t n_elite = 10;
    double time_budget = 2.0;  // seconds of rejection sampling per iteration
    std::uint64_t seed = 0;
    PlanMode mode = PlanMode::Full;

    /// Deterministic cap on candidates drawn per iteration; the primary stop
    /// when reproducibility matters (the wall clock is only consulted between
    /// fixed-size chunks).
    std::size_t max_attempts = 20000;

    double var_floor_xyz = 0.005;  // surrogate std floor, meters
    double var_floor_yaw = 0.02;   // radians
    double in_view_fraction = 0.95;
    unsigned threads = 0;  // candidate evaluation workers; 0 = hardware

    PredicateConfig predicates;
    RealismConfig realism;
    PriorConfig prior;

    /// Throws std::invalid_argument on violated bounds (batch >= n_elite >= 2,
    /// iters >= 1, weights >= 0, thresholds in [0,1)).
    void validate() const;
};

/// Diagonal Gaussian refit to the elite set.
struct SurrogateDistribution {
    std::array<double, 4> mu{};     // (dx, dy, dz, yaw); yaw mean is circular
    std::array<double, 4> sigma{};  // clamped below by the variance floors
};

struct IterationStats {
    std::size_t attempted = 0;  // candidates examined this iteration
    std::size_t accepted = 0;
    std::size_t rejected_view = 0;     // filter order: view, then goal, then realism
    std::size_t rejected_goal = 0;
    std::size_t rejected_realism = 0;
    double best_cost = 0.0;  // best-so-far across iterations (non-increasing)
};

struct PlanResult {
    std::optional<PoseOffset> best_delta;
    double best_cost = 0.0;  // meaningful only when best_delta is set
    std::vector<IterationStats> iterations;

    std::size_t total_attempted() const;
    std::size_t total_accepted() const;

    /// Deterministic textual form (JSON); byte-identical for identical runs.
    std::string to_json() const;
};

/// The three model slots of the planner. Defaults are the geometric stand-ins
/// (heuristic prior, rule engine, heightmap scorer); a learned predictor can
/// be dropped into any slot without touching the planner.
struct PlannerModels {
    GmmPrior prior;

    /// Predicate values of the transformed query against the fixed anchor.
    std::function<PredicateVector(const PointCloud&)> predicates;

    /// Realism score f of the transformed query in the query-free scene.
    std::function<double(const PointCloud&)> realism;
};

/// Eq. 1 cost: lambda_f * |1 - f| + lambda_rho * ||p - rho_goal||_2, the
/// residual taken only over goal-specified indices. `scene` is the pre-move
/// scene containing the query segment.
double cost(const PoseOffset& delta, int query_id, int anchor_id, const SegmentedScene& scene,
            const PredicateGoal& goal, const PlannerConfig& cfg);

struct ConstraintCheck {
    bool realistic = false;
    bool goal_ok = false;
    bool in_view = false;

    bool all() const { return realistic && goal_ok && in_view; }
};

/// Eq. 3-5 as thresholded: f > eps_f (vacuously true when eps_f == 0),
/// every goal predicate > eps_rho, and the camera sees >= in_view_fraction of
/// the transformed query. The scene is transformed via transform_scene before
/// evaluation; `scene` is the pre-move scene containing the query.
ConstraintCheck check_constraints(const PoseOffset& delta, int query_id, int anchor_id,
                                  const SegmentedScene& scene, const PredicateGoal& goal,
                                  const PlannerConfig& cfg);

/// Per-dimension mean and std of the elites, yaw mean circular, stds clamped
/// to the variance floors. Throws std::invalid_argument on fewer than 2.
SurrogateDistribution fit_surrogate(const std::vector<PoseOffset>& elites,
                                    double var_floor_xyz = 0.005, double var_floor_yaw = 0.02);

/// Algorithm: iteration 1 rejection-samples from the prior, later iterations
/// from the surrogate refit to the elites; each accepted candidate is costed;
/// the lowest-cost feasible offset over all iterations is returned, or an
/// empty result when nothing was ever accepted (not an error). Deterministic
/// for a fixed seed and thread count independent.
PlanResult find_placement(const SegmentedScene& scene, int query_id, int anchor_id,
                          const PredicateGoal& goal, const PlannerConfig& cfg);

/// Same algorithm with caller-supplied model slots.
PlanResult find_placement(const SegmentedScene& scene, int query_id, int anchor_id,
                          const PredicateGoal& goal, const PlannerConfig& cfg,
                          const PlannerModels& models);

/// The default geometric model stack for a given planning problem (exposed so
/// tests and the harness can wrap the slots).
PlannerModels default_models(const SegmentedScene& scene, int query_id, int anchor_id,
                             const PredicateGoal& goal, const PlannerConfig& cfg);

}  // namespace semplace

#endif  // SEMPLACE_PLANNER_HPP
