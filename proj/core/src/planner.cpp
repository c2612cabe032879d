#include "semplace/planner.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "semplace/parallel.hpp"

namespace semplace {

namespace {

constexpr std::size_t kChunk = 64;
constexpr double kInf = std::numeric_limits<double>::infinity();

double goal_residual(const PredicateVector& pv, const std::vector<std::size_t>& goal_idx) {
    double s = 0.0;
    for (std::size_t i : goal_idx) {
        const double d = pv[i] - 1.0;
        s += d * d;
    }
    return std::sqrt(s);
}

bool goal_passes(const PredicateVector& pv, const std::vector<std::size_t>& goal_idx,
                 double eps_rho) {
    for (std::size_t i : goal_idx)
        if (!(pv[i] > eps_rho)) return false;
    return true;
}

SegmentedScene strip_query(const SegmentedScene& scene, int query_id) {
    SegmentedScene rest;
    rest.background_id = scene.background_id;
    rest.camera = scene.camera;
    for (const auto& [id, cloud] : scene.clouds)
        if (id != query_id) rest.clouds.emplace(id, cloud);
    return rest;
}

/// Counter-derived stream id: candidate k of iteration `iter`, scheduling
/// independent.
std::uint64_t candidate_stream(std::size_t iter, std::size_t k) {
    return (static_cast<std::uint64_t>(iter + 1) << 32) ^ static_cast<std::uint64_t>(k);
}

struct CandidateEval {
    bool in_view = false;
    bool goal_ok = false;
    bool realistic = false;
    bool feasible = false;
    double cost = 0.0;
};

struct Accepted {
    double cost = 0.0;
    PoseOffset delta;
};

}  // namespace

void PlannerConfig::validate() const {
    if (lambda_f < 0.0 || lambda_rho < 0.0)
        throw std::invalid_argument("cost weights must be non-negative");
    if (eps_f < 0.0 || eps_f >= 1.0 || eps_rho < 0.0 || eps_rho >= 1.0)
        throw std::invalid_argument("constraint thresholds must lie in [0, 1)");
    if (n_elite < 2) throw std::invalid_argument("n_elite must be at least 2");
    if (batch < n_elite) throw std::invalid_argument("batch must be at least n_elite");
    if (iters < 1) throw std::invalid_argument("iters must be at least 1");
    if (!(time_budget > 0.0)) throw std::invalid_argument("time budget must be positive");
    if (max_attempts < 1) throw std::invalid_argument("max_attempts must be at least 1");
    if (!(var_floor_xyz > 0.0) || !(var_floor_yaw > 0.0))
        throw std::invalid_argument("variance floors must be positive");
    if (in_view_fraction < 0.0 || in_view_fraction > 1.0)
        throw std::invalid_argument("in_view_fraction must lie in [0, 1]");
}

std::size_t PlanResult::total_attempted() const {
    std::size_t n = 0;
    for (const IterationStats& it : iterations) n += it.attempted;
    return n;
}

std::size_t PlanResult::total_accepted() const {
    std::size_t n = 0;
    for (const IterationStats& it : iterations) n += it.accepted;
    return n;
}

std::string PlanResult::to_json() const {
    nlohmann::ordered_json j;
    j["found"] = best_delta.has_value();
    if (best_delta) {
        j["best_cost"] = best_cost;
        j["best_delta"] = {{"dx", best_delta->dx},
                           {"dy", best_delta->dy},
                           {"dz", best_delta->dz},
                           {"yaw", best_delta->yaw}};
    } else {
        j["best_cost"] = nullptr;
        j["best_delta"] = nullptr;
    }
    j["total_attempted"] = total_attempted();
    j["total_accepted"] = total_accepted();
    j["iterations"] = nlohmann::ordered_json::array();
    for (const IterationStats& it : iterations) {
        nlohmann::ordered_json row;
        row["attempted"] = it.attempted;
        row["accepted"] = it.accepted;
        row["rejected_view"] = it.rejected_view;
        row["rejected_goal"] = it.rejected_goal;
        row["rejected_realism"] = it.rejected_realism;
        if (std::isfinite(it.best_cost)) row["best_cost"] = it.best_cost;
        else row["best_cost"] = nullptr;
        j["iterations"].push_back(std::move(row));
    }
    return j.dump(2) + "\n";
}

double cost(const PoseOffset& delta, int query_id, int anchor_id, const SegmentedScene& scene,
            const PredicateGoal& goal, const PlannerConfig& cfg) {
    goal.validate();
    const PointCloud moved = apply_offset(scene.cloud(query_id), delta);
    double c = 0.0;
    if (cfg.lambda_f > 0.0) {
        const SegmentedScene rest = strip_query(scene, query_id);
        const double f = score_placement(moved, rest, cfg.realism).score;
        c += cfg.lambda_f * std::abs(1.0 - f);
    }
    if (cfg.lambda_rho > 0.0) {
        const PredicateEvaluator eval(scene.cloud(anchor_id), cfg.predicates);
        c += cfg.lambda_rho * goal_residual(eval.classify(moved), goal.required);
    }
    return c;
}

ConstraintCheck check_constraints(const PoseOffset& delta, int query_id, int anchor_id,
                                  const SegmentedScene& scene, const PredicateGoal& goal,
                                  const PlannerConfig& cfg) {
    goal.validate();
    const PointCloud moved = apply_offset(scene.cloud(query_id), delta);
    ConstraintCheck out;
    // A scene without a camera has no frustum to violate.
    out.in_view =
        scene.camera.fx <= 0.0 || in_view(moved, scene.camera, cfg.in_view_fraction);
    const PredicateEvaluator eval(scene.cloud(anchor_id), cfg.predicates);
    out.goal_ok = goal_passes(eval.classify(moved), goal.required, cfg.eps_rho);
    if (cfg.eps_f <= 0.0) {
        out.realistic = true;  // Eq. 3 vacuous; the scorer is not consulted
    } else {
        const SegmentedScene rest = strip_query(scene, query_id);
        out.realistic = score_placement(moved, rest, cfg.realism).score > cfg.eps_f;
    }
    return out;
}

SurrogateDistribution fit_surrogate(const std::vector<PoseOffset>& elites, double var_floor_xyz,
                                    double var_floor_yaw) {
    if (elites.size() < 2) throw std::invalid_argument("insufficient elites");
    SurrogateDistribution s;
    const double n = static_cast<double>(elites.size());
    for (int dim = 0; dim < 3; ++dim) {
        double mean = 0.0;
        for (const PoseOffset& e : elites) mean += e.as_array()[dim];
        mean /= n;
        double ss = 0.0;
        for (const PoseOffset& e : elites) {
            const double d = e.as_array()[dim] - mean;
            ss += d * d;
        }
        s.mu[dim] = mean;
        s.sigma[dim] = std::max(var_floor_xyz, std::sqrt(ss / (n - 1.0)));
    }
    double cs = 0.0, sn = 0.0;
    for (const PoseOffset& e : elites) {
        cs += std::cos(e.yaw);
        sn += std::sin(e.yaw);
    }
    const double yaw_mean = normalize_angle(std::atan2(sn, cs));
    double ss = 0.0;
    for (const PoseOffset& e : elites) {
        const double d = normalize_angle(e.yaw - yaw_mean);
        ss += d * d;
    }
    s.mu[3] = yaw_mean;
    s.sigma[3] = std::max(var_floor_yaw, std::sqrt(ss / (n - 1.0)));
    return s;
}

namespace {

/// Per-candidate constraint filter and cost, shared by every mode. The filter
/// short-circuits in tally order (view, goal, realism); the realism score is
/// computed at most once and reused by the cost.
class CandidateScorer {
public:
    CandidateScorer(const PointCloud& query, const SegmentedScene& scene,
                    const PredicateGoal& goal, const PlannerConfig& cfg,
                    const PlannerModels& models)
        : query_(query),
          camera_(scene.camera),
          goal_(goal),
          cfg_(cfg),
          models_(models),
          has_camera_(scene.camera.fx > 0.0) {}

    CandidateEval operator()(const PoseOffset& delta) const {
        CandidateEval ev;
        const PointCloud moved = apply_offset(query_, delta);
        ev.in_view =
            !has_camera_ || in_view(moved, camera_, cfg_.in_view_fraction);
        if (!ev.in_view) return ev;
        const PredicateVector pv = models_.predicates(moved);
        ev.goal_ok = goal_passes(pv, goal_.required, cfg_.eps_rho);
        if (!ev.goal_ok) return ev;
        double f = std::numeric_limits<double>::quiet_NaN();
        if (cfg_.eps_f > 0.0) {
            f = models_.realism(moved);
            ev.realistic = f > cfg_.eps_f;
            if (!ev.realistic) return ev;
        } else {
            ev.realistic = true;
        }
        ev.feasible = true;
        if (cfg_.mode == PlanMode::PriorCost) {
            ev.cost = -models_.prior.log_density(delta) +
                      cfg_.lambda_rho * goal_residual(pv, goal_.required);
        } else {
            double c = 0.0;
            if (cfg_.lambda_f > 0.0) {
                if (std::isnan(f)) f = models_.realism(moved);
                c += cfg_.lambda_f * std::abs(1.0 - f);
            }
            c += cfg_.lambda_rho * goal_residual(pv, goal_.required);
            ev.cost = c;
        }
        return ev;
    }

private:
    const PointCloud& query_;
    const CameraModel& camera_;
    const PredicateGoal& goal_;
    const PlannerConfig& cfg_;
    const PlannerModels& models_;
    bool has_camera_;
};

void merge_tally(IterationStats& stats, const CandidateEval& ev) {
    ++stats.attempted;
    if (!ev.in_view) ++stats.rejected_view;
    else if (!ev.goal_ok) ++stats.rejected_goal;
    else if (!ev.realistic) ++stats.rejected_realism;
}

}  // namespace

PlanResult find_placement(const SegmentedScene& scene, int query_id, int anchor_id,
                          const PredicateGoal& goal, const PlannerConfig& cfg,
                          const PlannerModels& models) {
    cfg.validate();
    goal.validate();
    models.prior.validate();
    if (query_id == anchor_id)
        throw std::invalid_argument("query and anchor must be distinct objects");
    const PointCloud& query = scene.cloud(query_id);
    scene.cloud(anchor_id);
    if (query.empty()) throw std::invalid_argument("query segment is empty");

    const CandidateScorer score(query, scene, goal, cfg, models);

    PlanResult result;
    double best_cost = kInf;
    std::optional<PoseOffset> best;

    if (cfg.mode == PlanMode::MeanOnly) {
        // The prior's component means are the entire candidate set.
        IterationStats stats;
        for (const GmmComponent& comp : models.prior.components) {
            const PoseOffset delta =
                PoseOffset::make(comp.mu[0], comp.mu[1], comp.mu[2], comp.mu[3]);
            const CandidateEval ev = score(delta);
            merge_tally(stats, ev);
            if (!ev.feasible) continue;
            ++stats.accepted;
            if (ev.cost < best_cost) {
                best_cost = ev.cost;
                best = delta;
            }
        }
        stats.best_cost = best_cost;
        result.iterations.push_back(stats);
        result.best_delta = best;
        result.best_cost = best ? best_cost : 0.0;
        return result;
    }

    SurrogateDistribution surrogate;
    bool have_surrogate = false;
    const bool sample_yaw = models.prior.rotation_enabled;

    for (std::size_t iter = 0; iter < cfg.iters; ++iter) {
        IterationStats stats;
        std::vector<Accepted> accepted;
        accepted.reserve(cfg.batch);
        const auto deadline = std::chrono::steady_clock::now() +
                              std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                  std::chrono::duration<double>(cfg.time_budget));

        std::size_t drawn = 0;
        while (accepted.size() < cfg.batch && drawn < cfg.max_attempts &&
               std::chrono::steady_clock::now() < deadline) {
            const std::size_t chunk = std::min(kChunk, cfg.max_attempts - drawn);
            std::vector<PoseOffset> cand(chunk);
            for (std::size_t k = 0; k < chunk; ++k) {
                Rng rng(cfg.seed, candidate_stream(iter, drawn + k));
                if (!have_surrogate) {
                    cand[k] = models.prior.sample(rng);
                } else {
                    const double dx = rng.normal(surrogate.mu[0], surrogate.sigma[0]);
                    const double dy = rng.normal(surrogate.mu[1], surrogate.sigma[1]);
                    const double dz = rng.normal(surrogate.mu[2], surrogate.sigma[2]);
                    const double yaw =
                        sample_yaw ? rng.normal(surrogate.mu[3], surrogate.sigma[3])
                                   : surrogate.mu[3];
                    cand[k] = PoseOffset::make(dx, dy, dz, yaw);
                }
            }
            std::vector<CandidateEval> evals(chunk);
            parallel_for(
                chunk, [&](std::size_t k) { evals[k] = score(cand[k]); }, cfg.threads);
            for (std::size_t k = 0; k < chunk && accepted.size() < cfg.batch; ++k) {
                merge_tally(stats, evals[k]);
                if (evals[k].feasible) accepted.push_back({evals[k].cost, cand[k]});
            }
            drawn += chunk;
        }

        stats.accepted = accepted.size();
        for (const Accepted& a : accepted) {
            if (a.cost < best_cost) {
                best_cost = a.cost;
                best = a.delta;
            }
        }
        stats.best_cost = best_cost;
        result.iterations.push_back(stats);

        if (accepted.size() >= 2 && iter + 1 < cfg.iters) {
            std::stable_sort(accepted.begin(), accepted.end(),
                             [](const Accepted& a, const Accepted& b) { return a.cost < b.cost; });
            std::vector<PoseOffset> elites;
            const std::size_t n = std::min(cfg.n_elite, accepted.size());
            elites.reserve(n);
            for (std::size_t i = 0; i < n; ++i) elites.push_back(accepted[i].delta);
            surrogate = fit_surrogate(elites, cfg.var_floor_xyz, cfg.var_floor_yaw);
            have_surrogate = true;
        }
        // Fewer than two acceptances: keep sampling from the previous
        // distribution next iteration (the prior if none was ever fit).
    }

    result.best_delta = best;
    result.best_cost = best ? best_cost : 0.0;
    return result;
}

PlannerModels default_models(const SegmentedScene& scene, int query_id, int anchor_id,
                             const PredicateGoal& goal, const PlannerConfig& cfg) {
    goal.validate();
    const PointCloud& query = scene.cloud(query_id);
    const PointCloud& anchor = scene.cloud(anchor_id);
    auto rest = std::make_shared<SegmentedScene>(strip_query(scene, query_id));
    auto evaluator = std::make_shared<PredicateEvaluator>(anchor, cfg.predicates);

    PlannerModels models;
    models.prior = build_heuristic_prior(query, anchor, *rest, goal, cfg.prior);
    models.predicates = [evaluator](const PointCloud& moved) {
        return evaluator->classify(moved);
    };
    const RealismConfig realism_cfg = cfg.realism;
    models.realism = [rest, realism_cfg](const PointCloud& moved) {
        return score_placement(moved, *rest, realism_cfg).score;
    };
    return models;
}

PlanResult find_placement(const SegmentedScene& scene, int query_id, int anchor_id,
                          const PredicateGoal& goal, const PlannerConfig& cfg) {
    return find_placement(scene, query_id, anchor_id, goal, cfg,
                          default_models(scene, query_id, anchor_id, goal, cfg));
}

}  // namespace semplace
