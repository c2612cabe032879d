#include "semplace/pose_prior.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace semplace {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2*pi)

double component_log_density(const GmmComponent& c, const std::array<double, 4>& v, int dims) {
    double lp = 0.0;
    for (int d = 0; d < dims; ++d) {
        const double z = (v[d] - c.mu[d]) / c.sigma[d];
        lp += -0.5 * (z * z + kLogTwoPi) - std::log(c.sigma[d]);
    }
    return lp;
}

}  // namespace

void GmmPrior::validate() const {
    if (components.empty()) throw std::invalid_argument("prior has no components");
    double total = 0.0;
    for (const GmmComponent& c : components) {
        if (!(c.alpha > 0.0)) throw std::invalid_argument("component weight must be positive");
        for (double s : c.sigma)
            if (!(s > 0.0)) throw std::invalid_argument("component sigma must be positive");
        for (double m : c.mu)
            if (!std::isfinite(m)) throw std::invalid_argument("component mean must be finite");
        total += c.alpha;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("component weights must sum to 1");
}

std::size_t GmmPrior::sample_component(Rng& rng) const {
    std::vector<double> weights(components.size());
    for (std::size_t i = 0; i < components.size(); ++i) weights[i] = components[i].alpha;
    return rng.categorical(weights);
}

PoseOffset GmmPrior::sample(Rng& rng) const {
    const GmmComponent& c = components[sample_component(rng)];
    std::array<double, 4> v{};
    const int dims = rotation_enabled ? 4 : 3;
    for (int d = 0; d < dims; ++d) v[d] = rng.normal(c.mu[d], c.sigma[d]);
    if (!rotation_enabled) v[3] = c.mu[3];
    return PoseOffset::make(v[0], v[1], v[2], v[3]);
}

double GmmPrior::log_density(const PoseOffset& delta) const {
    const std::array<double, 4> v = delta.as_array();
    const int dims = rotation_enabled ? 4 : 3;
    // log-sum-exp over components
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(components.size());
    for (std::size_t i = 0; i < components.size(); ++i) {
        terms[i] = std::log(components[i].alpha) + component_log_density(components[i], v, dims);
        max_term = std::max(max_term, terms[i]);
    }
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - max_term);
    return max_term + std::log(sum);
}

std::string GmmPrior::serialize() const {
    std::string out = fmt::format("{} {}\n", components.size(), rotation_enabled ? 1 : 0);
    for (const GmmComponent& c : components)
        out += fmt::format("{:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g} "
                           "{:.17g}\n",
                           c.alpha, c.mu[0], c.mu[1], c.mu[2], c.mu[3], c.sigma[0], c.sigma[1],
                           c.sigma[2], c.sigma[3]);
    return out;
}

GmmPrior GmmPrior::deserialize(const std::string& text) {
    std::istringstream in(text);
    std::size_t k = 0;
    int rot = 1;
    if (!(in >> k >> rot)) throw std::runtime_error("malformed prior header");
    GmmPrior prior;
    prior.rotation_enabled = rot != 0;
    for (std::size_t i = 0; i < k; ++i) {
        GmmComponent c;
        if (!(in >> c.alpha >> c.mu[0] >> c.mu[1] >> c.mu[2] >> c.mu[3] >> c.sigma[0] >>
              c.sigma[1] >> c.sigma[2] >> c.sigma[3]))
            throw std::runtime_error("malformed prior component");
        prior.components.push_back(c);
    }
    prior.validate();
    return prior;
}

namespace {

/// Highest support surface under an axis-aligned footprint: max z over scene
/// points whose xy falls inside the box, or the scene's lowest z when the
/// footprint hangs over nothing.
double support_height(const SegmentedScene& scene, double min_x, double max_x, double min_y,
                      double max_y) {
    double best = -std::numeric_limits<double>::infinity();
    double floor = std::numeric_limits<double>::infinity();
    for (const auto& [id, cloud] : scene.clouds) {
        for (const Point3& p : cloud) {
            floor = std::min(floor, p.z);
            if (p.x < min_x || p.x > max_x || p.y < min_y || p.y > max_y) continue;
            best = std::max(best, p.z);
        }
    }
    if (std::isinf(best)) return std::isinf(floor) ? 0.0 : floor;
    return best;
}

struct Target {
    double x;
    double y;
};

}  // namespace

GmmPrior build_heuristic_prior(const PointCloud& query, const PointCloud& anchor,
                               const SegmentedScene& scene, const PredicateGoal& goal,
                               const PriorConfig& cfg) {
    goal.validate();
    const BoxSummary q = summarize(query);
    const BoxSummary a = summarize(anchor);
    const Point3 q_half = q.box.extent() * 0.5;
    const double touch_gap = 0.001;

    // Lateral gap between the query and anchor boxes for directional targets;
    // shrinks when the goal also demands contact or nearness.
    double gap = cfg.clearance;
    if (goal.contains(Predicate::Touching)) gap = touch_gap;
    else if (goal.contains(Predicate::Near)) gap = std::min(gap, 0.025);

    std::vector<Target> targets;
    bool stacked = false;   // one component directly on top of the anchor
    bool under = false;     // one component tucked under an elevated anchor

    const auto lateral = [&](int axis, double sign, double g) {
        Target t{a.centroid.x, a.centroid.y};
        const double half = axis == 0 ? q_half.x : q_half.y;
        const double face = axis == 0 ? (sign > 0 ? a.box.max.x : a.box.min.x)
                                      : (sign > 0 ? a.box.max.y : a.box.min.y);
        const double pos = face + sign * (half + g);
        if (axis == 0) t.x = pos;
        else t.y = pos;
        targets.push_back(t);
    };

    const bool has_directional =
        goal.contains(Predicate::LeftOf) || goal.contains(Predicate::RightOf) ||
        goal.contains(Predicate::InFrontOf) || goal.contains(Predicate::Behind) ||
        goal.contains(Predicate::Above) || goal.contains(Predicate::Below);

    if (goal.contains(Predicate::LeftOf)) lateral(0, -1.0, gap);
    if (goal.contains(Predicate::RightOf)) lateral(0, +1.0, gap);
    if (goal.contains(Predicate::InFrontOf)) lateral(1, -1.0, gap);
    if (goal.contains(Predicate::Behind)) lateral(1, +1.0, gap);
    if (goal.contains(Predicate::Above)) stacked = true;
    if (goal.contains(Predicate::Below)) under = true;

    if (!has_directional) {
        if (goal.contains(Predicate::Centered)) {
            stacked = true;
        } else if (goal.contains(Predicate::Touching)) {
            for (int axis = 0; axis < 2; ++axis)
                for (double sign : {-1.0, 1.0}) lateral(axis, sign, touch_gap);
            stacked = true;
        } else if (goal.contains(Predicate::Near)) {
            for (int axis = 0; axis < 2; ++axis)
                for (double sign : {-1.0, 1.0}) lateral(axis, sign, 0.025);
        }
    }

    if (stacked) targets.push_back({a.centroid.x, a.centroid.y});

    std::size_t budget = cfg.max_components;
    if (under && budget > 0) --budget;  // reserve a slot for the under component
    if (targets.size() > budget) targets.resize(budget);
    if (targets.empty() && !under) throw std::invalid_argument("unsatisfiable goal");

    GmmPrior prior;
    prior.rotation_enabled = !cfg.planar_only;
    for (const Target& t : targets) {
        const double support =
            support_height(scene, t.x - q_half.x, t.x + q_half.x, t.y - q_half.y,
                           t.y + q_half.y);
        GmmComponent c;
        c.mu = {t.x - q.centroid.x, t.y - q.centroid.y, support - q.box.min.z, 0.0};
        c.sigma = {cfg.sigma_xy, cfg.sigma_xy, cfg.sigma_z, cfg.sigma_yaw};
        prior.components.push_back(c);
    }
    if (under) {
        // Best effort for "below": the query's top just under an (elevated)
        // anchor's bottom. Usually only feasible when the anchor sits raised
        // with free space beneath; the planner rejects the rest.
        GmmComponent c;
        c.mu = {a.centroid.x - q.centroid.x, a.centroid.y - q.centroid.y,
                (a.box.min.z - cfg.clearance) - q.box.max.z, 0.0};
        c.sigma = {cfg.sigma_xy, cfg.sigma_xy, cfg.sigma_z, cfg.sigma_yaw};
        prior.components.push_back(c);
    }
    const double alpha = 1.0 / static_cast<double>(prior.components.size());
    for (GmmComponent& c : prior.components) c.alpha = alpha;
    prior.validate();
    return prior;
}

}  // namespace semplace
