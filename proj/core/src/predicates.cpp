#include "semplace/predicates.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace semplace {

namespace {

const std::array<std::string, kNumPredicates> kNames = {
    "left_of", "right_of", "in_front_of", "behind", "above",
    "below",   "near",     "touching",    "centered",
};

double coord(const Point3& p, int axis) {
    switch (axis) {
        case 0: return p.x;
        case 1: return p.y;
        default: return p.z;
    }
}

}  // namespace

const std::string& predicate_name(std::size_t index) {
    if (index >= kNumPredicates) throw std::out_of_range("bad predicate index");
    return kNames[index];
}

std::optional<std::size_t> predicate_index(const std::string& name) {
    for (std::size_t i = 0; i < kNumPredicates; ++i)
        if (kNames[i] == name) return i;
    return std::nullopt;
}

bool PredicateGoal::contains(Predicate p) const {
    const std::size_t i = static_cast<std::size_t>(p);
    return std::find(required.begin(), required.end(), i) != required.end();
}

void PredicateGoal::validate() const {
    if (required.empty()) throw std::invalid_argument("empty goal");
    std::set<std::size_t> seen;
    for (std::size_t i : required) {
        if (i >= kNumPredicates) throw std::invalid_argument("goal index out of range");
        if (!seen.insert(i).second) throw std::invalid_argument("duplicate goal predicate");
    }
    const auto both = [&](Predicate a, Predicate b) { return contains(a) && contains(b); };
    if (both(Predicate::LeftOf, Predicate::RightOf) ||
        both(Predicate::InFrontOf, Predicate::Behind) ||
        both(Predicate::Above, Predicate::Below))
        throw std::invalid_argument("unsatisfiable goal: opposite directions");
    const bool lateral = contains(Predicate::LeftOf) || contains(Predicate::RightOf) ||
                         contains(Predicate::InFrontOf) || contains(Predicate::Behind);
    if (lateral && contains(Predicate::Centered))
        throw std::invalid_argument("unsatisfiable goal: lateral direction with centered");
}

PredicateGoal PredicateGoal::parse(const std::string& csv) {
    PredicateGoal goal;
    std::istringstream ss(csv);
    std::string token;
    while (std::getline(ss, token, ',')) {
        // trim
        const auto b = token.find_first_not_of(" \t");
        const auto e = token.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        token = token.substr(b, e - b + 1);
        const auto idx = predicate_index(token);
        if (!idx) throw std::invalid_argument("unknown predicate name: " + token);
        goal.required.push_back(*idx);
    }
    goal.validate();
    return goal;
}

std::string PredicateGoal::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < required.size(); ++i) {
        if (i) out += ',';
        out += predicate_name(required[i]);
    }
    return out;
}

BoxSummary summarize(const PointCloud& cloud) {
    return {centroid(cloud), compute_aabb(cloud)};
}

bool directional_rule(const BoxSummary& query, const BoxSummary& anchor, int axis, bool positive,
                      const DirectionalConfig& cfg) {
    if (!(cfg.theta > 0.0) || !(cfg.theta < M_PI / 2))
        throw std::invalid_argument("theta must be in (0, pi/2)");
    const double face =
        positive ? coord(anchor.box.max, axis) : coord(anchor.box.min, axis);
    const double c = coord(query.centroid, axis);
    // Rule 5: centroid strictly beyond every anchor corner along the axis.
    const double slack = positive ? c - face : face - c;
    if (!(slack > 0.0)) return false;
    // Rules 1-4: inside the trapezoid opened at theta in both cross axes.
    const double spread = std::tan(cfg.theta) * slack;
    for (int cross = 0; cross < 3; ++cross) {
        if (cross == axis) continue;
        const double w = coord(query.centroid, cross);
        if (!(w > coord(anchor.box.min, cross) - spread)) return false;
        if (!(w < coord(anchor.box.max, cross) + spread)) return false;
    }
    // Rule 6: every query corner strictly beyond the anchor centroid.
    const double anchor_c = coord(anchor.centroid, axis);
    const double nearest_corner =
        positive ? coord(query.box.min, axis) : coord(query.box.max, axis);
    return positive ? nearest_corner > anchor_c : nearest_corner < anchor_c;
}

DirectionalResult eval_directional(const PointCloud& query, const PointCloud& anchor,
                                   const DirectionalConfig& cfg) {
    const BoxSummary q = summarize(query);
    const BoxSummary a = summarize(anchor);
    DirectionalResult r;
    r.left_of = directional_rule(q, a, 0, false, cfg);
    r.right_of = directional_rule(a, q, 0, false, cfg);
    r.in_front_of = directional_rule(q, a, 1, false, cfg);
    r.behind = directional_rule(a, q, 1, false, cfg);
    r.above = directional_rule(q, a, 2, true, cfg);
    r.below = directional_rule(a, q, 2, true, cfg);
    return r;
}

bool eval_touching(const PointCloud& query, const PointCloud& anchor, double threshold) {
    if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
    return within_distance(query, anchor, threshold);
}

bool eval_near(const PointCloud& query, const PointCloud& anchor, double threshold) {
    return eval_touching(query, anchor, threshold);
}

bool eval_centered(const PointCloud& query, const PointCloud& anchor, double threshold) {
    if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
    return distance_xy(centroid(query), centroid(anchor)) <= threshold;
}

PredicateVector classify(const PointCloud& query, const PointCloud& anchor,
                         const PredicateConfig& cfg) {
    PredicateEvaluator eval{anchor, cfg};
    return eval.classify(query);
}

PredicateEvaluator::PredicateEvaluator(PointCloud anchor, PredicateConfig cfg)
    : anchor_(std::move(anchor)), cfg_(cfg) {
    anchor_summary_ = summarize(anchor_);
    proximity_ = VoxelIndex(anchor_, cfg_.near_threshold);
}

PredicateVector PredicateEvaluator::classify_summary(const BoxSummary& query, bool near_hit,
                                                     bool touch_hit) const {
    PredicateVector v;
    const auto& dcfg = cfg_.directional;
    v[Predicate::LeftOf] = directional_rule(query, anchor_summary_, 0, false, dcfg) ? 1.0 : 0.0;
    v[Predicate::RightOf] = directional_rule(anchor_summary_, query, 0, false, dcfg) ? 1.0 : 0.0;
    v[Predicate::InFrontOf] =
        directional_rule(query, anchor_summary_, 1, false, dcfg) ? 1.0 : 0.0;
    v[Predicate::Behind] = directional_rule(anchor_summary_, query, 1, false, dcfg) ? 1.0 : 0.0;
    v[Predicate::Above] = directional_rule(query, anchor_summary_, 2, true, dcfg) ? 1.0 : 0.0;
    v[Predicate::Below] = directional_rule(anchor_summary_, query, 2, true, dcfg) ? 1.0 : 0.0;
    v[Predicate::Near] = near_hit ? 1.0 : 0.0;
    v[Predicate::Touching] = touch_hit ? 1.0 : 0.0;
    v[Predicate::Centered] =
        distance_xy(query.centroid, anchor_summary_.centroid) <= cfg_.centered_threshold ? 1.0
                                                                                         : 0.0;
    return v;
}

PredicateVector PredicateEvaluator::classify(const PointCloud& query) const {
    const BoxSummary q = summarize(query);
    bool touch = false;
    bool near = false;
    for (const Point3& p : query) {
        if (!near && proximity_.any_within(p, cfg_.near_threshold)) near = true;
        if (near && !touch && proximity_.any_within(p, cfg_.touching_threshold)) touch = true;
        if (near && touch) break;
    }
    return classify_summary(q, near, touch);
}

bool PredicateEvaluator::goal_satisfied(const PointCloud& query, const PredicateGoal& goal,
                                        double eps_rho) const {
    const BoxSummary q = summarize(query);
    const auto& dcfg = cfg_.directional;
    for (std::size_t idx : goal.required) {
        double value = 0.0;
        switch (static_cast<Predicate>(idx)) {
            case Predicate::LeftOf:
                value = directional_rule(q, anchor_summary_, 0, false, dcfg) ? 1.0 : 0.0;
                break;
            case Predicate::RightOf:
                value = directional_rule(anchor_summary_, q, 0, false, dcfg) ? 1.0 : 0.0;
                break;
            case Predicate::InFrontOf:
                value = directional_rule(q, anchor_summary_, 1, false, dcfg) ? 1.0 : 0.0;
                break;
            case Predicate::Behind:
                value = directional_rule(anchor_summary_, q, 1, false, dcfg) ? 1.0 : 0.0;
                break;
            case Predicate::Above:
                value = directional_rule(q, anchor_summary_, 2, true, dcfg) ? 1.0 : 0.0;
                break;
            case Predicate::Below:
                value = directional_rule(anchor_summary_, q, 2, true, dcfg) ? 1.0 : 0.0;
                break;
            case Predicate::Near: {
                bool hit = false;
                for (const Point3& p : query)
                    if (proximity_.any_within(p, cfg_.near_threshold)) {
                        hit = true;
                        break;
                    }
                value = hit ? 1.0 : 0.0;
                break;
            }
            case Predicate::Touching: {
                bool hit = false;
                for (const Point3& p : query)
                    if (proximity_.any_within(p, cfg_.touching_threshold)) {
                        hit = true;
                        break;
                    }
                value = hit ? 1.0 : 0.0;
                break;
            }
            case Predicate::Centered:
                value = distance_xy(q.centroid, anchor_summary_.centroid) <=
                                cfg_.centered_threshold
                            ? 1.0
                            : 0.0;
                break;
        }
        if (!(value > eps_rho)) return false;
    }
    return true;
}

}  // namespace semplace
