#ifndef SEMPLACE_HARNESS_HPP
#define SEMPLACE_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "semplace/planner.hpp"
#include "semplace/predicates.hpp"
#include "semplace/scene_forge.hpp"

namespace semplace {

/// One evaluation problem: a ground-truth scene plus the planning task drawn
/// for it (query, anchor, goal).
struct CorpusEntry {
    GroundTruthScene truth;
    int query_id = 0;
    int anchor_id = 0;
    PredicateGoal goal;
    std::uint64_t seed = 0;        // per-scene stream used at generation time
    std::string file;              // scene file name inside the corpus dir
};

struct Corpus {
    std::vector<CorpusEntry> entries;
    double sample_spacing = 0.008;  // full-surface cloud grid spacing, meters
};

struct CorpusConfig {
    int count = 100;
    std::uint64_t seed = 0;
    ForgeConfig forge;
    double sample_spacing = 0.008;

    /// Goal pool for the drawn tasks; defaults to the four lateral directions.
    std::vector<std::size_t> goal_pool{
        static_cast<std::size_t>(Predicate::InFrontOf),
        static_cast<std::size_t>(Predicate::Behind),
        static_cast<std::size_t>(Predicate::LeftOf),
        static_cast<std::size_t>(Predicate::RightOf),
    };
};

/// Generates `count` scenes with per-scene task draws. Deterministic in seed.
Corpus make_corpus(const CorpusConfig& cfg);

/// Corpus directory layout: manifest.json (count, seed, spacing, entries with
/// file/query/anchor/goal/seed) plus one ground-truth scene file per entry.
void save_corpus(const Corpus& corpus, const std::string& dir);
Corpus load_corpus(const std::string& dir);

/// Full-surface cloud of one entry (the planner-facing observation).
SegmentedScene entry_cloud(const CorpusEntry& entry, double spacing);

struct AblationRow {
    std::string variant;
    int trials = 0;
    int found_predicates = 0;  // ground-truth goal labels hold after settling
    int found_realistic = 0;   // settle oracle reports the pose supported
    int successful = 0;        // both of the above
    int stable_pose = 0;       // settle displacement < 0.05 m
};

/// The Table-2 style planner variants.
///   full100:   lambda_f = 100, full constraints
///   full1:     lambda_f = 1, full constraints
///   nodisc:    lambda_f = 0, eps_f = 0 (the scorer is never consulted)
///   mean:      prior component means only
///   priorcost: -log prior density as the realism term, eps_f = 0
/// Throws std::invalid_argument on an unknown name.
PlannerConfig variant_config(const std::string& name, const PlannerConfig& base);

struct HarnessConfig {
    PlannerConfig planner;       // base config; variants override pieces
    double sigma_xy = 0.08;      // prior spread used by the harness
    double sigma_z = 0.04;
    std::uint64_t seed = 0;
};

std::vector<AblationRow> run_ablation(const Corpus& corpus,
                                      const std::vector<std::string>& variants,
                                      const HarnessConfig& cfg);

std::string ablation_csv(const std::vector<AblationRow>& rows);

struct F1Row {
    std::string predicate;
    long tp = 0, fp = 0, tn = 0, fn = 0;
    double f1 = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double prevalence_true = 0.0;
    double prevalence_false = 0.0;
    bool degenerate = false;  // class never occurs in the corpus
};

/// Classifies rendered per-object clouds (each object rendered without the
/// other movables, mirroring the with/without-object rendering protocol)
/// against exact ground-truth labels for every ordered pair.
std::vector<F1Row> run_predicate_eval(const Corpus& corpus);

std::string f1_csv(const std::vector<F1Row>& rows);

struct CorrelationReport {
    double r = 0.0;
    double p = 1.0;
    std::size_t n = 0;
    double outlier_cutoff = 0.5;  // meters; larger displacements are dropped
    std::size_t dropped = 0;
};

struct CorrelationConfig {
    HarnessConfig harness;
    double outlier_cutoff = 0.5;
    int samples_per_scene = 2;  // prior draws scored on the sampled side
    int planned_per_scene = 2;  // independently seeded plans per scene
    /// Planner variant whose returns populate the planned side; eps_f = 0
    /// keeps low-score returns in the sample so the score axis has spread.
    std::string planned_variant = "full100";
    double planned_eps_f = 0.0;
};

struct CorrelationPair {
    CorrelationReport sampled;  // prior-drawn poses
    CorrelationReport planned;  // planner returns
};

CorrelationPair run_correlation(const Corpus& corpus, const CorrelationConfig& cfg);

std::string correlation_json(const CorrelationPair& pair);

}  // namespace semplace

#endif  // SEMPLACE_HARNESS_HPP
