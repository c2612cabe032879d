#include "semplace/harness.hpp"

#include <fmt/format.h>

#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "semplace/realism.hpp"
#include "semplace/stats.hpp"

namespace semplace {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return seed ^ (0x9E3779B97F4A7C15ull * (a + 1)) ^ (0xBF58476D1CE4E5B9ull * (b + 1));
}

SegmentedScene without_segment(const SegmentedScene& scene, int id) {
    SegmentedScene rest;
    rest.background_id = scene.background_id;
    rest.camera = scene.camera;
    for (const auto& [key, cloud] : scene.clouds)
        if (key != id) rest.clouds.emplace(key, cloud);
    return rest;
}

/// Ground truth with the query at its settled pose.
GroundTruthScene settled_scene(const GroundTruthScene& truth, int query_id,
                               const StabilityReport& report) {
    GroundTruthScene moved = truth;
    Primitive& p = moved.primitive(query_id);
    p.position = report.settled_position;
    p.yaw = report.settled_yaw;
    return moved;
}

bool goal_holds(const PredicateVector& labels, const PredicateGoal& goal) {
    for (std::size_t idx : goal.required)
        if (labels[idx] < 0.5) return false;
    return true;
}

}  // namespace

Corpus make_corpus(const CorpusConfig& cfg) {
    if (cfg.count < 1) throw std::invalid_argument("corpus count must be positive");
    if (cfg.forge.min_objects < 2)
        throw std::invalid_argument("corpus scenes need at least two objects");
    if (cfg.goal_pool.empty()) throw std::invalid_argument("goal pool is empty");
    for (std::size_t idx : cfg.goal_pool)
        if (idx >= kNumPredicates) throw std::invalid_argument("goal pool index out of range");

    Corpus corpus;
    corpus.sample_spacing = cfg.sample_spacing;
    corpus.entries.reserve(static_cast<std::size_t>(cfg.count));
    for (int i = 0; i < cfg.count; ++i) {
        CorpusEntry entry;
        bool made = false;
        for (std::uint64_t attempt = 0; attempt < 64 && !made; ++attempt) {
            const std::uint64_t stream = (static_cast<std::uint64_t>(i) << 8) | attempt;
            Rng rng(cfg.seed, stream);
            try {
                entry.truth = generate_scene(rng, cfg.forge);
            } catch (const std::runtime_error&) {
                continue;  // unlucky draw; retry on the next stream
            }
            const int n = static_cast<int>(entry.truth.primitives.size());
            const int qi = rng.uniform_int(0, n - 1);
            int ai = rng.uniform_int(0, n - 2);
            if (ai >= qi) ++ai;
            entry.query_id = entry.truth.primitives[static_cast<std::size_t>(qi)].id;
            entry.anchor_id = entry.truth.primitives[static_cast<std::size_t>(ai)].id;
            const std::size_t g = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<int>(cfg.goal_pool.size()) - 1));
            entry.goal.required = {cfg.goal_pool[g]};
            entry.seed = stream;
            entry.file = fmt::format("scene_{:04d}.txt", i);
            made = true;
        }
        if (!made) throw std::runtime_error("corpus generation failed repeatedly");
        corpus.entries.push_back(std::move(entry));
    }
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::ordered_json manifest;
    manifest["count"] = corpus.entries.size();
    manifest["sample_spacing"] = corpus.sample_spacing;
    manifest["entries"] = nlohmann::ordered_json::array();
    for (const CorpusEntry& entry : corpus.entries) {
        save_ground_truth(entry.truth, (fs::path(dir) / entry.file).string());
        nlohmann::ordered_json row;
        row["file"] = entry.file;
        row["query"] = entry.query_id;
        row["anchor"] = entry.anchor_id;
        row["goal"] = entry.goal.to_string();
        row["seed"] = entry.seed;
        manifest["entries"].push_back(std::move(row));
    }
    std::ofstream out(fs::path(dir) / "manifest.json");
    if (!out) throw std::runtime_error("cannot write corpus manifest in " + dir);
    out << manifest.dump(2) << "\n";
}

Corpus load_corpus(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream in(fs::path(dir) / "manifest.json");
    if (!in) throw std::runtime_error("cannot open corpus manifest in " + dir);
    nlohmann::json manifest;
    in >> manifest;
    Corpus corpus;
    corpus.sample_spacing = manifest.at("sample_spacing").get<double>();
    for (const auto& row : manifest.at("entries")) {
        CorpusEntry entry;
        entry.file = row.at("file").get<std::string>();
        entry.query_id = row.at("query").get<int>();
        entry.anchor_id = row.at("anchor").get<int>();
        entry.goal = PredicateGoal::parse(row.at("goal").get<std::string>());
        entry.seed = row.at("seed").get<std::uint64_t>();
        entry.truth = load_ground_truth((fs::path(dir) / entry.file).string());
        corpus.entries.push_back(std::move(entry));
    }
    return corpus;
}

SegmentedScene entry_cloud(const CorpusEntry& entry, double spacing) {
    return sample_surfaces(entry.truth, spacing);
}

PlannerConfig variant_config(const std::string& name, const PlannerConfig& base) {
    PlannerConfig cfg = base;
    if (name == "full100") {
        cfg.lambda_f = 100.0;
        cfg.mode = PlanMode::Full;
    } else if (name == "full1") {
        cfg.lambda_f = 1.0;
        cfg.mode = PlanMode::Full;
    } else if (name == "nodisc") {
        cfg.lambda_f = 0.0;
        cfg.eps_f = 0.0;
        cfg.mode = PlanMode::Full;
    } else if (name == "mean") {
        cfg.mode = PlanMode::MeanOnly;
        cfg.eps_f = 0.0;
    } else if (name == "priorcost") {
        cfg.mode = PlanMode::PriorCost;
        cfg.eps_f = 0.0;
    } else {
        throw std::invalid_argument("unknown variant: " + name);
    }
    return cfg;
}

std::vector<AblationRow> run_ablation(const Corpus& corpus,
                                      const std::vector<std::string>& variants,
                                      const HarnessConfig& cfg) {
    PlannerConfig base = cfg.planner;
    base.prior.sigma_xy = cfg.sigma_xy;
    base.prior.sigma_z = cfg.sigma_z;

    std::vector<AblationRow> rows;
    rows.reserve(variants.size());
    std::vector<PlannerConfig> configs;
    for (const std::string& name : variants) {
        rows.push_back({name, 0, 0, 0, 0, 0});
        configs.push_back(variant_config(name, base));
    }

    for (std::size_t e = 0; e < corpus.entries.size(); ++e) {
        const CorpusEntry& entry = corpus.entries[e];
        const SegmentedScene cloud = entry_cloud(entry, corpus.sample_spacing);
        const PlannerModels models =
            default_models(cloud, entry.query_id, entry.anchor_id, entry.goal, base);
        for (std::size_t v = 0; v < variants.size(); ++v) {
            PlannerConfig pc = configs[v];
            pc.seed = mix_seed(cfg.seed, e);
            AblationRow& row = rows[v];
            ++row.trials;
            const PlanResult result = find_placement(cloud, entry.query_id, entry.anchor_id,
                                                     entry.goal, pc, models);
            if (!result.best_delta) continue;
            const StabilityReport report =
                evaluate_placement(entry.truth, entry.query_id, *result.best_delta);
            const GroundTruthScene settled =
                settled_scene(entry.truth, entry.query_id, report);
            const PredicateVector labels =
                label_predicates(settled, entry.query_id, entry.anchor_id);
            const bool found_pred = goal_holds(labels, entry.goal);
            const bool found_real = report.supported;
            if (found_pred) ++row.found_predicates;
            if (found_real) ++row.found_realistic;
            if (found_pred && found_real) ++row.successful;
            if (report.displacement < kStableDisplacement) ++row.stable_pose;
        }
    }
    return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
    std::string out = "variant,trials,found_predicates,found_realistic,successful,stable_pose\n";
    for (const AblationRow& r : rows)
        out += fmt::format("{},{},{},{},{},{}\n", r.variant, r.trials, r.found_predicates,
                           r.found_realistic, r.successful, r.stable_pose);
    return out;
}

std::vector<F1Row> run_predicate_eval(const Corpus& corpus) {
    struct Confusion {
        long tp = 0, fp = 0, tn = 0, fn = 0;
    };
    std::array<Confusion, kNumPredicates> conf{};

    for (const CorpusEntry& entry : corpus.entries) {
        const GroundTruthScene& truth = entry.truth;
        std::map<int, PointCloud> solo;
        for (const Primitive& p : truth.primitives) {
            SegmentedScene rendered = render_object_unoccluded(truth, p.id);
            if (rendered.has(p.id)) solo.emplace(p.id, std::move(rendered.clouds[p.id]));
        }
        for (const Primitive& anchor : truth.primitives) {
            const auto anchor_it = solo.find(anchor.id);
            if (anchor_it == solo.end()) continue;
            const PredicateEvaluator eval(anchor_it->second);
            for (const Primitive& query : truth.primitives) {
                if (query.id == anchor.id) continue;
                const auto query_it = solo.find(query.id);
                if (query_it == solo.end()) continue;
                const PredicateVector predicted = eval.classify(query_it->second);
                const PredicateVector labels =
                    label_predicates(truth, query.id, anchor.id);
                for (std::size_t k = 0; k < kNumPredicates; ++k) {
                    const bool t = labels[k] > 0.5;
                    const bool p = predicted[k] > 0.5;
                    if (t && p) ++conf[k].tp;
                    else if (!t && p) ++conf[k].fp;
                    else if (!t && !p) ++conf[k].tn;
                    else ++conf[k].fn;
                }
            }
        }
    }

    std::vector<F1Row> rows;
    rows.reserve(kNumPredicates);
    for (std::size_t k = 0; k < kNumPredicates; ++k) {
        const Confusion& c = conf[k];
        F1Row row;
        row.predicate = predicate_name(static_cast<Predicate>(k));
        row.tp = c.tp;
        row.fp = c.fp;
        row.tn = c.tn;
        row.fn = c.fn;
        const long pos = c.tp + c.fn;
        const long neg = c.tn + c.fp;
        const long total = pos + neg;
        row.degenerate = pos == 0 || neg == 0;
        row.f1 = (2 * c.tp + c.fp + c.fn) > 0
                     ? 2.0 * c.tp / static_cast<double>(2 * c.tp + c.fp + c.fn)
                     : 0.0;
        row.sensitivity = pos > 0 ? static_cast<double>(c.tp) / pos : 0.0;
        row.specificity = neg > 0 ? static_cast<double>(c.tn) / neg : 0.0;
        row.prevalence_true = total > 0 ? static_cast<double>(pos) / total : 0.0;
        row.prevalence_false = total > 0 ? static_cast<double>(neg) / total : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string f1_csv(const std::vector<F1Row>& rows) {
    std::string out =
        "predicate,tp,fp,tn,fn,f1,sensitivity,specificity,prevalence_true,prevalence_false,"
        "degenerate\n";
    for (const F1Row& r : rows)
        out += fmt::format("{},{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", r.predicate,
                           r.tp, r.fp, r.tn, r.fn, r.f1, r.sensitivity, r.specificity,
                           r.prevalence_true, r.prevalence_false, r.degenerate ? 1 : 0);
    return out;
}

namespace {

CorrelationReport make_report(const std::vector<double>& scores,
                              const std::vector<double>& displacements, double cutoff,
                              std::size_t dropped) {
    CorrelationReport report;
    report.n = scores.size();
    report.outlier_cutoff = cutoff;
    report.dropped = dropped;
    try {
        report.r = pearson_r(scores, displacements);
        report.p = pearson_p_two_sided(report.r, scores.size());
    } catch (const std::invalid_argument&) {
        report.r = std::numeric_limits<double>::quiet_NaN();  // degenerate sample
        report.p = std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

}  // namespace

CorrelationPair run_correlation(const Corpus& corpus, const CorrelationConfig& cfg) {
    PlannerConfig planned_cfg = variant_config(cfg.planned_variant, cfg.harness.planner);
    planned_cfg.eps_f = cfg.planned_eps_f;
    planned_cfg.prior.sigma_xy = cfg.harness.sigma_xy;
    planned_cfg.prior.sigma_z = cfg.harness.sigma_z;

    std::vector<double> s_score, s_disp, p_score, p_disp;
    std::size_t s_dropped = 0, p_dropped = 0;

    for (std::size_t e = 0; e < corpus.entries.size(); ++e) {
        const CorpusEntry& entry = corpus.entries[e];
        const SegmentedScene cloud = entry_cloud(entry, corpus.sample_spacing);
        const PointCloud& query = cloud.cloud(entry.query_id);
        const SegmentedScene rest = without_segment(cloud, entry.query_id);
        const PlannerModels models = default_models(cloud, entry.query_id, entry.anchor_id,
                                                    entry.goal, planned_cfg);

        const auto measure = [&](const PoseOffset& delta, std::vector<double>& scores,
                                 std::vector<double>& disps, std::size_t& dropped) {
            const double f =
                score_placement(apply_offset(query, delta), rest, planned_cfg.realism).score;
            const double d =
                evaluate_placement(entry.truth, entry.query_id, delta).displacement;
            if (d > cfg.outlier_cutoff) {
                ++dropped;
                return;
            }
            scores.push_back(f);
            disps.push_back(d);
        };

        Rng rng(cfg.harness.seed, mix_seed(0, e));
        for (int rep = 0; rep < cfg.samples_per_scene; ++rep)
            measure(models.prior.sample(rng), s_score, s_disp, s_dropped);

        for (int rep = 0; rep < cfg.planned_per_scene; ++rep) {
            PlannerConfig pc = planned_cfg;
            pc.seed = mix_seed(cfg.harness.seed, e, static_cast<std::uint64_t>(rep));
            const PlanResult result = find_placement(cloud, entry.query_id, entry.anchor_id,
                                                     entry.goal, pc, models);
            if (!result.best_delta) continue;
            measure(*result.best_delta, p_score, p_disp, p_dropped);
        }
    }

    CorrelationPair pair;
    pair.sampled = make_report(s_score, s_disp, cfg.outlier_cutoff, s_dropped);
    pair.planned = make_report(p_score, p_disp, cfg.outlier_cutoff, p_dropped);
    return pair;
}

std::string correlation_json(const CorrelationPair& pair) {
    const auto encode = [](const CorrelationReport& r) {
        nlohmann::ordered_json j;
        if (std::isfinite(r.r)) j["r"] = r.r;
        else j["r"] = nullptr;
        if (std::isfinite(r.p)) j["p"] = r.p;
        else j["p"] = nullptr;
        j["n"] = r.n;
        j["outlier_cutoff"] = r.outlier_cutoff;
        j["dropped"] = r.dropped;
        j["degenerate"] = !std::isfinite(r.r);
        return j;
    };
    nlohmann::ordered_json j;
    j["sampled"] = encode(pair.sampled);
    j["planned"] = encode(pair.planned);
    return j.dump(2) + "\n";
}

}  // namespace semplace
