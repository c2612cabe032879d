#include <fmt/format.h>

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "semplace/harness.hpp"
#include "semplace/planner.hpp"
#include "semplace/scene_forge.hpp"
#include "semplace/scene_io.hpp"

namespace {

using namespace semplace;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

PlanMode parse_mode(const std::string& name) {
    if (name == "full") return PlanMode::Full;
    if (name == "mean-only") return PlanMode::MeanOnly;
    if (name == "prior-cost") return PlanMode::PriorCost;
    throw CLI::ValidationError("--mode", "expected full|mean-only|prior-cost");
}

int run(int argc, char** argv) {
    CLI::App app{"semantic placement planning over segmented point clouds"};
    app.require_subcommand(1);

    // ---- plan ----
    auto* plan = app.add_subcommand("plan", "plan a placement pose for a query object");
    std::string plan_scene, plan_goal, plan_out, plan_mode = "full";
    int plan_query = 0, plan_anchor = 0;
    PlannerConfig pcfg;
    plan->add_option("--scene", plan_scene, "segmented cloud file")->required();
    plan->add_option("--query", plan_query, "query object id")->required();
    plan->add_option("--anchor", plan_anchor, "anchor object id")->required();
    plan->add_option("--goal", plan_goal, "comma-separated goal predicates")->required();
    plan->add_option("--out", plan_out, "result JSON path")->required();
    plan->add_option("--lambda-f", pcfg.lambda_f, "realism cost weight");
    plan->add_option("--lambda-rho", pcfg.lambda_rho, "predicate cost weight");
    plan->add_option("--eps-f", pcfg.eps_f, "realism constraint threshold");
    plan->add_option("--eps-rho", pcfg.eps_rho, "predicate constraint threshold");
    plan->add_option("--batch", pcfg.batch, "accepted samples per iteration");
    plan->add_option("--iters", pcfg.iters, "optimization iterations");
    plan->add_option("--n-elite", pcfg.n_elite, "elite count for the refit");
    plan->add_option("--seed", pcfg.seed, "rng seed");
    plan->add_option("--mode", plan_mode, "full|mean-only|prior-cost");
    plan->add_option("--time-budget", pcfg.time_budget, "seconds per iteration");
    plan->add_option("--max-attempts", pcfg.max_attempts, "candidate cap per iteration");
    plan->add_flag("--planar", pcfg.prior.planar_only, "disable the yaw dimension");

    // ---- gen ----
    auto* gen = app.add_subcommand("gen", "generate a scene corpus");
    std::string gen_out;
    CorpusConfig ccfg;
    gen->add_option("--count", ccfg.count, "number of scenes")->required();
    gen->add_option("--seed", ccfg.seed, "rng seed");
    gen->add_option("--out", gen_out, "corpus directory")->required();
    gen->add_option("--min-objects", ccfg.forge.min_objects, "objects per scene, lower bound");
    gen->add_option("--max-objects", ccfg.forge.max_objects, "objects per scene, upper bound");
    gen->add_option("--obstacles", ccfg.forge.obstacle_count, "fixture boxes per scene");
    gen->add_option("--stack-bias", ccfg.forge.stack_bias, "probability of aiming at a stack");
    gen->add_option("--table-half-x", ccfg.forge.table_half_x, "table half extent, x");
    gen->add_option("--table-half-y", ccfg.forge.table_half_y, "table half extent, y");
    gen->add_option("--spacing", ccfg.sample_spacing, "surface sampling grid, meters");

    // ---- render ----
    auto* render = app.add_subcommand("render", "render a ground-truth scene to a cloud");
    std::string render_scene, render_out;
    int render_object = 0;
    bool render_surface = false;
    double render_spacing = 0.008;
    render->add_option("--scene", render_scene, "ground-truth scene file")->required();
    render->add_option("--out", render_out, "cloud file path")->required();
    auto* solo = render->add_option("--object", render_object,
                                    "render this object without the other movables");
    render->add_flag("--surface", render_surface,
                     "full-surface sampling instead of a camera render");
    render->add_option("--surface-spacing", render_spacing, "sampling grid for --surface");

    // ---- label ----
    auto* label = app.add_subcommand("label", "exact predicate labels for every ordered pair");
    std::string label_scene, label_out;
    label->add_option("--scene", label_scene, "ground-truth scene file")->required();
    label->add_option("--out", label_out, "labels JSON path")->required();

    // ---- ablate ----
    auto* ablate = app.add_subcommand("ablate", "run planner variants over a corpus");
    std::string ablate_corpus, ablate_out;
    std::string ablate_variants = "full100,full1,nodisc,mean,priorcost";
    HarnessConfig hcfg;
    ablate->add_option("--corpus", ablate_corpus, "corpus directory")->required();
    ablate->add_option("--variants", ablate_variants, "comma-separated variant names");
    ablate->add_option("--seed", hcfg.seed, "rng seed");
    ablate->add_option("--out", ablate_out, "CSV path")->required();
    ablate->add_option("--sigma-xy", hcfg.sigma_xy, "prior spread, lateral");
    ablate->add_option("--sigma-z", hcfg.sigma_z, "prior spread, vertical");
    ablate->add_option("--batch", hcfg.planner.batch, "accepted samples per iteration");
    ablate->add_option("--iters", hcfg.planner.iters, "optimization iterations");

    // ---- predeval ----
    auto* predeval = app.add_subcommand("predeval", "predicate F1 against exact labels");
    std::string predeval_corpus, predeval_out;
    predeval->add_option("--corpus", predeval_corpus, "corpus directory")->required();
    predeval->add_option("--out", predeval_out, "CSV path")->required();

    // ---- correlate ----
    auto* correlate = app.add_subcommand("correlate", "realism score vs settle displacement");
    std::string correlate_corpus, correlate_out;
    CorrelationConfig xcfg;
    correlate->add_option("--corpus", correlate_corpus, "corpus directory")->required();
    correlate->add_option("--out", correlate_out, "JSON path")->required();
    correlate->add_option("--seed", xcfg.harness.seed, "rng seed");
    correlate->add_option("--samples", xcfg.samples_per_scene, "prior draws per scene");
    correlate->add_option("--plans", xcfg.planned_per_scene, "plans per scene");
    correlate->add_option("--cutoff", xcfg.outlier_cutoff, "displacement outlier cutoff");
    correlate->add_option("--variant", xcfg.planned_variant, "planner variant for plans");
    correlate->add_option("--planned-eps-f", xcfg.planned_eps_f,
                          "realism threshold used for the planned side");

    CLI11_PARSE(app, argc, argv);

    if (plan->parsed()) {
        pcfg.mode = parse_mode(plan_mode);
        const SegmentedScene scene = load_scene_cloud(plan_scene);
        const PredicateGoal goal = PredicateGoal::parse(plan_goal);
        const PlanResult result = find_placement(scene, plan_query, plan_anchor, goal, pcfg);
        write_text(plan_out, result.to_json());
        if (result.best_delta) {
            fmt::print("found delta ({:.4f}, {:.4f}, {:.4f}, yaw {:.4f}) cost {:.6f}\n",
                       result.best_delta->dx, result.best_delta->dy, result.best_delta->dz,
                       result.best_delta->yaw, result.best_cost);
        } else {
            fmt::print("no feasible placement ({} candidates examined)\n",
                       result.total_attempted());
        }
        return 0;
    }
    if (gen->parsed()) {
        const Corpus corpus = make_corpus(ccfg);
        save_corpus(corpus, gen_out);
        fmt::print("wrote {} scenes to {}\n", corpus.entries.size(), gen_out);
        return 0;
    }
    if (render->parsed()) {
        const GroundTruthScene truth = load_ground_truth(render_scene);
        SegmentedScene cloud;
        if (render_surface) cloud = sample_surfaces(truth, render_spacing);
        else if (solo->count() > 0) cloud = render_object_unoccluded(truth, render_object);
        else cloud = render_cloud(truth);
        save_scene_cloud(cloud, render_out);
        fmt::print("wrote {} points to {}\n", cloud.total_points(), render_out);
        return 0;
    }
    if (label->parsed()) {
        const GroundTruthScene truth = load_ground_truth(label_scene);
        nlohmann::ordered_json j;
        j["pairs"] = nlohmann::ordered_json::array();
        for (const Primitive& q : truth.primitives) {
            for (const Primitive& a : truth.primitives) {
                if (q.id == a.id) continue;
                const PredicateVector v = label_predicates(truth, q.id, a.id);
                nlohmann::ordered_json row;
                row["query"] = q.id;
                row["anchor"] = a.id;
                nlohmann::ordered_json labels;
                for (std::size_t k = 0; k < kNumPredicates; ++k)
                    labels[predicate_name(k)] = v[k] > 0.5 ? 1 : 0;
                row["labels"] = std::move(labels);
                row["aligned"] = label_aligned(truth, q.id, a.id);
                row["distance"] = primitive_distance(q, a);
                j["pairs"].push_back(std::move(row));
            }
        }
        write_text(label_out, j.dump(2) + "\n");
        fmt::print("labeled {} pairs\n", j["pairs"].size());
        return 0;
    }
    if (ablate->parsed()) {
        const Corpus corpus = load_corpus(ablate_corpus);
        std::vector<std::string> names;
        for (auto& piece : CLI::detail::split(ablate_variants, ','))
            if (!piece.empty()) names.push_back(piece);
        const auto rows = run_ablation(corpus, names, hcfg);
        write_text(ablate_out, ablation_csv(rows));
        fmt::print("{}", ablation_csv(rows));
        return 0;
    }
    if (predeval->parsed()) {
        const Corpus corpus = load_corpus(predeval_corpus);
        const auto rows = run_predicate_eval(corpus);
        write_text(predeval_out, f1_csv(rows));
        fmt::print("{}", f1_csv(rows));
        return 0;
    }
    if (correlate->parsed()) {
        const Corpus corpus = load_corpus(correlate_corpus);
        const CorrelationPair pair = run_correlation(corpus, xcfg);
        write_text(correlate_out, correlation_json(pair));
        fmt::print("{}", correlation_json(pair));
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
}
