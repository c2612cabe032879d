#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "semplace/harness.hpp"

using namespace semplace;

namespace {

/// Small, fast corpus: compact table, few objects, low-res camera.
CorpusConfig small_corpus_cfg(int count, std::uint64_t seed) {
    CorpusConfig cfg;
    cfg.count = count;
    cfg.seed = seed;
    cfg.sample_spacing = 0.01;
    cfg.forge.min_objects = 2;
    cfg.forge.max_objects = 3;
    cfg.forge.table_half_x = 0.35;
    cfg.forge.table_half_y = 0.3;
    cfg.forge.max_edge = 0.14;
    cfg.forge.max_height = 0.16;
    cfg.forge.image_width = 160;
    cfg.forge.image_height = 120;
    cfg.forge.camera_fx = 140.0;
    return cfg;
}

PlannerConfig small_planner() {
    PlannerConfig cfg;
    cfg.batch = 10;
    cfg.iters = 2;
    cfg.n_elite = 4;
    cfg.max_attempts = 500;
    cfg.threads = 1;
    return cfg;
}

std::string corpus_fingerprint(const Corpus& corpus) {
    std::ostringstream out;
    for (const CorpusEntry& e : corpus.entries) {
        out << e.file << "|" << e.query_id << "|" << e.anchor_id << "|"
            << e.goal.to_string() << "|" << e.seed << "\n";
        write_ground_truth(e.truth, out);
    }
    return out.str();
}

}  // namespace

TEST_CASE("variant configs override exactly their documented pieces") {
    PlannerConfig base;
    base.lambda_f = 42.0;
    base.eps_f = 0.5;
    base.batch = 77;
    base.seed = 123;

    const PlannerConfig full100 = variant_config("full100", base);
    CHECK(full100.lambda_f == 100.0);
    CHECK(full100.mode == PlanMode::Full);
    CHECK(full100.eps_f == 0.5);
    CHECK(full100.batch == 77);   // untouched base fields survive
    CHECK(full100.seed == 123);

    const PlannerConfig full1 = variant_config("full1", base);
    CHECK(full1.lambda_f == 1.0);
    CHECK(full1.mode == PlanMode::Full);

    const PlannerConfig nodisc = variant_config("nodisc", base);
    CHECK(nodisc.lambda_f == 0.0);
    CHECK(nodisc.eps_f == 0.0);
    CHECK(nodisc.mode == PlanMode::Full);

    const PlannerConfig mean = variant_config("mean", base);
    CHECK(mean.mode == PlanMode::MeanOnly);
    CHECK(mean.eps_f == 0.0);

    const PlannerConfig priorcost = variant_config("priorcost", base);
    CHECK(priorcost.mode == PlanMode::PriorCost);
    CHECK(priorcost.eps_f == 0.0);

    CHECK_THROWS_AS(variant_config("full", base), std::invalid_argument);
    CHECK_THROWS_AS(variant_config("", base), std::invalid_argument);
}

TEST_CASE("corpus generation is deterministic and well-formed") {
    const CorpusConfig cfg = small_corpus_cfg(6, 5);
    const Corpus a = make_corpus(cfg);
    const Corpus b = make_corpus(cfg);
    CHECK(corpus_fingerprint(a) == corpus_fingerprint(b));

    REQUIRE(a.entries.size() == 6);
    CHECK(a.sample_spacing == 0.01);
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        const CorpusEntry& e = a.entries[i];
        CHECK(e.truth.has(e.query_id));
        CHECK(e.truth.has(e.anchor_id));
        CHECK(e.query_id != e.anchor_id);
        REQUIRE(e.goal.required.size() == 1);
        bool in_pool = false;
        for (std::size_t g : cfg.goal_pool)
            if (g == e.goal.required[0]) in_pool = true;
        CHECK(in_pool);
    }
    CHECK(a.entries[0].file == "scene_0000.txt");
    CHECK(a.entries[5].file == "scene_0005.txt");

    CorpusConfig other = cfg;
    other.seed = 6;
    CHECK(corpus_fingerprint(make_corpus(other)) != corpus_fingerprint(a));

    SUBCASE("invalid configurations are rejected") {
        CorpusConfig bad = cfg;
        bad.count = 0;
        CHECK_THROWS_AS(make_corpus(bad), std::invalid_argument);
        bad = cfg;
        bad.forge.min_objects = 1;
        CHECK_THROWS_AS(make_corpus(bad), std::invalid_argument);
        bad = cfg;
        bad.goal_pool.clear();
        CHECK_THROWS_AS(make_corpus(bad), std::invalid_argument);
        bad = cfg;
        bad.goal_pool = {17};
        CHECK_THROWS_AS(make_corpus(bad), std::invalid_argument);
    }
}

TEST_CASE("corpus save and load round-trip") {
    const std::string dir = "/tmp/semplace_test_corpus";
    std::filesystem::remove_all(dir);
    const Corpus original = make_corpus(small_corpus_cfg(3, 11));
    save_corpus(original, dir);

    const Corpus loaded = load_corpus(dir);
    CHECK(corpus_fingerprint(loaded) == corpus_fingerprint(original));
    CHECK(loaded.sample_spacing == original.sample_spacing);

    CHECK_THROWS_AS(load_corpus("/tmp/semplace_no_such_corpus"), std::runtime_error);

    SUBCASE("entry clouds carry the task segments") {
        const SegmentedScene cloud = entry_cloud(loaded.entries[0], loaded.sample_spacing);
        CHECK(cloud.has(loaded.entries[0].query_id));
        CHECK(cloud.has(loaded.entries[0].anchor_id));
        CHECK(cloud.has(cloud.background_id));
    }
}

TEST_CASE("ablation rows keep their accounting invariants") {
    const Corpus corpus = make_corpus(small_corpus_cfg(4, 21));
    const std::vector<std::string> variants = {"full100", "nodisc", "mean"};
    HarnessConfig cfg;
    cfg.planner = small_planner();
    cfg.seed = 3;

    const std::vector<AblationRow> rows = run_ablation(corpus, variants, cfg);
    REQUIRE(rows.size() == variants.size());
    for (std::size_t v = 0; v < rows.size(); ++v) {
        const AblationRow& r = rows[v];
        CHECK(r.variant == variants[v]);
        CHECK(r.trials == 4);
        CHECK(r.found_predicates <= r.trials);
        CHECK(r.found_realistic <= r.trials);
        CHECK(r.successful <= std::min(r.found_predicates, r.found_realistic));
        CHECK(r.stable_pose <= r.trials);
        CHECK(r.successful >= 0);
    }

    SUBCASE("the run and its CSV are deterministic") {
        const std::vector<AblationRow> again = run_ablation(corpus, variants, cfg);
        CHECK(ablation_csv(again) == ablation_csv(rows));
    }
    SUBCASE("the CSV is shaped as documented") {
        const std::string csv = ablation_csv(rows);
        CHECK(csv.rfind("variant,trials,found_predicates,found_realistic,successful,"
                        "stable_pose\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + static_cast<long>(rows.size()));
    }
}

TEST_CASE("predicate evaluation fills a consistent confusion table") {
    const Corpus corpus = make_corpus(small_corpus_cfg(3, 33));
    const std::vector<F1Row> rows = run_predicate_eval(corpus);
    REQUIRE(rows.size() == kNumPredicates);

    const long total0 = rows[0].tp + rows[0].fp + rows[0].tn + rows[0].fn;
    CHECK(total0 > 0);  // at least one rendered ordered pair somewhere
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const F1Row& r = rows[k];
        CHECK(r.predicate == predicate_name(k));
        CHECK(r.tp + r.fp + r.tn + r.fn == total0);  // same pairs for every predicate
        CHECK(r.f1 >= 0.0);
        CHECK(r.f1 <= 1.0);
        CHECK(r.sensitivity <= 1.0);
        CHECK(r.specificity <= 1.0);
        CHECK(r.prevalence_true + r.prevalence_false == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.degenerate == (r.tp + r.fn == 0 || r.tn + r.fp == 0));
    }

    SUBCASE("the CSV is shaped as documented") {
        const std::string csv = f1_csv(rows);
        CHECK(csv.rfind("predicate,tp,fp,tn,fn,f1,sensitivity,specificity,prevalence_true,"
                        "prevalence_false,degenerate\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') ==
              1 + static_cast<long>(kNumPredicates));
        CHECK(f1_csv(run_predicate_eval(corpus)) == csv);  // deterministic
    }
}

TEST_CASE("correlation runs end to end and reports both sides") {
    const Corpus corpus = make_corpus(small_corpus_cfg(3, 44));
    CorrelationConfig cfg;
    cfg.harness.planner = small_planner();
    cfg.harness.seed = 9;
    cfg.samples_per_scene = 3;
    cfg.planned_per_scene = 1;

    const CorrelationPair pair = run_correlation(corpus, cfg);
    CHECK(pair.sampled.n + pair.sampled.dropped == corpus.entries.size() * 3);
    CHECK(pair.planned.n + pair.planned.dropped <= corpus.entries.size());
    if (std::isfinite(pair.sampled.r)) {
        CHECK(pair.sampled.r >= -1.0);
        CHECK(pair.sampled.r <= 1.0);
        CHECK(pair.sampled.p >= 0.0);
        CHECK(pair.sampled.p <= 1.0);
    }
    CHECK(pair.sampled.outlier_cutoff == 0.5);

    const std::string js = correlation_json(pair);
    const auto parsed = nlohmann::json::parse(js);
    CHECK(parsed.contains("sampled"));
    CHECK(parsed.contains("planned"));
    CHECK(parsed["sampled"]["n"] == pair.sampled.n);
    CHECK(parsed["sampled"]["degenerate"].is_boolean());

    SUBCASE("the whole pipeline is deterministic") {
        CHECK(correlation_json(run_correlation(corpus, cfg)) == js);
    }
}
