#include <doctest.h>

#include <algorithm>

#include "hiertree/diagnose.hpp"
#include "hiertree/error.hpp"
#include "hiertree/synth.hpp"
#include "support/fixtures.hpp"

using namespace hiertree;

TEST_CASE("a label at distance 1 from everything merges last and ranks most outlier-like") {
    // x is far from the tight trio a,b,c
    DistanceMatrix d;
    d.labels = {"a", "b", "c", "x"};
    d.values = {0.0, 0.1, 0.2, 1.0,
                0.1, 0.0, 0.3, 1.0,
                0.2, 0.3, 0.0, 1.0,
                1.0, 1.0, 1.0, 0.0};
    const Dendrogram t = agglomerate(d, Linkage::single);
    CHECK(t.merges.back().height == 1.0);

    CooccurrenceStats stats;
    stats.n_sets = 10;
    stats.single = {8, 7, 6, 1};
    const DiagnosticsReport report = late_merger_report(t, stats, 2, 1);
    REQUIRE(report.late_mergers.size() == 1);
    CHECK(report.late_mergers[0] == 3);
    CHECK(report.per_label[3].merge_step == 3);
    CHECK(report.per_label[3].merge_height == 1.0);
}

TEST_CASE("group medians on a planted dataset are ordered bottom < overall < top") {
    // data abundance falls off within each group, so scarce labels are the
    // late mergers and the group medians come out strictly ordered
    PlantedConfig cfg;
    cfg.groups = 3;
    cfg.labels_per_group = 10;
    cfg.videos_per_label = 30;
    cfg.k = 5;
    cfg.p_in = 0.9;
    cfg.seed = 11;
    for (uint32_t i = 0; i < 30; ++i) {
        const uint32_t pos = i % 10;
        cfg.label_scale.push_back(1.0 - 0.9 * double(pos) / 9.0);
    }
    const PlantedData data = generate_planted(cfg);

    const StatsBundle bundle = make_stats_bundle(data.dataset);
    const DistanceMatrix d = confidence_distance(bundle.stats, data.dataset.registry);
    const Dendrogram t = agglomerate(d, Linkage::single);
    const DiagnosticsReport report = late_merger_report(t, bundle, 3, 10);

    CHECK(report.median_appearance_late_mergers < report.median_appearance_overall);
    CHECK(report.median_appearance_overall < report.median_appearance_well_placed);
}

TEST_CASE("a label with 10x fewer videos lands in the late-merger group") {
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
        PlantedConfig cfg;
        cfg.groups = 4;
        cfg.labels_per_group = 5;
        cfg.videos_per_label = 50;
        cfg.k = 5;
        cfg.p_in = 0.9;
        cfg.seed = seed;
        cfg.sparse_label = 7;
        cfg.sparse_divisor = 10;
        const PlantedData data = generate_planted(cfg);

        const StatsBundle bundle = make_stats_bundle(data.dataset);
        const DistanceMatrix d = confidence_distance(bundle.stats, data.dataset.registry);
        const Dendrogram t = agglomerate(d, Linkage::single);
        const DiagnosticsReport report = late_merger_report(t, bundle, 3, 3);

        const std::string sparse_name = data.dataset.registry.name(7);
        bool found = false;
        for (uint32_t id : report.late_mergers) {
            if (t.labels[id] == sparse_name) found = true;
        }
        CHECK(found);
    }
}

TEST_CASE("cluster profile balance entropy") {
    SUBCASE("even k=2 split of four labels scores 1") {
        DistanceMatrix d;
        d.labels = {"a", "b", "c", "d"};
        d.values = {0.0, 0.1, 0.9, 0.9,
                    0.1, 0.0, 0.9, 0.9,
                    0.9, 0.9, 0.0, 0.1,
                    0.9, 0.9, 0.1, 0.0};
        const ClusterProfile profile = cluster_profile(agglomerate(d, Linkage::single), 2);
        CHECK(profile.balance_entropy == doctest::Approx(1.0));
        CHECK(profile.members[0].size() == 2);
        CHECK(profile.members[1].size() == 2);
    }
    SUBCASE("single-linkage chain cut at 2 is {N-1, 1}") {
        const DistanceMatrix chain = fixtures::chain_distance(10);
        const ClusterProfile profile = cluster_profile(agglomerate(chain, Linkage::single), 2);
        std::vector<size_t> sizes = {profile.members[0].size(), profile.members[1].size()};
        std::sort(sizes.begin(), sizes.end());
        CHECK(sizes == std::vector<size_t>{1, 9});
        CHECK(profile.balance_entropy < 0.5);
    }
    SUBCASE("f1 tree at k=2 has sizes {2,1}") {
        const auto ds = fixtures::f1();
        const Dendrogram t =
            agglomerate(confidence_distance(count_cooccurrences(ds), ds.registry), Linkage::single);
        const ClusterProfile profile = cluster_profile(t, 2);
        std::vector<size_t> sizes = {profile.members[0].size(), profile.members[1].size()};
        std::sort(sizes.begin(), sizes.end());
        CHECK(sizes == std::vector<size_t>{1, 2});
    }
    SUBCASE("entropy is within [0,1] and k=1 is defined") {
        Rng rng(8);
        const Dendrogram t = fixtures::random_tree(rng, 9);
        for (uint32_t k = 1; k <= 9; ++k) {
            const ClusterProfile profile = cluster_profile(t, k);
            CHECK(profile.balance_entropy >= 0.0);
            CHECK(profile.balance_entropy <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("ward balances the chained configuration better than single linkage") {
    const DistanceMatrix chain = fixtures::chain_distance(12);
    const double ward_entropy = cluster_profile(agglomerate(chain, Linkage::ward), 2).balance_entropy;
    const double single_entropy =
        cluster_profile(agglomerate(chain, Linkage::single), 2).balance_entropy;
    CHECK(ward_entropy >= single_entropy);
    CHECK(ward_entropy > 0.9); // near-even split
}

TEST_CASE("zero-coverage label admitted via keep ranks most outlier-like") {
    auto ds = fixtures::make_dataset({"a", "b", "c", "ghost"}, {{0, 1}, {0, 1}, {1, 2}, {0, 2}});
    const StatsBundle bundle = make_stats_bundle(ds);
    MatrixOptions options;
    options.uncovered = UncoveredPolicy::keep;
    const DistanceMatrix d = confidence_distance(bundle.stats, ds.registry, options);
    const Dendrogram t = agglomerate(d, Linkage::single);
    const DiagnosticsReport report = late_merger_report(t, bundle, 2, 1);
    REQUIRE(report.late_mergers.size() == 1);
    CHECK(t.labels[report.late_mergers[0]] == "ghost");
}

TEST_CASE("report json has stable content") {
    const auto ds = fixtures::f1();
    const StatsBundle bundle = make_stats_bundle(ds);
    const Dendrogram t =
        agglomerate(confidence_distance(bundle.stats, ds.registry), Linkage::single);
    const DiagnosticsReport report = late_merger_report(t, bundle, 2, 1);
    const std::string a = diagnostics_json(report, t.labels);
    const std::string b = diagnostics_json(late_merger_report(t, bundle, 2, 1), t.labels);
    CHECK(a == b);
    CHECK(a.find("\"generator\"") != std::string::npos);
    CHECK(a.find("\"appearance_count\": 3") != std::string::npos);
}

TEST_CASE("parameter validation") {
    const auto ds = fixtures::f1();
    const StatsBundle bundle = make_stats_bundle(ds);
    const Dendrogram t =
        agglomerate(confidence_distance(bundle.stats, ds.registry), Linkage::single);
    CHECK_THROWS_AS(late_merger_report(t, bundle.stats, 1, 1), Error); // m < 2
    CHECK_THROWS_AS(late_merger_report(t, bundle.stats, 4, 1), Error); // m > N
    CHECK_THROWS_AS(late_merger_report(t, bundle.stats, 2, 9), Error); // q > N
}
