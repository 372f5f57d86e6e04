#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "hiertree/cooccur.hpp"
#include "hiertree/error.hpp"
#include "hiertree/rng.hpp"
#include "support/fixtures.hpp"
#include "support/naive.hpp"

using namespace hiertree;

TEST_CASE("f1 co-occurrence counts") {
    const auto ds = fixtures::f1();
    const CooccurrenceStats stats = count_cooccurrences(ds);
    CHECK(stats.n_sets == 4);
    CHECK(stats.single == std::vector<uint64_t>{3, 3, 2});
    CHECK(stats.pair_count(0, 1) == 2); // c_ab
    CHECK(stats.pair_count(0, 2) == 1); // c_ac
    CHECK(stats.pair_count(1, 2) == 1); // c_bc
    CHECK(stats.pair_count(1, 0) == 2); // symmetric
}

TEST_CASE("degenerate counting cases") {
    SUBCASE("one set") {
        const auto ds = fixtures::make_dataset({"a", "b"}, {{0, 1}});
        const CooccurrenceStats stats = count_cooccurrences(ds);
        CHECK(stats.n_sets == 1);
        CHECK(stats.single == std::vector<uint64_t>{1, 1});
        CHECK(stats.pair_count(0, 1) == 1);
    }
    SUBCASE("never co-occurring pair") {
        const auto ds = fixtures::make_dataset({"a", "b", "c"}, {{0, 1}, {2}});
        CHECK(count_cooccurrences(ds).pair_count(0, 2) == 0);
    }
}

TEST_CASE("confidence on f1") {
    const CooccurrenceStats stats = count_cooccurrences(fixtures::f1());
    CHECK(confidence(stats, 0, 1) == 2.0 / 3.0); // C_ab
    SUBCASE("asymmetry") {
        CHECK(confidence(stats, 2, 0) == 1.0 / 3.0); // C(c|a)
        CHECK(confidence(stats, 0, 2) == 1.0 / 2.0); // C(a|c)
    }
    SUBCASE("self-confidence is 1") {
        for (uint32_t i = 0; i < 3; ++i) CHECK(confidence(stats, i, i) == 1.0);
    }
    SUBCASE("zero marginal is an error") {
        const auto ds = fixtures::make_dataset({"a", "b", "z"}, {{0, 1}, {0, 1}});
        const CooccurrenceStats s2 = count_cooccurrences(ds);
        CHECK_THROWS_AS(confidence(s2, 0, 2), Error);
    }
}

TEST_CASE("lift on f1") {
    const CooccurrenceStats stats = count_cooccurrences(fixtures::f1());
    CHECK(lift(stats, 0, 1) == 8.0 / 9.0);
    CHECK(lift(stats, 0, 2) == 2.0 / 3.0);
    CHECK(lift(stats, 2, 0) == lift(stats, 0, 2));
}

TEST_CASE("lift is 1 at independence") {
    // c_a=2, c_b=2, c_ab=1, n=4: P(ab) = P(a)P(b)
    const auto ds = fixtures::make_dataset({"a", "b", "c", "d"}, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
    const CooccurrenceStats stats = count_cooccurrences(ds);
    CHECK(lift(stats, 0, 1) == 1.0);
}

TEST_CASE("cosine and kulczynski") {
    SUBCASE("geometric mean of 0.76 and 0.87 is 0.81") {
        CHECK(std::abs(std::sqrt(0.76 * 0.87) - 0.81) < 0.005);
    }
    SUBCASE("f1 values") {
        const CooccurrenceStats stats = count_cooccurrences(fixtures::f1());
        CHECK(cosine_similarity(stats, 0, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
        CHECK(kulczynski_similarity(stats, 0, 1) == 2.0 / 3.0); // equal: C symmetric here
    }
    SUBCASE("both are 1 when the conditionals are 1") {
        const auto ds = fixtures::make_dataset({"a", "b"}, {{0, 1}, {0, 1}});
        const CooccurrenceStats stats = count_cooccurrences(ds);
        CHECK(cosine_similarity(stats, 0, 1) == 1.0);
        CHECK(kulczynski_similarity(stats, 0, 1) == 1.0);
    }
}

TEST_CASE("confidence distance on f1") {
    const auto ds = fixtures::f1();
    const CooccurrenceStats stats = count_cooccurrences(ds);
    const DistanceMatrix d = confidence_distance(stats, ds.registry);
    CHECK(d.at(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(d.at(0, 2) == doctest::Approx(1.0 - std::sqrt(1.0 / 6.0)).epsilon(1e-15));
    CHECK(d.at(0, 2) == doctest::Approx(0.59175).epsilon(1e-4));
    for (uint32_t i = 0; i < 3; ++i) CHECK(d.at(i, i) == 0.0);
    d.validate();
}

TEST_CASE("lift distance on f1") {
    const auto ds = fixtures::f1();
    const CooccurrenceStats stats = count_cooccurrences(ds);
    const DistanceMatrix d = lift_distance(stats, ds.registry);
    // off-diagonal lifts {8/9, 2/3, 2/3}: the max pair lands at 0, min at 1
    CHECK(d.at(0, 1) == 0.0);
    CHECK(d.at(0, 2) == 1.0);
    CHECK(d.at(1, 2) == 1.0);
    d.validate();
}

TEST_CASE("lift distance endpoints on random data") {
    Rng rng(77);
    for (int round = 0; round < 20; ++round) {
        const auto ds = fixtures::random_dataset(rng, 8, 60, 4);
        const CooccurrenceStats stats = count_cooccurrences(ds);
        DistanceMatrix d;
        try {
            d = lift_distance(stats, ds.registry);
        } catch (const Error&) {
            continue; // uncovered labels or degenerate normalization
        }
        double lo = 1e300, hi = -1e300;
        uint32_t lo_i = 0, lo_j = 0, hi_i = 0, hi_j = 0;
        for (uint32_t i = 0; i < d.size(); ++i) {
            for (uint32_t j = i + 1; j < d.size(); ++j) {
                const uint32_t a = *ds.registry.find(d.labels[i]);
                const uint32_t b = *ds.registry.find(d.labels[j]);
                const double l = lift(stats, a, b);
                if (l < lo) { lo = l; lo_i = i; lo_j = j; }
                if (l > hi) { hi = l; hi_i = i; hi_j = j; }
            }
        }
        CHECK(d.at(hi_i, hi_j) == 0.0);
        CHECK(d.at(lo_i, lo_j) == 1.0);
    }
}

TEST_CASE("lift normalization can include self-lifts") {
    // f1 self-lifts are n/c_i = {4/3, 4/3, 2}; the domain becomes
    // [2/3, 2], so D(a,b) = 1 - (8/9 - 2/3)/(2 - 2/3) = 5/6
    const auto ds = fixtures::f1();
    const CooccurrenceStats stats = count_cooccurrences(ds);
    MatrixOptions options;
    options.lift_norm = LiftNorm::include_diagonal;
    const DistanceMatrix d = lift_distance(stats, ds.registry, options);
    CHECK(d.at(0, 1) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(d.at(0, 2) == 1.0); // still the domain minimum
    for (uint32_t i = 0; i < 3; ++i) CHECK(d.at(i, i) == 0.0);
}

TEST_CASE("degenerate lift normalization is an error") {
    const auto ds = fixtures::make_dataset({"a", "b"}, {{0, 1}, {0, 1}});
    const CooccurrenceStats stats = count_cooccurrences(ds);
    CHECK_THROWS_WITH_AS(lift_distance(stats, ds.registry), doctest::Contains("degenerate"), Error);
}

TEST_CASE("uncovered label policies") {
    auto ds = fixtures::make_dataset({"a", "b", "z"}, {{0, 1}, {0, 1}, {0, 1}});
    const CooccurrenceStats stats = count_cooccurrences(ds);

    SUBCASE("error lists the labels") {
        CHECK_THROWS_WITH_AS(confidence_distance(stats, ds.registry), doctest::Contains("'z'"), Error);
    }
    SUBCASE("drop removes them") {
        MatrixOptions options;
        options.uncovered = UncoveredPolicy::drop;
        const DistanceMatrix d = confidence_distance(stats, ds.registry, options);
        CHECK(d.labels == std::vector<std::string>{"a", "b"});
        CHECK(d.size() == 2);
    }
    SUBCASE("keep admits them at distance 1") {
        MatrixOptions options;
        options.uncovered = UncoveredPolicy::keep;
        const DistanceMatrix d = confidence_distance(stats, ds.registry, options);
        CHECK(d.size() == 3);
        CHECK(d.at(0, 2) == 1.0);
        CHECK(d.at(1, 2) == 1.0);
        CHECK(d.at(0, 1) == 0.0); // a and b share every set
        d.validate();
    }
}

TEST_CASE("laplace smoothing lifts zero pair counts") {
    const auto ds = fixtures::make_dataset({"a", "b", "c"}, {{0, 1}, {2}});
    const CooccurrenceStats stats = count_cooccurrences(ds);
    CHECK(confidence(stats, 0, 2) == 0.0);
    CHECK(confidence(stats, 0, 2, 0.5) == 0.5);
    CHECK(confidence(stats, 0, 0, 0.5) == 1.0); // self-pairs stay unsmoothed
}

TEST_CASE("similarity measures match brute force on random datasets") {
    Rng rng(20240214);
    for (int round = 0; round < 60; ++round) {
        const auto ds = fixtures::random_dataset(rng);
        const CooccurrenceStats stats = count_cooccurrences(ds);
        const naive::Sets sets = naive::sets_of(ds);
        const uint32_t n = ds.registry.size();
        for (uint32_t i = 0; i < n; ++i) {
            for (uint32_t j = 0; j < n; ++j) {
                if (stats.single[i] == 0 || stats.single[j] == 0) continue;
                CHECK(confidence(stats, i, j) == doctest::Approx(naive::confidence(sets, i, j)).epsilon(1e-12));
                CHECK(lift(stats, i, j) == doctest::Approx(naive::lift(sets, i, j)).epsilon(1e-12));
                CHECK(cosine_similarity(stats, i, j) == doctest::Approx(naive::cosine(sets, i, j)).epsilon(1e-12));
                CHECK(kulczynski_similarity(stats, i, j) == doctest::Approx(naive::kulczynski(sets, i, j)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("null-invariance: padding with fresh-label sets") {
    const auto base = fixtures::f1();
    const CooccurrenceStats s0 = count_cooccurrences(base);
    const double cosine_before = cosine_similarity(s0, 0, 1);
    const double lift_before = lift(s0, 0, 1);
    const double dc_before = confidence_distance(s0, base.registry).at(0, 1);

    for (uint32_t pads : {1u, 5u, 40u}) {
        const auto padded = fixtures::f1_padded(pads);
        const CooccurrenceStats s1 = count_cooccurrences(padded);
        // cosine and D^C are untouched, bit for bit
        CHECK(cosine_similarity(s1, 0, 1) == cosine_before);
        MatrixOptions options; // the padding label is covered, no policy needed
        CHECK(confidence_distance(s1, padded.registry, options).at(0, 1) == dc_before);
        // lift moves whenever the pair co-occurs at all
        CHECK(lift(s1, 0, 1) > lift_before);
    }
}

TEST_CASE("D^C is 0 off-diagonal iff the labels share exactly the same sets") {
    Rng rng(5150);
    for (int round = 0; round < 40; ++round) {
        const auto ds = fixtures::random_dataset(rng, 6, 30, 3);
        const CooccurrenceStats stats = count_cooccurrences(ds);
        MatrixOptions options;
        options.uncovered = UncoveredPolicy::drop;
        DistanceMatrix d;
        try {
            d = confidence_distance(stats, ds.registry, options);
        } catch (const Error&) {
            continue;
        }
        for (uint32_t i = 0; i < d.size(); ++i) {
            for (uint32_t j = i + 1; j < d.size(); ++j) {
                const uint32_t a = *ds.registry.find(d.labels[i]);
                const uint32_t b = *ds.registry.find(d.labels[j]);
                const bool same_sets = stats.pair_count(a, b) == stats.single[a] &&
                                       stats.single[a] == stats.single[b];
                CHECK((d.at(i, j) == 0.0) == same_sets);
            }
        }
    }
}

TEST_CASE("distance matrix properties on random datasets") {
    Rng rng(31337);
    int checked = 0;
    for (int round = 0; round < 40; ++round) {
        const auto ds = fixtures::random_dataset(rng, 8, 50, 4);
        const CooccurrenceStats stats = count_cooccurrences(ds);
        MatrixOptions options;
        options.uncovered = UncoveredPolicy::drop;
        for (DistanceSource source : {DistanceSource::confidence, DistanceSource::lift}) {
            try {
                distance_matrix(stats, ds.registry, source, options).validate();
                ++checked;
            } catch (const Error&) {
                // degenerate instances are allowed to refuse
            }
        }
    }
    CHECK(checked > 20);
}

TEST_CASE("distance csv round trip") {
    const auto ds = fixtures::f1();
    const DistanceMatrix d = confidence_distance(count_cooccurrences(ds), ds.registry);
    const std::string csv = distance_csv(d);

    std::istringstream in(csv);
    const DistanceMatrix parsed = parse_distance_csv(in);
    CHECK(parsed.labels == d.labels);
    CHECK(parsed.source == d.source);
    CHECK(distance_csv(parsed) == csv); // write -> read -> write is stable
    for (uint32_t i = 0; i < 3; ++i) {
        for (uint32_t j = 0; j < 3; ++j) {
            CHECK(parsed.at(i, j) == doctest::Approx(d.at(i, j)).epsilon(1e-11));
        }
    }
}

TEST_CASE("distance csv quotes awkward label names") {
    auto ds = fixtures::make_dataset({"shooting goal (soccer)", "label,with,commas"}, {{0, 1}, {0, 1}, {0}});
    MatrixOptions options;
    const CooccurrenceStats stats = count_cooccurrences(ds);
    const DistanceMatrix d = confidence_distance(stats, ds.registry, options);
    const std::string csv = distance_csv(d);
    CHECK(csv.find("\"label,with,commas\"") != std::string::npos);
    std::istringstream in(csv);
    CHECK(parse_distance_csv(in).labels == d.labels);
}

TEST_CASE("stats bundle file round trip") {
    const auto ds = fixtures::f1();
    const StatsBundle bundle = make_stats_bundle(ds);
    const std::string path = (std::filesystem::temp_directory_path() / "hiertree_stats_test.bin").string();
    write_stats_file(bundle, path);
    const StatsBundle loaded = read_stats_file(path);
    CHECK(loaded.labels == bundle.labels);
    CHECK(loaded.top1 == bundle.top1);
    CHECK(loaded.stats.n_sets == bundle.stats.n_sets);
    CHECK(loaded.stats.single == bundle.stats.single);
    CHECK(loaded.stats.pair_ut == bundle.stats.pair_ut);
    std::filesystem::remove(path);
}
