#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "promptgauge/errors.hpp"
#include "promptgauge/metrics.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace promptgauge;
using test_support::letter_labels;
using test_support::random_instance;
using test_support::table_from_rows;

namespace {

ClassDistribution dist(std::vector<double> probs) { return ClassDistribution{std::move(probs)}; }

std::vector<int> row_as_ints(const PredictionTable& table, std::size_t i) {
    std::vector<int> out;
    for (Outcome o : table.cells[i]) out.push_back(o.is_na() ? -1 : o.index());
    return out;
}

}  // namespace

TEST_CASE("class space and outcome invariants") {
    CHECK_THROWS_AS(ClassSpace({"A"}, false), InvalidInputError);
    CHECK_THROWS_AS(ClassSpace({"A", "A"}, false), InvalidInputError);
    CHECK_THROWS_AS(ClassSpace({"A", ""}, false), InvalidInputError);
    CHECK_THROWS_AS(Outcome::label(-1), InvalidInputError);
    CHECK_THROWS_AS(Outcome::na().index(), InvalidInputError);

    ClassSpace space(letter_labels(3), true);
    CHECK(space.num_labels() == 3);
    CHECK(space.num_slots() == 4);
    CHECK(space.index_of("B") == 1);
    CHECK_FALSE(space.index_of("Z").has_value());
    CHECK(space.valid_outcome(Outcome::na()));
    CHECK_FALSE(ClassSpace(letter_labels(3), false).valid_outcome(Outcome::na()));
}

TEST_CASE("validate_table: shape and outcome rules") {
    ClassSpace two(letter_labels(2), false);

    auto na_cell = table_from_rows({{0, -1}});
    CHECK_THROWS_AS(validate_table(na_cell, two), ValidationError);
    // The same cell is acceptable when it is a declared gap placeholder.
    na_cell.gaps.emplace_back(0, 1);
    CHECK_NOTHROW(validate_table(na_cell, two));

    auto dup_ids = table_from_rows({{0, 0}, {1, 1}});
    dup_ids.sample_ids[1] = dup_ids.sample_ids[0];
    CHECK_THROWS_AS(validate_table(dup_ids, two), ValidationError);

    auto ragged = table_from_rows({{0, 0}, {1, 1}});
    ragged.cells[1].pop_back();
    CHECK_THROWS_AS(validate_table(ragged, two), ValidationError);

    auto bad_gold = table_from_rows({{0, 0}}, {5});
    CHECK_THROWS_AS(validate_table(bad_gold, two), ValidationError);
}

TEST_CASE("compute_report: capped classes mark the whole report estimated") {
    std::vector<std::vector<int>> rows;
    std::vector<int> gold;
    std::mt19937_64 rng(97);
    for (int i = 0; i < 40; ++i) {
        rows.push_back({static_cast<int>(rng() % 2), static_cast<int>(rng() % 2), 0, 1});
        gold.push_back(0);
    }
    auto table = table_from_rows(rows, gold);
    ClassSpace two(letter_labels(2), false);

    auto exact = compute_report(table, two);
    MetricsOptions capped;
    capped.class_size_cap = 10;
    capped.subsample_pairs = 50000;
    auto estimated = compute_report(table, two, capped);

    CHECK_FALSE(exact.consistency_estimated);
    CHECK(estimated.consistency_estimated);
    CHECK(estimated.per_class_consistency[0].estimated);
    CHECK(*estimated.consistency_overall ==
          doctest::Approx(*exact.consistency_overall).epsilon(0.01));
    CHECK(*estimated.consistency_overall_offdiag ==
          doctest::Approx(*exact.consistency_overall_offdiag).epsilon(0.01));
    // Per-sample estimates draw only `cap` partners each, so individually they
    // are noisy; their mean should still track the exact mean closely.
    double exact_mean = 0.0, estimated_mean = 0.0;
    for (std::size_t i = 0; i < exact.per_sample.size(); ++i) {
        CHECK(*estimated.per_sample[i].avg_consistency >= 0.0);
        CHECK(*estimated.per_sample[i].avg_consistency <= 1.0);
        exact_mean += *exact.per_sample[i].avg_consistency;
        estimated_mean += *estimated.per_sample[i].avg_consistency;
    }
    exact_mean /= static_cast<double>(exact.per_sample.size());
    estimated_mean /= static_cast<double>(exact.per_sample.size());
    CHECK(estimated_mean == doctest::Approx(exact_mean).epsilon(0.05));
}

TEST_CASE("estimate_distribution: frequency counting") {
    ClassSpace space(letter_labels(2), false);
    auto table = table_from_rows({{0, 0, 1, 0}});
    auto d = estimate_distribution(table.cells[0], space);
    CHECK(d.probs == std::vector<double>{0.75, 0.25});

    ClassSpace six(letter_labels(6), false);
    std::vector<Outcome> constant(30, Outcome::label(0));
    auto point = estimate_distribution(constant, six);
    CHECK(point.probs[0] == 1.0);
    for (std::size_t c = 1; c < 6; ++c) CHECK(point.probs[c] == 0.0);

    std::vector<Outcome> half;
    for (int i = 0; i < 15; ++i) half.push_back(Outcome::label(0));
    for (int i = 0; i < 15; ++i) half.push_back(Outcome::label(1));
    auto split = estimate_distribution(half, six);
    CHECK(split.probs == std::vector<double>{0.5, 0.5, 0, 0, 0, 0});
}

TEST_CASE("estimate_distribution: N/A slot trails the real labels") {
    ClassSpace space(letter_labels(2), true);
    std::vector<Outcome> row{Outcome::label(0), Outcome::na(), Outcome::na(), Outcome::label(1)};
    auto d = estimate_distribution(row, space);
    CHECK(d.probs == std::vector<double>{0.25, 0.25, 0.5});
}

TEST_CASE("estimate_distribution: invalid inputs") {
    ClassSpace space(letter_labels(2), false);
    CHECK_THROWS_AS(estimate_distribution(std::vector<Outcome>{}, space), InvalidInputError);
    std::vector<Outcome> bad{Outcome::label(5)};
    CHECK_THROWS_AS(estimate_distribution(bad, space), InvalidInputError);
    std::vector<Outcome> na{Outcome::na()};  // N/A without the slot
    CHECK_THROWS_AS(estimate_distribution(na, space), InvalidInputError);
}

TEST_CASE("sensitivity: anchors") {
    ClassSpace two(letter_labels(2), false);
    ClassSpace six(letter_labels(6), false);

    CHECK(sensitivity_of(dist({1.0, 0.0}), two) == 0.0);
    CHECK(sensitivity_of(dist(std::vector<double>(6, 1.0 / 6.0)), six) ==
          doctest::Approx(1.0).epsilon(1e-12));

    const double expected = oracle::sensitivity({0.75, 0.25}, 2);
    CHECK(expected == doctest::Approx(0.811278).epsilon(1e-6));
    CHECK(sensitivity_of(dist({0.75, 0.25}), two) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("sensitivity: N/A mass can exceed 1 under the C-label denominator") {
    ClassSpace space(letter_labels(2), true);
    // Equal thirds over A, B, N/A.
    auto d = dist({1.0 / 3, 1.0 / 3, 1.0 / 3});
    const double s = sensitivity_of(d, space, false);
    CHECK(s == doctest::Approx(std::log(3.0) / std::log(2.0)).epsilon(1e-12));
    CHECK(s > 1.0);
    // Bound: ln(C+1)/ln(C).
    CHECK(s <= std::log(3.0) / std::log(2.0) + 1e-12);
    // Alternative denominator brings it back to 1.
    CHECK(sensitivity_of(d, space, true) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("expected_sensitivity: means and errors") {
    ClassSpace two(letter_labels(2), false);
    // Rows with sensitivities {0.811278..., 0, 1}.
    auto table = table_from_rows({{0, 0, 1, 0}, {0, 0, 0, 0}, {0, 0, 1, 1}});
    CHECK(expected_sensitivity(table, two) == doctest::Approx(0.603759).epsilon(1e-6));

    auto degenerate = table_from_rows({{0, 0}, {1, 1}});
    CHECK(expected_sensitivity(degenerate, two) == 0.0);

    PredictionTable empty;
    CHECK_THROWS_AS(expected_sensitivity(empty, two), InvalidInputError);
}

TEST_CASE("tvd: anchors and errors") {
    CHECK(tvd(dist({0.3, 0.7}), dist({0.3, 0.7})) == 0.0);
    CHECK(tvd(dist({1, 0}), dist({0, 1})) == 1.0);
    CHECK(tvd(dist({0.6, 0.4}), dist({0.2, 0.8})) == 0.4);
    CHECK_THROWS_AS(tvd(dist({1, 0}), dist({1, 0, 0})), InvalidInputError);
}

TEST_CASE("tvd: metric properties on random rational distributions") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t c = 2 + rng() % 8;
        const std::size_t q = 1 + rng() % 30;
        auto draw = [&]() {
            std::vector<double> counts(c, 0.0);
            for (std::size_t k = 0; k < q; ++k) counts[rng() % c] += 1.0;
            for (double& v : counts) v /= static_cast<double>(q);
            return dist(std::move(counts));
        };
        auto p = draw(), r = draw(), s = draw();
        CHECK(tvd(p, p) == 0.0);
        CHECK(tvd(p, r) == tvd(r, p));
        CHECK(tvd(p, r) >= 0.0);
        CHECK(tvd(p, r) <= 1.0);
        CHECK(tvd(p, s) <= tvd(p, r) + tvd(r, s) + 1e-12);
    }
}

TEST_CASE("consistency_pair: complement of tvd, symmetric") {
    CHECK(consistency_pair(dist({0.3, 0.7}), dist({0.3, 0.7})) == 1.0);
    CHECK(consistency_pair(dist({1, 0}), dist({0, 1})) == 0.0);
    CHECK(consistency_pair(dist({0.6, 0.4}), dist({0.2, 0.8})) == doctest::Approx(0.6));
    CHECK(consistency_pair(dist({0.6, 0.4}), dist({0.2, 0.8})) ==
          consistency_pair(dist({0.2, 0.8}), dist({0.6, 0.4})));
}

TEST_CASE("class_consistency: singleton, identical, disjoint") {
    ClassSpace two(letter_labels(2), false);

    auto singleton = table_from_rows({{0, 0}}, {0});
    auto cc1 = class_consistency(singleton, two, "A");
    CHECK(cc1.matrix == std::vector<std::vector<double>>{{1.0}});
    CHECK(cc1.expected == 1.0);
    CHECK_FALSE(cc1.offdiag_mean.has_value());

    auto identical = table_from_rows({{0, 1}, {0, 1}}, {0, 0});
    CHECK(class_consistency(identical, two, "A").expected == 1.0);

    auto disjoint = table_from_rows({{0, 0}, {1, 1}}, {0, 0});
    auto cc2 = class_consistency(disjoint, two, "A");
    CHECK(cc2.matrix == std::vector<std::vector<double>>{{1.0, 0.0}, {0.0, 1.0}});
    CHECK(cc2.expected == 0.5);
    CHECK(*cc2.offdiag_mean == 0.0);
}

TEST_CASE("class_consistency: errors") {
    ClassSpace two(letter_labels(2), false);
    auto table = table_from_rows({{0, 0}}, {0});
    CHECK_THROWS_AS(class_consistency(table, two, "B"), EmptyClassError);
    CHECK_THROWS_AS(class_consistency(table, two, "C"), InvalidInputError);
    auto no_gold = table_from_rows({{0, 0}});
    CHECK_THROWS_AS(class_consistency(no_gold, two, "A"), MissingLabelsError);
}

TEST_CASE("class_consistency: matches the ordered-pair double loop") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        auto instance = random_instance(rng, 20, 12, 6);
        const auto& space = instance.space;
        const auto& table = instance.table;
        for (std::size_t c = 0; c < space.num_labels(); ++c) {
            std::vector<std::vector<double>> dists;
            for (std::size_t i = 0; i < table.num_samples(); ++i) {
                if ((*table.gold_labels)[i] == c) {
                    dists.push_back(
                        oracle::distribution(row_as_ints(table, i), space.num_labels(),
                                             space.na_enabled()));
                }
            }
            if (dists.empty()) continue;
            auto cc = class_consistency(table, space, space.label_at(c));
            CHECK(cc.expected ==
                  doctest::Approx(oracle::expected_consistency(dists)).epsilon(1e-9));
        }
    }
}

TEST_CASE("class_consistency: subsampled estimate stays near the exact value") {
    // 40 members with two distribution clusters; cap forces the sampled path.
    std::vector<std::vector<int>> rows;
    std::vector<int> gold;
    for (int i = 0; i < 40; ++i) {
        rows.push_back(i % 2 ? std::vector<int>{0, 0, 1, 1} : std::vector<int>{0, 0, 0, 1});
        gold.push_back(0);
    }
    auto table = table_from_rows(rows, gold);
    ClassSpace two(letter_labels(2), false);

    auto exact = class_consistency(table, two, "A");
    MetricsOptions capped;
    capped.class_size_cap = 10;
    capped.subsample_pairs = 50000;
    auto estimated = class_consistency(table, two, "A", capped);

    CHECK(estimated.estimated);
    CHECK(estimated.matrix.empty());
    CHECK(estimated.expected == doctest::Approx(exact.expected).epsilon(0.01));
    CHECK(*estimated.offdiag_mean == doctest::Approx(*exact.offdiag_mean).epsilon(0.01));
}

TEST_CASE("micro_f1: anchors") {
    ClassSpace two(letter_labels(2), true);
    auto perfect = table_from_rows({{0, 0}, {1, 1}}, {0, 1});
    auto f1 = micro_f1(perfect, two);
    CHECK(f1.per_rephrasing == std::vector<double>{1.0, 1.0});
    CHECK(f1.mean == 1.0);

    auto all_na = table_from_rows({{-1, -1}, {-1, -1}}, {0, 1});
    CHECK(micro_f1(all_na, two).mean == 0.0);

    // Column [A,A,B,B] against gold [A,B,B,B]: 3 of 4 correct.
    auto mixed = table_from_rows({{0}, {0}, {1}, {1}}, {0, 1, 1, 1});
    CHECK(micro_f1(mixed, two).per_rephrasing[0] == doctest::Approx(0.75));

    auto no_gold = table_from_rows({{0, 0}});
    CHECK_THROWS_AS(micro_f1(no_gold, two), MissingLabelsError);
}

TEST_CASE("micro_f1: equals the confusion-matrix oracle on random tables") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        auto instance = random_instance(rng, 15, 10, 8);
        auto f1 = micro_f1(instance.table, instance.space);
        for (std::size_t k = 0; k < instance.table.q; ++k) {
            std::vector<int> preds, gold;
            for (std::size_t i = 0; i < instance.table.num_samples(); ++i) {
                const Outcome o = instance.table.cells[i][k];
                preds.push_back(o.is_na() ? -1 : o.index());
                gold.push_back(static_cast<int>((*instance.table.gold_labels)[i]));
            }
            CHECK(f1.per_rephrasing[k] ==
                  doctest::Approx(oracle::micro_f1_column(preds, gold,
                                                          instance.space.num_labels()))
                      .epsilon(1e-9));
        }
    }
}

TEST_CASE("summary_stats: anchors and errors") {
    std::vector<double> same{0.5, 0.5};
    auto s1 = summary_stats(same);
    CHECK(s1.mean == 0.5);
    CHECK(s1.std_dev == 0.0);

    std::vector<double> split{0.0, 1.0};
    auto s2 = summary_stats(split);
    CHECK(s2.mean == 0.5);
    CHECK(s2.std_dev == 0.5);

    std::vector<double> single{0.3};
    auto s3 = summary_stats(single);
    CHECK(s3.mean == 0.3);
    CHECK(s3.std_dev == 0.0);

    CHECK_THROWS_AS(summary_stats(std::vector<double>{}), InvalidInputError);
}

TEST_CASE("pearson_filtered: filter and degenerate cases") {
    std::vector<double> low{0.01, 0.02, 0.04};
    std::vector<double> any{0.1, 0.2, 0.3};
    CHECK_FALSE(pearson_filtered(low, any, 0.05).has_value());

    std::vector<double> xs{0.1, 0.2, 0.3};
    std::vector<double> ys{0.9, 0.8, 0.7};
    auto r = pearson_filtered(xs, ys, 0.05);
    REQUIRE(r.has_value());
    CHECK(*r == doctest::Approx(-1.0).epsilon(1e-9));

    std::vector<double> constant{0.5, 0.5, 0.5};
    CHECK_FALSE(pearson_filtered(xs, constant, 0.05).has_value());

    // The threshold is inclusive.
    std::vector<double> edge{0.05, 0.05, 0.2};
    std::vector<double> edge_y{0.9, 0.8, 0.7};
    CHECK(pearson_filtered(edge, edge_y, 0.05).has_value());

    // Fewer than two survivors.
    std::vector<double> one{0.01, 0.2};
    std::vector<double> one_y{0.9, 0.8};
    CHECK_FALSE(pearson_filtered(one, one_y, 0.05).has_value());
}

TEST_CASE("pearson_filtered: matches the textbook formula after filtering") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> xs, ys, fx, fy;
        const std::size_t n = 3 + rng() % 20;
        for (std::size_t i = 0; i < n; ++i) {
            xs.push_back(static_cast<double>(rng() % 1000) / 1000.0);
            ys.push_back(static_cast<double>(rng() % 1000) / 1000.0);
            if (xs.back() >= 0.05) {
                fx.push_back(xs.back());
                fy.push_back(ys.back());
            }
        }
        auto r = pearson_filtered(xs, ys, 0.05);
        if (fx.size() < 2) {
            CHECK_FALSE(r.has_value());
            continue;
        }
        const bool x_const = std::all_of(fx.begin(), fx.end(), [&](double v) { return v == fx[0]; });
        const bool y_const = std::all_of(fy.begin(), fy.end(), [&](double v) { return v == fy[0]; });
        if (x_const || y_const) {
            CHECK_FALSE(r.has_value());
            continue;
        }
        REQUIRE(r.has_value());
        CHECK(*r == doctest::Approx(oracle::pearson(fx, fy)).epsilon(1e-9));
    }
}

TEST_CASE("row sensitivity: zero iff constant, one iff uniform over C") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 200; ++trial) {
        auto instance = random_instance(rng, 10, 12, 6, false);
        const auto& table = instance.table;
        const auto& space = instance.space;
        for (std::size_t i = 0; i < table.num_samples(); ++i) {
            auto d = estimate_distribution(table.cells[i], space);
            const double s = sensitivity_of(d, space);

            bool has_na = false;
            bool constant = true;
            for (Outcome o : table.cells[i]) {
                if (o.is_na()) has_na = true;
                if (!(o == table.cells[i][0])) constant = false;
            }
            if (!has_na) {
                CHECK(s >= 0.0);
                CHECK(s <= 1.0 + 1e-12);
            }
            CHECK((s == 0.0) == constant);

            bool uniform = space.num_labels() <= table.q && table.q % space.num_labels() == 0;
            if (uniform) {
                for (std::size_t c = 0; c < space.num_labels(); ++c) {
                    if (d.probs[c] != 1.0 / static_cast<double>(space.num_labels())) {
                        uniform = false;
                        break;
                    }
                }
                if (uniform) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("distributions from rows are rationals over Q and sum to one") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        auto instance = random_instance(rng);
        for (const auto& row : instance.table.cells) {
            auto d = estimate_distribution(row, instance.space);
            double sum = 0.0;
            for (double p : d.probs) {
                sum += p;
                const double scaled = p * static_cast<double>(instance.table.q);
                CHECK(std::abs(scaled - std::round(scaled)) < 1e-9);
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("column permutation leaves every metric unchanged") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 50; ++trial) {
        auto instance = random_instance(rng, 12, 10, 6);
        auto shuffled = instance.table;
        std::vector<std::size_t> perm(shuffled.q);
        for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = k;
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t i = 0; i < shuffled.num_samples(); ++i) {
            for (std::size_t k = 0; k < shuffled.q; ++k) {
                shuffled.cells[i][k] = instance.table.cells[i][perm[k]];
            }
        }

        auto before = compute_report(instance.table, instance.space);
        auto after = compute_report(shuffled, instance.space);
        CHECK(before.expected_sensitivity == after.expected_sensitivity);
        CHECK(*before.consistency_overall == *after.consistency_overall);
        CHECK(before.micro_f1->mean == doctest::Approx(after.micro_f1->mean).epsilon(1e-12));
        for (std::size_t i = 0; i < before.per_sample.size(); ++i) {
            CHECK(before.per_sample[i].sensitivity == after.per_sample[i].sensitivity);
        }
    }
}

TEST_CASE("class relabeling leaves sensitivity, consistency and micro-F1 unchanged") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        auto instance = random_instance(rng, 12, 10, 6);
        const std::size_t c = instance.space.num_labels();

        std::vector<std::size_t> perm(c);
        for (std::size_t i = 0; i < c; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);

        // Same label names, permuted meaning: relabel cells and gold by perm.
        auto relabeled = instance.table;
        for (auto& row : relabeled.cells) {
            for (auto& cell : row) {
                if (!cell.is_na()) cell = Outcome::label(static_cast<int>(perm[cell.index()]));
            }
        }
        for (auto& g : *relabeled.gold_labels) g = perm[g];

        auto before = compute_report(instance.table, instance.space);
        auto after = compute_report(relabeled, instance.space);
        CHECK(before.expected_sensitivity == doctest::Approx(after.expected_sensitivity).epsilon(1e-12));
        CHECK(*before.consistency_overall == doctest::Approx(*after.consistency_overall).epsilon(1e-12));
        CHECK(before.micro_f1->mean == doctest::Approx(after.micro_f1->mean).epsilon(1e-12));
    }
}

TEST_CASE("constant predictor: zero sensitivity, unit consistency for every class") {
    ClassSpace six(letter_labels(6), true);
    std::vector<std::vector<int>> rows(24, std::vector<int>(10, 2));
    std::vector<int> gold;
    for (int i = 0; i < 24; ++i) gold.push_back(i % 6);
    auto table = table_from_rows(rows, gold);

    auto report = compute_report(table, six);
    CHECK(report.expected_sensitivity == 0.0);
    for (const auto& cc : report.per_class_consistency) {
        CHECK(cc.expected == 1.0);
    }
    CHECK(*report.consistency_overall == 1.0);
}

TEST_CASE("micro_f1 is exactly one on gold and exactly zero off gold") {
    ClassSpace two(letter_labels(2), false);
    auto on_gold = table_from_rows({{0, 0, 0}, {1, 1, 1}}, {0, 1});
    CHECK(micro_f1(on_gold, two).mean == 1.0);
    auto off_gold = table_from_rows({{1, 1, 1}, {0, 0, 0}}, {0, 1});
    CHECK(micro_f1(off_gold, two).mean == 0.0);
}

TEST_CASE("compute_report: expected sensitivity is the per-sample mean") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        auto instance = random_instance(rng);
        auto report = compute_report(instance.table, instance.space);
        std::vector<double> sens;
        for (const auto& sm : report.per_sample) sens.push_back(sm.sensitivity);
        CHECK(report.expected_sensitivity == doctest::Approx(oracle::mean(sens)).epsilon(1e-12));
        CHECK(report.sensitivity_stats.std_dev ==
              doctest::Approx(oracle::population_std(sens)).epsilon(1e-12));
    }
}

TEST_CASE("compute_report: per-sample average consistency matches the leave-self-out oracle") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        auto instance = random_instance(rng, 12, 8, 4);
        auto report = compute_report(instance.table, instance.space);
        const auto& gold = *instance.table.gold_labels;
        for (std::size_t c = 0; c < instance.space.num_labels(); ++c) {
            std::vector<std::vector<double>> dists;
            std::vector<std::size_t> rows;
            for (std::size_t i = 0; i < instance.table.num_samples(); ++i) {
                if (gold[i] == c) {
                    rows.push_back(i);
                    dists.push_back(oracle::distribution(row_as_ints(instance.table, i),
                                                         instance.space.num_labels(),
                                                         instance.space.na_enabled()));
                }
            }
            for (std::size_t a = 0; a < rows.size(); ++a) {
                const auto& sm = report.per_sample[rows[a]];
                if (rows.size() == 1) {
                    CHECK_FALSE(sm.avg_consistency.has_value());
                } else {
                    REQUIRE(sm.avg_consistency.has_value());
                    CHECK(*sm.avg_consistency ==
                          doctest::Approx(oracle::avg_consistency_of(dists, a)).epsilon(1e-9));
                }
            }
        }
    }
}

TEST_CASE("compute_report: flags samples whose sensitivity exceeds one") {
    ClassSpace space(letter_labels(2), true);
    auto table = table_from_rows({{0, 1, -1}, {0, 0, 0}});
    auto report = compute_report(table, space);
    CHECK(report.per_sample[0].exceeds_unit);
    CHECK(report.per_sample[0].sensitivity > 1.0);
    CHECK_FALSE(report.per_sample[1].exceeds_unit);

    MetricsOptions na_denom;
    na_denom.na_in_denominator = true;
    auto adjusted = compute_report(table, space, na_denom);
    CHECK_FALSE(adjusted.per_sample[0].exceeds_unit);
    CHECK(adjusted.per_sample[0].sensitivity == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("compute_report: gold-free tables skip label-dependent metrics") {
    auto table = table_from_rows({{0, 1}, {1, 1}});
    ClassSpace two(letter_labels(2), false);
    auto report = compute_report(table, two);
    CHECK_FALSE(report.micro_f1.has_value());
    CHECK_FALSE(report.consistency_overall.has_value());
    CHECK(report.per_class_consistency.empty());
    CHECK_FALSE(report.pearson_filtered.has_value());
}

TEST_CASE("compute_report: refuses tables with gaps") {
    auto table = table_from_rows({{0, 1}, {1, 1}});
    table.gaps.emplace_back(0, 1);
    ClassSpace two(letter_labels(2), false);
    CHECK_THROWS_AS(compute_report(table, two), InvalidInputError);
}
