#include "promptgauge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "promptgauge/detail/rng.hpp"
#include "promptgauge/errors.hpp"

namespace promptgauge {

namespace {

std::size_t slot_of(Outcome o, const ClassSpace& space) {
    return o.is_na() ? space.num_labels() : static_cast<std::size_t>(o.index());
}

double mean_of(std::span<const double> values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

// Pairwise consistency of one class given the member distributions. Fills
// everything except member_rows, which the caller owns.
ClassConsistency consistency_over_members(const std::vector<const ClassDistribution*>& dists,
                                          std::string class_label, const MetricsOptions& options) {
    ClassConsistency out;
    out.class_label = std::move(class_label);
    const std::size_t m = dists.size();
    const double ordered_pairs = static_cast<double>(m) * static_cast<double>(m);

    if (m <= options.class_size_cap) {
        out.matrix.assign(m, std::vector<double>(m, 1.0));
        long double upper_sum = 0.0L;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = i + 1; j < m; ++j) {
                const double v = consistency_pair(*dists[i], *dists[j]);
                out.matrix[i][j] = v;
                out.matrix[j][i] = v;
                upper_sum += v;
            }
        }
        // Self-pairs contribute 1 each; every distinct pair appears twice in
        // the ordered sum.
        out.expected = static_cast<double>((2.0L * upper_sum + m) / ordered_pairs);
        if (m > 1) {
            out.offdiag_mean = static_cast<double>(2.0L * upper_sum / (ordered_pairs - m));
        }
        return out;
    }

    out.estimated = true;
    std::mt19937_64 rng(options.subsample_seed);
    const std::size_t draws = std::max<std::size_t>(1, options.subsample_pairs);
    out.sampled_offdiag.reserve(draws);
    long double sum = 0.0L;
    for (std::size_t d = 0; d < draws; ++d) {
        const std::size_t i = detail::uniform_below(rng, m);
        std::size_t j = detail::uniform_below(rng, m - 1);
        if (j >= i) ++j;
        const double v = consistency_pair(*dists[i], *dists[j]);
        out.sampled_offdiag.push_back(v);
        sum += v;
    }
    const double offdiag = static_cast<double>(sum / draws);
    out.offdiag_mean = offdiag;
    out.expected = (offdiag * (ordered_pairs - m) + m) / ordered_pairs;
    return out;
}

// Per-member mean consistency against the other members (self excluded).
std::vector<std::optional<double>> member_avg_consistency(
    const std::vector<const ClassDistribution*>& dists, const ClassConsistency& cc,
    const MetricsOptions& options) {
    const std::size_t m = dists.size();
    std::vector<std::optional<double>> out(m);
    if (m < 2) return out;

    if (!cc.estimated) {
        for (std::size_t i = 0; i < m; ++i) {
            long double sum = 0.0L;
            for (std::size_t j = 0; j < m; ++j) {
                if (j != i) sum += cc.matrix[i][j];
            }
            out[i] = static_cast<double>(sum / (m - 1));
        }
        return out;
    }

    // Above the cap: average each member against a seeded subsample of others.
    std::mt19937_64 rng(options.subsample_seed + 1);
    const std::size_t draws = std::min(options.class_size_cap, m - 1);
    for (std::size_t i = 0; i < m; ++i) {
        long double sum = 0.0L;
        for (std::size_t d = 0; d < draws; ++d) {
            std::size_t j = detail::uniform_below(rng, m - 1);
            if (j >= i) ++j;
            sum += consistency_pair(*dists[i], *dists[j]);
        }
        out[i] = static_cast<double>(sum / draws);
    }
    return out;
}

}  // namespace

ClassDistribution estimate_distribution(std::span<const Outcome> row, const ClassSpace& space) {
    if (row.empty()) {
        throw InvalidInputError("cannot estimate a distribution from an empty row");
    }
    std::vector<double> probs(space.num_slots(), 0.0);
    for (Outcome o : row) {
        if (!space.valid_outcome(o)) {
            throw InvalidInputError("row contains an outcome outside the class space");
        }
        probs[slot_of(o, space)] += 1.0;
    }
    const double q = static_cast<double>(row.size());
    for (double& p : probs) p /= q;
    return ClassDistribution{std::move(probs)};
}

double sensitivity_of(const ClassDistribution& dist, const ClassSpace& space,
                      bool na_in_denominator) {
    if (space.num_labels() < 2) {
        throw InvalidInputError("sensitivity needs at least two classes");
    }
    if (dist.size() != space.num_slots()) {
        throw InvalidInputError("distribution length does not match the class space");
    }
    double entropy = 0.0;
    for (double p : dist.probs) {
        if (p < 0.0) throw InvalidInputError("negative probability");
        if (p > 0.0) entropy -= p * std::log(p);
    }
    const std::size_t denom_classes =
        (na_in_denominator && space.na_enabled()) ? space.num_labels() + 1 : space.num_labels();
    return entropy / std::log(static_cast<double>(denom_classes));
}

double expected_sensitivity(const PredictionTable& table, const ClassSpace& space,
                            bool na_in_denominator) {
    require_complete(table);
    if (table.num_samples() == 0) {
        throw InvalidInputError("expected sensitivity of an empty table");
    }
    double sum = 0.0;
    for (const auto& row : table.cells) {
        sum += sensitivity_of(estimate_distribution(row, space), space, na_in_denominator);
    }
    return sum / static_cast<double>(table.num_samples());
}

double tvd(const ClassDistribution& p, const ClassDistribution& q) {
    if (p.size() != q.size()) {
        throw InvalidInputError("total variation distance needs matching supports");
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
        sum += std::abs(p.probs[c] - q.probs[c]);
    }
    return 0.5 * sum;
}

double consistency_pair(const ClassDistribution& p, const ClassDistribution& q) {
    return 1.0 - tvd(p, q);
}

ClassConsistency class_consistency(const PredictionTable& table, const ClassSpace& space,
                                   const std::string& class_label,
                                   const MetricsOptions& options) {
    require_complete(table);
    if (!table.has_gold()) {
        throw MissingLabelsError("class consistency needs gold labels");
    }
    const auto class_index = space.index_of(class_label);
    if (!class_index) {
        throw InvalidInputError("unknown class label: " + class_label);
    }

    std::vector<std::size_t> members;
    const auto& gold = *table.gold_labels;
    for (std::size_t i = 0; i < table.num_samples(); ++i) {
        if (gold[i] == *class_index) members.push_back(i);
    }
    if (members.empty()) {
        throw EmptyClassError("class " + class_label + " has no samples");
    }

    std::vector<ClassDistribution> dists;
    dists.reserve(members.size());
    std::vector<const ClassDistribution*> ptrs;
    ptrs.reserve(members.size());
    for (std::size_t row : members) {
        dists.push_back(estimate_distribution(table.cells[row], space));
    }
    for (const auto& d : dists) ptrs.push_back(&d);

    ClassConsistency out = consistency_over_members(ptrs, class_label, options);
    out.member_rows = std::move(members);
    return out;
}

std::vector<std::optional<double>> member_avg_consistency(const PredictionTable& table,
                                                          const ClassSpace& space,
                                                          const ClassConsistency& cc,
                                                          const MetricsOptions& options) {
    std::vector<ClassDistribution> dists;
    dists.reserve(cc.member_rows.size());
    std::vector<const ClassDistribution*> ptrs;
    ptrs.reserve(cc.member_rows.size());
    for (std::size_t row : cc.member_rows) {
        if (row >= table.num_samples()) {
            throw InvalidInputError("class member row index out of range");
        }
        dists.push_back(estimate_distribution(table.cells[row], space));
    }
    for (const auto& d : dists) ptrs.push_back(&d);
    return member_avg_consistency(ptrs, cc, options);
}

MicroF1 micro_f1(const PredictionTable& table, const ClassSpace& space) {
    require_complete(table);
    if (!table.has_gold()) {
        throw MissingLabelsError("micro-F1 needs gold labels");
    }
    const std::size_t n = table.num_samples();
    if (n == 0 || table.q == 0) {
        throw InvalidInputError("micro-F1 of an empty table");
    }

    MicroF1 out;
    out.per_rephrasing.resize(table.q);
    const auto& gold = *table.gold_labels;
    for (std::size_t k = 0; k < table.q; ++k) {
        std::size_t tp = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const Outcome o = table.cells[i][k];
            if (!o.is_na() && static_cast<std::size_t>(o.index()) == gold[i]) ++tp;
        }
        // One prediction per sample: every miss is both a false positive for
        // the predicted slot and a false negative for the gold class.
        const double fp = static_cast<double>(n - tp);
        const double fn = static_cast<double>(n - tp);
        out.per_rephrasing[k] = (2.0 * tp) / (2.0 * tp + fp + fn);
    }
    out.mean = mean_of(out.per_rephrasing);
    return out;
}

SummaryStats summary_stats(std::span<const double> values) {
    if (values.empty()) {
        throw InvalidInputError("summary statistics of an empty sequence");
    }
    const double mean = mean_of(values);
    long double sq = 0.0L;
    for (double v : values) {
        const double d = v - mean;
        sq += static_cast<long double>(d) * d;
    }
    const double variance = static_cast<double>(sq / static_cast<long double>(values.size()));
    return SummaryStats{mean, std::sqrt(std::max(0.0, variance))};
}

std::optional<double> pearson_filtered(std::span<const double> sensitivities,
                                       std::span<const double> consistencies,
                                       double threshold) {
    if (sensitivities.size() != consistencies.size()) {
        throw InvalidInputError("correlation inputs must have equal length");
    }
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < sensitivities.size(); ++i) {
        if (sensitivities[i] >= threshold) {
            xs.push_back(sensitivities[i]);
            ys.push_back(consistencies[i]);
        }
    }
    if (xs.size() < 2) return std::nullopt;

    const double mx = mean_of(xs);
    const double my = mean_of(ys);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

MetricsReport compute_report(const PredictionTable& table, const ClassSpace& space,
                             const MetricsOptions& options) {
    require_complete(table);
    validate_table(table, space);
    const std::size_t n = table.num_samples();
    if (n == 0) throw InvalidInputError("metrics of an empty table");
    if (table.q == 0) throw InvalidInputError("table has zero rephrasing columns");

    MetricsReport report;
    report.pearson_threshold = options.pearson_threshold;

    std::vector<ClassDistribution> dists;
    dists.reserve(n);
    std::vector<double> sens(n);
    for (std::size_t i = 0; i < n; ++i) {
        dists.push_back(estimate_distribution(table.cells[i], space));
        sens[i] = sensitivity_of(dists[i], space, options.na_in_denominator);
    }

    report.per_sample.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        SampleMetrics sm;
        sm.sample_id = table.sample_ids[i];
        sm.sensitivity = sens[i];
        sm.distribution = dists[i];
        sm.exceeds_unit = sens[i] > 1.0 + 1e-12;
        report.per_sample.push_back(std::move(sm));
    }
    report.expected_sensitivity = mean_of(sens);
    report.sensitivity_stats = summary_stats(sens);

    if (!table.has_gold()) return report;

    const auto& gold = *table.gold_labels;
    std::vector<std::vector<std::size_t>> members(space.num_labels());
    for (std::size_t i = 0; i < n; ++i) members[gold[i]].push_back(i);

    // Ordered-pair accumulators pooled across classes (self-pairs included,
    // every value exactly once per ordered pair).
    long double pair_sum = 0.0L, pair_sq = 0.0L, pair_count = 0.0L, diag_count = 0.0L;

    for (std::size_t c = 0; c < space.num_labels(); ++c) {
        if (members[c].empty()) continue;

        std::vector<double> class_sens;
        class_sens.reserve(members[c].size());
        for (std::size_t row : members[c]) class_sens.push_back(sens[row]);
        report.per_class_sensitivity.emplace_back(space.label_at(c), mean_of(class_sens));

        std::vector<const ClassDistribution*> ptrs;
        ptrs.reserve(members[c].size());
        for (std::size_t row : members[c]) ptrs.push_back(&dists[row]);

        ClassConsistency cc = consistency_over_members(ptrs, space.label_at(c), options);
        cc.member_rows = members[c];
        const double m = static_cast<double>(members[c].size());

        if (!cc.estimated) {
            for (std::size_t a = 0; a < cc.matrix.size(); ++a) {
                for (std::size_t b = a + 1; b < cc.matrix.size(); ++b) {
                    const double v = cc.matrix[a][b];
                    pair_sum += 2.0L * v;
                    pair_sq += 2.0L * static_cast<long double>(v) * v;
                }
            }
        } else {
            report.consistency_estimated = true;
            long double s = 0.0L, s2 = 0.0L;
            for (double v : cc.sampled_offdiag) {
                s += v;
                s2 += static_cast<long double>(v) * v;
            }
            const long double k = static_cast<long double>(cc.sampled_offdiag.size());
            const long double offdiag_pairs = static_cast<long double>(m) * m - m;
            pair_sum += s / k * offdiag_pairs;
            pair_sq += s2 / k * offdiag_pairs;
        }
        pair_sum += m;  // unit diagonal
        pair_sq += m;
        pair_count += static_cast<long double>(m) * m;
        diag_count += m;

        const auto avgs = member_avg_consistency(ptrs, cc, options);
        for (std::size_t a = 0; a < avgs.size(); ++a) {
            report.per_sample[members[c][a]].avg_consistency = avgs[a];
        }

        report.per_class_consistency.push_back(std::move(cc));
    }

    report.consistency_overall = static_cast<double>(pair_sum / pair_count);
    const long double mean_all = pair_sum / pair_count;
    const long double var_all = pair_sq / pair_count - mean_all * mean_all;
    report.consistency_stats =
        SummaryStats{static_cast<double>(mean_all),
                     std::sqrt(std::max(0.0, static_cast<double>(var_all)))};
    if (pair_count > diag_count) {
        report.consistency_overall_offdiag =
            static_cast<double>((pair_sum - diag_count) / (pair_count - diag_count));
    }

    report.micro_f1 = micro_f1(table, space);
    report.micro_f1_stats = summary_stats(report.micro_f1->per_rephrasing);

    std::vector<double> px, py;
    for (const auto& sm : report.per_sample) {
        if (sm.avg_consistency) {
            px.push_back(sm.sensitivity);
            py.push_back(*sm.avg_consistency);
        }
    }
    std::size_t surviving = 0;
    for (double s : px) {
        if (s >= options.pearson_threshold) ++surviving;
    }
    report.pearson_sample_count = surviving;
    report.pearson_filtered = pearson_filtered(px, py, options.pearson_threshold);

    return report;
}

}  // namespace promptgauge
