#include "promptgauge/triage.hpp"

#include <algorithm>

#include "promptgauge/errors.hpp"

namespace promptgauge {

namespace {

std::size_t count_correct(const PredictionTable& table, std::size_t row) {
    const std::size_t gold = (*table.gold_labels)[row];
    std::size_t correct = 0;
    for (const Outcome o : table.cells[row]) {
        if (!o.is_na() && static_cast<std::size_t>(o.index()) == gold) ++correct;
    }
    return correct;
}

}  // namespace

TriageList rank_sensitive(const PredictionTable& table, const ClassSpace& space, std::size_t k,
                          const MetricsOptions& options) {
    require_complete(table);
    const std::size_t n = table.num_samples();

    TriageList out;
    out.entries.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        TriageEntry entry;
        entry.sample_id = table.sample_ids[i];
        entry.sensitivity = sensitivity_of(estimate_distribution(table.cells[i], space), space,
                                           options.na_in_denominator);
        if (table.has_gold()) {
            entry.correct_count = count_correct(table, i);
            entry.gold_label = space.label_at((*table.gold_labels)[i]);
        }
        out.entries.push_back(std::move(entry));
    }

    std::sort(out.entries.begin(), out.entries.end(),
              [](const TriageEntry& a, const TriageEntry& b) {
                  if (a.sensitivity != b.sensitivity) return a.sensitivity > b.sensitivity;
                  return a.sample_id < b.sample_id;
              });

    if (k > n) {
        out.notices.push_back("asked for top " + std::to_string(k) + " but the table has only " +
                              std::to_string(n) + " samples");
    } else {
        out.entries.resize(k);
    }
    return out;
}

TriageList rank_inconsistent(const PredictionTable& table, const ClassSpace& space,
                             const std::string& class_label, std::size_t k,
                             double min_sensitivity, const MetricsOptions& options) {
    require_complete(table);
    if (!table.has_gold()) {
        throw MissingLabelsError("inconsistency ranking needs gold labels");
    }

    const ClassConsistency cc = class_consistency(table, space, class_label, options);
    const auto avgs = member_avg_consistency(table, space, cc, options);

    TriageList out;
    for (std::size_t a = 0; a < cc.member_rows.size(); ++a) {
        const std::size_t row = cc.member_rows[a];
        const double sensitivity = sensitivity_of(
            estimate_distribution(table.cells[row], space), space, options.na_in_denominator);
        if (sensitivity <= min_sensitivity) continue;
        if (!avgs[a]) {
            out.notices.push_back("sample " + table.sample_ids[row] +
                                  " omitted: no other samples share its class");
            continue;
        }
        TriageEntry entry;
        entry.sample_id = table.sample_ids[row];
        entry.sensitivity = sensitivity;
        entry.avg_consistency = avgs[a];
        entry.correct_count = count_correct(table, row);
        entry.gold_label = class_label;
        out.entries.push_back(std::move(entry));
    }

    std::sort(out.entries.begin(), out.entries.end(),
              [](const TriageEntry& a, const TriageEntry& b) {
                  if (*a.avg_consistency != *b.avg_consistency) {
                      return *a.avg_consistency < *b.avg_consistency;
                  }
                  return a.sample_id < b.sample_id;
              });
    if (k < out.entries.size()) out.entries.resize(k);
    return out;
}

std::vector<std::pair<std::string, double>> per_class_sensitivity(const PredictionTable& table,
                                                                  const ClassSpace& space,
                                                                  const MetricsOptions& options) {
    require_complete(table);
    if (!table.has_gold()) {
        throw MissingLabelsError("per-class sensitivity needs gold labels");
    }

    std::vector<double> sums(space.num_labels(), 0.0);
    std::vector<std::size_t> counts(space.num_labels(), 0);
    const auto& gold = *table.gold_labels;
    for (std::size_t i = 0; i < table.num_samples(); ++i) {
        sums[gold[i]] += sensitivity_of(estimate_distribution(table.cells[i], space), space,
                                        options.na_in_denominator);
        ++counts[gold[i]];
    }

    std::vector<std::pair<std::string, double>> out;
    for (std::size_t c = 0; c < space.num_labels(); ++c) {
        if (counts[c] > 0) {
            out.emplace_back(space.label_at(c), sums[c] / static_cast<double>(counts[c]));
        }
    }
    return out;
}

std::vector<std::size_t> consistency_histogram(const ClassConsistency& cc,
                                               std::size_t bin_count) {
    if (bin_count < 1) throw InvalidInputError("histogram needs at least one bin");

    std::vector<std::size_t> bins(bin_count, 0);
    const auto drop = [&](double v) {
        auto bin = static_cast<std::size_t>(v * static_cast<double>(bin_count));
        if (bin >= bin_count) bin = bin_count - 1;  // v == 1 lands in the last bin
        ++bins[bin];
    };

    if (!cc.estimated) {
        for (std::size_t i = 0; i < cc.matrix.size(); ++i) {
            for (std::size_t j = i + 1; j < cc.matrix.size(); ++j) drop(cc.matrix[i][j]);
        }
    } else {
        for (double v : cc.sampled_offdiag) drop(v);
    }
    return bins;
}

}  // namespace promptgauge
