#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "promptgauge/class_space.hpp"
#include "promptgauge/prediction_table.hpp"

namespace promptgauge {

// Estimated p(y|x): a categorical distribution over the label slots of a
// ClassSpace (trailing N/A slot included when enabled). Entries produced from a
// table row are exact rationals k/Q.
struct ClassDistribution {
    std::vector<double> probs;

    std::size_t size() const { return probs.size(); }
};

struct MetricsOptions {
    // Normalize entropy by ln(C+1) instead of ln(C) when the N/A slot exists.
    // Default keeps the C-label normalization, where N/A mass can push a
    // sample's sensitivity above 1 (flagged per sample).
    bool na_in_denominator = false;
    // Exact pairwise consistency up to this many samples per class; larger
    // classes fall back to seeded pair subsampling and are flagged estimated.
    std::size_t class_size_cap = 2000;
    std::uint64_t subsample_seed = 42;
    // Distinct pairs drawn per estimated class.
    std::size_t subsample_pairs = 200000;
    // Samples below this sensitivity are excluded from the correlation.
    double pearson_threshold = 0.05;
};

// Empirical class distribution of one table row: probs[c] = count(c) / Q.
ClassDistribution estimate_distribution(std::span<const Outcome> row, const ClassSpace& space);

// Normalized entropy of the distribution; 0 for a point mass, 1 for uniform
// over the C labels. 0*ln(0) terms are skipped, never evaluated.
double sensitivity_of(const ClassDistribution& dist, const ClassSpace& space,
                      bool na_in_denominator = false);

// Mean per-row sensitivity over the whole table.
double expected_sensitivity(const PredictionTable& table, const ClassSpace& space,
                            bool na_in_denominator = false);

// Total variation distance: half the L1 distance between two categorical
// distributions over the same support.
double tvd(const ClassDistribution& p, const ClassDistribution& q);

// 1 - tvd(p, q). Symmetric, in [0, 1], 1 iff the distributions are equal.
double consistency_pair(const ClassDistribution& p, const ClassDistribution& q);

// Pairwise consistency of one gold class.
struct ClassConsistency {
    std::string class_label;
    std::vector<std::size_t> member_rows;     // table row indices, table order
    std::vector<std::vector<double>> matrix;  // |D|x|D|, unit diagonal; empty when estimated
    // Mean over all |D|^2 ordered pairs, self-pairs included.
    double expected = 0.0;
    // Mean over pairs of distinct samples; absent for singleton classes.
    std::optional<double> offdiag_mean;
    bool estimated = false;                  // pair subsampling was used
    std::vector<double> sampled_offdiag;     // drawn pair values when estimated
};

ClassConsistency class_consistency(const PredictionTable& table, const ClassSpace& space,
                                   const std::string& class_label,
                                   const MetricsOptions& options = {});

// Mean consistency of each class member against the other members (self
// excluded); absent entries for singleton classes. Order follows
// cc.member_rows.
std::vector<std::optional<double>> member_avg_consistency(const PredictionTable& table,
                                                          const ClassSpace& space,
                                                          const ClassConsistency& cc,
                                                          const MetricsOptions& options = {});

struct MicroF1 {
    std::vector<double> per_rephrasing;  // one value per prompt column
    double mean = 0.0;
};

// Micro-averaged F1 of each rephrasing column against gold. With exactly one
// prediction per sample this equals accuracy; an N/A prediction is a false
// positive for the fallback slot and a false negative for the gold class.
MicroF1 micro_f1(const PredictionTable& table, const ClassSpace& space);

struct SummaryStats {
    double mean = 0.0;
    double std_dev = 0.0;  // population standard deviation
};

SummaryStats summary_stats(std::span<const double> values);

// Pearson correlation between sensitivity and average consistency over the
// samples at or above the threshold. Absent when fewer than two samples
// survive the filter or either variable is constant.
std::optional<double> pearson_filtered(std::span<const double> sensitivities,
                                       std::span<const double> consistencies,
                                       double threshold = 0.05);

struct SampleMetrics {
    std::string sample_id;
    double sensitivity = 0.0;
    ClassDistribution distribution;
    // Mean pairwise consistency against the other same-class samples
    // (self excluded); absent without gold labels or for singleton classes.
    std::optional<double> avg_consistency;
    // Sensitivity above 1: only possible when N/A mass is present and the
    // denominator stays at ln(C).
    bool exceeds_unit = false;
};

struct MetricsReport {
    std::vector<SampleMetrics> per_sample;
    double expected_sensitivity = 0.0;
    SummaryStats sensitivity_stats;

    // Gold-label dependent fields; empty/absent otherwise.
    std::vector<std::pair<std::string, double>> per_class_sensitivity;
    std::vector<ClassConsistency> per_class_consistency;
    std::optional<double> consistency_overall;          // pooled, self-pairs included
    std::optional<double> consistency_overall_offdiag;  // pooled, self-pairs excluded
    std::optional<SummaryStats> consistency_stats;      // over the self-pair-inclusive pool
    bool consistency_estimated = false;
    std::optional<MicroF1> micro_f1;
    std::optional<SummaryStats> micro_f1_stats;  // over the Q per-column values

    std::optional<double> pearson_filtered;
    std::size_t pearson_sample_count = 0;
    double pearson_threshold = 0.05;
};

// Runs the full metric battery over a complete table.
MetricsReport compute_report(const PredictionTable& table, const ClassSpace& space,
                             const MetricsOptions& options = {});

}  // namespace promptgauge
