#pragma once
// Calibration metric suite: expected calibration error with reliability
// bins, Pearson and Spearman correlation with two-sided t-approximation
// p-values, and the accuracy oracle.

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "conqord/types.hpp"

namespace conqord {

enum class EceVariant { absolute, squared };

const char* ece_variant_name(EceVariant v);
EceVariant ece_variant_from_name(const std::string& name);

struct BinRow {
    double lower = 0.0;
    double upper = 0.0;
    int count = 0;
    double mean_confidence = 0.0;
    double empirical_accuracy = 0.0;
};

struct EceResult {
    double ece = 0.0;
    std::vector<BinRow> bins;
};

// Equal-width bins over [0,1]; bin b covers [b/n, (b+1)/n), last bin closed
// at 1.0. Empty bins contribute 0. Throws std::invalid_argument on empty
// input or out-of-range confidence.
EceResult ece(std::span<const std::pair<double, bool>> samples, int n_bins,
              EceVariant variant);

struct Correlation {
    double correlation = 0.0;
    double p_value = 1.0;
};

// Sample PCC; p-value from t = r sqrt((n-2)/(1-r^2)) against the
// t-distribution with n-2 dof, two-sided. Throws on n < 3 or zero variance.
Correlation pearson(std::span<const double> x, std::span<const double> y);

// Pearson correlation of average ranks (ties get the mean of the ranks they
// occupy); p-value as in pearson on the rank vectors.
Correlation spearman(std::span<const double> x, std::span<const double> y);

// Mean correctness indicator; throws when any sample lacks `correct`.
double accuracy(std::span<const ScoredSample> samples);

// Two-sided tail probability of |T| >= |t| for Student's t with `dof`
// degrees of freedom. Exposed for tests.
double student_t_two_sided(double t, double dof);

struct MetricsConfig {
    int n_bins = 10;
    EceVariant variant = EceVariant::absolute;
};

struct CalibrationReport {
    double ece = 0.0;
    EceVariant ece_variant = EceVariant::absolute;
    Correlation pearson;
    Correlation spearman;
    double accuracy = 0.0;
    int n_samples = 0;
    std::vector<BinRow> bins;
};

// All four metrics plus reliability rows; correlations pair confidence with
// the correctness indicator.
CalibrationReport report(std::span<const ScoredSample> samples, const MetricsConfig& config);

// CSV serialization: one metric per row, plus a bins CSV suitable for
// external plotting.
void write_report_csv(const CalibrationReport& report, const std::filesystem::path& path);
void write_bins_csv(const std::vector<BinRow>& bins, const std::filesystem::path& path);

}  // namespace conqord
