#include "conqord/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "conqord/csv.hpp"

namespace conqord {

const char* ece_variant_name(EceVariant v) {
    return v == EceVariant::absolute ? "absolute" : "squared";
}

EceVariant ece_variant_from_name(const std::string& name) {
    if (name == "absolute") return EceVariant::absolute;
    if (name == "squared") return EceVariant::squared;
    throw std::invalid_argument("unknown ece variant '" + name + "'");
}

EceResult ece(std::span<const std::pair<double, bool>> samples, int n_bins,
              EceVariant variant) {
    if (samples.empty()) throw std::invalid_argument("ece: empty input");
    if (n_bins < 1) throw std::invalid_argument("ece: n_bins must be positive");

    std::vector<BinRow> bins(static_cast<std::size_t>(n_bins));
    std::vector<double> conf_sum(bins.size(), 0.0);
    std::vector<double> acc_sum(bins.size(), 0.0);
    for (int b = 0; b < n_bins; ++b) {
        bins[b].lower = static_cast<double>(b) / n_bins;
        bins[b].upper = static_cast<double>(b + 1) / n_bins;
    }

    for (const auto& [confidence, correct] : samples) {
        if (!(confidence >= 0.0 && confidence <= 1.0)) {
            throw std::invalid_argument("ece: confidence outside [0,1]");
        }
        int b = std::min(static_cast<int>(confidence * n_bins), n_bins - 1);
        bins[b].count += 1;
        conf_sum[b] += confidence;
        acc_sum[b] += correct ? 1.0 : 0.0;
    }

    const double n = static_cast<double>(samples.size());
    double total = 0.0;
    for (std::size_t b = 0; b < bins.size(); ++b) {
        if (bins[b].count == 0) continue;
        bins[b].mean_confidence = conf_sum[b] / bins[b].count;
        bins[b].empirical_accuracy = acc_sum[b] / bins[b].count;
        double gap = bins[b].empirical_accuracy - bins[b].mean_confidence;
        double err = variant == EceVariant::absolute ? std::abs(gap) : gap * gap;
        total += (bins[b].count / n) * err;
    }
    return EceResult{total, std::move(bins)};
}

namespace {

// Regularized incomplete beta I_x(a, b) via the standard continued
// fraction (modified Lentz).
double incbeta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double eps = 1e-15;
    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

double incbeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * incbeta_cf(a, b, x) / a;
    }
    return 1.0 - front * incbeta_cf(b, a, 1.0 - x) / b;
}

Correlation pearson_with_p(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw std::domain_error("pearson: zero variance, correlation undefined");
    }
    double r = sxy / std::sqrt(sxx * syy);
    r = std::clamp(r, -1.0, 1.0);
    double dof = static_cast<double>(n) - 2.0;
    double denom = 1.0 - r * r;
    double p;
    if (denom <= 1e-15) {
        p = std::numeric_limits<double>::min();  // |r| = 1: smallest positive p
    } else {
        double t = r * std::sqrt(dof / denom);
        p = student_t_two_sided(t, dof);
    }
    return Correlation{r, p};
}

// Average ranks, 1-based; ties receive the mean of the ranks they occupy.
std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double student_t_two_sided(double t, double dof) {
    if (dof <= 0.0) throw std::invalid_argument("student_t_two_sided: dof must be positive");
    double x = dof / (dof + t * t);
    double p = incbeta(dof / 2.0, 0.5, x);
    return std::clamp(p, std::numeric_limits<double>::min(), 1.0);
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
    if (x.size() < 3) throw std::invalid_argument("pearson: need at least 3 points");
    return pearson_with_p(x, y);
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
    if (x.size() < 3) throw std::invalid_argument("spearman: need at least 3 points");
    std::vector<double> rx = average_ranks(x);
    std::vector<double> ry = average_ranks(y);
    return pearson_with_p(rx, ry);
}

double accuracy(std::span<const ScoredSample> samples) {
    if (samples.empty()) throw std::invalid_argument("accuracy: empty input");
    double sum = 0.0;
    for (const ScoredSample& s : samples) {
        if (!s.correct.has_value()) {
            throw std::invalid_argument("accuracy: sample '" + s.prompt_id +
                                        "' has no correctness");
        }
        sum += *s.correct ? 1.0 : 0.0;
    }
    return sum / static_cast<double>(samples.size());
}

CalibrationReport report(std::span<const ScoredSample> samples, const MetricsConfig& config) {
    if (samples.empty()) throw std::invalid_argument("report: empty input");
    std::vector<std::pair<double, bool>> pairs;
    std::vector<double> conf, correct;
    pairs.reserve(samples.size());
    conf.reserve(samples.size());
    correct.reserve(samples.size());
    for (const ScoredSample& s : samples) {
        if (!s.correct.has_value()) {
            throw std::invalid_argument("report: sample '" + s.prompt_id +
                                        "' has no correctness");
        }
        pairs.emplace_back(s.confidence, *s.correct);
        conf.push_back(s.confidence);
        correct.push_back(*s.correct ? 1.0 : 0.0);
    }
    EceResult e = ece(pairs, config.n_bins, config.variant);
    CalibrationReport r;
    r.ece = e.ece;
    r.ece_variant = config.variant;
    r.bins = std::move(e.bins);
    r.pearson = pearson(conf, correct);
    r.spearman = spearman(conf, correct);
    r.accuracy = accuracy(samples);
    r.n_samples = static_cast<int>(samples.size());
    return r;
}

void write_report_csv(const CalibrationReport& report, const std::filesystem::path& path) {
    CsvWriter csv(path, {"metric", "value"});
    csv.row({"ece", fmt_double(report.ece)});
    csv.row({"ece_variant", ece_variant_name(report.ece_variant)});
    csv.row({"pearson", fmt_double(report.pearson.correlation)});
    csv.row({"pearson_p", fmt_double(report.pearson.p_value)});
    csv.row({"spearman", fmt_double(report.spearman.correlation)});
    csv.row({"spearman_p", fmt_double(report.spearman.p_value)});
    csv.row({"accuracy", fmt_double(report.accuracy)});
    csv.row({"n_samples", std::to_string(report.n_samples)});
    csv.close();
}

void write_bins_csv(const std::vector<BinRow>& bins, const std::filesystem::path& path) {
    CsvWriter csv(path, {"lower", "upper", "count", "mean_confidence", "empirical_accuracy"});
    for (const BinRow& b : bins) {
        csv.row({fmt_double(b.lower), fmt_double(b.upper), std::to_string(b.count),
                 fmt_double(b.mean_confidence), fmt_double(b.empirical_accuracy)});
    }
    csv.close();
}

}  // namespace conqord
