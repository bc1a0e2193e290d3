#include "fsdlab/flowdist.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fsdlab {

namespace {

constexpr double kSumTol = 1e-12;

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

FlowSizeDistribution::FlowSizeDistribution(std::vector<double> theta) : theta_(std::move(theta)) {
    if (theta_.empty()) throw Empty("distribution has no bins");
    double sum = 0.0;
    for (size_t i = 0; i < theta_.size(); ++i) {
        double t = theta_[i];
        if (!std::isfinite(t) || t < 0.0)
            throw OutOfRange("theta_" + std::to_string(i + 1) + " is negative or non-finite");
        if (t == 0.0)
            throw ZeroMass("theta_" + std::to_string(i + 1) +
                           " is zero; truncate the support or smooth before analysis");
        sum += t;
    }
    if (std::abs(sum - 1.0) > kSumTol) {
        for (double& t : theta_) t /= sum;  // accepts unnormalized weight vectors
    }
    mean_ = 0.0;
    for (size_t i = 0; i < theta_.size(); ++i) mean_ += static_cast<double>(i + 1) * theta_[i];
}

FlowSizeDistribution FlowPopulation::to_distribution() const { return from_histogram(histogram); }

FlowSizeDistribution from_histogram(const std::vector<std::uint64_t>& counts, double smooth_eps) {
    if (counts.empty()) throw Empty("histogram has no bins");
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) throw Empty("all histogram counts are zero");
    std::vector<double> theta(counts.size());
    if (smooth_eps > 0.0) {
        double denom = static_cast<double>(total) + smooth_eps * static_cast<double>(counts.size());
        for (size_t i = 0; i < counts.size(); ++i)
            theta[i] = (static_cast<double>(counts[i]) + smooth_eps) / denom;
    } else {
        for (size_t i = 0; i < counts.size(); ++i) {
            if (counts[i] == 0)
                throw ZeroMass("count for size " + std::to_string(i + 1) +
                               " is zero; truncate or pass a smoothing epsilon");
            theta[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
        }
    }
    return FlowSizeDistribution(std::move(theta));
}

FlowSizeDistribution truncated_exponential(int W, double rate) {
    if (W < 2) throw OutOfRange("truncated exponential needs W >= 2");
    if (!(rate > 0.0) || !std::isfinite(rate)) throw OutOfRange("rate must be positive");
    // exp(-rate*k) rescaled by exp(rate) so the largest weight is 1; the shift
    // cancels under normalization and avoids underflow for large rate*W.
    std::vector<double> theta(static_cast<size_t>(W));
    for (int k = 1; k <= W; ++k) theta[static_cast<size_t>(k - 1)] = std::exp(-rate * (k - 1));
    return FlowSizeDistribution(std::move(theta));
}

double solve_rate_for_mean(int W, double target_D) {
    if (W < 2) throw OutOfRange("need W >= 2");
    const double uniform_mean = (W + 1) / 2.0;
    if (!(target_D > 1.0) || target_D > uniform_mean + 1e-9)
        throw OutOfRange("target mean must lie in (1, (W+1)/2]");
    auto mean_at = [&](double rate) { return truncated_exponential(W, rate).mean_size(); };
    double lo = 1e-12;                       // mean ~ (W+1)/2
    double hi = 0.98 * 708.0 / (W - 1);      // largest rate whose tail weight stays normal
    if (target_D > mean_at(lo)) return lo;   // uniform boundary, within 1e-9 by flat slope
    if (mean_at(hi) > target_D)
        throw OutOfRange("target mean is too close to 1 for the tail weights to stay positive");
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mean_at(mid) > target_D)
            lo = mid;
        else
            hi = mid;
        if (std::abs(mean_at(mid) - target_D) <= 1e-10) break;
    }
    double rate = 0.5 * (lo + hi);
    if (std::abs(mean_at(rate) - target_D) > 1e-9)
        throw OutOfRange("mean-size solver did not reach the target");
    return rate;
}

FlowPopulation read_flow_records(const std::string& path, int W) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return read_flow_records(in, W, path);
}

FlowPopulation read_flow_records(std::istream& in, int W, const std::string& label) {
    if (W < 1) throw OutOfRange("W must be positive");
    FlowPopulation pop;
    pop.W = W;
    pop.histogram.assign(static_cast<size_t>(W), 0);
    std::string line;
    int lineno = 0;
    bool csv_mode = false;
    bool saw_any = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (lineno == 1 && t.rfind("size,", 0) == 0) {
            csv_mode = true;
            continue;
        }
        auto where = label + ":" + std::to_string(lineno);
        try {
            if (csv_mode || t.find(',') != std::string::npos) {
                csv_mode = true;
                auto comma = t.find(',');
                if (comma == std::string::npos) throw std::invalid_argument("missing comma");
                long long size = std::stoll(trim(t.substr(0, comma)));
                long long count = std::stoll(trim(t.substr(comma + 1)));
                if (size < 1 || count < 0) throw std::invalid_argument("negative field");
                saw_any = true;
                if (size <= W) pop.histogram[static_cast<size_t>(size - 1)] += static_cast<std::uint64_t>(count);
            } else {
                long long size = std::stoll(t);
                if (size < 1) throw std::invalid_argument("size below 1");
                saw_any = true;
                if (size <= W) pop.histogram[static_cast<size_t>(size - 1)] += 1;
            }
        } catch (const std::exception&) {
            throw ParseError("bad flow record at " + where + ": '" + t + "'");
        }
    }
    if (!saw_any) throw EmptyInput("no flow records in " + label);
    pop.N = 0;
    for (auto c : pop.histogram) pop.N += c;
    return pop;
}

FlowSizeDistribution read_distribution_csv(const std::string& path, double smooth_eps) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return read_distribution_csv(in, path, smooth_eps);
}

FlowSizeDistribution read_distribution_csv(std::istream& in, const std::string& label,
                                           double smooth_eps) {
    std::string line;
    if (!std::getline(in, line)) throw EmptyInput("empty distribution file " + label);
    std::string header = trim(line);
    bool theta_mode;
    if (header == "size,theta")
        theta_mode = true;
    else if (header == "size,count")
        theta_mode = false;
    else
        throw ParseError(label + ": expected header 'size,theta' or 'size,count', got '" + header + "'");

    std::vector<double> values;
    int lineno = 1;
    long long expected = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty()) continue;
        auto where = label + ":" + std::to_string(lineno);
        auto comma = t.find(',');
        if (comma == std::string::npos) throw ParseError("missing comma at " + where);
        long long size;
        double value;
        try {
            size = std::stoll(trim(t.substr(0, comma)));
            value = std::stod(trim(t.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ParseError("bad row at " + where + ": '" + t + "'");
        }
        if (size != expected)
            throw ParseError(label + ": sizes must be contiguous ascending from 1, got " +
                             std::to_string(size) + " at line " + std::to_string(lineno));
        ++expected;
        values.push_back(value);
    }
    if (values.empty()) throw EmptyInput("no rows in " + label);
    if (!theta_mode) {
        std::vector<std::uint64_t> counts(values.size());
        for (size_t i = 0; i < values.size(); ++i) {
            if (values[i] < 0 || values[i] != std::floor(values[i]))
                throw ParseError(label + ": counts must be nonnegative integers");
            counts[i] = static_cast<std::uint64_t>(values[i]);
        }
        return from_histogram(counts, smooth_eps);
    }
    if (smooth_eps > 0.0) {
        for (double& v : values) v += smooth_eps;
    }
    return FlowSizeDistribution(std::move(values));
}

void write_distribution_csv(const FlowSizeDistribution& dist, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << "size,theta\n";
    out.precision(17);
    for (int k = 1; k <= dist.W(); ++k) out << k << "," << dist.theta(k) << "\n";
}

}  // namespace fsdlab
