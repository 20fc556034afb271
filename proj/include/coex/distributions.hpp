#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "coex/roots.hpp"

namespace coex {

/// Congestion-sensitivity distribution family on the normalized support
/// [0, 1]. Truncated variants renormalize their mass to [0, 1], so
/// cdf(0) = 0 and cdf(1) = 1 hold exactly and the cdf stays continuous
/// (clipping would put atoms at the endpoints).
///
/// Immutable after construction; every operation is a pure function, so a
/// single instance can be shared across any number of worker threads.
class SensitivityDistribution {
public:
    enum class Kind { Uniform, TruncatedNormal, TruncatedExponential, TruncatedPareto };

    static SensitivityDistribution uniform() {
        return SensitivityDistribution(Kind::Uniform, 0.0, 0.0);
    }

    static SensitivityDistribution truncated_normal(double mean, double stdev) {
        if (!(stdev > 0.0)) throw std::invalid_argument("truncated_normal: stdev must be > 0");
        return SensitivityDistribution(Kind::TruncatedNormal, mean, stdev);
    }

    static SensitivityDistribution truncated_exponential(double rate) {
        if (!(rate > 0.0)) throw std::invalid_argument("truncated_exponential: rate must be > 0");
        return SensitivityDistribution(Kind::TruncatedExponential, rate, 0.0);
    }

    /// Pareto type II (Lomax) with the given shape and scale, truncated to
    /// [0, 1]. The type II form keeps the density positive and non-increasing
    /// on the whole support instead of introducing a flat gap below the scale.
    static SensitivityDistribution truncated_pareto(double shape, double scale) {
        if (!(shape > 0.0)) throw std::invalid_argument("truncated_pareto: shape must be > 0");
        if (!(scale > 0.0)) throw std::invalid_argument("truncated_pareto: scale must be > 0");
        return SensitivityDistribution(Kind::TruncatedPareto, shape, scale);
    }

    Kind kind() const { return kind_; }
    double param_a() const { return a_; }  // mean / rate / shape
    double param_b() const { return b_; }  // stdev / - / scale

    double cdf(double theta) const {
        require_support(theta, "cdf");
        if (theta == 0.0) return 0.0;
        if (theta == 1.0) return 1.0;
        double v = 0.0;
        switch (kind_) {
            case Kind::Uniform:
                return theta;
            case Kind::TruncatedNormal:
                v = (phi((theta - a_) / b_) - lo_mass_) / norm_;
                break;
            case Kind::TruncatedExponential:
                v = -std::expm1(-a_ * theta) / norm_;
                break;
            case Kind::TruncatedPareto:
                v = (1.0 - std::pow(1.0 + theta / b_, -a_)) / norm_;
                break;
        }
        return clamp01(v);
    }

    double pdf(double theta) const {
        require_support(theta, "pdf");
        switch (kind_) {
            case Kind::Uniform:
                return 1.0;
            case Kind::TruncatedNormal: {
                const double z = (theta - a_) / b_;
                return std::exp(-0.5 * z * z) / (b_ * norm_ * std::sqrt(2.0 * M_PI));
            }
            case Kind::TruncatedExponential:
                return a_ * std::exp(-a_ * theta) / norm_;
            case Kind::TruncatedPareto:
                return (a_ / b_) * std::pow(1.0 + theta / b_, -a_ - 1.0) / norm_;
        }
        return 0.0;
    }

    /// Quantile. Non-uniform kinds are inverted by bisection on [0, 1] down
    /// to an interval width of 1e-12: the cdf is monotone and bracketed, so
    /// no derivative information is needed.
    double inverse_cdf(double q) const {
        if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("inverse_cdf: q outside [0,1]");
        if (q == 0.0) return 0.0;
        if (q == 1.0) return 1.0;
        if (kind_ == Kind::Uniform) return q;
        return bisect([&](double t) { return cdf(t) - q; }, 0.0, 1.0, 1e-12);
    }

    /// True when the density is non-increasing on [0, 1]; gates the
    /// closed-form benchmark pricing path.
    bool has_nonincreasing_pdf() const {
        switch (kind_) {
            case Kind::Uniform:
            case Kind::TruncatedExponential:
            case Kind::TruncatedPareto:
                return true;
            case Kind::TruncatedNormal:
                return a_ <= 0.0;
        }
        return false;
    }

    /// Deterministic inverse-transform sampler. The 53-bit uniform draw is
    /// built directly from the engine output so the stream does not depend on
    /// the standard library's distribution implementation.
    std::vector<double> sample(std::size_t count, std::uint64_t seed) const {
        if (count == 0) throw std::invalid_argument("sample: count must be >= 1");
        std::mt19937_64 rng(seed);
        std::vector<double> out(count);
        for (std::size_t i = 0; i < count; ++i) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            out[i] = inverse_cdf(u);
        }
        return out;
    }

    /// Table-interpolated cdf, accurate to ~1e-9. Only for root *isolation*
    /// in the equilibrium solvers; brackets are always polished with the
    /// exact cdf before anything is reported.
    double cdf_fast(double theta) const {
        if (kind_ == Kind::Uniform) return clamp01(theta);
        if (theta <= 0.0) return 0.0;
        if (theta >= 1.0) return 1.0;
        const double pos = theta * kTableCells;
        const std::size_t i = static_cast<std::size_t>(pos);
        const double w = pos - static_cast<double>(i);
        return cdf_table_[i] * (1.0 - w) + cdf_table_[i + 1] * w;
    }

    double pdf_fast(double theta) const {
        if (kind_ == Kind::Uniform) return 1.0;
        const double t = clamp01(theta);
        const double pos = t * kTableCells;
        const std::size_t i = static_cast<std::size_t>(pos);
        const double w = pos - static_cast<double>(i);
        return pdf_table_[i] * (1.0 - w) + pdf_table_[i + 1] * w;
    }

    std::string kind_name() const {
        switch (kind_) {
            case Kind::Uniform: return "uniform";
            case Kind::TruncatedNormal: return "truncated_normal";
            case Kind::TruncatedExponential: return "truncated_exponential";
            case Kind::TruncatedPareto: return "truncated_pareto";
        }
        return "?";
    }

private:
    static constexpr std::size_t kTableCells = 8192;

    SensitivityDistribution(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {
        switch (kind_) {
            case Kind::Uniform:
                norm_ = 1.0;
                break;
            case Kind::TruncatedNormal:
                lo_mass_ = phi((0.0 - a_) / b_);
                norm_ = phi((1.0 - a_) / b_) - lo_mass_;
                break;
            case Kind::TruncatedExponential:
                norm_ = -std::expm1(-a_);
                break;
            case Kind::TruncatedPareto:
                norm_ = 1.0 - std::pow(1.0 + 1.0 / b_, -a_);
                break;
        }
        if (kind_ != Kind::Uniform) {
            cdf_table_.resize(kTableCells + 1);
            pdf_table_.resize(kTableCells + 1);
            for (std::size_t i = 0; i <= kTableCells; ++i) {
                const double t = static_cast<double>(i) / kTableCells;
                cdf_table_[i] = cdf(t);
                pdf_table_[i] = pdf(t);
            }
            cdf_table_.front() = 0.0;
            cdf_table_.back() = 1.0;
        }
    }

    static void require_support(double theta, const char* op) {
        if (!(theta >= 0.0 && theta <= 1.0))
            throw std::domain_error(std::string(op) + ": theta outside [0,1]");
    }

    static double phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

    Kind kind_;
    double a_ = 0.0;
    double b_ = 0.0;
    double norm_ = 1.0;
    double lo_mass_ = 0.0;
    std::vector<double> cdf_table_;
    std::vector<double> pdf_table_;
};

}  // namespace coex
