#pragma once

// Sample-based quality diagnostics for 2D generators.

#include <array>
#include <cstddef>

#include "apa/grad.hpp"
#include "apa/toy_data.hpp"

namespace apa {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

/// Fréchet distance between Gaussians fitted to two 2D point sets (raw
/// coordinates as features).
struct FrechetScore {
    double value = 0.0;
    Vec2 mean_real = Vec2::Zero();
    Vec2 mean_fake = Vec2::Zero();
    Mat2 cov_real = Mat2::Zero();
    Mat2 cov_fake = Mat2::Zero();
    std::array<std::size_t, 2> sample_counts{0, 0};
    bool regularized = false;  // a rank-0 covariance was replaced by 1e-9 I
};

/// Principal square root of a symmetric PSD 2x2 matrix (closed form).
Mat2 sqrtm_psd_2x2(const Mat2& a);

/// Both inputs are n x 2 with n >= 3.
FrechetScore frechet_2d(const Matrix& real, const Matrix& fake);

/// Square binning grid over [-extent, extent]^2; points outside share one
/// overflow bin.
struct GridSpec {
    double x_min = -3.0;
    double x_max = 3.0;
    double y_min = -3.0;
    double y_max = 3.0;
    std::size_t bins_x = 64;
    std::size_t bins_y = 64;

    static GridSpec square(double extent, std::size_t bins);
};

/// Normalised histogram with bins_x * bins_y + 1 entries (last = overflow).
std::vector<double> histogram_2d(const Matrix& samples, const GridSpec& grid);

/// JS divergence (nats) between the two binned sample sets; in [0, log 2].
double histogram_jsd(const Matrix& real, const Matrix& fake, const GridSpec& grid);

struct CoverageReport {
    std::size_t modes_hit = 0;
    std::size_t mode_count = 0;
    std::size_t hit_threshold = 0;
    double capture_radius = 0.0;
};

/// A mode is hit when at least `hit_threshold` samples fall within
/// `capture_radius` of its centre. Requires a gaussian-ring spec.
CoverageReport mode_coverage(const Matrix& fake, const DatasetSpec& ring_spec, double capture_radius,
                             std::size_t hit_threshold);

}  // namespace apa
