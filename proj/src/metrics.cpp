#include "apa/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "apa/errors.hpp"
#include "apa/theory.hpp"

namespace apa {

namespace {

void check_points(const Matrix& m, std::size_t min_rows, const char* what) {
    if (m.cols() != 2) {
        throw ShapeError(std::string(what) + ": samples must be n x 2");
    }
    if (static_cast<std::size_t>(m.rows()) < min_rows) {
        throw std::invalid_argument(std::string(what) + ": need at least " + std::to_string(min_rows) + " samples");
    }
}

void fit(const Matrix& x, Vec2& mean, Mat2& cov) {
    mean = x.colwise().mean().transpose();
    const Matrix centered = x.rowwise() - mean.transpose();
    cov = (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);
    cov = 0.5 * (cov + cov.transpose());
}

}  // namespace

Mat2 sqrtm_psd_2x2(const Mat2& a) {
    // sqrt(A) = (A + s I) / t with s = sqrt(det A), t = sqrt(tr A + 2 s).
    const double det = std::max(0.0, a.determinant());
    const double s = std::sqrt(det);
    const double t2 = a.trace() + 2.0 * s;
    if (!(t2 > 0.0)) {
        return Mat2::Zero();
    }
    return (a + s * Mat2::Identity()) / std::sqrt(t2);
}

FrechetScore frechet_2d(const Matrix& real, const Matrix& fake) {
    check_points(real, 3, "frechet_2d");
    check_points(fake, 3, "frechet_2d");
    FrechetScore f;
    f.sample_counts = {static_cast<std::size_t>(real.rows()), static_cast<std::size_t>(fake.rows())};
    fit(real, f.mean_real, f.cov_real);
    fit(fake, f.mean_fake, f.cov_fake);

    Mat2 cr = f.cov_real;
    Mat2 cf = f.cov_fake;
    if (cr.trace() <= 0.0) {
        cr += 1e-9 * Mat2::Identity();
        f.regularized = true;
    }
    if (cf.trace() <= 0.0) {
        cf += 1e-9 * Mat2::Identity();
        f.regularized = true;
    }
    // tr (Sr Sf)^(1/2) via the symmetric product Sr^(1/2) Sf Sr^(1/2).
    const Mat2 root_r = sqrtm_psd_2x2(cr);
    Mat2 inner = root_r * cf * root_r;
    inner = 0.5 * (inner + inner.transpose());
    const double cross = sqrtm_psd_2x2(inner).trace();
    const double mean_term = (f.mean_real - f.mean_fake).squaredNorm();
    f.value = std::max(0.0, mean_term + cr.trace() + cf.trace() - 2.0 * cross);
    return f;
}

GridSpec GridSpec::square(double extent, std::size_t bins) {
    return GridSpec{-extent, extent, -extent, extent, bins, bins};
}

std::vector<double> histogram_2d(const Matrix& samples, const GridSpec& grid) {
    check_points(samples, 1, "histogram_2d");
    if (grid.bins_x == 0 || grid.bins_y == 0 || !(grid.x_max > grid.x_min) || !(grid.y_max > grid.y_min)) {
        throw std::invalid_argument("histogram_2d: invalid grid");
    }
    const std::size_t overflow = grid.bins_x * grid.bins_y;
    std::vector<double> h(overflow + 1, 0.0);
    const double wx = (grid.x_max - grid.x_min) / static_cast<double>(grid.bins_x);
    const double wy = (grid.y_max - grid.y_min) / static_cast<double>(grid.bins_y);
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        const double x = samples(i, 0);
        const double y = samples(i, 1);
        if (!(x >= grid.x_min && x < grid.x_max && y >= grid.y_min && y < grid.y_max)) {
            h[overflow] += 1.0;
            continue;
        }
        auto bx = static_cast<std::size_t>((x - grid.x_min) / wx);
        auto by = static_cast<std::size_t>((y - grid.y_min) / wy);
        bx = std::min(bx, grid.bins_x - 1);
        by = std::min(by, grid.bins_y - 1);
        h[by * grid.bins_x + bx] += 1.0;
    }
    const double n = static_cast<double>(samples.rows());
    for (auto& v : h) {
        v /= n;
    }
    return h;
}

double histogram_jsd(const Matrix& real, const Matrix& fake, const GridSpec& grid) {
    return jsd(histogram_2d(real, grid), histogram_2d(fake, grid));
}

CoverageReport mode_coverage(const Matrix& fake, const DatasetSpec& ring_spec, double capture_radius,
                             std::size_t hit_threshold) {
    if (ring_spec.family != DatasetFamily::GaussianRing) {
        throw std::invalid_argument("mode_coverage: requires a gaussian-ring dataset");
    }
    if (fake.cols() != 2) {
        throw ShapeError("mode_coverage: samples must be n x 2");
    }
    const auto centers = mode_centers(ring_spec);
    CoverageReport r;
    r.mode_count = centers.size();
    r.hit_threshold = hit_threshold;
    r.capture_radius = capture_radius;
    const double r2 = capture_radius * capture_radius;
    for (const auto& c : centers) {
        std::size_t inside = 0;
        for (Eigen::Index i = 0; i < fake.rows(); ++i) {
            const double dx = fake(i, 0) - c[0];
            const double dy = fake(i, 1) - c[1];
            if (dx * dx + dy * dy <= r2) {
                ++inside;
            }
        }
        if (inside >= hit_threshold) {
            ++r.modes_hit;
        }
    }
    return r;
}

}  // namespace apa
