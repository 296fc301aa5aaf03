#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "apa/grad.hpp"
#include "apa/rng.hpp"

namespace apa {

enum class DatasetFamily { GaussianRing, GaussianGrid, TwoMoons };

std::string to_string(DatasetFamily family);
DatasetFamily dataset_family_from_string(const std::string& name);

using Point2 = std::array<double, 2>;

/// Parameters of a synthetic 2D distribution. Only the fields relevant to the
/// family are consulted: ring uses radius, grid uses spacing (and needs a
/// square mode_count), two-moons uses noise_std.
struct DatasetSpec {
    DatasetFamily family = DatasetFamily::GaussianRing;
    std::size_t mode_count = 8;
    double mode_std = 0.02;
    double radius = 2.0;
    double spacing = 1.0;
    double noise_std = 0.05;

    /// Throws ConfigError naming the offending field.
    void validate() const;

    static DatasetSpec ring(std::size_t modes, double radius, double mode_std);
    static DatasetSpec grid(std::size_t side, double spacing, double mode_std);
    static DatasetSpec two_moons(double noise_std);
};

/// Mode centres of a ring or grid. Empty for two-moons.
std::vector<Point2> mode_centers(const DatasetSpec& spec);

/// Half-width of a square that comfortably contains the distribution.
double bounding_extent(const DatasetSpec& spec);

/// n i.i.d. samples as an n x 2 matrix.
Matrix sample_distribution(const DatasetSpec& spec, std::size_t n, Rng& rng);

/// The fixed, limited set of real samples a run may ever see.
class RealPool {
public:
    static RealPool build(const DatasetSpec& spec, std::size_t pool_size, std::uint64_t pool_seed);

    /// Wraps explicit samples (n x 2, n >= 1), e.g. a hand-made pool in tests.
    static RealPool from_samples(Matrix samples, const DatasetSpec& spec, std::uint64_t seed = 0);

    const Matrix& samples() const { return samples_; }
    std::size_t size() const { return static_cast<std::size_t>(samples_.rows()); }
    const DatasetSpec& spec() const { return spec_; }
    std::uint64_t seed() const { return seed_; }

    Point2 point(std::size_t i) const { return {samples_(static_cast<Eigen::Index>(i), 0), samples_(static_cast<Eigen::Index>(i), 1)}; }

private:
    RealPool(Matrix samples, DatasetSpec spec, std::uint64_t seed)
        : samples_(std::move(samples)), spec_(spec), seed_(seed) {}

    Matrix samples_;
    DatasetSpec spec_;
    std::uint64_t seed_;
};

inline RealPool build_pool(const DatasetSpec& spec, std::size_t pool_size, std::uint64_t pool_seed) {
    return RealPool::build(spec, pool_size, pool_seed);
}

/// Indices drawn uniformly with replacement.
std::vector<std::size_t> sample_pool_indices(const RealPool& pool, std::size_t batch_size, Rng& rng);

Matrix gather(const RealPool& pool, const std::vector<std::size_t>& indices);

Matrix sample_real_batch(const RealPool& pool, std::size_t batch_size, Rng& rng);

struct LatentPrior {
    std::size_t dimension = 8;
};

/// batch_size x dimension matrix of standard normal entries, filled row by row.
Matrix sample_latent(const LatentPrior& prior, std::size_t batch_size, Rng& rng);

}  // namespace apa
