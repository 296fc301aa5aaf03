#include "apa/toy_data.hpp"

#include <cmath>
#include <numbers>

#include "apa/errors.hpp"

namespace apa {

std::string to_string(DatasetFamily family) {
    switch (family) {
        case DatasetFamily::GaussianRing:
            return "gaussian-ring";
        case DatasetFamily::GaussianGrid:
            return "gaussian-grid";
        case DatasetFamily::TwoMoons:
            return "two-moons";
    }
    return "unknown";
}

DatasetFamily dataset_family_from_string(const std::string& name) {
    if (name == "gaussian-ring") return DatasetFamily::GaussianRing;
    if (name == "gaussian-grid") return DatasetFamily::GaussianGrid;
    if (name == "two-moons") return DatasetFamily::TwoMoons;
    throw ConfigError("dataset.family", "unknown family '" + name + "' (expected gaussian-ring, gaussian-grid, two-moons)");
}

namespace {

std::size_t grid_side(std::size_t mode_count) {
    auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(mode_count))));
    return side;
}

}  // namespace

void DatasetSpec::validate() const {
    if (mode_count < 1) {
        throw ConfigError("dataset.mode_count", "must be at least 1");
    }
    if (!(mode_std > 0.0)) {
        throw ConfigError("dataset.mode_std", "must be positive");
    }
    switch (family) {
        case DatasetFamily::GaussianRing:
            if (!(radius > 0.0)) throw ConfigError("dataset.radius", "must be positive");
            break;
        case DatasetFamily::GaussianGrid: {
            if (!(spacing > 0.0)) throw ConfigError("dataset.spacing", "must be positive");
            const std::size_t side = grid_side(mode_count);
            if (side * side != mode_count) {
                throw ConfigError("dataset.mode_count", "gaussian-grid needs a square mode count");
            }
            break;
        }
        case DatasetFamily::TwoMoons:
            if (!(noise_std > 0.0)) throw ConfigError("dataset.noise_std", "must be positive");
            break;
    }
}

DatasetSpec DatasetSpec::ring(std::size_t modes, double radius, double mode_std) {
    DatasetSpec s;
    s.family = DatasetFamily::GaussianRing;
    s.mode_count = modes;
    s.radius = radius;
    s.mode_std = mode_std;
    return s;
}

DatasetSpec DatasetSpec::grid(std::size_t side, double spacing, double mode_std) {
    DatasetSpec s;
    s.family = DatasetFamily::GaussianGrid;
    s.mode_count = side * side;
    s.spacing = spacing;
    s.mode_std = mode_std;
    return s;
}

DatasetSpec DatasetSpec::two_moons(double noise_std) {
    DatasetSpec s;
    s.family = DatasetFamily::TwoMoons;
    s.mode_count = 2;
    s.noise_std = noise_std;
    return s;
}

std::vector<Point2> mode_centers(const DatasetSpec& spec) {
    std::vector<Point2> centers;
    switch (spec.family) {
        case DatasetFamily::GaussianRing:
            for (std::size_t k = 0; k < spec.mode_count; ++k) {
                const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(spec.mode_count);
                centers.push_back({spec.radius * std::cos(angle), spec.radius * std::sin(angle)});
            }
            break;
        case DatasetFamily::GaussianGrid: {
            const std::size_t side = grid_side(spec.mode_count);
            const double offset = 0.5 * static_cast<double>(side - 1);
            for (std::size_t i = 0; i < side; ++i) {
                for (std::size_t j = 0; j < side; ++j) {
                    centers.push_back({(static_cast<double>(i) - offset) * spec.spacing,
                                       (static_cast<double>(j) - offset) * spec.spacing});
                }
            }
            break;
        }
        case DatasetFamily::TwoMoons:
            break;
    }
    return centers;
}

double bounding_extent(const DatasetSpec& spec) {
    switch (spec.family) {
        case DatasetFamily::GaussianRing:
            return spec.radius + 6.0 * spec.mode_std + 0.5;
        case DatasetFamily::GaussianGrid: {
            const double half = 0.5 * static_cast<double>(grid_side(spec.mode_count) - 1) * spec.spacing;
            return half + 6.0 * spec.mode_std + 0.5;
        }
        case DatasetFamily::TwoMoons:
            return 2.5 + 6.0 * spec.noise_std;
    }
    return 1.0;
}

Matrix sample_distribution(const DatasetSpec& spec, std::size_t n, Rng& rng) {
    spec.validate();
    Matrix out(static_cast<Eigen::Index>(n), 2);
    if (spec.family == DatasetFamily::TwoMoons) {
        // Upper moon centred at the origin, lower moon shifted by (1, -0.5);
        // the pair is then centred on the origin.
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            const bool upper = rng.uniform() < 0.5;
            const double t = std::numbers::pi * rng.uniform();
            double x = upper ? std::cos(t) : 1.0 - std::cos(t);
            double y = upper ? std::sin(t) : 0.5 - std::sin(t);
            x += spec.noise_std * rng.normal() - 0.5;
            y += spec.noise_std * rng.normal() - 0.25;
            out(i, 0) = x;
            out(i, 1) = y;
        }
        return out;
    }
    const auto centers = mode_centers(spec);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const auto& c = centers[rng.index(centers.size())];
        out(i, 0) = c[0] + spec.mode_std * rng.normal();
        out(i, 1) = c[1] + spec.mode_std * rng.normal();
    }
    return out;
}

RealPool RealPool::build(const DatasetSpec& spec, std::size_t pool_size, std::uint64_t pool_seed) {
    spec.validate();
    if (pool_size < 2) {
        throw ConfigError("dataset.pool_size", "must be at least 2");
    }
    Rng rng = Rng::stream(pool_seed, "pool");
    return RealPool(sample_distribution(spec, pool_size, rng), spec, pool_seed);
}

RealPool RealPool::from_samples(Matrix samples, const DatasetSpec& spec, std::uint64_t seed) {
    if (samples.rows() < 1 || samples.cols() != 2) {
        throw ShapeError("pool samples must be an n x 2 matrix with n >= 1");
    }
    return RealPool(std::move(samples), spec, seed);
}

std::vector<std::size_t> sample_pool_indices(const RealPool& pool, std::size_t batch_size, Rng& rng) {
    std::vector<std::size_t> idx(batch_size);
    for (auto& i : idx) {
        i = static_cast<std::size_t>(rng.index(pool.size()));
    }
    return idx;
}

Matrix gather(const RealPool& pool, const std::vector<std::size_t>& indices) {
    Matrix out(static_cast<Eigen::Index>(indices.size()), 2);
    for (std::size_t r = 0; r < indices.size(); ++r) {
        out.row(static_cast<Eigen::Index>(r)) = pool.samples().row(static_cast<Eigen::Index>(indices[r]));
    }
    return out;
}

Matrix sample_real_batch(const RealPool& pool, std::size_t batch_size, Rng& rng) {
    return gather(pool, sample_pool_indices(pool, batch_size, rng));
}

Matrix sample_latent(const LatentPrior& prior, std::size_t batch_size, Rng& rng) {
    if (prior.dimension < 1) {
        throw ConfigError("gan.latent_dim", "must be at least 1");
    }
    Matrix z(static_cast<Eigen::Index>(batch_size), static_cast<Eigen::Index>(prior.dimension));
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        for (Eigen::Index j = 0; j < z.cols(); ++j) {
            z(i, j) = rng.normal();
        }
    }
    return z;
}

}  // namespace apa
