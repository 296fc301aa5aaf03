#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace apa {

/// Per-step summary of raw discriminator logits on real and generated data.
struct LogitBatchStats {
    std::int64_t step = 0;
    double mean_real_logit = 0.0;
    double mean_fake_logit = 0.0;
    double mean_sign_real = 0.0;  // in [-1, 1]
    double mean_sign_fake = 0.0;  // in [-1, 1]
    std::size_t batch_size = 0;
};

/// sign(0) counts as 0.
double mean_sign(std::span<const double> logits);

LogitBatchStats summarize_logits(std::int64_t step, std::span<const double> real_logits,
                                 std::span<const double> fake_logits);

}  // namespace apa
