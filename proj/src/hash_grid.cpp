#include "stegofield/hash_grid.hpp"

#include <string>

#include "stegofield/parallel.hpp"

namespace stegofield {

double HashGridConfig::growth_factor() const {
    if (levels <= 1) return 1.0;
    return std::exp((std::log(static_cast<double>(max_resolution)) - std::log(static_cast<double>(min_resolution))) /
                    static_cast<double>(levels - 1));
}

void HashGridConfig::validate() const {
    if (levels < 1) throw std::invalid_argument("hash grid needs at least one level");
    if (log2_table_size < 1 || log2_table_size > 30) throw std::invalid_argument("log2 table size must be in [1, 30]");
    if (features < 1) throw std::invalid_argument("features per entry must be >= 1");
    if (min_resolution < 1 || min_resolution > max_resolution)
        throw std::invalid_argument("resolutions must satisfy 1 <= N_min <= N_max");
    if (dims != 2 && dims != 3) throw std::invalid_argument("hash grid dimensionality must be 2 or 3");
}

int level_resolution(int level, const HashGridConfig& config) {
    if (level < 0 || level >= config.levels)
        throw std::out_of_range("level " + std::to_string(level) + " outside [0, " + std::to_string(config.levels) + ")");
    if (level == config.levels - 1) return config.max_resolution;
    const double scaled = static_cast<double>(config.min_resolution) * std::pow(config.growth_factor(), level);
    // Relative slack absorbs exp/log rounding when the exact value is an integer.
    return static_cast<int>(std::floor(scaled * (1.0 + 1e-12)));
}

template <class Real>
void encode_batch_serial(std::span<const Real> points, const KeySet& keys, const FeatureTables<Real>& tables,
                         std::span<Real> out) {
    const auto dims = static_cast<std::size_t>(tables.config().dims);
    const auto width = static_cast<std::size_t>(tables.config().encoded_width());
    const std::size_t count = points.size() / dims;
    if (out.size() != count * width) throw std::invalid_argument("encode_batch output size mismatch");
    for (std::size_t i = 0; i < count; ++i)
        encode<Real>(points.subspan(i * dims, dims), keys, tables, out.subspan(i * width, width));
}

template <class Real>
void encode_batch(std::span<const Real> points, const KeySet& keys, const FeatureTables<Real>& tables,
                  std::span<Real> out) {
    const auto dims = static_cast<std::size_t>(tables.config().dims);
    const auto width = static_cast<std::size_t>(tables.config().encoded_width());
    const auto count = static_cast<std::int64_t>(points.size() / dims);
    if (out.size() != static_cast<std::size_t>(count) * width)
        throw std::invalid_argument("encode_batch output size mismatch");
    check_encode_inputs(tables.config(), keys);
    for (std::int64_t i = 0; i < count; ++i) check_unit_point(points.subspan(static_cast<std::size_t>(i) * dims, dims));

    const int workers = parallel::worker_count();
#pragma omp parallel for num_threads(workers) schedule(static) if (workers > 1)
    for (std::int64_t i = 0; i < count; ++i) {
        const auto u = static_cast<std::size_t>(i);
        encode<Real>(points.subspan(u * dims, dims), keys, tables, out.subspan(u * width, width));
    }
}

template void encode_batch_serial<float>(std::span<const float>, const KeySet&, const FeatureTables<float>&,
                                         std::span<float>);
template void encode_batch_serial<double>(std::span<const double>, const KeySet&, const FeatureTables<double>&,
                                          std::span<double>);
template void encode_batch<float>(std::span<const float>, const KeySet&, const FeatureTables<float>&,
                                  std::span<float>);
template void encode_batch<double>(std::span<const double>, const KeySet&, const FeatureTables<double>&,
                                   std::span<double>);

}  // namespace stegofield
