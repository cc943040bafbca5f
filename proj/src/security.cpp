#include "stegofield/security.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "stegofield/metrics.hpp"
#include "stegofield/random.hpp"
#include "stegofield/renderer.hpp"
#include "stegofield/trainer.hpp"

namespace stegofield {

std::uint64_t available_primes() noexcept { return kPrimesBelow1e10 - kPrimesBelow1e7; }

double offset_log_integral(double x) {
    if (!(x >= 2.0)) throw std::invalid_argument("offset_log_integral needs x >= 2");
    // Ramanujan's series for li(x).
    auto li = [](double v) {
        const double ln = std::log(v);
        double sum = 0.0;
        double power = 1.0;       // ln^n / (n! 2^(n-1))
        double inner = 0.0;       // sum_{k=0}^{floor((n-1)/2)} 1/(2k+1)
        for (int n = 1; n < 200; ++n) {
            power *= ln / n;
            if (n > 1) power /= 2.0;
            if ((n - 1) % 2 == 0) inner += 1.0 / (n - 1 + 1);
            const double term = ((n - 1) % 2 == 0 ? 1.0 : -1.0) * power * inner;
            sum += term;
            if (std::abs(term) < 1e-17 * std::abs(sum)) break;
        }
        return std::numbers::egamma + std::log(ln) + std::sqrt(v) * sum;
    };
    return li(x) - li(2.0);
}

double available_primes_estimate() { return offset_log_integral(1e10) - offset_log_integral(1e7); }

double log10_brute_force_years(double log10_q, double fps) {
    if (!(fps > 0.0)) throw std::invalid_argument("render rate must be positive");
    return log10_q + std::log10(0.5) - std::log10(fps) - std::log10(kSecondsPerYear);
}

double brute_force_years(double q, double fps) {
    if (!(q > 0.0)) throw std::invalid_argument("key space must be positive");
    return std::pow(10.0, log10_brute_force_years(std::log10(q), fps));
}

KeySpaceReport key_space(std::uint64_t available, int dims, int keys, double fps) {
    if (available < 1 || dims < 1 || keys < 1) throw std::invalid_argument("key_space needs U, d, m >= 1");
    KeySpaceReport r;
    r.available_primes = available;
    r.dims = dims;
    r.keys = keys;
    r.prime_count = dims * keys;
    r.fps = fps;
    r.bits = r.prime_count * std::log2(static_cast<double>(available));
    r.log10_size = r.prime_count * std::log10(static_cast<double>(available));
    r.log10_brute_force_years = log10_brute_force_years(r.log10_size, fps);
    if (r.bits <= 256.0) {
        boost::multiprecision::cpp_int q = 1;
        for (int i = 0; i < r.prime_count; ++i) q *= available;
        r.exact_size = q.str();
    }
    return r;
}

FillRateReport fill_rate(std::span<const std::uint64_t> active, std::uint64_t table_size) {
    if (table_size < 1) throw std::invalid_argument("table size must be >= 1");
    FillRateReport r;
    r.active_cells.assign(active.begin(), active.end());
    r.table_size = table_size;
    const auto t = static_cast<double>(table_size);
    std::uint64_t total = 0;
    for (std::uint64_t k : active) {
        r.fill_rates.push_back(static_cast<double>(k) / t);
        total += k;
    }
    r.combined_fill_rate = static_cast<double>(total) / t;
    const double miss = total == 0 ? 1.0 : std::exp(static_cast<double>(total) * std::log1p(-1.0 / t));
    r.expected_occupied_slots = t * (1.0 - miss);
    r.expected_collisions = static_cast<double>(total) - r.expected_occupied_slots;
    if (total == 0) r.expected_occupied_slots = r.expected_collisions = 0.0;
    return r;
}

std::uint64_t count_collisions(std::span<const OccupiedCells> scenes, std::uint32_t table_size) {
    if (table_size == 0 || (table_size & (table_size - 1)) != 0)
        throw std::invalid_argument("table size must be a power of two");
    std::vector<bool> claimed(table_size, false);
    std::uint64_t collisions = 0;
    for (const OccupiedCells& scene : scenes) {
        const auto dims = static_cast<std::size_t>(scene.key.dims());
        for (const auto& v : scene.vertices) {
            const std::uint32_t slot = hash_index(std::span<const std::uint32_t>(v.data(), dims), scene.key, table_size);
            if (claimed[slot])
                ++collisions;
            else
                claimed[slot] = true;
        }
    }
    return collisions;
}

CollisionEstimate estimate_collisions(std::uint64_t kappa, std::uint32_t table_size, int trials, std::uint64_t seed) {
    if (trials < 2) throw std::invalid_argument("need at least two trials");
    constexpr std::uint64_t kGrid = 512;
    Rng rng(seed);
    std::vector<double> counts;
    for (int t = 0; t < trials; ++t) {
        OccupiedCells scene;
        scene.key = generate_key(3, rng());
        std::unordered_set<std::uint64_t> seen;
        while (scene.vertices.size() < kappa) {
            const std::uint64_t cell = uniform_index(rng, kGrid * kGrid * kGrid);
            if (!seen.insert(cell).second) continue;
            scene.vertices.push_back({static_cast<std::uint32_t>(cell % kGrid),
                                      static_cast<std::uint32_t>(cell / kGrid % kGrid),
                                      static_cast<std::uint32_t>(cell / (kGrid * kGrid))});
        }
        counts.push_back(static_cast<double>(count_collisions(std::span<const OccupiedCells>(&scene, 1), table_size)));
    }
    const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / trials;
    double var = 0.0;
    for (double c : counts) var += (c - mean) * (c - mean);
    var /= (trials - 1);
    return {mean, std::sqrt(var / trials)};
}

std::vector<std::array<std::uint32_t, 3>> active_cells(const StegoField& field, const KeySet& keys, int resolution,
                                                       double threshold) {
    if (field.mode() != FieldMode::Radiance3D) throw std::invalid_argument("active cells need a 3D field");
    if (resolution < 1) throw std::invalid_argument("resolution must be >= 1");
    const double delta = 1.0 / (resolution * static_cast<double>(field.bounding_box.scale[0]));
    const auto n = static_cast<std::size_t>(resolution);
    std::vector<std::array<std::uint32_t, 3>> active;
    FieldWorkspace<float> ws;
    std::vector<float> points(n * 3), dirs(n * 3), out(n * 4);
    for (std::size_t i = 0; i < n; ++i) {
        dirs[i * 3] = 0.0f;
        dirs[i * 3 + 1] = 0.0f;
        dirs[i * 3 + 2] = -1.0f;
    }
    for (std::size_t z = 0; z < n; ++z)
        for (std::size_t y = 0; y < n; ++y) {
            for (std::size_t x = 0; x < n; ++x) {
                points[x * 3] = static_cast<float>((x + 0.5) / resolution);
                points[x * 3 + 1] = static_cast<float>((y + 0.5) / resolution);
                points[x * 3 + 2] = static_cast<float>((z + 0.5) / resolution);
            }
            field_forward<float>(field, points, dirs, keys, ws, out);
            for (std::size_t x = 0; x < n; ++x)
                if (out[x * 4 + 3] * delta >= threshold)
                    active.push_back({static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y),
                                      static_cast<std::uint32_t>(z)});
        }
    return active;
}

namespace {

double mean_psnr(const StegoField& field, const KeySet& keys, const SceneDataset& data, int max_views, int samples) {
    const std::size_t views = std::min(data.views.size(), static_cast<std::size_t>(max_views));
    if (views == 0) throw std::invalid_argument("dataset has no views");
    double total = 0.0;
    for (std::size_t v = 0; v < views; ++v) {
        const View& view = data.views[v];
        const Image rendered = field.mode() == FieldMode::Image2D
                                   ? render_image_2d(field, keys, view.image.width, view.image.height)
                                   : render_image(field, *view.camera, keys, default_render_options(field, samples));
        total += psnr(rendered, view.image);
    }
    return total / static_cast<double>(views);
}

nlohmann::ordered_json finite_or_string(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
}

}  // namespace

AttackReport partial_key_attack(const StegoField& field, const KeySet& secret, const SceneDataset& cover,
                                const SceneDataset& hidden, std::span<const double> provisions, int max_views,
                                int samples_per_ray) {
    AttackReport report;
    report.key_count = secret.size();
    for (double p : provisions) {
        const KeySet mixed = make_mixed_keyset(secret, p);
        AttackRow row;
        row.provision = p;
        row.psnr_cover = mean_psnr(field, mixed, cover, max_views, samples_per_ray);
        row.psnr_hidden = mean_psnr(field, mixed, hidden, max_views, samples_per_ray);
        report.rows.push_back(row);
    }
    return report;
}

std::string to_json(const KeySpaceReport& r) {
    nlohmann::ordered_json j;
    j["configuration"] = r.keys == 1 ? "basic" : "multi-key";
    j["m"] = r.keys;
    j["d"] = r.dims;
    j["primes"] = r.prime_count;
    j["available_primes"] = r.available_primes;
    j["bits"] = r.bits;
    j["log10_key_space"] = r.log10_size;
    if (r.exact_size) j["key_space"] = *r.exact_size;
    j["fps"] = r.fps;
    j["log10_brute_force_years"] = r.log10_brute_force_years;
    j["brute_force_years"] = finite_or_string(std::pow(10.0, r.log10_brute_force_years));
    return j.dump(2);
}

std::string to_json(const FillRateReport& r) {
    nlohmann::ordered_json j;
    j["table_size"] = r.table_size;
    j["active_cells"] = r.active_cells;
    j["fill_rates"] = r.fill_rates;
    j["combined_fill_rate"] = r.combined_fill_rate;
    j["expected_occupied_slots"] = r.expected_occupied_slots;
    j["expected_collisions"] = r.expected_collisions;
    if (r.measured_collisions) j["measured_collisions"] = *r.measured_collisions;
    return j.dump(2);
}

std::string to_json(const AttackReport& r) {
    nlohmann::ordered_json j;
    j["m"] = r.key_count;
    j["rows"] = nlohmann::ordered_json::array();
    for (const AttackRow& row : r.rows) {
        nlohmann::ordered_json o;
        o["provision"] = row.provision;
        o["provision_percent"] = row.provision * 100.0;
        o["psnr_cover"] = finite_or_string(row.psnr_cover);
        o["psnr_hidden"] = finite_or_string(row.psnr_hidden);
        j["rows"].push_back(o);
    }
    return j.dump(2);
}

}  // namespace stegofield
