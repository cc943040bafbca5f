#include "stegofield/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>
#include <string>

namespace stegofield::parallel {
namespace {

int from_environment() {
    const char* value = std::getenv("STEGOFIELD_THREADS");
    if (value == nullptr || *value == '\0') return omp_get_max_threads();
    try {
        const int n = std::stoi(value);
        return n <= 1 ? 1 : n;
    } catch (const std::exception&) {
        return 1;
    }
}

std::atomic<int> g_override{0};

}  // namespace

int worker_count() {
    const int forced = g_override.load();
    if (forced > 0) return forced;
    static const int from_env = from_environment();
    return from_env;
}

void set_worker_count(int n) { g_override.store(n <= 1 ? 1 : n); }

}  // namespace stegofield::parallel
