#include "bsdelab/parallel.hpp"

namespace bsde::parallel {

namespace {
std::atomic<unsigned> g_max_threads{0};
}

void set_max_threads(unsigned n) { g_max_threads.store(n); }

unsigned max_threads() {
    const unsigned n = g_max_threads.load();
    if (n != 0) return n;
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace bsde::parallel
