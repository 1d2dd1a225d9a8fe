#include "bsdelab/parallel.hpp"

#include <catch2/catch.hpp>

#include <numeric>
#include <stdexcept>

using namespace bsde;

namespace {

std::vector<double> chunk_sums(std::size_t n, std::size_t chunk) {
    const std::size_t chunks = (n + chunk - 1) / chunk;
    std::vector<double> out(chunks, 0.0);
    parallel::for_chunks(n, chunk, [&](std::size_t c, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) out[c] += 1.0 / static_cast<double>(i + 1);
    });
    return out;
}

}  // namespace

TEST_CASE("chunk layout and results do not depend on the thread cap", "[parallel]") {
    parallel::set_max_threads(1);
    const auto one = chunk_sums(100003, 1000);
    parallel::set_max_threads(8);
    const auto eight = chunk_sums(100003, 1000);
    parallel::set_max_threads(0);
    CHECK(one.size() == 101);
    CHECK(one == eight);
}

TEST_CASE("every index is visited once", "[parallel]") {
    parallel::set_max_threads(4);
    std::vector<int> seen(777, 0);
    parallel::for_chunks(seen.size(), 10, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) ++seen[i];
    });
    parallel::set_max_threads(0);
    CHECK(std::accumulate(seen.begin(), seen.end(), 0) == 777);
    CHECK(std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; }));
    int calls = 0;
    parallel::for_chunks(0, 10, [&](std::size_t, std::size_t, std::size_t) { ++calls; });
    CHECK(calls == 0);
}

TEST_CASE("worker exceptions propagate", "[parallel]") {
    parallel::set_max_threads(3);
    CHECK_THROWS_AS(parallel::for_chunks(100, 1,
                                         [](std::size_t c, std::size_t, std::size_t) {
                                             if (c == 37) throw std::runtime_error("boom");
                                         }),
                    std::runtime_error);
    parallel::set_max_threads(0);
    CHECK(parallel::max_threads() >= 1);
}
