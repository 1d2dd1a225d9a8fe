#include "bsdelab/brownian.hpp"

#include "bsdelab/error.hpp"
#include "bsdelab/parallel.hpp"
#include "bsdelab/random.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace bsde {

namespace {

constexpr std::size_t kPathChunk = 1024;
constexpr char kMagic[8] = {'B', 'S', 'D', 'E', 'P', 'A', 'T', 'H'};

static_assert(std::endian::native == std::endian::little, "binary export assumes a little-endian host");

template <class T>
void put(std::ofstream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw Error("truncated ensemble file");
    return v;
}

}  // namespace

EnsemblePtr simulate_ensemble(const TimeGrid& grid, std::size_t d, std::size_t M, std::uint64_t seed) {
    if (d == 0 || M == 0) throw InvalidArgument("simulate_ensemble needs d >= 1 and M >= 1");
    if (d > 0xFFFFFFFFull || grid.steps() > 0xFFFFFFFFull) throw InvalidArgument("ensemble too large");
    const std::size_t N = grid.steps();
    std::vector<double> values((N + 1) * M * d, 0.0);
    std::vector<double> sd(N);
    for (std::size_t i = 0; i < N; ++i) sd[i] = std::sqrt(grid.width(i));
    const rng::Key key = rng::stream_key(seed, rng::Stream::brownian);

    parallel::for_chunks(M, kPathChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t m = begin; m < end; ++m) {
            const auto lo = static_cast<std::uint32_t>(m);
            const auto hi = static_cast<std::uint32_t>(static_cast<std::uint64_t>(m) >> 32);
            for (std::size_t i = 0; i < N; ++i) {
                const double* prev = values.data() + (i * M + m) * d;
                double* next = values.data() + ((i + 1) * M + m) * d;
                for (std::size_t j = 0; j < d; ++j) {
                    next[j] = prev[j] + sd[i] * rng::normal(key, lo, hi, static_cast<std::uint32_t>(i),
                                                            static_cast<std::uint32_t>(j));
                }
            }
        }
    });
    return std::make_shared<const PathEnsemble>(grid, d, M, seed, std::move(values));
}

EnsemblePtr antithetic_pairing(const PathEnsemble& ensemble) {
    const std::size_t N = ensemble.grid().steps();
    const std::size_t M = ensemble.paths();
    const std::size_t d = ensemble.dims();
    std::vector<double> values((N + 1) * 2 * M * d);
    for (std::size_t i = 0; i <= N; ++i) {
        for (std::size_t m = 0; m < M; ++m) {
            const ConstVec src = ensemble.state(i, m);
            double* a = values.data() + (i * 2 * M + m) * d;
            double* b = values.data() + (i * 2 * M + M + m) * d;
            for (std::size_t j = 0; j < d; ++j) {
                a[j] = src[j];
                b[j] = -src[j];
            }
        }
    }
    return std::make_shared<const PathEnsemble>(ensemble.grid(), d, 2 * M, ensemble.seed(), std::move(values), true);
}

void export_ensemble(const PathEnsemble& ensemble, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    os.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(os, 1);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(ensemble.dims()));
    put<std::uint64_t>(os, ensemble.paths());
    put<std::uint64_t>(os, ensemble.grid().steps());
    put<std::uint64_t>(os, ensemble.seed());
    const auto& nodes = ensemble.grid().nodes();
    os.write(reinterpret_cast<const char*>(nodes.data()), static_cast<std::streamsize>(nodes.size() * sizeof(double)));
    const auto& v = ensemble.values();
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!os) throw Error("failed writing '" + path + "'");
}

EnsemblePtr import_ensemble(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open '" + path + "'");
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0) throw Error("'" + path + "' is not an ensemble file");
    if (get<std::uint32_t>(is) != 1) throw Error("unsupported ensemble file version");
    const auto d = get<std::uint32_t>(is);
    const auto M = get<std::uint64_t>(is);
    const auto N = get<std::uint64_t>(is);
    const auto seed = get<std::uint64_t>(is);
    std::vector<double> nodes(N + 1);
    is.read(reinterpret_cast<char*>(nodes.data()), static_cast<std::streamsize>(nodes.size() * sizeof(double)));
    std::vector<double> values((N + 1) * M * d);
    is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!is) throw Error("truncated ensemble file");
    return std::make_shared<const PathEnsemble>(TimeGrid(std::move(nodes)), d, M, seed, std::move(values));
}

}  // namespace bsde
