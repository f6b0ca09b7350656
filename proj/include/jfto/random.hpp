#ifndef JFTO_RANDOM_HPP
#define JFTO_RANDOM_HPP

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace jfto {

// splitmix64 step; used to derive independent substream seeds so that
// batch members / stages can be reseeded deterministically.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline double uniform(Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng);
}

inline double gaussian(Rng& rng, double mean = 0.0, double stddev = 1.0) {
    std::normal_distribution<double> d(mean, stddev);
    return d(rng);
}

inline Eigen::VectorXd gaussian_vector(Rng& rng, int n) {
    Eigen::VectorXd v(n);
    std::normal_distribution<double> d(0.0, 1.0);
    for (int i = 0; i < n; ++i) v[i] = d(rng);
    return v;
}

inline Eigen::MatrixXd gaussian_matrix(Rng& rng, int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    std::normal_distribution<double> d(0.0, 1.0);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) m(r, c) = d(rng);
    return m;
}

} // namespace jfto

#endif
