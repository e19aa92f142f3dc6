#pragma once

#include <cmath>
#include <vector>

#include "scbris/numerics.hpp"
#include "scbris/random.hpp"
#include "scbris/scenario.hpp"

namespace scbris {

/// Unit-variance Rayleigh entries, filled column-major.
inline CMatrix draw_rayleigh_matrix(int rows, int cols, RandomStream& rng) {
    CMatrix out(rows, cols);
    for (Eigen::Index c = 0; c < out.cols(); ++c)
        for (Eigen::Index r = 0; r < out.rows(); ++r) out(r, c) = rng.complex_normal();
    return out;
}

/// Rician entries with an all-ones LoS component:
/// sqrt(k/(k+1)) + sqrt(1/(k+1)) * z, so E|entry|^2 = 1.
inline CMatrix draw_rician_matrix(int rows, int cols, double k_factor, RandomStream& rng) {
    if (!(k_factor >= 0.0)) throw DomainError("draw_rician_matrix: k_factor must be >= 0");
    const double los = std::isinf(k_factor) ? 1.0 : std::sqrt(k_factor / (k_factor + 1.0));
    const double nlos = std::isinf(k_factor) ? 0.0 : std::sqrt(1.0 / (k_factor + 1.0));
    CMatrix out(rows, cols);
    for (Eigen::Index c = 0; c < out.cols(); ++c)
        for (Eigen::Index r = 0; r < out.rows(); ++r) out(r, c) = los + nlos * rng.complex_normal();
    return out;
}

/// Small-scale fading for one trial.
struct ChannelRealization {
    int M = 0, K = 0, L = 0, N = 0;
    CMatrix H;               // N x M, BS-RIS
    std::vector<CMatrix> W;  // [m*K + k], L x M, BS-user
    std::vector<CMatrix> G;  // [m*K + k], L x N, RIS-user

    const CMatrix& direct(int m, int k) const { return W[static_cast<std::size_t>(m * K + k)]; }
    const CMatrix& reflect(int m, int k) const { return G[static_cast<std::size_t>(m * K + k)]; }
    CMatrix& direct(int m, int k) { return W[static_cast<std::size_t>(m * K + k)]; }
    CMatrix& reflect(int m, int k) { return G[static_cast<std::size_t>(m * K + k)]; }

    bool operator==(const ChannelRealization& o) const {
        if (M != o.M || K != o.K || L != o.L || N != o.N || H != o.H) return false;
        for (std::size_t i = 0; i < W.size(); ++i)
            if (W[i] != o.W[i] || G[i] != o.G[i]) return false;
        return true;
    }
};

/// Draw order: H, then for each (m, k) lexicographically W_{m,k} then G_{m,k}.
inline ChannelRealization draw_realization(const ScenarioConfig& cfg, RandomStream& rng) {
    ChannelRealization ch;
    ch.M = cfg.M;
    ch.K = cfg.K;
    ch.L = cfg.L;
    ch.N = cfg.N;
    ch.H = draw_rician_matrix(cfg.N, cfg.M, cfg.rician_k1, rng);
    ch.W.reserve(static_cast<std::size_t>(cfg.M * cfg.K));
    ch.G.reserve(static_cast<std::size_t>(cfg.M * cfg.K));
    for (int m = 0; m < cfg.M; ++m) {
        for (int k = 0; k < cfg.K; ++k) {
            ch.W.push_back(draw_rayleigh_matrix(cfg.L, cfg.M, rng));
            ch.G.push_back(draw_rician_matrix(cfg.L, cfg.N, cfg.rician_k2, rng));
        }
    }
    return ch;
}

}  // namespace scbris
