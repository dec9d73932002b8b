#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "rnndbn/numerics.hpp"
#include "rnndbn/rbm.hpp"
#include "rnndbn/rnn_dbn.hpp"
#include "rnndbn/rtrbm.hpp"

namespace rnndbn::test {

inline Mat random_mat(std::size_t r, std::size_t c, double sd, Rng &rng)
{
    return gaussian_mat(r, c, sd, rng);
}

inline Vec random_vec(std::size_t n, double sd, Rng &rng)
{
    Vec v(n);
    for(auto &x : v)
        x = rng.normal(0.0, sd);
    return v;
}

inline RbmParams random_rbm(std::size_t nv, std::size_t nh, std::uint64_t seed, double sd = 0.8)
{
    Rng rng(seed);
    RbmParams p{random_mat(nh, nv, sd, rng), {}, {}};
    p.b_v = random_vec(nv, sd, rng);
    p.b_h = random_vec(nh, sd, rng);
    return p;
}

inline RbmParams zero_rbm(std::size_t nv, std::size_t nh)
{
    return {Mat(nh, nv), Vec(nv, 0.0), Vec(nh, 0.0)};
}

inline RnnDbnParams random_rnn_dbn(std::size_t nv, std::size_t h1, std::size_t h2, std::size_t nu,
                                   std::uint64_t seed, double sd = 0.6)
{
    Rng rng(seed);
    RnnDbnParams p = rnn_dbn::init(nv, h1, h2, nu, rng);
    rnn_dbn::for_each_block(p, [&](std::string_view, std::span<double> b) {
        for(auto &x : b)
            x = rng.normal(0.0, sd);
    });
    for(auto &x : p.u0)
        x = 0.05 + 0.9 * rng.uniform();
    return p;
}

inline RnnDbnParams zero_rnn_dbn(std::size_t nv, std::size_t h1, std::size_t h2, std::size_t nu)
{
    Rng rng(0);
    RnnDbnParams p = rnn_dbn::init(nv, h1, h2, nu, rng);
    rnn_dbn::for_each_block(p, [](std::string_view, std::span<double> b) {
        for(auto &x : b)
            x = 0.0;
    });
    return p;
}

inline RtrbmParams random_rtrbm(std::size_t nv, std::size_t nh, std::uint64_t seed, double sd = 0.6)
{
    Rng rng(seed);
    RtrbmParams p = rtrbm::init(nv, nh, rng);
    p.W = random_mat(nh, nv, sd, rng);
    p.b_v = random_vec(nv, sd, rng);
    p.b_h = random_vec(nh, sd, rng);
    p.W_uv = random_mat(nv, nh, sd, rng);
    p.W_uh = random_mat(nh, nh, sd, rng);
    for(auto &x : p.u0)
        x = 0.05 + 0.9 * rng.uniform();
    return p;
}

inline std::vector<Vec> random_binary_seq(std::size_t T, std::size_t n, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<Vec> out;
    for(std::size_t t = 0; t < T; ++t)
        out.push_back(random_binary(n, rng));
    return out;
}

inline double rel_err(double a, double b)
{
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

} // namespace rnndbn::test
