#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "rnndbn/eval.hpp"
#include "rnndbn/gradcheck.hpp"
#include "rnndbn/rtrbm.hpp"
#include "test_util.hpp"

using namespace rnndbn;
using rnndbn::test::random_rtrbm;

namespace {

RtrbmParams zero_rtrbm(std::size_t nv, std::size_t nh)
{
    Rng rng(0);
    RtrbmParams p = rtrbm::init(nv, nh, rng);
    p.W = Mat(nh, nv);
    p.W_uv = Mat(nv, nh);
    p.W_uh = Mat(nh, nh);
    return p;
}

RbmParams static_part(const RtrbmParams &p)
{
    return {p.W, p.b_v, p.b_h};
}

std::vector<Vec> alternating(std::size_t T)
{
    std::vector<Vec> seq;
    for(std::size_t t = 0; t < T; ++t)
        seq.push_back(t % 2 == 0 ? Vec{1, 0, 1, 0} : Vec{0, 1, 0, 1});
    return seq;
}

double mean_ll(const RtrbmParams &p, std::span<const Vec> seq)
{
    const auto ll = rtrbm::frame_log_probs(p, seq);
    return std::accumulate(ll.begin(), ll.end(), 0.0) / static_cast<double>(ll.size());
}

} // namespace

TEST(RtrbmBiases, StaticWhenCouplingsOrStateVanish)
{
    RtrbmParams p = random_rtrbm(3, 2, 1);
    const auto [bv, bh] = rtrbm::rtrbm_biases(p, Vec{0, 0});
    EXPECT_EQ(bv, p.b_v);
    EXPECT_EQ(bh, p.b_h);

    p.W_uv = Mat(3, 2);
    p.W_uh = Mat(2, 2);
    const auto [bv2, bh2] = rtrbm::rtrbm_biases(p, Vec{0.3, 0.9});
    EXPECT_EQ(bv2, p.b_v);
    EXPECT_EQ(bh2, p.b_h);
}

TEST(RtrbmBiases, HandCase)
{
    RtrbmParams p = zero_rtrbm(1, 1);
    p.b_h = {1.0};
    p.W_uh(0, 0) = 2.0;
    EXPECT_DOUBLE_EQ(rtrbm::rtrbm_biases(p, Vec{0.5}).second[0], 2.0);
}

TEST(RtrbmForward, ZeroParamsGiveHalf)
{
    const auto traj = rtrbm::rtrbm_forward(zero_rtrbm(3, 2), test::random_binary_seq(5, 3, 2));
    for(const auto &u : traj.u)
        EXPECT_EQ(u, Vec(2, 0.5));
}

TEST(RtrbmForward, NoRecurrenceIsStaticPosterior)
{
    RtrbmParams p = random_rtrbm(4, 3, 6);
    p.W_uh = Mat(3, 3);
    const auto seq = test::random_binary_seq(6, 4, 1);
    const auto traj = rtrbm::rtrbm_forward(p, seq);
    for(std::size_t t = 0; t < seq.size(); ++t)
        EXPECT_EQ(traj.u[t], rbm::prob_h_given_v(static_part(p), seq[t]));
}

TEST(RtrbmForward, MatchesDirectTranscription)
{
    const RtrbmParams p = random_rtrbm(4, 3, 8);
    const auto seq = test::random_binary_seq(7, 4, 3);
    const auto traj = rtrbm::rtrbm_forward(p, seq);
    Vec prev = p.u0;
    for(std::size_t t = 0; t < seq.size(); ++t) {
        Vec u(3);
        for(std::size_t i = 0; i < 3; ++i) {
            double a = p.b_h[i];
            double s = 0.0;
            for(std::size_t j = 0; j < 4; ++j)
                s += p.W(i, j) * seq[t][j];
            a += s;
            s = 0.0;
            for(std::size_t k = 0; k < 3; ++k)
                s += p.W_uh(i, k) * prev[k];
            a += s;
            const double e = a >= 0.0 ? 1.0 / (1.0 + std::exp(-a)) : std::exp(a) / (1.0 + std::exp(a));
            u[i] = std::clamp(e, 1e-15, 1.0 - 1e-15);
        }
        EXPECT_EQ(traj.u[t], u) << "t=" << t;
        prev = u;
    }
}

TEST(RtrbmTrain, ZeroLearningRate)
{
    const RtrbmParams p = random_rtrbm(4, 3, 2);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    Rng rng(0);
    EXPECT_EQ(rtrbm::rtrbm_train_step(p, alternating(4), cfg, rng), p);
}

TEST(RtrbmTrain, SingleFrameReducesToRbmCd)
{
    RtrbmParams p = random_rtrbm(4, 3, 10);
    p.W_uv = Mat(4, 3);
    p.W_uh = Mat(3, 3);
    TrainConfig cfg;
    cfg.learning_rate = 0.05;
    cfg.cd_k = 3;
    const std::vector<Vec> frame{{1, 0, 1, 1}};

    Rng a(44);
    const RtrbmParams q = rtrbm::rtrbm_train_step(p, frame, cfg, a);
    Rng b(44);
    const RbmParams r =
        rbm::apply_update(static_part(p), rbm::cd_k_gradient(static_part(p), frame, cfg.cd_k, b), cfg.learning_rate);
    EXPECT_EQ(q.W, r.W);
    EXPECT_EQ(q.b_v, r.b_v);
    EXPECT_EQ(q.b_h, r.b_h);
}

TEST(RtrbmTrain, AlternatingPatternLikelihoodImproves)
{
    Rng r0(3);
    RtrbmParams p = rtrbm::init(4, 4, r0);
    const auto seq = alternating(8);
    const double before = mean_ll(p, seq);
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    Rng rng(5);
    for(int step = 0; step < 100; ++step)
        p = rtrbm::rtrbm_train_step(p, seq, cfg, rng);
    EXPECT_GT(mean_ll(p, seq), before + 0.5);
}

TEST(RtrbmGradient, FiniteDifferenceAgreement)
{
    for(std::uint64_t seed : {0ULL, 3ULL}) {
        const auto rep = gradcheck::rtrbm_gradcheck(seed, 1e-5);
        EXPECT_LT(rep.max_rel_error, 1e-4) << "seed " << seed;
    }
}

TEST(RtrbmLogProb, NoCouplingIsStaticRbm)
{
    RtrbmParams p = random_rtrbm(3, 2, 4);
    p.W_uv = Mat(3, 2);
    p.W_uh = Mat(2, 2);
    const auto seq = test::random_binary_seq(5, 3, 7);
    const auto ll = rtrbm::frame_log_probs(p, seq);
    const RbmParams r = static_part(p);
    const double log_z = eval::exact_partition_rbm(r);
    for(std::size_t t = 0; t < seq.size(); ++t)
        EXPECT_NEAR(ll[t], rbm::log_prob(r, seq[t], log_z), 1e-12);
}

TEST(RtrbmGenerate, ShapeAndDeterminism)
{
    const RtrbmParams p = random_rtrbm(5, 3, 1);
    Rng a(6);
    Rng b(6);
    const auto x = rtrbm::rtrbm_generate(p, 9, 5, a);
    EXPECT_EQ(x, rtrbm::rtrbm_generate(p, 9, 5, b));
    ASSERT_EQ(x.size(), 9u);
    for(const auto &v : x)
        EXPECT_EQ(v.size(), 5u);
}

TEST(RtrbmGenerate, NoCouplingFramesFollowStaticRbm)
{
    RtrbmParams p = random_rtrbm(3, 2, 12, 1.0);
    p.W_uv = Mat(3, 2);
    p.W_uh = Mat(2, 2);
    const auto exact = eval::exact_visible_distribution_rbm(static_part(p));
    Rng rng(3);
    const auto frames = rtrbm::rtrbm_generate(p, 200000, 5, rng);
    std::size_t i = 0;
    const double tv = eval::empirical_tv_distance([&] { return frames[i++]; }, exact, frames.size());
    EXPECT_LT(tv, 0.05);
}
