#include <gtest/gtest.h>

#include <cmath>

#include "rnndbn/gradcheck.hpp"
#include "rnndbn/rnn.hpp"
#include "test_util.hpp"

using namespace rnndbn;

namespace {

RnnParams zero_rnn(std::size_t nv, std::size_t nu)
{
    return {Mat(nu, nv), Mat(nu, nu), Vec(nu, 0.0), Vec(nu, 0.0)};
}

RnnParams random_rnn(std::size_t nv, std::size_t nu, std::uint64_t seed)
{
    Rng rng(seed);
    RnnParams p{gaussian_mat(nu, nv, 0.7, rng), gaussian_mat(nu, nu, 0.7, rng), test::random_vec(nu, 0.7, rng),
                Vec(nu)};
    for(auto &x : p.u0)
        x = rng.uniform();
    return p;
}

} // namespace

TEST(RnnForward, ZeroParamsGiveHalf)
{
    const RnnParams p = zero_rnn(3, 2);
    const auto traj = rnn::rnn_forward(p, test::random_binary_seq(4, 3, 1));
    ASSERT_EQ(traj.length(), 4u);
    for(const auto &u : traj.u)
        EXPECT_EQ(u, Vec(2, 0.5));
}

TEST(RnnForward, NoRecurrenceGivesIdenticalStates)
{
    RnnParams p = random_rnn(3, 4, 2);
    p.W_uu = Mat(4, 4);
    const std::vector<Vec> seq(5, Vec{1, 0, 1});
    const auto traj = rnn::rnn_forward(p, seq);
    for(const auto &u : traj.u)
        EXPECT_EQ(u, traj.u.front());
}

TEST(RnnForward, ScalarHandCase)
{
    RnnParams p = zero_rnn(1, 1);
    p.W_vu(0, 0) = 1.0;
    p.W_uu(0, 0) = 1.0;
    const auto traj = rnn::rnn_forward(p, std::vector<Vec>{{1.0}});
    EXPECT_NEAR(traj.u[0][0], 0.7310585786300049, 1e-15);
}

TEST(RnnForward, RejectsEmptyAndMisshapen)
{
    const RnnParams p = zero_rnn(3, 2);
    EXPECT_THROW(rnn::rnn_forward(p, std::vector<Vec>{}), std::invalid_argument);
    EXPECT_THROW(rnn::rnn_forward(p, std::vector<Vec>{{1, 0}}), ShapeError);
}

TEST(RnnBptt, ZeroUpstreamGivesZeroGradient)
{
    const RnnParams p = random_rnn(3, 2, 3);
    const auto seq = test::random_binary_seq(4, 3, 2);
    const RnnGrad g = rnn::bptt_gradients(p, seq, std::vector<Vec>(4, Vec(2, 0.0)));
    for(double x : g.dW_vu.flat())
        EXPECT_EQ(x, 0.0);
    for(double x : g.dW_uu.flat())
        EXPECT_EQ(x, 0.0);
    EXPECT_EQ(g.db_u, Vec(2, 0.0));
    EXPECT_EQ(g.du0, Vec(2, 0.0));
}

TEST(RnnBptt, SingleStepChainRule)
{
    RnnParams p = zero_rnn(1, 1);
    p.W_vu(0, 0) = 0.3;
    p.W_uu(0, 0) = -1.2;
    p.b_u[0] = 0.1;
    p.u0[0] = 0.4;
    const std::vector<Vec> seq{{1.0}};
    // L = u(1): dL/dW_uu = u(1)(1 - u(1)) u0
    const RnnGrad g = rnn::bptt_gradients(p, seq, std::vector<Vec>{{1.0}});
    const double u1 = 1.0 / (1.0 + std::exp(-(0.3 - 1.2 * 0.4 + 0.1)));
    EXPECT_NEAR(g.dW_uu(0, 0), u1 * (1 - u1) * 0.4, 1e-15);
    EXPECT_NEAR(g.dW_vu(0, 0), u1 * (1 - u1), 1e-15);
    EXPECT_NEAR(g.du0[0], u1 * (1 - u1) * -1.2, 1e-15);
}

TEST(RnnBptt, AdditiveOverLossTerms)
{
    const RnnParams p = random_rnn(3, 4, 5);
    const auto seq = test::random_binary_seq(6, 3, 9);
    Rng rng(1);
    std::vector<Vec> d1, d2, sum;
    for(int t = 0; t < 6; ++t) {
        d1.push_back(test::random_vec(4, 1.0, rng));
        d2.push_back(test::random_vec(4, 1.0, rng));
        Vec s = d1.back();
        axpy(1.0, d2.back(), s);
        sum.push_back(s);
    }
    const RnnGrad a = rnn::bptt_gradients(p, seq, d1);
    const RnnGrad b = rnn::bptt_gradients(p, seq, d2);
    const RnnGrad c = rnn::bptt_gradients(p, seq, sum);
    for(std::size_t i = 0; i < c.dW_uu.size(); ++i)
        EXPECT_NEAR(c.dW_uu.flat()[i], a.dW_uu.flat()[i] + b.dW_uu.flat()[i], 1e-12);
    for(std::size_t i = 0; i < c.db_u.size(); ++i)
        EXPECT_NEAR(c.db_u[i], a.db_u[i] + b.db_u[i], 1e-12);
}

TEST(RnnBptt, FiniteDifferenceAgreement)
{
    for(std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
        const auto rep = gradcheck::rnn_gradcheck(seed, 1e-5);
        EXPECT_LT(rep.max_rel_error, 1e-6) << "seed " << seed;
        EXPECT_TRUE(rep.passed());
    }
}
