#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rnndbn/dbn.hpp"
#include "rnndbn/eval.hpp"
#include "rnndbn/gradcheck.hpp"
#include "rnndbn/rnn_dbn.hpp"
#include "test_util.hpp"

using namespace rnndbn;
using rnndbn::test::random_rnn_dbn;
using rnndbn::test::rel_err;
using rnndbn::test::zero_rnn_dbn;

namespace {

void zero_couplings(RnnDbnParams &p)
{
    p.W_uv = Mat(p.W_uv.rows(), p.W_uv.cols());
    p.W_uh1 = Mat(p.W_uh1.rows(), p.W_uh1.cols());
    p.W_uh2 = Mat(p.W_uh2.rows(), p.W_uh2.cols());
}

DbnParams static_dbn(const RnnDbnParams &p)
{
    return DbnParams({RbmParams{p.W_vh1, p.b_v, p.b_h1}, RbmParams{p.W_h1h2, p.b_h1, p.b_h2}});
}

std::vector<Vec> alternating(std::size_t T, std::size_t n)
{
    std::vector<Vec> seq;
    for(std::size_t t = 0; t < T; ++t) {
        Vec v(n, 0.0);
        for(std::size_t j = t % 2; j < n; j += 2)
            v[j] = 1.0;
        seq.push_back(v);
    }
    return seq;
}

} // namespace

TEST(RnnDbnBiases, HandCase)
{
    RnnDbnParams p = zero_rnn_dbn(2, 2, 2, 2);
    p.b_h2 = {0.0, 1.0};
    p.W_uh2(0, 0) = 1.0;
    p.W_uh2(1, 1) = 2.0;
    const TimeBiases b = rnn_dbn::time_dependent_biases(p, Vec{0.5, 0.5});
    EXPECT_DOUBLE_EQ(b.b_h2[0], 0.5);
    EXPECT_DOUBLE_EQ(b.b_h2[1], 2.0);
}

TEST(RnnDbnBiases, StaticWhenCouplingsOrStateVanish)
{
    RnnDbnParams p = random_rnn_dbn(3, 2, 2, 4, 1);
    const TimeBiases z = rnn_dbn::time_dependent_biases(p, Vec(4, 0.0));
    EXPECT_EQ(z.b_v, p.b_v);
    EXPECT_EQ(z.b_h1, p.b_h1);
    EXPECT_EQ(z.b_h2, p.b_h2);
    zero_couplings(p);
    const TimeBiases c = rnn_dbn::time_dependent_biases(p, Vec{0.2, 0.4, 0.6, 0.8});
    EXPECT_EQ(c.b_v, p.b_v);
    EXPECT_EQ(c.b_h1, p.b_h1);
    EXPECT_EQ(c.b_h2, p.b_h2);
}

TEST(RnnDbnBiases, AffineInState)
{
    // b(u1 + u2) - b(0) = (b(u1) - b(0)) + (b(u2) - b(0))
    const RnnDbnParams p = random_rnn_dbn(3, 3, 2, 3, 2);
    const Vec u1{0.1, 0.7, 0.3};
    const Vec u2{0.5, 0.2, 0.4};
    const Vec u12{0.6, 0.9, 0.7};
    const auto b0 = rnn_dbn::time_dependent_biases(p, Vec(3, 0.0));
    const auto b1 = rnn_dbn::time_dependent_biases(p, u1);
    const auto b2 = rnn_dbn::time_dependent_biases(p, u2);
    const auto b12 = rnn_dbn::time_dependent_biases(p, u12);
    for(std::size_t i = 0; i < 3; ++i)
        EXPECT_NEAR(b12.b_v[i] - b0.b_v[i], (b1.b_v[i] - b0.b_v[i]) + (b2.b_v[i] - b0.b_v[i]), 1e-12);
    for(std::size_t i = 0; i < 2; ++i)
        EXPECT_NEAR(b12.b_h2[i] - b0.b_h2[i], (b1.b_h2[i] - b0.b_h2[i]) + (b2.b_h2[i] - b0.b_h2[i]), 1e-12);
}

TEST(RnnDbnForward, Cases)
{
    const auto zero = rnn_dbn::forward_hidden_states(zero_rnn_dbn(3, 2, 2, 2), test::random_binary_seq(4, 3, 1));
    for(const auto &u : zero.u)
        EXPECT_EQ(u, Vec(2, 0.5));

    RnnDbnParams p = random_rnn_dbn(3, 2, 2, 3, 4);
    p.W_uu = Mat(3, 3);
    const auto flat = rnn_dbn::forward_hidden_states(p, std::vector<Vec>(4, Vec{0, 1, 1}));
    for(const auto &u : flat.u)
        EXPECT_EQ(u, flat.u.front());

    RnnDbnParams s = zero_rnn_dbn(1, 1, 1, 1);
    s.W_vu(0, 0) = 1.0;
    s.W_uu(0, 0) = 1.0;
    EXPECT_NEAR(rnn_dbn::forward_hidden_states(s, std::vector<Vec>{{1.0}}).u[0][0], 0.7310585786300049, 1e-15);
}

TEST(RnnDbnConditional, ZeroCouplingIsStaticDbn)
{
    RnnDbnParams p = random_rnn_dbn(4, 3, 2, 3, 5);
    zero_couplings(p);
    const ConditionalDbn c = rnn_dbn::conditional_dbn_at(p, Vec{0.3, 0.1, 0.9});
    EXPECT_EQ(c.to_dbn(), static_dbn(p));

    const RnnDbnParams q = random_rnn_dbn(4, 3, 2, 3, 6);
    const ConditionalDbn z = rnn_dbn::conditional_dbn_at(q, Vec(3, 0.0));
    EXPECT_EQ(z.to_dbn(), static_dbn(q));
    EXPECT_EQ(z.to_dbn().widths(), (std::vector<std::size_t>{4, 3, 2}));
}

TEST(RnnDbnConditional, ZeroCouplingFrameLlMatchesStaticDbn)
{
    RnnDbnParams p = random_rnn_dbn(4, 3, 3, 3, 7);
    zero_couplings(p);
    const auto seq = test::random_binary_seq(6, 4, 2);
    const auto ll = rnn_dbn::frame_conditional_ll(p, seq);
    const DbnParams d = static_dbn(p);
    for(std::size_t t = 0; t < seq.size(); ++t)
        EXPECT_NEAR(ll.per_frame[t], dbn::log_prob(d, seq[t]), 1e-12);
}

TEST(RnnDbnLl, ZeroModelIsUniform)
{
    const auto ll = rnn_dbn::frame_conditional_ll(zero_rnn_dbn(3, 2, 2, 2), test::random_binary_seq(4, 3, 1));
    EXPECT_TRUE(ll.exact);
    for(double x : ll.per_frame)
        EXPECT_NEAR(x, -3.0 * std::numbers::ln2, 1e-12);
    EXPECT_NEAR(ll.mean, -2.0794415416798357, 1e-12);
}

TEST(RnnDbnLl, MatchesOracleEnumeration)
{
    const RnnDbnParams p = random_rnn_dbn(4, 3, 3, 3, 8);
    const auto seq = test::random_binary_seq(5, 4, 3);
    const auto ll = rnn_dbn::frame_conditional_ll(p, seq);
    const auto traj = rnn_dbn::forward_hidden_states(p, seq);
    const auto conds = rnn_dbn::conditional_dbns(p, seq, traj);
    for(std::size_t t = 0; t < seq.size(); ++t) {
        const double oracle = eval::exact_ll_dbn(conds[t].to_dbn(), std::vector<Vec>{seq[t]});
        EXPECT_LT(rel_err(ll.per_frame[t], oracle), 1e-10) << "t=" << t;
    }
}

TEST(RnnDbnLl, JointOverAllSequencesSumsToOne)
{
    const RnnDbnParams p = random_rnn_dbn(2, 2, 2, 2, 9, 1.0);
    double total = 0.0;
    for(std::uint64_t a = 0; a < 4; ++a)
        for(std::uint64_t b = 0; b < 4; ++b)
            for(std::uint64_t c = 0; c < 4; ++c) {
                const std::vector<Vec> seq{binary_from_index(a, 2), binary_from_index(b, 2), binary_from_index(c, 2)};
                const auto ll = rnn_dbn::frame_conditional_ll(p, seq);
                total += std::exp(ll.per_frame[0] + ll.per_frame[1] + ll.per_frame[2]);
            }
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(RnnDbnLl, ImportanceEstimateAndBudget)
{
    const RnnDbnParams p = random_rnn_dbn(4, 6, 3, 3, 10, 0.5);
    const auto seq = test::random_binary_seq(4, 4, 5);
    rnn_dbn::LlOptions tight;
    tight.max_enumerated_bits = 4;
    EXPECT_THROW(rnn_dbn::frame_conditional_ll(p, seq, tight), BudgetError);

    tight.allow_approx = true;
    tight.importance_samples = 20000;
    const auto approx = rnn_dbn::frame_conditional_ll(p, seq, tight);
    const auto exact = rnn_dbn::frame_conditional_ll(p, seq);
    EXPECT_FALSE(approx.exact);
    EXPECT_TRUE(exact.exact);
    EXPECT_NEAR(approx.mean, exact.mean, 0.02);
}

TEST(RnnDbnTrain, ZeroLearningRateStillReportsObjective)
{
    const RnnDbnParams p = random_rnn_dbn(4, 3, 3, 3, 11);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.batch_size = 2;
    const std::vector<std::vector<Vec>> data{alternating(5, 4), alternating(4, 4), alternating(3, 4)};
    Rng rng(1);
    double obj = -1.0;
    EXPECT_EQ(rnn_dbn::train_epoch(p, data, cfg, rng, &obj), p);
    EXPECT_GE(obj, 0.0);
}

TEST(RnnDbnTrain, SingleFrameNoRecurrenceMatchesGreedyLayerOne)
{
    Rng r0(12);
    RnnDbnParams p = rnn_dbn::init(4, 3, 3, 2, r0);
    zero_couplings(p);
    p.W_vu = Mat(2, 4);
    p.W_uu = Mat(2, 2);
    const std::vector<Vec> frames{{1, 0, 1, 0}, {0, 1, 1, 0}, {1, 1, 0, 0}, {0, 0, 0, 1}, {1, 0, 0, 1}};
    std::vector<std::vector<Vec>> seqs;
    for(const auto &f : frames)
        seqs.push_back({f});

    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.epochs = 1;
    cfg.batch_size = frames.size();
    Rng a(77);
    const RnnDbnParams q = rnn_dbn::train_epoch(p, seqs, cfg, a);
    Rng b(77);
    const DbnParams d = dbn::greedy_train(static_dbn(p), frames, cfg, b);
    EXPECT_EQ(q.W_vh1, d.layer(0).W);
    EXPECT_EQ(q.b_v, d.layer(0).b_v);
}

TEST(RnnDbnGradient, FiniteDifferenceAllBlocks)
{
    const auto rep = gradcheck::rnn_dbn_gradcheck(0, 1e-5);
    EXPECT_EQ(rep.blocks.size(), rnn_dbn::kBlockCount);
    EXPECT_LT(rep.max_rel_error, 1e-4);
    for(const auto &[name, err] : rep.blocks)
        EXPECT_LT(err, 1e-4) << name;
}

TEST(RnnDbnGradient, TrainingOnAlternatingPatternImproves)
{
    Rng r0(2);
    RnnDbnParams p = rnn_dbn::init(4, 3, 3, 3, r0);
    const std::vector<std::vector<Vec>> data{alternating(8, 4), alternating(7, 4)};
    auto mean_ll = [&](const RnnDbnParams &q) {
        double s = 0.0;
        for(const auto &seq : data)
            s += rnn_dbn::frame_conditional_ll(q, seq).mean;
        return s / static_cast<double>(data.size());
    };
    const double before = mean_ll(p);
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.batch_size = 2;
    Rng rng(3);
    for(int e = 0; e < 200; ++e)
        p = rnn_dbn::train_epoch(p, data, cfg, rng);
    EXPECT_GT(mean_ll(p), before + 0.5);
}

TEST(RnnDbnBlocks, FlattenRoundTrip)
{
    const RnnDbnParams p = random_rnn_dbn(4, 3, 2, 3, 13);
    RnnDbnParams q = zero_rnn_dbn(4, 3, 2, 3);
    rnn_dbn::unflatten(rnn_dbn::flatten(p), q);
    EXPECT_EQ(p, q);
    std::size_t n = 0;
    rnn_dbn::for_each_block(p, [&](std::string_view, std::span<const double>) { ++n; });
    EXPECT_EQ(n, rnn_dbn::kBlockCount);
}

TEST(RnnDbnGenerate, ShapeAndDeterminism)
{
    const RnnDbnParams p = random_rnn_dbn(5, 3, 3, 4, 14);
    TrainConfig cfg;
    cfg.gen_gibbs_steps = 4;
    Rng a(9);
    Rng b(9);
    const auto primer = alternating(3, 5);
    const auto x = rnn_dbn::generate(p, 11, primer, cfg, a);
    EXPECT_EQ(x, rnn_dbn::generate(p, 11, primer, cfg, b));
    ASSERT_EQ(x.size(), 11u);
    for(const auto &v : x)
        EXPECT_EQ(v.size(), 5u);
}

TEST(RnnDbnGenerate, NoCouplingFramesFollowStaticDbn)
{
    RnnDbnParams p = random_rnn_dbn(3, 2, 2, 2, 15, 1.0);
    zero_couplings(p);
    const auto exact = eval::exact_visible_distribution_dbn(static_dbn(p));
    TrainConfig cfg;
    cfg.gen_gibbs_steps = 25;
    Rng rng(4);
    const auto frames = rnn_dbn::generate(p, 200000, {}, cfg, rng);
    std::size_t i = 0;
    EXPECT_LT(eval::empirical_tv_distance([&] { return frames[i++]; }, exact, frames.size()), 0.05);
}
