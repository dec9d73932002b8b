#include <benchmark/benchmark.h>

#include "rnndbn/rbm.hpp"
#include "rnndbn/rnn.hpp"
#include "rnndbn/rnn_dbn.hpp"

using namespace rnndbn;

namespace {

std::vector<Vec> random_frames(std::size_t n, std::size_t width, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<Vec> out;
    for(std::size_t i = 0; i < n; ++i) {
        Vec v(width);
        for(auto &x : v)
            x = rng.uniform() < 0.05 ? 1.0 : 0.0;
        out.push_back(std::move(v));
    }
    return out;
}

// Piano-roll width with the hidden sizes used for the music corpora.
constexpr std::size_t kPitches = 88;
constexpr std::size_t kHidden = 150;

void BM_GibbsStep(benchmark::State &state)
{
    const auto n_h = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    const RbmParams p = rbm::init(kPitches, n_h, rng);
    Vec v = random_frames(1, kPitches, 2).front();
    for(auto _ : state) {
        v = rbm::gibbs_step(p, v, rng).v;
        benchmark::DoNotOptimize(v.data());
    }
}
BENCHMARK(BM_GibbsStep)->Arg(50)->Arg(150)->Arg(300);

void BM_CdK(benchmark::State &state)
{
    const auto k = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    const RbmParams p = rbm::init(kPitches, kHidden, rng);
    const auto batch = random_frames(10, kPitches, 3);
    for(auto _ : state) {
        RbmGrad g = rbm::cd_k_gradient(p, batch, k, rng);
        benchmark::DoNotOptimize(g.dW.flat().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.size()));
}
BENCHMARK(BM_CdK)->Arg(1)->Arg(5)->Arg(15);

void BM_RnnForwardBptt(benchmark::State &state)
{
    const auto T = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    const RnnParams p{gaussian_mat(kHidden, kPitches, 0.01, rng), gaussian_mat(kHidden, kHidden, 0.01, rng),
                      Vec(kHidden, 0.0), Vec(kHidden, 0.0)};
    const auto seq = random_frames(T, kPitches, 4);
    const std::vector<Vec> dl(T, Vec(kHidden, 0.01));
    for(auto _ : state) {
        const auto traj = rnn::rnn_forward(p, seq);
        RnnGrad g = rnn::bptt_gradients(p, seq, traj, dl);
        benchmark::DoNotOptimize(g.db_u.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(T));
}
BENCHMARK(BM_RnnForwardBptt)->Arg(16)->Arg(64)->Arg(256);

void BM_RnnDbnTrainEpoch(benchmark::State &state)
{
    const auto T = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    RnnDbnParams p = rnn_dbn::init(kPitches, kHidden, kHidden, kHidden, rng);
    const std::vector<std::vector<Vec>> data{random_frames(T, kPitches, 5), random_frames(T, kPitches, 6)};
    TrainConfig cfg;
    cfg.batch_size = 2;
    for(auto _ : state) {
        p = rnn_dbn::train_epoch(p, data, cfg, rng);
        benchmark::DoNotOptimize(p.b_v.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * T));
}
BENCHMARK(BM_RnnDbnTrainEpoch)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_RnnDbnGenerate(benchmark::State &state)
{
    Rng rng(1);
    const RnnDbnParams p = rnn_dbn::init(kPitches, kHidden, kHidden, kHidden, rng);
    TrainConfig cfg;
    cfg.gen_gibbs_steps = static_cast<std::size_t>(state.range(0));
    for(auto _ : state) {
        auto frames = rnn_dbn::generate(p, 32, {}, cfg, rng);
        benchmark::DoNotOptimize(frames.data());
    }
}
BENCHMARK(BM_RnnDbnGenerate)->Arg(5)->Arg(25)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
