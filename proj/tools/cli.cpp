#include "cli.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rnndbn/data.hpp"
#include "rnndbn/dbn.hpp"
#include "rnndbn/gradcheck.hpp"
#include "rnndbn/model_file.hpp"
#include "rnndbn/rbm.hpp"
#include "rnndbn/rnn_dbn.hpp"
#include "rnndbn/rtrbm.hpp"

namespace rnndbn::cli {

namespace {

struct TrainArgs {
    std::string model;
    std::string data;
    std::string out;
    std::size_t epochs = 10;
    double lr = 0.01;
    std::size_t cd_k = 1;
    std::string hidden;
    std::size_t rnn_units = 0;
    std::size_t batch = 10;
    std::uint64_t seed = 0;
    std::optional<double> clip;
    std::size_t gen_gibbs = 25;
    bool generate_from_mean = false;
};

struct GenerateArgs {
    std::string model_file;
    std::size_t length = 0;
    std::string out;
    std::uint64_t seed = 0;
    std::string primer;
    std::optional<std::size_t> gibbs;
};

struct EvalArgs {
    std::string model_file;
    std::string data;
    bool exact = false;
    std::size_t samples = 1000;
    std::uint64_t seed = 0;
};

struct GradcheckArgs {
    std::string model;
    std::uint64_t seed = 0;
    double eps = 1e-5;
};

std::vector<std::size_t> parse_widths(const std::string &text)
{
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while(std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(item, &pos);
        } catch(const std::exception &) {
            throw std::invalid_argument("--hidden: '" + item + "' is not a positive integer");
        }
        if(pos != item.size() || v == 0)
            throw std::invalid_argument("--hidden: '" + item + "' is not a positive integer");
        out.push_back(static_cast<std::size_t>(v));
    }
    if(out.empty())
        throw std::invalid_argument("--hidden: at least one width required");
    return out;
}

void print_epoch(std::ostream &out, std::size_t epoch, double obj)
{
    out << "epoch " << epoch << " obj " << std::setprecision(10) << obj << "\n";
}

int cmd_train(const TrainArgs &a, std::ostream &out)
{
    const ModelKind kind = parse_model_kind(a.model);
    const std::vector<std::size_t> hidden = parse_widths(a.hidden);

    TrainConfig cfg;
    cfg.learning_rate = a.lr;
    cfg.cd_k = a.cd_k;
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch;
    cfg.gen_gibbs_steps = a.gen_gibbs;
    cfg.clip_threshold = a.clip;
    cfg.seed = a.seed;
    cfg.generate_from_mean = a.generate_from_mean;
    cfg.validate();

    const data::Dataset ds = data::load_pianoroll(a.data);
    const std::size_t nv = ds.num_pitches;
    Rng rng(a.seed);

    ModelFile model;
    model.config = cfg;
    switch(kind) {
    case ModelKind::rbm: {
        if(hidden.size() != 1)
            throw std::invalid_argument("--hidden: rbm takes a single width");
        const auto frames = data::to_frames(ds);
        RbmParams p = rbm::init(nv, hidden[0], rng);
        p = rbm::train(p, frames, cfg, rng, [&out](std::size_t e, double obj) { print_epoch(out, e, obj); });
        model.params = std::move(p);
        break;
    }
    case ModelKind::dbn: {
        std::vector<std::size_t> widths{nv};
        widths.insert(widths.end(), hidden.begin(), hidden.end());
        const auto frames = data::to_frames(ds);
        DbnParams d = DbnParams::init(widths, rng);
        d = dbn::greedy_train(d, frames, cfg, rng, [&](std::size_t layer, std::size_t e, double obj) {
            print_epoch(out, layer * cfg.epochs + e, obj);
        });
        model.params = std::move(d);
        break;
    }
    case ModelKind::rtrbm: {
        if(hidden.size() != 1)
            throw std::invalid_argument("--hidden: rtrbm takes a single width");
        const auto seqs = data::to_sequences(ds);
        RtrbmParams p = rtrbm::init(nv, hidden[0], rng);
        for(std::size_t e = 1; e <= cfg.epochs; ++e) {
            double obj = 0.0;
            p = rtrbm::train_epoch(p, seqs, cfg, rng, &obj);
            print_epoch(out, e, obj);
        }
        model.params = std::move(p);
        break;
    }
    case ModelKind::rnn_dbn: {
        if(hidden.size() != 2)
            throw std::invalid_argument("--hidden: rnn-dbn takes two widths H1,H2");
        const std::size_t nu = a.rnn_units > 0 ? a.rnn_units : hidden[0];
        const auto seqs = data::to_sequences(ds);
        RnnDbnParams p = rnn_dbn::init(nv, hidden[0], hidden[1], nu, rng);
        for(std::size_t e = 1; e <= cfg.epochs; ++e) {
            double obj = 0.0;
            p = rnn_dbn::train_epoch(p, seqs, cfg, rng, &obj);
            print_epoch(out, e, obj);
        }
        model.params = std::move(p);
        break;
    }
    }
    save_model(model, a.out);
    return kExitOk;
}

int cmd_generate(const GenerateArgs &a, std::ostream &)
{
    if(a.length < 1)
        throw std::invalid_argument("--length must be at least 1");
    const ModelFile model = load_model(a.model_file);
    TrainConfig cfg = model.config;
    if(a.gibbs) {
        if(*a.gibbs < 1)
            throw std::invalid_argument("--gibbs must be at least 1");
        cfg.gen_gibbs_steps = *a.gibbs;
    }
    const std::size_t nv = model.n_visible();

    std::vector<Vec> primer;
    if(!a.primer.empty()) {
        const data::Dataset pd = data::load_pianoroll(a.primer);
        if(pd.num_pitches != nv)
            throw DataError("primer has " + std::to_string(pd.num_pitches) + " pitches, model expects " +
                            std::to_string(nv));
        primer = data::to_binary_vectors(pd.sequences.front(), nv);
    }

    Rng rng(a.seed);
    std::vector<Vec> frames;
    switch(model.kind()) {
    case ModelKind::rbm: {
        const auto &p = std::get<RbmParams>(model.params);
        for(std::size_t t = 0; t < a.length; ++t)
            frames.push_back(rbm::sample(p, cfg.gen_gibbs_steps, rng));
        break;
    }
    case ModelKind::dbn: {
        const auto &d = std::get<DbnParams>(model.params);
        for(std::size_t t = 0; t < a.length; ++t)
            frames.push_back(dbn::dbn_sample(d, cfg.gen_gibbs_steps, rng));
        break;
    }
    case ModelKind::rtrbm:
        frames = rtrbm::rtrbm_generate(std::get<RtrbmParams>(model.params), a.length, cfg.gen_gibbs_steps, rng,
                                       primer);
        break;
    case ModelKind::rnn_dbn:
        frames = rnn_dbn::generate(std::get<RnnDbnParams>(model.params), a.length, primer, cfg, rng);
        break;
    }

    data::Dataset outd;
    outd.name = "generated";
    outd.num_pitches = nv;
    outd.sequences.push_back(data::from_binary_vectors(frames));
    data::save_pianoroll(outd, a.out);
    return kExitOk;
}

int cmd_eval(const EvalArgs &a, std::ostream &out)
{
    const data::Dataset ds = data::load_pianoroll(a.data);
    out << std::setprecision(10);
    if(a.model_file == "random") {
        out << "mean_ll " << -static_cast<double>(ds.num_pitches) * std::numbers::ln2 << " exact\n";
        return kExitOk;
    }

    constexpr std::size_t kBudget = 24;
    const ModelFile model = load_model(a.model_file);
    if(model.n_visible() != ds.num_pitches)
        throw DataError("data has " + std::to_string(ds.num_pitches) + " pitches, model expects " +
                        std::to_string(model.n_visible()));

    double total = 0.0;
    bool exact = true;
    switch(model.kind()) {
    case ModelKind::rbm: {
        const auto &p = std::get<RbmParams>(model.params);
        const double log_z = rbm::log_partition(p, kBudget);
        for(const auto &v : data::to_frames(ds))
            total += rbm::log_prob(p, v, log_z);
        break;
    }
    case ModelKind::dbn: {
        const auto &d = std::get<DbnParams>(model.params);
        const double log_z = dbn::top_log_partition(d, kBudget);
        for(const auto &v : data::to_frames(ds))
            total += dbn::log_prob(d, v, log_z, kBudget);
        break;
    }
    case ModelKind::rtrbm: {
        const auto &p = std::get<RtrbmParams>(model.params);
        for(const auto &seq : data::to_sequences(ds))
            for(double ll : rtrbm::frame_log_probs(p, seq, kBudget))
                total += ll;
        break;
    }
    case ModelKind::rnn_dbn: {
        const auto &p = std::get<RnnDbnParams>(model.params);
        rnn_dbn::LlOptions opts;
        opts.max_enumerated_bits = kBudget;
        opts.allow_approx = !a.exact;
        opts.importance_samples = a.samples;
        opts.seed = a.seed;
        for(const auto &seq : data::to_sequences(ds)) {
            const auto r = rnn_dbn::frame_conditional_ll(p, seq, opts);
            exact = exact && r.exact;
            for(double ll : r.per_frame)
                total += ll;
        }
        break;
    }
    }
    out << "mean_ll " << total / static_cast<double>(ds.frame_count()) << (exact ? " exact" : " approx") << "\n";
    return kExitOk;
}

int cmd_gradcheck(const GradcheckArgs &a, std::ostream &out)
{
    if(!(a.eps >= 1e-7 && a.eps <= 1e-3))
        throw std::invalid_argument("--eps must lie in [1e-7, 1e-3]");
    gradcheck::Report rep;
    if(a.model == "rbm")
        rep = gradcheck::rbm_gradcheck(a.seed, a.eps);
    else if(a.model == "rtrbm")
        rep = gradcheck::rtrbm_gradcheck(a.seed, a.eps);
    else if(a.model == "rnn-dbn" || a.model == "rnn_dbn")
        rep = gradcheck::rnn_dbn_gradcheck(a.seed, a.eps);
    else
        throw std::invalid_argument("--model must be rbm, rtrbm or rnn-dbn");

    out << std::setprecision(6);
    for(const auto &[name, err] : rep.blocks)
        out << "block " << name << " max_rel_err " << err << "\n";
    out << "max_rel_err " << rep.max_rel_error << " threshold " << rep.threshold << " "
        << (rep.passed() ? "pass" : "fail") << "\n";
    return rep.passed() ? kExitOk : kExitNumeric;
}

} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
    CLI::App app{"RNN-DBN sequence models for binary piano rolls"};
    app.require_subcommand(1);

    TrainArgs ta;
    auto *train = app.add_subcommand("train", "Train a model and write a model file");
    train->add_option("--model", ta.model, "rbm | dbn | rtrbm | rnn-dbn")
        ->required()
        ->check(CLI::IsMember({"rbm", "dbn", "rtrbm", "rnn-dbn"}));
    train->add_option("--data", ta.data, "Piano-roll JSON file")->required();
    train->add_option("--out", ta.out, "Output model file")->required();
    train->add_option("--epochs", ta.epochs, "Passes over the data (per layer for dbn)");
    train->add_option("--lr", ta.lr, "Learning rate");
    train->add_option("--cd-k", ta.cd_k, "Gibbs steps per CD estimate");
    train->add_option("--hidden", ta.hidden, "Hidden widths, e.g. 150 or 150,150")->required();
    train->add_option("--rnn-units", ta.rnn_units, "RNN width for rnn-dbn (defaults to H1)");
    train->add_option("--batch", ta.batch, "Minibatch size (frames for rbm/dbn, sequences otherwise)");
    train->add_option("--seed", ta.seed, "RNG seed");
    train->add_option("--clip", ta.clip, "Elementwise gradient clip");
    train->add_option("--gen-gibbs", ta.gen_gibbs, "Default Gibbs sweeps per generated frame");
    train->add_flag("--generate-from-mean", ta.generate_from_mean,
                    "Feed P(v|h1) rather than sampled frames to the RNN when generating");

    GenerateArgs ga;
    auto *generate = app.add_subcommand("generate", "Sample a sequence from a trained model");
    generate->add_option("--model-file", ga.model_file, "Model file")->required();
    generate->add_option("--length", ga.length, "Number of frames")->required();
    generate->add_option("--out", ga.out, "Output piano-roll file")->required();
    generate->add_option("--seed", ga.seed, "RNG seed");
    generate->add_option("--primer", ga.primer, "Piano-roll whose first sequence primes the state");
    generate->add_option("--gibbs", ga.gibbs, "Gibbs sweeps per frame");

    EvalArgs ea;
    auto *evalc = app.add_subcommand("eval", "Mean per-frame log-likelihood on a dataset");
    evalc->add_option("--model-file", ea.model_file, "Model file, or 'random' for the uniform baseline")
        ->required();
    evalc->add_option("--data", ea.data, "Piano-roll JSON file")->required();
    evalc->add_flag("--exact", ea.exact, "Fail instead of falling back to an estimate");
    evalc->add_option("--samples", ea.samples, "Importance samples per frame for the estimate");
    evalc->add_option("--seed", ea.seed, "RNG seed for the estimate");

    GradcheckArgs ca;
    auto *gradc = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
    gradc->add_option("--model", ca.model, "rbm | rtrbm | rnn-dbn")->required();
    gradc->add_option("--seed", ca.seed, "RNG seed for the test instance");
    gradc->add_option("--eps", ca.eps, "Finite-difference step in [1e-7, 1e-3]");

    try {
        app.parse(argc, argv);
    } catch(const CLI::CallForHelp &) {
        out << app.help();
        return kExitOk;
    } catch(const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if(train->parsed())
            return cmd_train(ta, out);
        if(generate->parsed())
            return cmd_generate(ga, out);
        if(evalc->parsed())
            return cmd_eval(ea, out);
        if(gradc->parsed())
            return cmd_gradcheck(ca, out);
    } catch(const DataError &e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch(const BudgetError &e) {
        err << "budget error: " << e.what() << "\n";
        return kExitNumeric;
    } catch(const std::domain_error &e) {
        err << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch(const ShapeError &e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch(const std::invalid_argument &e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch(const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

} // namespace rnndbn::cli
