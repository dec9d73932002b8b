#include "rnndbn/model_file.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rnndbn {

namespace {

using json = nlohmann::ordered_json;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

json mat_to_json(const Mat &m)
{
    json rows = json::array();
    for(std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return rows;
}

Mat mat_from_json(const json &j, const char *name)
{
    if(!j.is_array() || j.empty() || !j.front().is_array() || j.front().empty())
        throw DataError(std::string("model file: ") + name + " must be a nonempty nested array");
    Mat m(j.size(), j.front().size());
    for(std::size_t r = 0; r < j.size(); ++r) {
        if(!j[r].is_array() || j[r].size() != m.cols())
            throw DataError(std::string("model file: ") + name + " rows have inconsistent lengths");
        for(std::size_t c = 0; c < m.cols(); ++c)
            m(r, c) = j[r][c].get<double>();
    }
    return m;
}

Vec vec_from_json(const json &j, const char *name)
{
    if(!j.is_array())
        throw DataError(std::string("model file: ") + name + " must be an array");
    return j.get<Vec>();
}

json rbm_to_json(const RbmParams &p)
{
    json j;
    j["W"] = mat_to_json(p.W);
    j["b_v"] = p.b_v;
    j["b_h"] = p.b_h;
    return j;
}

RbmParams rbm_from_json(const json &j)
{
    return {mat_from_json(j.at("W"), "W"), vec_from_json(j.at("b_v"), "b_v"), vec_from_json(j.at("b_h"), "b_h")};
}

json config_to_json(const TrainConfig &c)
{
    json j;
    j["learning_rate"] = c.learning_rate;
    j["cd_k"] = c.cd_k;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["gen_gibbs_steps"] = c.gen_gibbs_steps;
    j["clip_threshold"] = c.clip_threshold ? json(*c.clip_threshold) : json(nullptr);
    j["generate_from_mean"] = c.generate_from_mean;
    return j;
}

TrainConfig config_from_json(const json &j)
{
    TrainConfig c;
    c.learning_rate = j.at("learning_rate").get<double>();
    c.cd_k = j.at("cd_k").get<std::size_t>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.gen_gibbs_steps = j.at("gen_gibbs_steps").get<std::size_t>();
    if(!j.at("clip_threshold").is_null())
        c.clip_threshold = j.at("clip_threshold").get<double>();
    c.generate_from_mean = j.value("generate_from_mean", false);
    return c;
}

} // namespace

std::string_view to_string(ModelKind kind)
{
    switch(kind) {
    case ModelKind::rbm:
        return "rbm";
    case ModelKind::dbn:
        return "dbn";
    case ModelKind::rtrbm:
        return "rtrbm";
    case ModelKind::rnn_dbn:
        return "rnn_dbn";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view s)
{
    if(s == "rbm")
        return ModelKind::rbm;
    if(s == "dbn")
        return ModelKind::dbn;
    if(s == "rtrbm")
        return ModelKind::rtrbm;
    if(s == "rnn_dbn" || s == "rnn-dbn")
        return ModelKind::rnn_dbn;
    throw std::invalid_argument("unknown model kind: " + std::string(s));
}

ModelKind ModelFile::kind() const
{
    return static_cast<ModelKind>(params.index());
}

std::size_t ModelFile::n_visible() const
{
    return std::visit([](const auto &p) { return p.n_visible(); }, params);
}

std::string to_model_text(const ModelFile &m)
{
    json doc;
    doc["format_version"] = m.format_version;
    doc["model_kind"] = std::string(to_string(m.kind()));
    json dims;
    json params;
    std::visit(overloaded{
                   [&](const RbmParams &p) {
                       dims["n_visible"] = p.n_visible();
                       dims["n_hidden"] = p.n_hidden();
                       params = rbm_to_json(p);
                   },
                   [&](const DbnParams &p) {
                       dims["widths"] = p.widths();
                       params["layers"] = json::array();
                       for(const auto &l : p.layers())
                           params["layers"].push_back(rbm_to_json(l));
                   },
                   [&](const RtrbmParams &p) {
                       dims["n_visible"] = p.n_visible();
                       dims["n_hidden"] = p.n_hidden();
                       params["W"] = mat_to_json(p.W);
                       params["b_v"] = p.b_v;
                       params["b_h"] = p.b_h;
                       params["W_uv"] = mat_to_json(p.W_uv);
                       params["W_uh"] = mat_to_json(p.W_uh);
                       params["u0"] = p.u0;
                   },
                   [&](const RnnDbnParams &p) {
                       dims["n_visible"] = p.n_visible();
                       dims["n_h1"] = p.n_h1();
                       dims["n_h2"] = p.n_h2();
                       dims["n_units"] = p.n_units();
                       params["W_vh1"] = mat_to_json(p.W_vh1);
                       params["W_h1h2"] = mat_to_json(p.W_h1h2);
                       params["b_v"] = p.b_v;
                       params["b_h1"] = p.b_h1;
                       params["b_h2"] = p.b_h2;
                       params["W_uv"] = mat_to_json(p.W_uv);
                       params["W_uh1"] = mat_to_json(p.W_uh1);
                       params["W_uh2"] = mat_to_json(p.W_uh2);
                       params["u0"] = p.u0;
                       params["W_vu"] = mat_to_json(p.W_vu);
                       params["W_uu"] = mat_to_json(p.W_uu);
                       params["b_u"] = p.b_u;
                   },
               },
               m.params);
    doc["dimensions"] = std::move(dims);
    doc["params"] = std::move(params);
    doc["train_config"] = config_to_json(m.config);
    doc["seed"] = m.config.seed;
    return doc.dump() + "\n";
}

ModelFile parse_model_text(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch(const json::parse_error &e) {
        throw DataError(std::string("model file parse failure: ") + e.what());
    }

    ModelFile m;
    try {
        m.format_version = doc.at("format_version").get<int>();
        if(m.format_version != ModelFile::kFormatVersion)
            throw DataError("model file: unsupported format_version " + std::to_string(m.format_version));
        const ModelKind kind = parse_model_kind(doc.at("model_kind").get<std::string>());
        const json &dims = doc.at("dimensions");
        const json &ps = doc.at("params");
        switch(kind) {
        case ModelKind::rbm: {
            RbmParams p = rbm_from_json(ps);
            p.validate();
            if(dims.at("n_visible").get<std::size_t>() != p.n_visible() ||
               dims.at("n_hidden").get<std::size_t>() != p.n_hidden())
                throw DataError("model file: dimensions do not match tensors");
            m.params = std::move(p);
            break;
        }
        case ModelKind::dbn: {
            std::vector<RbmParams> layers;
            for(const auto &l : ps.at("layers"))
                layers.push_back(rbm_from_json(l));
            DbnParams p(std::move(layers));
            if(dims.at("widths").get<std::vector<std::size_t>>() != p.widths())
                throw DataError("model file: dimensions do not match tensors");
            m.params = std::move(p);
            break;
        }
        case ModelKind::rtrbm: {
            RtrbmParams p;
            p.W = mat_from_json(ps.at("W"), "W");
            p.b_v = vec_from_json(ps.at("b_v"), "b_v");
            p.b_h = vec_from_json(ps.at("b_h"), "b_h");
            p.W_uv = mat_from_json(ps.at("W_uv"), "W_uv");
            p.W_uh = mat_from_json(ps.at("W_uh"), "W_uh");
            p.u0 = vec_from_json(ps.at("u0"), "u0");
            p.validate();
            if(dims.at("n_visible").get<std::size_t>() != p.n_visible() ||
               dims.at("n_hidden").get<std::size_t>() != p.n_hidden())
                throw DataError("model file: dimensions do not match tensors");
            m.params = std::move(p);
            break;
        }
        case ModelKind::rnn_dbn: {
            RnnDbnParams p;
            p.W_vh1 = mat_from_json(ps.at("W_vh1"), "W_vh1");
            p.W_h1h2 = mat_from_json(ps.at("W_h1h2"), "W_h1h2");
            p.b_v = vec_from_json(ps.at("b_v"), "b_v");
            p.b_h1 = vec_from_json(ps.at("b_h1"), "b_h1");
            p.b_h2 = vec_from_json(ps.at("b_h2"), "b_h2");
            p.W_uv = mat_from_json(ps.at("W_uv"), "W_uv");
            p.W_uh1 = mat_from_json(ps.at("W_uh1"), "W_uh1");
            p.W_uh2 = mat_from_json(ps.at("W_uh2"), "W_uh2");
            p.u0 = vec_from_json(ps.at("u0"), "u0");
            p.W_vu = mat_from_json(ps.at("W_vu"), "W_vu");
            p.W_uu = mat_from_json(ps.at("W_uu"), "W_uu");
            p.b_u = vec_from_json(ps.at("b_u"), "b_u");
            p.validate();
            if(dims.at("n_visible").get<std::size_t>() != p.n_visible() ||
               dims.at("n_h1").get<std::size_t>() != p.n_h1() || dims.at("n_h2").get<std::size_t>() != p.n_h2() ||
               dims.at("n_units").get<std::size_t>() != p.n_units())
                throw DataError("model file: dimensions do not match tensors");
            m.params = std::move(p);
            break;
        }
        }
        m.config = config_from_json(doc.at("train_config"));
        m.config.seed = doc.at("seed").get<std::uint64_t>();
    } catch(const json::exception &e) {
        throw DataError(std::string("model file: malformed document: ") + e.what());
    } catch(const ShapeError &e) {
        throw DataError(std::string("model file: ") + e.what());
    } catch(const std::invalid_argument &e) {
        throw DataError(std::string("model file: ") + e.what());
    }
    return m;
}

void save_model(const ModelFile &m, const std::filesystem::path &path)
{
    const std::string text = to_model_text(m);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if(!out)
        throw std::runtime_error("cannot write " + path.string());
    out << text;
    if(!out)
        throw std::runtime_error("write failed for " + path.string());
}

ModelFile load_model(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if(!in)
        throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model_text(ss.str());
}

} // namespace rnndbn
