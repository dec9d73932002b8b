#include "rnndbn/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rnndbn::data {

namespace {

using json = nlohmann::ordered_json;

std::string position(std::size_t seq, std::size_t frame)
{
    return "sequence " + std::to_string(seq) + " frame " + std::to_string(frame);
}

} // namespace

void Dataset::validate() const
{
    if(num_pitches < 1)
        throw DataError("dataset: num_pitches must be at least 1");
    if(sequences.empty())
        throw DataError("dataset: no sequences");
    for(std::size_t s = 0; s < sequences.size(); ++s) {
        const auto &frames = sequences[s].frames;
        if(frames.empty())
            throw DataError("dataset: sequence " + std::to_string(s) + " is empty");
        for(std::size_t t = 0; t < frames.size(); ++t) {
            const auto &a = frames[t].active;
            for(std::size_t i = 0; i < a.size(); ++i) {
                if(a[i] >= num_pitches)
                    throw DataError(position(s, t) + ": pitch " + std::to_string(a[i]) + " out of range [0, " +
                                    std::to_string(num_pitches) + ")");
                if(i > 0 && a[i] <= a[i - 1])
                    throw DataError(position(s, t) + ": pitches must be sorted and unique");
            }
        }
    }
}

std::size_t Dataset::frame_count() const
{
    std::size_t n = 0;
    for(const auto &s : sequences)
        n += s.frames.size();
    return n;
}

Dataset parse_pianoroll(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch(const json::parse_error &e) {
        throw DataError(std::string("piano-roll parse failure: ") + e.what());
    }
    if(!doc.is_object())
        throw DataError("piano-roll: top level must be an object");

    Dataset d;
    try {
        d.name = doc.value("name", std::string{});
        if(doc.contains("num_pitches")) {
            const auto &np = doc.at("num_pitches");
            if(!np.is_number_integer() || np.get<long long>() < 1)
                throw DataError("piano-roll: num_pitches must be a positive integer");
            d.num_pitches = np.get<std::size_t>();
        }
        const auto &seqs = doc.at("sequences");
        if(!seqs.is_array())
            throw DataError("piano-roll: sequences must be an array");
        for(std::size_t s = 0; s < seqs.size(); ++s) {
            if(!seqs[s].is_array())
                throw DataError("piano-roll: sequence " + std::to_string(s) + " must be an array");
            SequenceData sd;
            for(std::size_t t = 0; t < seqs[s].size(); ++t) {
                const auto &fr = seqs[s][t];
                if(!fr.is_array())
                    throw DataError(position(s, t) + ": frame must be an array");
                Frame f;
                for(const auto &x : fr) {
                    if(!x.is_number_integer())
                        throw DataError(position(s, t) + ": pitch must be an integer");
                    const long long p = x.get<long long>();
                    if(p < 0 || static_cast<unsigned long long>(p) >= d.num_pitches)
                        throw DataError(position(s, t) + ": pitch " + std::to_string(p) + " out of range [0, " +
                                        std::to_string(d.num_pitches) + ")");
                    f.active.push_back(static_cast<std::uint32_t>(p));
                }
                std::sort(f.active.begin(), f.active.end());
                sd.frames.push_back(std::move(f));
            }
            d.sequences.push_back(std::move(sd));
        }
    } catch(const json::exception &e) {
        throw DataError(std::string("piano-roll: malformed document: ") + e.what());
    }
    d.validate();
    return d;
}

Dataset load_pianoroll(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if(!in)
        throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_pianoroll(ss.str());
}

std::string to_pianoroll_text(const Dataset &d)
{
    d.validate();
    json seqs = json::array();
    for(const auto &s : d.sequences) {
        json frames = json::array();
        for(const auto &f : s.frames)
            frames.push_back(f.active);
        seqs.push_back(std::move(frames));
    }
    json doc;
    doc["name"] = d.name;
    doc["num_pitches"] = d.num_pitches;
    doc["sequences"] = std::move(seqs);
    return doc.dump() + "\n";
}

void save_pianoroll(const Dataset &d, const std::filesystem::path &path)
{
    const std::string text = to_pianoroll_text(d);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if(!out)
        throw std::runtime_error("cannot write " + path.string());
    out << text;
    if(!out)
        throw std::runtime_error("write failed for " + path.string());
}

std::vector<Vec> to_binary_vectors(const SequenceData &s, std::size_t num_pitches)
{
    std::vector<Vec> out;
    out.reserve(s.frames.size());
    for(std::size_t t = 0; t < s.frames.size(); ++t) {
        Vec v(num_pitches, 0.0);
        for(auto p : s.frames[t].active) {
            if(p >= num_pitches)
                throw DataError("frame " + std::to_string(t) + ": pitch " + std::to_string(p) + " out of range [0, " +
                                std::to_string(num_pitches) + ")");
            v[p] = 1.0;
        }
        out.push_back(std::move(v));
    }
    return out;
}

Frame from_binary_vector(std::span<const double> v)
{
    Frame f;
    for(std::size_t j = 0; j < v.size(); ++j) {
        if(v[j] == 1.0)
            f.active.push_back(static_cast<std::uint32_t>(j));
        else if(v[j] != 0.0)
            throw DataError("from_binary_vector: entries must be 0 or 1");
    }
    return f;
}

SequenceData from_binary_vectors(std::span<const Vec> frames)
{
    SequenceData s;
    for(const auto &v : frames)
        s.frames.push_back(from_binary_vector(v));
    return s;
}

std::vector<std::vector<Vec>> to_sequences(const Dataset &d)
{
    std::vector<std::vector<Vec>> out;
    for(const auto &s : d.sequences)
        out.push_back(to_binary_vectors(s, d.num_pitches));
    return out;
}

std::vector<Vec> to_frames(const Dataset &d)
{
    std::vector<Vec> out;
    for(const auto &s : d.sequences) {
        auto v = to_binary_vectors(s, d.num_pitches);
        out.insert(out.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
    }
    return out;
}

std::array<Dataset, 3> split(const Dataset &d, std::array<double, 3> fractions, std::uint64_t seed)
{
    d.validate();
    double sum = 0.0;
    for(double f : fractions) {
        if(!(f > 0.0))
            throw std::invalid_argument("split: every fraction must be positive");
        sum += f;
    }
    if(std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("split: fractions must sum to 1");

    const std::size_t n = d.sequences.size();
    const auto n_valid = static_cast<std::size_t>(std::llround(fractions[1] * static_cast<double>(n)));
    const auto n_test = static_cast<std::size_t>(std::llround(fractions[2] * static_cast<double>(n)));
    if(n_valid == 0 || n_test == 0 || n_valid + n_test >= n)
        throw std::invalid_argument("split: too few sequences (" + std::to_string(n) + ") for nonempty parts");
    const std::size_t sizes[3] = {n - n_valid - n_test, n_valid, n_test};

    Rng rng(seed);
    const auto order = rng.permutation(n);
    static constexpr const char *kSuffix[3] = {"train", "valid", "test"};
    std::array<Dataset, 3> parts;
    std::size_t pos = 0;
    for(std::size_t k = 0; k < 3; ++k) {
        parts[k].name = d.name.empty() ? kSuffix[k] : d.name + "-" + kSuffix[k];
        parts[k].num_pitches = d.num_pitches;
        for(std::size_t i = 0; i < sizes[k]; ++i)
            parts[k].sequences.push_back(d.sequences[order[pos++]]);
    }
    return parts;
}

} // namespace rnndbn::data
