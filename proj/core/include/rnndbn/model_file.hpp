#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "rnndbn/config.hpp"
#include "rnndbn/dbn.hpp"
#include "rnndbn/rbm.hpp"
#include "rnndbn/rnn_dbn.hpp"
#include "rnndbn/rtrbm.hpp"

namespace rnndbn {

enum class ModelKind { rbm, dbn, rtrbm, rnn_dbn };

std::string_view to_string(ModelKind kind);
/// Accepts "rbm", "dbn", "rtrbm", "rnn_dbn" and "rnn-dbn".
ModelKind parse_model_kind(std::string_view s);

using ModelParams = std::variant<RbmParams, DbnParams, RtrbmParams, RnnDbnParams>;

/// A trained model with the configuration that produced it.
struct ModelFile {
    static constexpr int kFormatVersion = 1;

    ModelParams params;
    TrainConfig config;
    int format_version = kFormatVersion;

    ModelKind kind() const;
    std::size_t n_visible() const;

    bool operator==(const ModelFile &) const = default;
};

/// JSON text with full-precision numbers; identical models give identical bytes.
std::string to_model_text(const ModelFile &m);
/// Throws DataError on malformed input, unknown version or inconsistent dimensions.
ModelFile parse_model_text(std::string_view text);

void save_model(const ModelFile &m, const std::filesystem::path &path);
ModelFile load_model(const std::filesystem::path &path);

} // namespace rnndbn
