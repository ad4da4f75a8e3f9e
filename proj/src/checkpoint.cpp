#include "thermocast/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "thermocast/errors.hpp"

#include "json.hpp"

namespace thermocast {

namespace {

constexpr char kMagic[8] = {'T', 'C', 'A', 'S', 'T', 'C', 'K', '1'};
constexpr std::uint32_t kVersion = 1;

nlohmann::json config_json(const ModelConfig& c) {
    return {
        {"lookback", c.lookback},
        {"horizon", c.horizon},
        {"main_features", c.main_features},
        {"ancillary_features", c.ancillary_features},
        {"lstm_hidden", c.lstm_hidden},
        {"lstm_layers", c.lstm_layers},
        {"main_ffn_hidden", c.main_ffn_hidden},
        {"anc_ffn_hidden", c.anc_ffn_hidden},
        {"anc_lstm_hidden", c.anc_lstm_hidden},
        {"anc_lstm_layers", c.anc_lstm_layers},
        {"use_ancillary", c.use_ancillary},
        {"per_step_weights", c.per_step_weights},
        {"joint_finetune", c.joint_finetune},
        {"dropout_rate", c.dropout_rate},
    };
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.lookback = j.at("lookback").get<int>();
    c.horizon = j.at("horizon").get<int>();
    c.main_features = j.at("main_features").get<int>();
    c.ancillary_features = j.at("ancillary_features").get<int>();
    c.lstm_hidden = j.at("lstm_hidden").get<int>();
    c.lstm_layers = j.at("lstm_layers").get<int>();
    c.main_ffn_hidden = j.at("main_ffn_hidden").get<std::vector<int>>();
    c.anc_ffn_hidden = j.at("anc_ffn_hidden").get<std::vector<int>>();
    c.anc_lstm_hidden = j.at("anc_lstm_hidden").get<int>();
    c.anc_lstm_layers = j.at("anc_lstm_layers").get<int>();
    c.use_ancillary = j.at("use_ancillary").get<bool>();
    c.per_step_weights = j.at("per_step_weights").get<bool>();
    c.joint_finetune = j.at("joint_finetune").get<bool>();
    c.dropout_rate = j.at("dropout_rate").get<double>();
    return c;
}

}  // namespace

std::string model_config_to_json(const ModelConfig& cfg) {
    return config_json(cfg).dump(2) + "\n";
}

ModelConfig model_config_from_json(const std::string& json_text) {
    return config_from_json(nlohmann::json::parse(json_text));
}

void save_checkpoint(const AdjointModel& model, std::uint64_t seed,
                     const std::string& config_echo, const std::string& path) {
    const auto params = model.all_params();
    nlohmann::json header;
    header["schema_version"] = kVersion;
    header["model_config"] = config_json(model.config());
    header["seed"] = seed;
    header["config_echo"] = config_echo;
    header["target_scaler"] = {{"mean", model.target_scaler().mean},
                               {"stddev", model.target_scaler().stddev}};
    header["feature_scaler"] = {{"mean", model.feature_scaler().mean},
                                {"stddev", model.feature_scaler().stddev}};
    nlohmann::json dir = nlohmann::json::array();
    for (const auto& p : params)
        dir.push_back({{"name", p.name()}, {"shape", p.shape()}});
    header["tensors"] = dir;
    const std::string header_text = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write checkpoint '" + path + "'");
    out.write(kMagic, sizeof(kMagic));
    const auto len = static_cast<std::uint32_t>(header_text.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(header_text.data(), static_cast<std::streamsize>(len));
    for (const auto& p : params)
        out.write(reinterpret_cast<const char*>(p.data().data()),
                  static_cast<std::streamsize>(p.data().size() *
                                               sizeof(double)));
    if (!out) throw FormatError("write failure on checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open checkpoint '" + path + "'");
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw FormatError("'" + path + "' is not a thermocast checkpoint");
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (!in) throw FormatError("truncated checkpoint header");
    std::string header_text(len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(len));
    if (!in) throw FormatError("truncated checkpoint header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("corrupt checkpoint header: ") +
                          e.what());
    }
    if (header.at("schema_version").get<std::uint32_t>() != kVersion)
        throw FormatError("unsupported checkpoint version");

    Checkpoint ck;
    const ModelConfig cfg = config_from_json(header.at("model_config"));
    ck.model = AdjointModel::init(cfg, 0);
    ck.seed = header.at("seed").get<std::uint64_t>();
    ck.config_echo = header.at("config_echo").get<std::string>();

    FeatureScaler fs;
    fs.mean = header.at("feature_scaler").at("mean").get<std::vector<double>>();
    fs.stddev =
        header.at("feature_scaler").at("stddev").get<std::vector<double>>();
    TargetScaler ts;
    ts.mean = header.at("target_scaler").at("mean").get<double>();
    ts.stddev = header.at("target_scaler").at("stddev").get<double>();
    ck.model.set_scalers(std::move(fs), ts);

    auto params = ck.model.all_params();
    const auto& dir = header.at("tensors");
    if (dir.size() != params.size())
        throw FormatError("checkpoint tensor directory does not match config");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto name = dir[i].at("name").get<std::string>();
        const auto shape = dir[i].at("shape").get<Shape>();
        if (name != params[i].name() || shape != params[i].shape())
            throw FormatError("checkpoint tensor '" + name +
                              "' does not match model layout");
        in.read(reinterpret_cast<char*>(params[i].mutable_data().data()),
                static_cast<std::streamsize>(params[i].data().size() *
                                             sizeof(double)));
        if (!in) throw FormatError("truncated checkpoint payload");
    }
    char extra;
    if (in.read(&extra, 1))
        throw FormatError("trailing bytes after checkpoint payload");
    return ck;
}

}  // namespace thermocast
