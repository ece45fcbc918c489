#include <nlohmann/json.hpp>

#include "stallpred/errors.hpp"
#include "stallpred/model.hpp"

namespace stallpred {

using nlohmann::ordered_json;

namespace {

const char* kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::LstmUni: return "lstm";
        case LayerKind::LstmBi: return "bilstm";
        case LayerKind::Dense: return "dense";
        case LayerKind::Dropout: return "dropout";
        case LayerKind::OutputSigmoid: return "output_sigmoid";
    }
    return "?";
}

LayerKind kind_from(const std::string& s) {
    if (s == "lstm") return LayerKind::LstmUni;
    if (s == "bilstm") return LayerKind::LstmBi;
    if (s == "dense") return LayerKind::Dense;
    if (s == "dropout") return LayerKind::Dropout;
    if (s == "output_sigmoid") return LayerKind::OutputSigmoid;
    throw FormatError("unknown layer kind: " + s);
}

const char* act_name(Activation a) {
    switch (a) {
        case Activation::Tanh: return "tanh";
        case Activation::Relu: return "relu";
        case Activation::Sigmoid: return "sigmoid";
    }
    return "?";
}

Activation act_from(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "relu") return Activation::Relu;
    if (s == "sigmoid") return Activation::Sigmoid;
    throw FormatError("unknown activation: " + s);
}

}  // namespace

std::string spec_to_json(const ModelSpec& spec) {
    ordered_json j;
    j["input_features"] = spec.input_features;
    j["window_len"] = spec.window_len;
    j["layers"] = ordered_json::array();
    for (const auto& l : spec.layers) {
        ordered_json lj;
        lj["kind"] = kind_name(l.kind);
        switch (l.kind) {
            case LayerKind::LstmUni:
            case LayerKind::LstmBi:
                lj["units"] = l.hidden_units;
                break;
            case LayerKind::Dense:
                lj["units"] = l.hidden_units;
                lj["activation"] = act_name(l.activation);
                break;
            case LayerKind::Dropout:
                lj["rate"] = l.drop_rate;
                break;
            case LayerKind::OutputSigmoid:
                break;
        }
        j["layers"].push_back(lj);
    }
    return j.dump();
}

ModelSpec spec_from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw FormatError(std::string("model spec json: ") + e.what());
    }
    ModelSpec spec;
    spec.input_features = j.value("input_features", std::size_t{16});
    spec.window_len = j.value("window_len", std::size_t{10});
    if (!j.contains("layers") || !j["layers"].is_array())
        throw FormatError("model spec json: missing layers array");
    for (const auto& lj : j["layers"]) {
        LayerKind kind = kind_from(lj.at("kind").get<std::string>());
        switch (kind) {
            case LayerKind::LstmUni:
                spec.layers.push_back(lstm_layer(lj.at("units").get<std::size_t>()));
                break;
            case LayerKind::LstmBi:
                spec.layers.push_back(bilstm_layer(lj.at("units").get<std::size_t>()));
                break;
            case LayerKind::Dense:
                spec.layers.push_back(dense_layer(
                    lj.at("units").get<std::size_t>(),
                    act_from(lj.value("activation", std::string("relu")))));
                break;
            case LayerKind::Dropout:
                spec.layers.push_back(dropout_layer(lj.at("rate").get<double>()));
                break;
            case LayerKind::OutputSigmoid:
                spec.layers.push_back(output_layer());
                break;
        }
    }
    validate(spec);
    return spec;
}

}  // namespace stallpred
