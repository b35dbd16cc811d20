#include "fedunlearn/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <string>

#include "fedunlearn/errors.hpp"

#include "json.hpp"

namespace fedunlearn {

namespace {

using nlohmann::json;

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_hex64(const std::string& text, const char* field) {
    if (text.size() != 18 || text.compare(0, 2, "0x") != 0)
        throw ValidationError(std::string("checkpoint header field ") + field +
                              " is not a 0x-prefixed 64-bit hex value");
    return std::stoull(text.substr(2), nullptr, 16);
}

} // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    json header;
    header["version"] = ckpt.version;
    header["config_hash"] = hex64(ckpt.config_hash);
    header["dataset_hash"] = hex64(ckpt.dataset_hash);
    header["model"] = {{"kind", model_kind_name(ckpt.model.kind)},
                       {"input_dim", ckpt.model.input_dim},
                       {"num_classes", ckpt.model.num_classes},
                       {"hidden_dim", ckpt.model.hidden_dim},
                       {"lambda_reg", ckpt.model.lambda_reg}};
    header["param_count"] = ckpt.params.size();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write checkpoint file " + path);
    out << header.dump() << '\n';
    for (double p : ckpt.params) {
        const std::uint64_t bits = std::bit_cast<std::uint64_t>(p);
        char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>(bits >> (8 * i));
        out.write(bytes, 8);
    }
    if (!out) throw ValidationError("write failed for checkpoint file " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint file " + path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("checkpoint file " + path + " is empty");

    json header;
    try {
        header = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ValidationError("checkpoint header in " + path + " is not valid JSON: " + e.what());
    }

    Checkpoint ckpt;
    try {
        ckpt.version = header.at("version").get<std::string>();
        ckpt.config_hash = parse_hex64(header.at("config_hash").get<std::string>(), "config_hash");
        ckpt.dataset_hash =
            parse_hex64(header.at("dataset_hash").get<std::string>(), "dataset_hash");
        const json& m = header.at("model");
        ckpt.model.kind = model_kind_from_name(m.at("kind").get<std::string>());
        ckpt.model.input_dim = m.at("input_dim").get<int>();
        ckpt.model.num_classes = m.at("num_classes").get<int>();
        ckpt.model.hidden_dim = m.at("hidden_dim").get<int>();
        ckpt.model.lambda_reg = m.at("lambda_reg").get<double>();
        ckpt.params.resize(header.at("param_count").get<std::size_t>());
    } catch (const json::exception& e) {
        throw ValidationError("checkpoint header in " + path + " is malformed: " + e.what());
    }

    if (ckpt.version != kArtifactVersion)
        throw ProvenanceError("checkpoint " + path + " was written by artifact version " +
                              ckpt.version + ", this build is " + kArtifactVersion);
    validate_spec(ckpt.model);
    if (ckpt.params.size() != static_cast<std::size_t>(param_count(ckpt.model)))
        throw ValidationError("checkpoint " + path + " declares " +
                              std::to_string(ckpt.params.size()) +
                              " parameters, model expects " +
                              std::to_string(param_count(ckpt.model)));

    for (double& p : ckpt.params) {
        char bytes[8];
        if (!in.read(bytes, 8))
            throw ValidationError("checkpoint file " + path + " is truncated");
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
        p = std::bit_cast<double>(bits);
    }
    char extra;
    if (in.read(&extra, 1))
        throw ValidationError("checkpoint file " + path + " has trailing bytes");
    return ckpt;
}

} // namespace fedunlearn
