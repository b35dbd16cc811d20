#include "fedunlearn/report.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>

#include "fedunlearn/checkpoint.hpp"
#include "fedunlearn/errors.hpp"

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
        throw ValidationError(std::string("report field ") + field +
                              " is not a 0x-prefixed 64-bit hex value");
    return std::stoull(text.substr(2), nullptr, 16);
}

json nan_safe(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

double from_nan_safe(const json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

} // namespace

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void save_report(const std::string& json_path, const RunReport& report) {
    json j;
    j["artifact_version"] = kArtifactVersion;
    j["command"] = report.command;
    j["method"] = report.method;
    j["config"] = config_to_json(report.config);
    j["config_hash"] = hex64(report.config_hash);
    j["dataset_hash"] = hex64(report.dataset_hash);
    j["rounds_executed"] = report.rounds_executed;
    j["total_wall_time_ms"] = report.total_wall_time_ms;
    j["final"] = {{"loss", report.final_loss},
                  {"accuracy", nan_safe(report.final_accuracy)},
                  {"params", report.final_params}};
    json rounds = json::array();
    for (const RoundRecord& r : report.rounds)
        rounds.push_back({{"round", r.round},
                          {"loss", r.global_loss},
                          {"accuracy", nan_safe(r.global_accuracy)},
                          {"wall_time_ms", r.wall_time_ms},
                          {"update_norms", r.per_client_update_norms}});
    j["rounds"] = std::move(rounds);
    j["started_at"] = report.started_at;
    j["finished_at"] = report.finished_at;

    std::ofstream out(json_path);
    if (!out) throw ValidationError("cannot write report file " + json_path);
    out << j.dump(2) << '\n';
    if (!out) throw ValidationError("write failed for report file " + json_path);
}

void save_rounds_csv(const std::string& csv_path, const std::vector<RoundRecord>& rounds) {
    std::ofstream out(csv_path);
    if (!out) throw ValidationError("cannot write round log " + csv_path);
    out << "round,loss,accuracy,wall_time_ms\n";
    char buf[64];
    for (const RoundRecord& r : rounds) {
        out << r.round << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.global_loss);
        out << buf << ',';
        if (std::isnan(r.global_accuracy)) {
            out << "";
        } else {
            std::snprintf(buf, sizeof buf, "%.17g", r.global_accuracy);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g", r.wall_time_ms);
        out << ',' << buf << '\n';
    }
    if (!out) throw ValidationError("write failed for round log " + csv_path);
}

RunReport load_report(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw ValidationError("cannot open report file " + json_path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("report file " + json_path + " is not valid JSON: " + e.what());
    }

    RunReport report;
    try {
        const std::string version = j.at("artifact_version").get<std::string>();
        if (version != kArtifactVersion)
            throw ProvenanceError("report " + json_path + " was written by artifact version " +
                                  version + ", this build is " + kArtifactVersion);
        report.command = j.at("command").get<std::string>();
        report.method = j.at("method").get<std::string>();
        report.config = config_from_json(j.at("config"));
        report.config_hash = parse_hex64(j.at("config_hash").get<std::string>(), "config_hash");
        report.dataset_hash =
            parse_hex64(j.at("dataset_hash").get<std::string>(), "dataset_hash");
        report.rounds_executed = j.at("rounds_executed").get<long>();
        report.total_wall_time_ms = j.at("total_wall_time_ms").get<double>();
        const json& fin = j.at("final");
        report.final_loss = fin.at("loss").get<double>();
        report.final_accuracy = from_nan_safe(fin.at("accuracy"));
        report.final_params = fin.at("params").get<ParamVector>();
        for (const json& r : j.at("rounds")) {
            RoundRecord rec;
            rec.round = r.at("round").get<long>();
            rec.global_loss = r.at("loss").get<double>();
            rec.global_accuracy = from_nan_safe(r.at("accuracy"));
            rec.wall_time_ms = r.at("wall_time_ms").get<double>();
            rec.per_client_update_norms = r.at("update_norms").get<std::vector<double>>();
            report.rounds.push_back(std::move(rec));
        }
        report.started_at = j.at("started_at").get<std::string>();
        report.finished_at = j.at("finished_at").get<std::string>();
    } catch (const json::exception& e) {
        throw ValidationError("report file " + json_path + " is malformed: " + e.what());
    }

    if (report.config_hash != hash_config(report.config))
        throw ProvenanceError("report " + json_path +
                              " carries a config hash that does not match its own config echo");
    return report;
}

nlohmann::json metric_report_to_json(const MetricReport& m) {
    return {{"acc_baseline", m.acc_baseline},
            {"acc_unlearned", m.acc_unlearned},
            {"sape", m.sape},
            {"t_b_ms", m.t_b_ms},
            {"t_u_ms", m.t_u_ms},
            {"speedup_v", m.speedup_v},
            {"predicted_v", m.predicted_v},
            {"d_u", m.d_u}};
}

} // namespace fedunlearn
