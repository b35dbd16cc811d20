#include "fedunlearn/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "fedunlearn/errors.hpp"
#include "fedunlearn/hash.hpp"
#include "fedunlearn/rng.hpp"

namespace fedunlearn {

namespace {

using nlohmann::json;

struct Violations {
    std::vector<std::string> items;
    void add(const std::string& msg) { items.push_back(msg); }
    void raise_if_any() const {
        if (items.empty()) return;
        std::ostringstream msg;
        msg << "invalid config (" << items.size() << " problem"
            << (items.size() == 1 ? "" : "s") << "):";
        for (const std::string& item : items) msg << "\n  - " << item;
        throw ValidationError(msg.str());
    }
};

// Reads one JSON object fail-closed: typed getters mark their key as seen and
// record a violation instead of throwing, finish() flags whatever is left.
class FieldReader {
public:
    FieldReader(const json& obj, std::string prefix, Violations& v)
        : obj_(obj), prefix_(std::move(prefix)), viol_(v) {}

    bool has(const char* key) const { return obj_.contains(key); }

    double num(const char* key, double def) {
        seen_.insert(key);
        if (!obj_.contains(key)) return def;
        const json& f = obj_.at(key);
        if (!f.is_number()) {
            viol_.add(where(key) + ": expected a number");
            return def;
        }
        return f.get<double>();
    }

    long integer(const char* key, long def) {
        seen_.insert(key);
        if (!obj_.contains(key)) return def;
        const json& f = obj_.at(key);
        if (!f.is_number_integer()) {
            viol_.add(where(key) + ": expected an integer");
            return def;
        }
        return f.get<long>();
    }

    std::uint64_t uint64(const char* key, std::uint64_t def) {
        seen_.insert(key);
        if (!obj_.contains(key)) return def;
        const json& f = obj_.at(key);
        if (!f.is_number_integer() || (f.is_number_integer() && !f.is_number_unsigned() &&
                                       f.get<long long>() < 0)) {
            viol_.add(where(key) + ": expected a nonnegative integer");
            return def;
        }
        return f.get<std::uint64_t>();
    }

    bool boolean(const char* key, bool def) {
        seen_.insert(key);
        if (!obj_.contains(key)) return def;
        const json& f = obj_.at(key);
        if (!f.is_boolean()) {
            viol_.add(where(key) + ": expected true or false");
            return def;
        }
        return f.get<bool>();
    }

    std::string str(const char* key, const std::string& def) {
        seen_.insert(key);
        if (!obj_.contains(key)) return def;
        const json& f = obj_.at(key);
        if (!f.is_string()) {
            viol_.add(where(key) + ": expected a string");
            return def;
        }
        return f.get<std::string>();
    }

    std::vector<std::string> str_list(const char* key) {
        seen_.insert(key);
        std::vector<std::string> out;
        if (!obj_.contains(key)) return out;
        const json& f = obj_.at(key);
        if (!f.is_array()) {
            viol_.add(where(key) + ": expected an array of strings");
            return out;
        }
        for (const json& e : f) {
            if (!e.is_string()) {
                viol_.add(where(key) + ": expected an array of strings");
                return {};
            }
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    const json* child(const char* key) {
        seen_.insert(key);
        if (!obj_.contains(key)) return nullptr;
        const json& f = obj_.at(key);
        if (!f.is_object()) {
            viol_.add(where(key) + ": expected an object");
            return nullptr;
        }
        return &f;
    }

    void finish() {
        for (const auto& [key, value] : obj_.items())
            if (!seen_.count(key)) viol_.add(where(key.c_str()) + ": unknown key");
    }

    std::string where(const char* key) const {
        return prefix_.empty() ? std::string(key) : prefix_ + "." + key;
    }

    Violations& viol() { return viol_; }

private:
    const json& obj_;
    std::string prefix_;
    Violations& viol_;
    std::set<std::string> seen_;
};

template <typename Parse>
void parse_enum(FieldReader& r, const char* key, const std::string& def, Parse parse) {
    const std::string text = r.str(key, def);
    try {
        parse(text);
    } catch (const ValidationError& e) {
        r.viol().add(r.where(key) + ": " + e.what());
    }
}

void check_range(Violations& v, const std::string& field, double value, double lo, double hi,
                 bool lo_open, bool hi_open) {
    const bool above = lo_open ? value > lo : value >= lo;
    const bool below = hi_open ? value < hi : value <= hi;
    if (above && below && std::isfinite(value)) return;
    std::ostringstream msg;
    msg << field << ": value " << value << " outside " << (lo_open ? '(' : '[') << lo << ", "
        << hi << (hi_open ? ')' : ']');
    v.add(msg.str());
}

ModelSpec parse_model(const json* j, Violations& v) {
    ModelSpec m;
    m.kind = ModelKind::SoftmaxClassifier;
    m.input_dim = 10;
    m.num_classes = 3;
    m.hidden_dim = 0;
    m.lambda_reg = 0.001;
    if (!j) return m;
    FieldReader r(*j, "model", v);
    parse_enum(r, "kind", "softmax-classifier",
               [&](const std::string& s) { m.kind = model_kind_from_name(s); });
    m.input_dim = static_cast<int>(r.integer("input_dim", m.input_dim));
    m.num_classes = static_cast<int>(r.integer("num_classes", m.num_classes));
    m.hidden_dim = static_cast<int>(r.integer("hidden_dim", m.hidden_dim));
    m.lambda_reg = r.num("lambda_reg", m.lambda_reg);
    r.finish();
    try {
        validate_spec(m);
    } catch (const ValidationError& e) {
        v.add(std::string("model: ") + e.what());
    }
    return m;
}

DatasetSpec parse_dataset(const json* j, Violations& v) {
    DatasetSpec d;
    if (!j) return d;
    FieldReader r(*j, "dataset", v);
    const std::string source = r.str("source", "synth");
    if (source == "synth") {
        d.source = DatasetSpec::Source::Synth;
        d.n = static_cast<int>(r.integer("n", d.n));
        d.d = static_cast<int>(r.integer("d", d.d));
        d.classes = static_cast<int>(r.integer("classes", d.classes));
        d.param_scale = r.num("param_scale", d.param_scale);
        d.data_seed = r.uint64("data_seed", d.data_seed);
        if (d.n < 1) v.add("dataset.n: must be >= 1");
        if (d.d < 1) v.add("dataset.d: must be >= 1");
        if (d.classes < 2) v.add("dataset.classes: must be >= 2");
        if (!(d.param_scale > 0.0)) v.add("dataset.param_scale: must be > 0");
    } else if (source == "csv") {
        d.source = DatasetSpec::Source::Csv;
        d.path = r.str("path", "");
        d.schema.features = r.str_list("features");
        d.schema.label = r.str("label", "label");
        d.schema.has_header = r.boolean("has_header", true);
        d.schema.integer_labels = r.boolean("integer_labels", true);
        if (d.path.empty()) v.add("dataset.path: required for csv datasets");
        if (d.schema.features.empty()) v.add("dataset.features: required for csv datasets");
    } else if (source == "idx") {
        d.source = DatasetSpec::Source::Idx;
        d.images = r.str("images", "");
        d.labels = r.str("labels", "");
        if (d.images.empty()) v.add("dataset.images: required for idx datasets");
        if (d.labels.empty()) v.add("dataset.labels: required for idx datasets");
    } else {
        v.add("dataset.source: unknown source '" + source + "' (expected synth, csv or idx)");
    }
    r.finish();
    return d;
}

} // namespace

ExperimentConfig config_from_json(const json& j) {
    Violations v;
    if (!j.is_object()) {
        v.add("config root: expected a JSON object");
        v.raise_if_any();
    }
    ExperimentConfig cfg;
    FieldReader r(j, "", v);

    cfg.model = parse_model(r.child("model"), v);
    cfg.dataset = parse_dataset(r.child("dataset"), v);

    cfg.K = static_cast<int>(r.integer("K", cfg.K));
    cfg.q = r.num("q", cfg.q);
    cfg.E_local = static_cast<int>(r.integer("E_local", cfg.E_local));
    cfg.B = static_cast<int>(r.integer("B", cfg.B));
    cfg.eta = r.num("eta", cfg.eta);
    cfg.T = r.integer("T", cfg.T);
    cfg.r = r.num("r", cfg.r);
    cfg.k_u = static_cast<int>(r.integer("k_u", cfg.k_u));
    cfg.block_size = static_cast<int>(r.integer("block_size", cfg.block_size));
    cfg.beta1 = r.num("beta1", cfg.beta1);
    cfg.beta2 = r.num("beta2", cfg.beta2);
    cfg.eps_stab = r.num("eps_stab", cfg.eps_stab);
    cfg.paper_literal_scaling = r.boolean("paper_literal_scaling", cfg.paper_literal_scaling);
    parse_enum(r, "batching_mode", "mask",
               [&](const std::string& s) { cfg.batching_mode = batching_mode_from_name(s); });
    parse_enum(r, "reinit_mode", "fresh",
               [&](const std::string& s) { cfg.reinit_mode = reinit_mode_from_name(s); });
    parse_enum(r, "aggregation", "fedavg",
               [&](const std::string& s) { cfg.aggregation = aggregation_mode_from_name(s); });
    const std::string weights = r.str("weights", "sample-count");
    if (weights == "uniform")
        cfg.uniform_weights = true;
    else if (weights == "sample-count")
        cfg.uniform_weights = false;
    else
        v.add("weights: unknown mode '" + weights + "' (expected sample-count or uniform)");
    cfg.max_client_deletion_fraction =
        r.num("max_client_deletion_fraction", cfg.max_client_deletion_fraction);

    if (const json* stop = r.child("stop")) {
        FieldReader rs(*stop, "stop", v);
        if (rs.has("loss_threshold")) cfg.stop.loss_threshold = rs.num("loss_threshold", 0.0);
        rs.finish();
    }
    if (const json* seeds = r.child("seeds")) {
        FieldReader rs(*seeds, "seeds", v);
        cfg.seeds.init = rs.uint64("init", cfg.seeds.init);
        cfg.seeds.partition = rs.uint64("partition", cfg.seeds.partition);
        cfg.seeds.deletion = rs.uint64("deletion", cfg.seeds.deletion);
        cfg.seeds.batching = rs.uint64("batching", cfg.seeds.batching);
        rs.finish();
    }
    r.finish();

    if (cfg.K < 1) v.add("K: must be >= 1");
    check_range(v, "q", cfg.q, 0.0, 1.0, true, false);
    if (cfg.E_local < 1) v.add("E_local: must be >= 1");
    if (cfg.B < 1) v.add("B: must be >= 1");
    check_range(v, "eta", cfg.eta, 0.0, std::numeric_limits<double>::infinity(), true, true);
    if (cfg.T < 0) v.add("T: must be >= 0");
    check_range(v, "r", cfg.r, 0.0, 1.0, false, true);
    if (cfg.k_u < 1) v.add("k_u: must be >= 1");
    if (cfg.K >= 1 && cfg.k_u > cfg.K) v.add("k_u: cannot exceed K");
    if (cfg.block_size < 1) v.add("block_size: must be >= 1");
    check_range(v, "beta1", cfg.beta1, 0.0, 1.0, false, true);
    check_range(v, "beta2", cfg.beta2, 0.0, 1.0, false, true);
    check_range(v, "eps_stab", cfg.eps_stab, 0.0, std::numeric_limits<double>::infinity(), true,
                true);
    check_range(v, "max_client_deletion_fraction", cfg.max_client_deletion_fraction, 0.0, 1.0,
                true, false);
    if (cfg.stop.loss_threshold && !std::isfinite(*cfg.stop.loss_threshold))
        v.add("stop.loss_threshold: must be finite");

    if (cfg.dataset.source == DatasetSpec::Source::Synth && cfg.model.is_classifier()) {
        if (cfg.model.input_dim != cfg.dataset.d)
            v.add("model.input_dim: must equal dataset.d for synth datasets");
        if (cfg.model.num_classes != cfg.dataset.classes)
            v.add("model.num_classes: must equal dataset.classes for synth datasets");
    }
    if (cfg.dataset.source == DatasetSpec::Source::Csv &&
        cfg.model.input_dim != static_cast<int>(cfg.dataset.schema.features.size()))
        v.add("model.input_dim: must equal the number of csv feature columns");

    v.raise_if_any();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("config file " + path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["model"] = {{"kind", model_kind_name(cfg.model.kind)},
                  {"input_dim", cfg.model.input_dim},
                  {"num_classes", cfg.model.num_classes},
                  {"hidden_dim", cfg.model.hidden_dim},
                  {"lambda_reg", cfg.model.lambda_reg}};
    switch (cfg.dataset.source) {
    case DatasetSpec::Source::Synth:
        j["dataset"] = {{"source", "synth"},
                        {"n", cfg.dataset.n},
                        {"d", cfg.dataset.d},
                        {"classes", cfg.dataset.classes},
                        {"param_scale", cfg.dataset.param_scale},
                        {"data_seed", cfg.dataset.data_seed}};
        break;
    case DatasetSpec::Source::Csv:
        j["dataset"] = {{"source", "csv"},
                        {"path", cfg.dataset.path},
                        {"features", cfg.dataset.schema.features},
                        {"label", cfg.dataset.schema.label},
                        {"has_header", cfg.dataset.schema.has_header},
                        {"integer_labels", cfg.dataset.schema.integer_labels}};
        break;
    case DatasetSpec::Source::Idx:
        j["dataset"] = {{"source", "idx"},
                        {"images", cfg.dataset.images},
                        {"labels", cfg.dataset.labels}};
        break;
    }
    j["K"] = cfg.K;
    j["q"] = cfg.q;
    j["E_local"] = cfg.E_local;
    j["B"] = cfg.B;
    j["eta"] = cfg.eta;
    j["T"] = cfg.T;
    j["r"] = cfg.r;
    j["k_u"] = cfg.k_u;
    j["block_size"] = cfg.block_size;
    j["beta1"] = cfg.beta1;
    j["beta2"] = cfg.beta2;
    j["eps_stab"] = cfg.eps_stab;
    j["paper_literal_scaling"] = cfg.paper_literal_scaling;
    j["batching_mode"] = batching_mode_name(cfg.batching_mode);
    j["reinit_mode"] = reinit_mode_name(cfg.reinit_mode);
    j["aggregation"] = aggregation_mode_name(cfg.aggregation);
    j["weights"] = cfg.uniform_weights ? "uniform" : "sample-count";
    j["max_client_deletion_fraction"] = cfg.max_client_deletion_fraction;
    if (cfg.stop.loss_threshold)
        j["stop"] = {{"loss_threshold", *cfg.stop.loss_threshold}};
    else
        j["stop"] = json::object();
    j["seeds"] = {{"init", cfg.seeds.init},
                  {"partition", cfg.seeds.partition},
                  {"deletion", cfg.seeds.deletion},
                  {"batching", cfg.seeds.batching}};
    return j;
}

std::uint64_t hash_config(const ExperimentConfig& cfg) {
    Fnv1a64 h;
    h.str(config_to_json(cfg).dump());
    return h.digest();
}

void apply_seed_override(ExperimentConfig& cfg, const std::string& override_text) {
    const std::size_t eq = override_text.find('=');
    if (eq == std::string::npos)
        throw ValidationError("seed override '" + override_text + "' is not name=value");
    const std::string name = override_text.substr(0, eq);
    const std::string value_text = override_text.substr(eq + 1);
    std::uint64_t value = 0;
    try {
        std::size_t used = 0;
        value = std::stoull(value_text, &used);
        if (used != value_text.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
        throw ValidationError("seed override value '" + value_text + "' is not an integer");
    }
    if (name == "init")
        cfg.seeds.init = value;
    else if (name == "partition")
        cfg.seeds.partition = value;
    else if (name == "deletion")
        cfg.seeds.deletion = value;
    else if (name == "batching")
        cfg.seeds.batching = value;
    else
        throw ValidationError("unknown seed name '" + name +
                              "' (expected init, partition, deletion or batching)");
}

ParamVector synth_true_params(const DatasetSpec& spec) {
    if (spec.source != DatasetSpec::Source::Synth)
        throw ValidationError("synth_true_params: dataset is not synthetic");
    const int len = spec.classes * (spec.d + 1);
    ParamVector out(len);
    auto rng = make_rng(mix_seed(spec.data_seed, 0x747275ULL));
    for (int i = 0; i < len; ++i) out[i] = spec.param_scale * normal01(rng);
    return out;
}

Dataset load_dataset(const DatasetSpec& spec) {
    switch (spec.source) {
    case DatasetSpec::Source::Synth:
        return synth_logistic(spec.n, spec.d, synth_true_params(spec),
                              mix_seed(spec.data_seed, 0x646174ULL));
    case DatasetSpec::Source::Csv:
        return load_csv(spec.path, spec.schema);
    case DatasetSpec::Source::Idx:
        return load_idx(spec.images, spec.labels);
    }
    throw ValidationError("load_dataset: unreachable source");
}

RunSettings to_run_settings(const ExperimentConfig& cfg, OptimizerKind optimizer, int threads) {
    RunSettings s;
    s.model = cfg.model;
    s.K = cfg.K;
    s.q = cfg.q;
    s.E_local = cfg.E_local;
    s.B = cfg.B;
    s.eta = cfg.eta;
    s.T = cfg.T;
    s.optimizer = optimizer;
    s.block_size = cfg.block_size;
    s.beta1 = cfg.beta1;
    s.beta2 = cfg.beta2;
    s.eps_stab = cfg.eps_stab;
    s.paper_literal_scaling = cfg.paper_literal_scaling;
    s.batching = cfg.batching_mode;
    s.aggregation = cfg.aggregation;
    s.uniform_weights = cfg.uniform_weights;
    s.loss_threshold = cfg.stop.loss_threshold;
    s.seeds = cfg.seeds;
    s.threads = threads;
    return s;
}

} // namespace fedunlearn
