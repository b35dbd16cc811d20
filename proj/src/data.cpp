#include "fedunlearn/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "fedunlearn/errors.hpp"
#include "fedunlearn/hash.hpp"
#include "fedunlearn/model.hpp"
#include "fedunlearn/rng.hpp"

namespace fedunlearn {

namespace {

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

double parse_double(const std::string& field, const std::string& path, long line_no) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ValidationError(path + ":" + std::to_string(line_no) + ": cannot parse '" + field +
                              "' as a number");
    return value;
}

int parse_column_index(const std::string& name) {
    int idx = 0;
    const auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), idx);
    if (ec != std::errc{} || ptr != name.data() + name.size() || idx < 0)
        throw ValidationError("headerless csv schema needs numeric column indices, got '" + name +
                              "'");
    return idx;
}

} // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
    if (schema.features.empty()) throw ValidationError("csv schema has no feature columns");
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open csv file " + path);

    std::string line;
    long line_no = 0;
    std::vector<int> feature_idx;
    int label_idx = -1;

    if (schema.has_header) {
        if (!std::getline(in, line))
            throw ValidationError(path + ": empty file, expected a header row");
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::vector<std::string> header = split_commas(line);
        std::unordered_map<std::string, int> by_name;
        for (int i = 0; i < static_cast<int>(header.size()); ++i) by_name.emplace(header[i], i);
        for (const std::string& name : schema.features) {
            const auto it = by_name.find(name);
            if (it == by_name.end())
                throw ValidationError(path + ": header has no column '" + name + "'");
            feature_idx.push_back(it->second);
        }
        const auto it = by_name.find(schema.label);
        if (it == by_name.end())
            throw ValidationError(path + ": header has no column '" + schema.label + "'");
        label_idx = it->second;
    } else {
        for (const std::string& name : schema.features)
            feature_idx.push_back(parse_column_index(name));
        label_idx = parse_column_index(schema.label);
    }

    int max_idx = label_idx;
    for (int i : feature_idx) max_idx = std::max(max_idx, i);

    Dataset out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_commas(line);
        if (static_cast<int>(fields.size()) <= max_idx)
            throw ValidationError(path + ":" + std::to_string(line_no) + ": row has " +
                                  std::to_string(fields.size()) + " fields, need at least " +
                                  std::to_string(max_idx + 1));
        Example ex;
        ex.x.reserve(feature_idx.size());
        for (int i : feature_idx) ex.x.push_back(parse_double(fields[i], path, line_no));
        ex.y = parse_double(fields[label_idx], path, line_no);
        if (schema.integer_labels && ex.y != std::floor(ex.y))
            throw ValidationError(path + ":" + std::to_string(line_no) + ": label '" +
                                  fields[label_idx] + "' is not an integer");
        out.push_back(std::move(ex));
    }
    return out;
}

void save_csv(const std::string& path, const Dataset& data, const CsvSchema& schema) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write csv file " + path);
    if (schema.has_header) {
        for (const std::string& name : schema.features) out << name << ',';
        out << schema.label << '\n';
    }
    char buf[64];
    for (const Example& ex : data) {
        if (ex.x.size() != schema.features.size())
            throw ValidationError("save_csv: example width does not match schema");
        for (double v : ex.x) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << buf << ',';
        }
        std::snprintf(buf, sizeof buf, "%.17g", ex.y);
        out << buf << '\n';
    }
    if (!out) throw ValidationError("write failed for csv file " + path);
}

namespace {

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open idx file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint32_t read_be32(const std::string& bytes, std::size_t off, const std::string& path) {
    if (off + 4 > bytes.size()) throw ValidationError("idx file " + path + " is truncated");
    const auto b = [&](std::size_t i) {
        return static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[off + i]));
    };
    return (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
}

void write_be32(std::ofstream& out, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                       static_cast<char>(v >> 8), static_cast<char>(v)};
    out.write(b, 4);
}

} // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    const std::string img = read_file_bytes(images_path);
    const std::string lab = read_file_bytes(labels_path);

    if (read_be32(img, 0, images_path) != 0x00000803u)
        throw ValidationError("idx file " + images_path + " has a bad image magic number");
    if (read_be32(lab, 0, labels_path) != 0x00000801u)
        throw ValidationError("idx file " + labels_path + " has a bad label magic number");

    const std::uint64_t n_img = read_be32(img, 4, images_path);
    const std::uint64_t rows = read_be32(img, 8, images_path);
    const std::uint64_t cols = read_be32(img, 12, images_path);
    const std::uint64_t n_lab = read_be32(lab, 4, labels_path);
    if (n_img != n_lab)
        throw ValidationError("idx image count " + std::to_string(n_img) +
                              " does not match label count " + std::to_string(n_lab));
    const std::uint64_t pixels = rows * cols;
    if (img.size() != 16 + n_img * pixels)
        throw ValidationError("idx file " + images_path + " is truncated");
    if (lab.size() != 8 + n_lab)
        throw ValidationError("idx file " + labels_path + " is truncated");

    Dataset out;
    out.reserve(n_img);
    for (std::uint64_t i = 0; i < n_img; ++i) {
        Example ex;
        ex.x.resize(pixels);
        const std::size_t base = 16 + i * pixels;
        for (std::uint64_t p = 0; p < pixels; ++p)
            ex.x[p] = static_cast<unsigned char>(img[base + p]) / 255.0;
        ex.y = static_cast<unsigned char>(lab[8 + i]);
        out.push_back(std::move(ex));
    }
    return out;
}

void save_idx(const std::string& images_path, const std::string& labels_path,
              const Dataset& data, int rows, int cols) {
    if (rows < 1 || cols < 1) throw ValidationError("save_idx: bad image shape");
    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
    std::ofstream img(images_path, std::ios::binary);
    std::ofstream lab(labels_path, std::ios::binary);
    if (!img) throw ValidationError("cannot write idx file " + images_path);
    if (!lab) throw ValidationError("cannot write idx file " + labels_path);

    write_be32(img, 0x00000803u);
    write_be32(img, static_cast<std::uint32_t>(data.size()));
    write_be32(img, static_cast<std::uint32_t>(rows));
    write_be32(img, static_cast<std::uint32_t>(cols));
    write_be32(lab, 0x00000801u);
    write_be32(lab, static_cast<std::uint32_t>(data.size()));

    for (const Example& ex : data) {
        if (ex.x.size() != pixels)
            throw ValidationError("save_idx: example has " + std::to_string(ex.x.size()) +
                                  " features, expected " + std::to_string(pixels));
        for (double v : ex.x) {
            const double scaled = v * 255.0;
            const long pixel = std::lround(scaled);
            if (pixel < 0 || pixel > 255 || std::abs(scaled - pixel) > 0.5)
                throw ValidationError("save_idx: feature value " + std::to_string(v) +
                                      " is not a 0..255 pixel over 255");
            img.put(static_cast<char>(static_cast<unsigned char>(pixel)));
        }
        const long label = std::lround(ex.y);
        if (label < 0 || label > 255 || ex.y != label)
            throw ValidationError("save_idx: label " + std::to_string(ex.y) +
                                  " does not fit in a byte");
        lab.put(static_cast<char>(static_cast<unsigned char>(label)));
    }
    if (!img || !lab) throw ValidationError("write failed for idx output");
}

Dataset synth_logistic(int n, int d, const ParamVector& true_params, std::uint64_t seed) {
    if (n < 1) throw ValidationError("synth_logistic: n must be >= 1");
    if (d < 1) throw ValidationError("synth_logistic: d must be >= 1");
    if (true_params.size() % (d + 1) != 0 || true_params.empty())
        throw ValidationError("synth_logistic: parameter length must be C*(d+1)");
    const int C = static_cast<int>(true_params.size()) / (d + 1);
    if (C < 2) throw ValidationError("synth_logistic: need at least two classes");

    ModelSpec spec;
    spec.kind = ModelKind::SoftmaxClassifier;
    spec.input_dim = d;
    spec.num_classes = C;

    auto rng = make_rng(seed);
    Dataset out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        Example ex;
        ex.x.resize(d);
        for (int j = 0; j < d; ++j) ex.x[j] = normal01(rng);
        const std::vector<double> probs = predict(spec, true_params, ex.x);
        const double u = uniform01(rng);
        double cum = 0.0;
        int label = C - 1;
        for (int c = 0; c < C; ++c) {
            cum += probs[c];
            if (u < cum) {
                label = c;
                break;
            }
        }
        ex.y = label;
        out.push_back(std::move(ex));
    }
    return out;
}

std::uint64_t hash_dataset(const Dataset& data) {
    Fnv1a64 h;
    h.u64(data.size());
    for (const Example& ex : data) {
        h.u64(ex.x.size());
        for (double v : ex.x) h.f64(v);
        h.f64(ex.y);
    }
    return h.digest();
}

} // namespace fedunlearn
