#include "fedunlearn/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "fedunlearn/errors.hpp"
#include "fedunlearn/rng.hpp"

namespace fedunlearn {

namespace {

void check_dims(const ModelSpec& spec, const ParamVector& params) {
    if (static_cast<int>(params.size()) != param_count(spec)) {
        throw ValidationError("parameter vector has length " + std::to_string(params.size()) +
                              ", model expects " + std::to_string(param_count(spec)));
    }
}

void check_input(const ModelSpec& spec, std::span<const double> x) {
    if (static_cast<int>(x.size()) != spec.input_dim) {
        throw ValidationError("feature vector has dimension " + std::to_string(x.size()) +
                              ", model expects " + std::to_string(spec.input_dim));
    }
}

// logits -> log-softmax in place, max-subtracted for stability.
void log_softmax(std::vector<double>& z) {
    double zmax = z[0];
    for (double v : z) zmax = std::max(zmax, v);
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    const double lse = zmax + std::log(sum);
    for (double& v : z) v -= lse;
}

std::vector<double> softmax_logits(const ModelSpec& spec, const ParamVector& params,
                                   std::span<const double> x) {
    const int in = spec.input_dim;
    const int C = spec.num_classes;
    std::vector<double> z(static_cast<std::size_t>(C));
    for (int c = 0; c < C; ++c) {
        double acc = params[static_cast<std::size_t>(C) * in + c]; // bias
        const double* w = params.data() + static_cast<std::size_t>(c) * in;
        for (int j = 0; j < in; ++j) acc += w[j] * x[static_cast<std::size_t>(j)];
        z[static_cast<std::size_t>(c)] = acc;
    }
    return z;
}

struct MlpForward {
    std::vector<double> h;      // tanh activations
    std::vector<double> logits; // pre-softmax
};

MlpForward mlp_forward(const ModelSpec& spec, const ParamVector& params, std::span<const double> x) {
    const int in = spec.input_dim;
    const int H = spec.hidden_dim;
    const int C = spec.num_classes;
    const std::size_t w1 = 0;
    const std::size_t b1 = static_cast<std::size_t>(H) * in;
    const std::size_t w2 = b1 + static_cast<std::size_t>(H);
    const std::size_t b2 = w2 + static_cast<std::size_t>(C) * H;

    MlpForward f;
    f.h.resize(static_cast<std::size_t>(H));
    for (int i = 0; i < H; ++i) {
        double acc = params[b1 + static_cast<std::size_t>(i)];
        const double* w = params.data() + w1 + static_cast<std::size_t>(i) * in;
        for (int j = 0; j < in; ++j) acc += w[j] * x[static_cast<std::size_t>(j)];
        f.h[static_cast<std::size_t>(i)] = std::tanh(acc);
    }
    f.logits.resize(static_cast<std::size_t>(C));
    for (int c = 0; c < C; ++c) {
        double acc = params[b2 + static_cast<std::size_t>(c)];
        const double* w = params.data() + w2 + static_cast<std::size_t>(c) * H;
        for (int i = 0; i < H; ++i) acc += w[i] * f.h[static_cast<std::size_t>(i)];
        f.logits[static_cast<std::size_t>(c)] = acc;
    }
    return f;
}

double linreg_output(const ModelSpec& spec, const ParamVector& params, std::span<const double> x) {
    const int in = spec.input_dim;
    double acc = params[static_cast<std::size_t>(in)]; // bias
    for (int j = 0; j < in; ++j) acc += params[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
    return acc;
}

// Data-only loss of a single example (no regularizer).
double sample_loss(const ModelSpec& spec, const ParamVector& params, const Example& ex) {
    switch (spec.kind) {
        case ModelKind::LinearRegression: {
            const double r = linreg_output(spec, params, ex.x) - ex.y;
            return 0.5 * r * r;
        }
        case ModelKind::SoftmaxClassifier: {
            std::vector<double> z = softmax_logits(spec, params, ex.x);
            log_softmax(z);
            return -z[static_cast<std::size_t>(class_label(ex, spec.num_classes))];
        }
        case ModelKind::Mlp1h: {
            MlpForward f = mlp_forward(spec, params, ex.x);
            log_softmax(f.logits);
            return -f.logits[static_cast<std::size_t>(class_label(ex, spec.num_classes))];
        }
    }
    throw ValidationError("unknown model kind");
}

} // namespace

const char* model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::LinearRegression: return "linear-regression";
        case ModelKind::SoftmaxClassifier: return "softmax-classifier";
        case ModelKind::Mlp1h: return "mlp-1h";
    }
    return "?";
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "linear-regression") return ModelKind::LinearRegression;
    if (name == "softmax-classifier") return ModelKind::SoftmaxClassifier;
    if (name == "mlp-1h") return ModelKind::Mlp1h;
    throw ValidationError("unknown model kind '" + name + "'");
}

void validate_spec(const ModelSpec& spec) {
    if (spec.lambda_reg < 0.0) throw ValidationError("lambda_reg must be >= 0");
    switch (spec.kind) {
        case ModelKind::LinearRegression:
            if (spec.input_dim < 0) throw ValidationError("input_dim must be >= 0");
            break;
        case ModelKind::SoftmaxClassifier:
            if (spec.input_dim < 1) throw ValidationError("input_dim must be >= 1");
            if (spec.num_classes < 2) throw ValidationError("num_classes must be >= 2");
            break;
        case ModelKind::Mlp1h:
            if (spec.input_dim < 1) throw ValidationError("input_dim must be >= 1");
            if (spec.num_classes < 2) throw ValidationError("num_classes must be >= 2");
            if (spec.hidden_dim < 1) throw ValidationError("hidden_dim must be >= 1");
            break;
    }
}

int param_count(const ModelSpec& spec) {
    switch (spec.kind) {
        case ModelKind::LinearRegression:
            return spec.input_dim + 1;
        case ModelKind::SoftmaxClassifier:
            return spec.num_classes * spec.input_dim + spec.num_classes;
        case ModelKind::Mlp1h:
            return spec.hidden_dim * spec.input_dim + spec.hidden_dim +
                   spec.num_classes * spec.hidden_dim + spec.num_classes;
    }
    throw ValidationError("unknown model kind");
}

int class_label(const Example& ex, int num_classes) {
    const double y = ex.y;
    if (!(y >= 0.0) || y != std::floor(y) || y >= static_cast<double>(num_classes)) {
        throw ValidationError("label " + std::to_string(y) + " is not a class index in [0, " +
                              std::to_string(num_classes) + ")");
    }
    return static_cast<int>(y);
}

double loss(const ModelSpec& spec, const ParamVector& params, std::span<const Example> batch) {
    check_dims(spec, params);
    if (batch.empty()) throw ValidationError("loss: batch must be nonempty");
    double sum = 0.0;
    for (const Example& ex : batch) {
        check_input(spec, ex.x);
        sum += sample_loss(spec, params, ex);
    }
    double reg = 0.0;
    for (double w : params) reg += w * w;
    return sum / static_cast<double>(batch.size()) + 0.5 * spec.lambda_reg * reg;
}

void per_sample_gradient(const ModelSpec& spec, const ParamVector& params, const Example& ex,
                         std::span<double> out) {
    check_input(spec, ex.x);
    const std::size_t d = params.size();
    if (out.size() != d) throw ValidationError("gradient output span has wrong length");

    switch (spec.kind) {
        case ModelKind::LinearRegression: {
            const int in = spec.input_dim;
            const double r = linreg_output(spec, params, ex.x) - ex.y;
            for (int j = 0; j < in; ++j) out[static_cast<std::size_t>(j)] = r * ex.x[static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(in)] = r;
            break;
        }
        case ModelKind::SoftmaxClassifier: {
            const int in = spec.input_dim;
            const int C = spec.num_classes;
            std::vector<double> z = softmax_logits(spec, params, ex.x);
            log_softmax(z);
            const int y = class_label(ex, C);
            for (int c = 0; c < C; ++c) {
                const double dz = std::exp(z[static_cast<std::size_t>(c)]) - (c == y ? 1.0 : 0.0);
                double* g = out.data() + static_cast<std::size_t>(c) * in;
                for (int j = 0; j < in; ++j) g[j] = dz * ex.x[static_cast<std::size_t>(j)];
                out[static_cast<std::size_t>(C) * in + c] = dz;
            }
            break;
        }
        case ModelKind::Mlp1h: {
            const int in = spec.input_dim;
            const int H = spec.hidden_dim;
            const int C = spec.num_classes;
            const std::size_t w1 = 0;
            const std::size_t b1 = static_cast<std::size_t>(H) * in;
            const std::size_t w2 = b1 + static_cast<std::size_t>(H);
            const std::size_t b2 = w2 + static_cast<std::size_t>(C) * H;

            MlpForward f = mlp_forward(spec, params, ex.x);
            std::vector<double> logp = f.logits;
            log_softmax(logp);
            const int y = class_label(ex, C);

            std::vector<double> dz(static_cast<std::size_t>(C));
            for (int c = 0; c < C; ++c)
                dz[static_cast<std::size_t>(c)] = std::exp(logp[static_cast<std::size_t>(c)]) - (c == y ? 1.0 : 0.0);

            for (int c = 0; c < C; ++c) {
                double* g = out.data() + w2 + static_cast<std::size_t>(c) * H;
                for (int i = 0; i < H; ++i) g[i] = dz[static_cast<std::size_t>(c)] * f.h[static_cast<std::size_t>(i)];
                out[b2 + static_cast<std::size_t>(c)] = dz[static_cast<std::size_t>(c)];
            }
            for (int i = 0; i < H; ++i) {
                double dh = 0.0;
                for (int c = 0; c < C; ++c)
                    dh += params[w2 + static_cast<std::size_t>(c) * H + static_cast<std::size_t>(i)] *
                          dz[static_cast<std::size_t>(c)];
                const double hi = f.h[static_cast<std::size_t>(i)];
                const double da = dh * (1.0 - hi * hi);
                double* g = out.data() + w1 + static_cast<std::size_t>(i) * in;
                for (int j = 0; j < in; ++j) g[j] = da * ex.x[static_cast<std::size_t>(j)];
                out[b1 + static_cast<std::size_t>(i)] = da;
            }
            break;
        }
    }

    if (spec.lambda_reg != 0.0) {
        for (std::size_t j = 0; j < d; ++j) out[j] += spec.lambda_reg * params[j];
    }
}

GradientBatch gradient(const ModelSpec& spec, const ParamVector& params,
                       std::span<const Example> batch) {
    check_dims(spec, params);
    if (batch.empty()) throw ValidationError("gradient: batch must be nonempty");
    const std::size_t d = params.size();

    GradientBatch out;
    out.per_sample.resize(batch.size());
    out.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        out.per_sample[i].resize(d);
        per_sample_gradient(spec, params, batch[i], out.per_sample[i]);
        for (std::size_t j = 0; j < d; ++j) out.mean[j] += out.per_sample[i][j];
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (std::size_t j = 0; j < d; ++j) out.mean[j] *= inv;
    return out;
}

std::vector<double> mean_gradient(const ModelSpec& spec, const ParamVector& params,
                                  std::span<const Example> batch) {
    check_dims(spec, params);
    if (batch.empty()) throw ValidationError("mean_gradient: batch must be nonempty");
    const std::size_t d = params.size();
    std::vector<double> sum(d, 0.0);
    std::vector<double> g(d);
    for (const Example& ex : batch) {
        per_sample_gradient(spec, params, ex, g);
        for (std::size_t j = 0; j < d; ++j) sum[j] += g[j];
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (std::size_t j = 0; j < d; ++j) sum[j] *= inv;
    return sum;
}

std::vector<double> predict(const ModelSpec& spec, const ParamVector& params,
                            std::span<const double> x) {
    check_dims(spec, params);
    check_input(spec, x);
    switch (spec.kind) {
        case ModelKind::LinearRegression:
            return {linreg_output(spec, params, x)};
        case ModelKind::SoftmaxClassifier: {
            std::vector<double> z = softmax_logits(spec, params, x);
            log_softmax(z);
            for (double& v : z) v = std::exp(v);
            return z;
        }
        case ModelKind::Mlp1h: {
            MlpForward f = mlp_forward(spec, params, x);
            log_softmax(f.logits);
            for (double& v : f.logits) v = std::exp(v);
            return f.logits;
        }
    }
    throw ValidationError("unknown model kind");
}

double accuracy(const ModelSpec& spec, const ParamVector& params, std::span<const Example> data) {
    if (!spec.is_classifier()) {
        throw ValidationError("accuracy is only defined for classifier models");
    }
    check_dims(spec, params);
    if (data.empty()) throw ValidationError("accuracy: dataset must be nonempty");

    std::size_t correct = 0;
    for (const Example& ex : data) {
        const std::vector<double> p = predict(spec, params, ex.x);
        int best = 0;
        for (int c = 1; c < static_cast<int>(p.size()); ++c) {
            if (p[static_cast<std::size_t>(c)] > p[static_cast<std::size_t>(best)]) best = c;
        }
        if (best == class_label(ex, spec.num_classes)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
    validate_spec(spec);
    ParamVector params(static_cast<std::size_t>(param_count(spec)), 0.0);
    std::mt19937_64 rng = make_rng(seed);

    const auto fill_layer = [&](std::size_t offset, int rows, int cols, int fan_in, int fan_out) {
        const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (std::size_t j = 0; j < static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); ++j)
            params[offset + j] = uniform_range(rng, -s, s);
    };

    switch (spec.kind) {
        case ModelKind::LinearRegression:
            fill_layer(0, 1, spec.input_dim, spec.input_dim, 1);
            break;
        case ModelKind::SoftmaxClassifier:
            fill_layer(0, spec.num_classes, spec.input_dim, spec.input_dim, spec.num_classes);
            break;
        case ModelKind::Mlp1h: {
            const std::size_t b1 = static_cast<std::size_t>(spec.hidden_dim) * spec.input_dim;
            const std::size_t w2 = b1 + static_cast<std::size_t>(spec.hidden_dim);
            fill_layer(0, spec.hidden_dim, spec.input_dim, spec.input_dim, spec.hidden_dim);
            fill_layer(w2, spec.num_classes, spec.hidden_dim, spec.hidden_dim, spec.num_classes);
            break;
        }
    }
    return params; // biases stay zero
}

} // namespace fedunlearn
