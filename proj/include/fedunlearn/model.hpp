#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedunlearn/types.hpp"

namespace fedunlearn {

enum class ModelKind { LinearRegression, SoftmaxClassifier, Mlp1h };

const char* model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

// Parameter layout (row-major per layer, weights before biases):
//   linear-regression : [w_0 .. w_{in-1}, b]
//   softmax-classifier: [W (C rows x in cols), b (C)]
//   mlp-1h            : [W1 (hidden x in), b1 (hidden), W2 (C x hidden), b2 (C)]
// The hidden layer of mlp-1h uses tanh. All losses are means over the batch
// plus an L2 term (lambda/2)*||w||^2 added once; per-sample gradients carry
// the lambda*w term so their average is the gradient of the batch loss.
struct ModelSpec {
    ModelKind kind = ModelKind::SoftmaxClassifier;
    int input_dim = 0;    // >= 0 for linear-regression (0 = bias-only), >= 1 otherwise
    int num_classes = 0;  // classifiers only
    int hidden_dim = 0;   // mlp-1h only
    double lambda_reg = 0.0;

    bool is_classifier() const { return kind != ModelKind::LinearRegression; }
};

// Throws ValidationError if the spec is internally inconsistent.
void validate_spec(const ModelSpec& spec);

int param_count(const ModelSpec& spec);

struct GradientBatch {
    std::vector<std::vector<double>> per_sample;
    std::vector<double> mean;
};

double loss(const ModelSpec& spec, const ParamVector& params, std::span<const Example> batch);

// Per-sample analytic gradient of loss_i + (lambda/2)||w||^2, written to `out`
// (length param_count). Layout matches ParamVector.
void per_sample_gradient(const ModelSpec& spec, const ParamVector& params, const Example& ex,
                         std::span<double> out);

// Per-sample gradients plus their mean (summed in index order, divided once).
GradientBatch gradient(const ModelSpec& spec, const ParamVector& params,
                       std::span<const Example> batch);

// Mean gradient only, accumulated in the same index order as gradient(), so
// the result is bitwise identical to gradient().mean.
std::vector<double> mean_gradient(const ModelSpec& spec, const ParamVector& params,
                                  std::span<const Example> batch);

// Class probabilities for classifiers (length C, sums to 1), or a length-1
// vector holding the regression output.
std::vector<double> predict(const ModelSpec& spec, const ParamVector& params,
                            std::span<const double> x);

// Fraction of examples whose argmax class equals the label; ties break to the
// lowest class index. Classifiers only.
double accuracy(const ModelSpec& spec, const ParamVector& params, std::span<const Example> data);

// Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out)) per layer), zero
// biases. Deterministic in (spec, seed).
ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);

// Class index of an example, validated against [0, C).
int class_label(const Example& ex, int num_classes);

} // namespace fedunlearn
