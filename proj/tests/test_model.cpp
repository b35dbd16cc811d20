#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <vector>

#include "fedunlearn/errors.hpp"
#include "fedunlearn/model.hpp"
#include "oracles.hpp"

using namespace fedunlearn;

namespace {

ModelSpec linreg(int in, double lambda = 0.0) {
    ModelSpec s;
    s.kind = ModelKind::LinearRegression;
    s.input_dim = in;
    s.lambda_reg = lambda;
    return s;
}

ModelSpec softmax(int in, int classes, double lambda = 0.0) {
    ModelSpec s;
    s.kind = ModelKind::SoftmaxClassifier;
    s.input_dim = in;
    s.num_classes = classes;
    s.lambda_reg = lambda;
    return s;
}

ModelSpec mlp(int in, int hidden, int classes, double lambda = 0.0) {
    ModelSpec s;
    s.kind = ModelKind::Mlp1h;
    s.input_dim = in;
    s.num_classes = classes;
    s.hidden_dim = hidden;
    s.lambda_reg = lambda;
    return s;
}

std::vector<Example> random_batch(const ModelSpec& spec, int n, oracle::Rand& rnd) {
    std::vector<Example> batch(static_cast<std::size_t>(n));
    for (Example& ex : batch) {
        ex.x = rnd.vec(static_cast<std::size_t>(spec.input_dim), -2.0, 2.0);
        ex.y = spec.is_classifier() ? static_cast<double>(rnd.below(spec.num_classes))
                                    : rnd.uniform(-3.0, 3.0);
    }
    return batch;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

} // namespace

TEST_CASE("param_count per model kind") {
    CHECK(param_count(linreg(3)) == 4);
    CHECK(param_count(softmax(2, 3)) == 9);
    CHECK(param_count(mlp(4, 5, 3)) == 43); // 4*5 + 5 + 5*3 + 3
}

TEST_CASE("loss closed-form anchors") {
    // Zero params, zero target: prediction 0 on x=[1], squared loss 0.
    CHECK(loss(linreg(1), {0.0, 0.0}, std::vector<Example>{{{1.0}, 0.0}}) == 0.0);

    // Uniform softmax gives -log(1/2) whatever the example is.
    const double l = loss(softmax(2, 2), std::vector<double>(6, 0.0),
                          std::vector<Example>{{{0.3, -1.2}, 1.0}});
    CHECK(l == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("mlp loss and prediction match the reference forward pass") {
    const ModelSpec spec = mlp(4, 6, 3);
    oracle::Rand rnd(101);
    const ParamVector params = init_params(spec, 17);
    const std::vector<Example> batch = random_batch(spec, 10, rnd);

    double ref_loss = 0.0;
    for (const Example& ex : batch) {
        const std::vector<double> p = oracle::ref_mlp_forward(params, ex.x, 4, 6, 3);
        ref_loss += -std::log(p[static_cast<std::size_t>(ex.y)]);

        const std::vector<double> got = predict(spec, params, ex.x);
        REQUIRE(got.size() == 3);
        for (int c = 0; c < 3; ++c)
            CHECK(got[static_cast<std::size_t>(c)] ==
                  doctest::Approx(p[static_cast<std::size_t>(c)]).epsilon(1e-12));
    }
    ref_loss /= 10.0;
    CHECK(loss(spec, params, batch) == doctest::Approx(ref_loss).epsilon(1e-12));
}

TEST_CASE("hand-computed linear regression gradient") {
    // l = (x.w - y)^2 / 2 at w=b=0, x=[1], y=1: residual -1, gradient [-1, -1].
    const GradientBatch g = gradient(linreg(1), {0.0, 0.0}, std::vector<Example>{{{1.0}, 1.0}});
    REQUIRE(g.per_sample.size() == 1);
    CHECK(g.per_sample[0] == std::vector<double>{-1.0, -1.0});
    CHECK(g.mean == std::vector<double>{-1.0, -1.0});
}

TEST_CASE("gradient at a perfect fit is the regularizer term") {
    // x=[2], y = 3*2 + 1 = 7 fits params [3, 1] exactly, so only lambda*w is left.
    const double lambda = 0.25;
    const GradientBatch g =
        gradient(linreg(1, lambda), {3.0, 1.0}, std::vector<Example>{{{2.0}, 7.0}});
    CHECK(g.mean[0] == doctest::Approx(lambda * 3.0).epsilon(1e-12));
    CHECK(g.mean[1] == doctest::Approx(lambda * 1.0).epsilon(1e-12));
}

TEST_CASE("analytic mean gradient vs central differences, 100+ random cases") {
    int cases = 0;
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        oracle::Rand rnd(seed * 77 + 5);
        const std::vector<ModelSpec> specs = {
            linreg(3, seed % 3 == 0 ? 0.1 : 0.0),
            softmax(4, 3, seed % 2 == 0 ? 0.05 : 0.0),
            mlp(3, 4, 3, seed % 4 == 0 ? 0.02 : 0.0),
        };
        for (const ModelSpec& spec : specs) {
            const int d = param_count(spec);
            ParamVector params(static_cast<std::size_t>(d));
            for (double& p : params) p = rnd.uniform(-1.0, 1.0);
            const std::vector<Example> batch = random_batch(spec, 1 + rnd.below(6), rnd);

            for (int rep = 0; rep < 3; ++rep) {
                const std::vector<double> analytic = mean_gradient(spec, params, batch);
                const std::vector<double> fd = oracle::fd_gradient(
                    [&](const std::vector<double>& p) { return loss(spec, p, batch); }, params,
                    1e-6);
                CHECK(oracle::rel_l2_error(analytic, fd) < 1e-5);
                ++cases;
                for (double& p : params) p = rnd.uniform(-1.0, 1.0);
            }
        }
    }
    CHECK(cases >= 100);
}

TEST_CASE("per-sample gradients average to the mean bit for bit") {
    const ModelSpec spec = softmax(5, 4, 0.01);
    oracle::Rand rnd(42);
    ParamVector params(static_cast<std::size_t>(param_count(spec)));
    for (double& p : params) p = rnd.uniform(-1.0, 1.0);
    const std::vector<Example> batch = random_batch(spec, 7, rnd);

    const GradientBatch g = gradient(spec, params, batch);
    std::vector<double> avg(g.mean.size(), 0.0);
    for (const auto& gs : g.per_sample)
        for (std::size_t j = 0; j < avg.size(); ++j) avg[j] += gs[j];
    for (double& v : avg) v /= static_cast<double>(batch.size());
    CHECK(bitwise_equal(avg, g.mean));
    CHECK(bitwise_equal(g.mean, mean_gradient(spec, params, batch)));
}

TEST_CASE("batch loss equals the mean of singleton losses at lambda=0") {
    const ModelSpec spec = mlp(3, 4, 2);
    oracle::Rand rnd(9);
    const ParamVector params = init_params(spec, 3);
    const std::vector<Example> batch = random_batch(spec, 6, rnd);

    double sum = 0.0;
    for (const Example& ex : batch) sum += loss(spec, params, std::vector<Example>{ex});
    const double avg = sum / static_cast<double>(batch.size());
    CHECK(avg == loss(spec, params, batch));
}

TEST_CASE("softmax probabilities are a distribution, cross-entropy nonnegative") {
    const ModelSpec spec = softmax(3, 5);
    oracle::Rand rnd(77);
    for (int trial = 0; trial < 50; ++trial) {
        ParamVector params(static_cast<std::size_t>(param_count(spec)));
        for (double& p : params) p = rnd.uniform(-4.0, 4.0);
        const std::vector<double> x = rnd.vec(3, -3.0, 3.0);
        const std::vector<double> p = predict(spec, params, x);
        double s = 0.0;
        for (double v : p) {
            CHECK(v > 0.0);
            CHECK(v < 1.0);
            s += v;
        }
        CHECK(std::abs(s - 1.0) < 1e-12);
        const std::vector<Example> batch = random_batch(spec, 3, rnd);
        CHECK(loss(spec, params, batch) >= 0.0);
    }
}

TEST_CASE("predict anchors") {
    CHECK(predict(softmax(2, 3), std::vector<double>(9, 0.0), std::vector<double>{1.0, -1.0}) ==
          std::vector<double>{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    CHECK(predict(linreg(1), {2.0, 1.0}, std::vector<double>{3.0}) == std::vector<double>{7.0});
}

TEST_CASE("accuracy on a separable four-point set") {
    // One feature, two classes; big positive weight on class 1 separates x>0.
    const ModelSpec spec = softmax(1, 2);
    const ParamVector params = {-5.0, 5.0, 0.0, 0.0}; // W rows [-5], [5]; zero biases
    const std::vector<Example> data = {{{-2.0}, 0.0}, {{-1.0}, 0.0}, {{1.0}, 1.0}, {{2.0}, 1.0}};
    CHECK(accuracy(spec, params, data) == 1.0);
}

TEST_CASE("zero params put every argmax on class 0") {
    const ModelSpec spec = softmax(2, 2);
    const ParamVector zero(6, 0.0);
    // Three of five labels are class 0, so the tie-break rule scores 3/5.
    const std::vector<Example> data = {
        {{1.0, 0.0}, 0.0}, {{0.0, 1.0}, 1.0}, {{1.0, 1.0}, 0.0},
        {{-1.0, 0.5}, 1.0}, {{0.5, -1.0}, 0.0},
    };
    CHECK(accuracy(spec, zero, data) == doctest::Approx(0.6));
}

TEST_CASE("accuracy agrees with a direct counting loop") {
    const ModelSpec spec = softmax(4, 3);
    oracle::Rand rnd(500);
    ParamVector params(static_cast<std::size_t>(param_count(spec)));
    for (double& p : params) p = rnd.uniform(-2.0, 2.0);
    const std::vector<Example> data = random_batch(spec, 200, rnd);

    int hits = 0;
    for (const Example& ex : data) {
        const std::vector<double> p = predict(spec, params, ex.x);
        int best = 0;
        for (int c = 1; c < 3; ++c)
            if (p[static_cast<std::size_t>(c)] > p[static_cast<std::size_t>(best)]) best = c;
        if (best == static_cast<int>(ex.y)) ++hits;
    }
    CHECK(accuracy(spec, params, data) == doctest::Approx(hits / 200.0));
}

TEST_CASE("accuracy rejects regression specs") {
    CHECK_THROWS_AS(accuracy(linreg(1), {0.0, 0.0}, std::vector<Example>{{{1.0}, 0.0}}),
                    ValidationError);
}

TEST_CASE("init_params determinism and bias zeroing") {
    const ModelSpec spec = mlp(4, 5, 3);
    const ParamVector a = init_params(spec, 99);
    const ParamVector b = init_params(spec, 99);
    const ParamVector c = init_params(spec, 100);
    CHECK(bitwise_equal(a, b));
    CHECK(a != c);

    // Layout [W1 20][b1 5][W2 15][b2 3]: both bias runs must be exactly zero.
    for (int i = 20; i < 25; ++i) CHECK(a[static_cast<std::size_t>(i)] == 0.0);
    for (int i = 40; i < 43; ++i) CHECK(a[static_cast<std::size_t>(i)] == 0.0);

    // Glorot bound for W1: sqrt(6/(4+5)).
    const double bound1 = std::sqrt(6.0 / 9.0);
    for (int i = 0; i < 20; ++i) CHECK(std::abs(a[static_cast<std::size_t>(i)]) <= bound1);
}

TEST_CASE("dimension mismatches are rejected") {
    CHECK_THROWS_AS(loss(linreg(2), {0.0, 0.0}, std::vector<Example>{{{1.0, 2.0}, 0.0}}),
                    ValidationError); // params too short for input_dim=2
    CHECK_THROWS_AS(predict(softmax(2, 2), std::vector<double>(6, 0.0), std::vector<double>{1.0}),
                    ValidationError);
    CHECK_THROWS_AS(loss(softmax(2, 2), std::vector<double>(6, 0.0), std::vector<Example>{}),
                    ValidationError);
}
