#include <doctest.h>

#include <random>
#include <sstream>

#include "dtaas/seq2seq.hpp"

using namespace dtaas::forecast;

namespace {

SequenceSample random_sample(int inputs, int steps, int horizon, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    SequenceSample s;
    s.inputs = Eigen::MatrixXd(steps, inputs);
    for (int i = 0; i < steps; ++i)
        for (int j = 0; j < inputs; ++j) s.inputs(i, j) = n(rng);
    s.decoder_seed = n(rng);
    s.targets = Eigen::VectorXd(horizon);
    for (int j = 0; j < horizon; ++j) s.targets[j] = n(rng);
    return s;
}

}  // namespace

TEST_CASE("analytic gradient matches central differences") {
    Seq2SeqGru model(4, 64, 5, 123);
    const auto sample = random_sample(4, 8, 5, 9);
    const auto r = gradient_check(model, sample, 150, 77);
    CHECK(r.parameters_checked >= 100);
    CHECK(r.max_relative_error < 1e-4);

    Seq2SeqGru tiny(1, 3, 2, 5);
    const auto r2 = gradient_check(tiny, random_sample(1, 4, 2, 10), 100, 1);
    CHECK(r2.max_relative_error < 1e-4);
}

TEST_CASE("output bias gradient vanishes at a stationary point") {
    Seq2SeqGru model(4, 16, 5, 3);
    model.zero_output_layer();
    SequenceSample s;
    s.inputs = Eigen::MatrixXd::Zero(6, 4);
    s.decoder_seed = 0.0;
    s.targets = Eigen::VectorXd::Zero(5);
    Eigen::VectorXd grad;
    model.loss_and_gradient(s, grad);
    CHECK(grad[model.output_bias_index()] == 0.0);
}

TEST_CASE("loss scaling scales every gradient exactly") {
    Seq2SeqGru model(4, 16, 5, 3);
    const auto s = random_sample(4, 6, 5, 4);
    Eigen::VectorXd g1, g2;
    const double l1 = model.loss_and_gradient(s, g1, 1.0);
    const double l2 = model.loss_and_gradient(s, g2, 2.0);
    CHECK(l2 == 2.0 * l1);
    CHECK((g2 - 2.0 * g1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(model.loss(s) == l1);
}

TEST_CASE("prediction matches the loss") {
    Seq2SeqGru model(2, 8, 3, 11);
    const auto s = random_sample(2, 5, 3, 12);
    const Eigen::VectorXd y = model.predict(s.inputs, s.decoder_seed);
    CHECK(y.size() == 3);
    CHECK(model.loss(s) == doctest::Approx(0.5 * (y - s.targets).squaredNorm()));
}

TEST_CASE("Adam reduces the loss on a fixed sample") {
    Seq2SeqGru model(4, 16, 5, 2);
    const auto s = random_sample(4, 8, 5, 3);
    AdamOptimizer opt(model.parameter_count(), 0.01);
    const double before = model.loss(s);
    Eigen::VectorXd grad;
    for (int i = 0; i < 200; ++i) {
        model.loss_and_gradient(s, grad);
        opt.step(model.parameters(), grad);
    }
    CHECK(model.loss(s) < 0.1 * before);
    CHECK(model.parameters().allFinite());
}

TEST_CASE("binary dump round-trips") {
    Seq2SeqGru model(4, 8, 5, 6);
    std::stringstream buf;
    model.save(buf);
    const auto back = Seq2SeqGru::load(buf);
    CHECK(back.inputs() == 4);
    CHECK(back.hidden() == 8);
    CHECK(back.horizon() == 5);
    CHECK(back.parameters() == model.parameters());

    std::stringstream bad("not a model");
    CHECK_THROWS(Seq2SeqGru::load(bad));
}

TEST_CASE("initialization is seeded") {
    CHECK(Seq2SeqGru(4, 8, 5, 1).parameters() == Seq2SeqGru(4, 8, 5, 1).parameters());
    CHECK(Seq2SeqGru(4, 8, 5, 1).parameters() != Seq2SeqGru(4, 8, 5, 2).parameters());
}
