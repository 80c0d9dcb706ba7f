#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>

namespace dtaas::forecast {

/// One training example: `inputs` holds one normalized feature row per encoder
/// step, `decoder_seed` is the last observed normalized rate, `targets` the next
/// `horizon` normalized rates.
struct SequenceSample {
    Eigen::MatrixXd inputs;
    double decoder_seed = 0.0;
    Eigen::VectorXd targets;
};

/// Encoder-decoder GRU regressor.
///
/// The encoder consumes the feature rows; its final state seeds a decoder cell
/// that runs `horizon` steps, each fed the previous step's scalar output (the
/// first step is fed `decoder_seed`). A linear read-out maps each decoder state
/// to one predicted value.
///
/// Cell update (gates stacked z, r, n in the weight rows):
///   z = sigm(Wx_z x + Wh_z h + b_z)
///   r = sigm(Wx_r x + Wh_r h + b_r)
///   n = tanh(Wx_n x + Wh_n (r * h) + b_n)
///   h' = (1 - z) * n + z * h
///
/// All parameters live in one flat vector so optimizers, finite-difference
/// checks and the binary dump can treat them uniformly.
class Seq2SeqGru {
  public:
    Seq2SeqGru(int inputs, int hidden, int horizon, std::uint64_t seed);

    int inputs() const { return inputs_; }
    int hidden() const { return hidden_; }
    int horizon() const { return horizon_; }

    Eigen::VectorXd& parameters() { return params_; }
    const Eigen::VectorXd& parameters() const { return params_; }
    Eigen::Index parameter_count() const { return params_.size(); }

    Eigen::VectorXd predict(const Eigen::MatrixXd& inputs, double decoder_seed) const;

    /// scale * 0.5 * sum_j (y_j - target_j)^2
    double loss(const SequenceSample& sample, double scale = 1.0) const;

    /// Loss as above; `grad` is resized and overwritten with dLoss/dparams.
    double loss_and_gradient(const SequenceSample& sample, Eigen::VectorXd& grad, double scale = 1.0) const;

    /// Zeroes the read-out weights and bias.
    void zero_output_layer();

    // Offsets of the read-out bias within the flat vector, for tests.
    Eigen::Index output_bias_index() const { return out_b_; }

    void save(std::ostream& out) const;
    static Seq2SeqGru load(std::istream& in);

  private:
    struct CellView;
    struct StepCache;

    CellView encoder_view(const Eigen::VectorXd& p) const;
    CellView decoder_view(const Eigen::VectorXd& p) const;
    double run(const SequenceSample* sample, const Eigen::MatrixXd& inputs, double decoder_seed,
               Eigen::VectorXd* outputs, Eigen::VectorXd* grad, double scale) const;

    int inputs_;
    int hidden_;
    int horizon_;
    Eigen::Index enc_wx_, enc_wh_, enc_b_, dec_wx_, dec_wh_, dec_b_, out_w_, out_b_;
    Eigen::VectorXd params_;
};

/// Adam with global-norm gradient clipping.
class AdamOptimizer {
  public:
    AdamOptimizer(Eigen::Index size, double learning_rate, double clip_norm = 5.0);
    void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
    double learning_rate() const { return lr_; }

  private:
    double lr_;
    double clip_;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    long long t_ = 0;
    Eigen::VectorXd m_;
    Eigen::VectorXd v_;
};

struct GradientCheckResult {
    double max_relative_error = 0.0;
    int parameters_checked = 0;
};

/// Compares analytic gradients with central differences on `count` randomly
/// chosen parameters. Relative error is |a - n| / max(|a|, |n|, floor).
GradientCheckResult gradient_check(const Seq2SeqGru& model, const SequenceSample& sample, int count,
                                   std::uint64_t seed, double step = 1e-5, double floor = 1e-6);

}  // namespace dtaas::forecast
