#include "dtaas/seq2seq.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <vector>

namespace dtaas::forecast {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using ConstMat = Eigen::Map<const MatrixXd>;
using ConstVec = Eigen::Map<const VectorXd>;
using Mat = Eigen::Map<MatrixXd>;
using Vec = Eigen::Map<VectorXd>;

struct Seq2SeqGru::CellView {
    ConstMat wx;
    ConstMat wh;
    ConstVec b;
};

struct Seq2SeqGru::StepCache {
    VectorXd x;
    VectorXd h_prev;
    VectorXd z;
    VectorXd r;
    VectorXd n;
    VectorXd h;
};

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

struct CellGrad {
    Mat wx;
    Mat wh;
    Vec b;
};

// Forward one GRU step.
template <typename View>
void cell_forward(const View& w, int hidden, const VectorXd& x, const VectorXd& h_prev, VectorXd& z,
                  VectorXd& r, VectorXd& n, VectorXd& h) {
    const Index H = hidden;
    VectorXd a = w.wx * x + w.b;
    a.head(2 * H).noalias() += w.wh.topRows(2 * H) * h_prev;
    z = a.head(H).unaryExpr(&sigmoid);
    r = a.segment(H, H).unaryExpr(&sigmoid);
    const VectorXd rh = r.cwiseProduct(h_prev);
    VectorXd an = a.tail(H);
    an.noalias() += w.wh.bottomRows(H) * rh;
    n = an.array().tanh().matrix();
    h = (1.0 - z.array()).matrix().cwiseProduct(n) + z.cwiseProduct(h_prev);
}

// Backward one GRU step; accumulates weight gradients, returns dh_prev and dx.
template <typename View>
void cell_backward(const View& w, CellGrad& g, int hidden, const VectorXd& x, const VectorXd& h_prev,
                   const VectorXd& z, const VectorXd& r, const VectorXd& n, const VectorXd& dh, VectorXd& dh_prev,
                   VectorXd& dx) {
    const Index H = hidden;
    const VectorXd dn = dh.cwiseProduct((1.0 - z.array()).matrix());
    const VectorXd dz = dh.cwiseProduct(h_prev - n);
    dh_prev = dh.cwiseProduct(z);

    const VectorXd da_n = dn.cwiseProduct((1.0 - n.array().square()).matrix());
    const VectorXd rh = r.cwiseProduct(h_prev);
    const VectorXd d_rh = w.wh.bottomRows(H).transpose() * da_n;
    const VectorXd dr = d_rh.cwiseProduct(h_prev);
    dh_prev += d_rh.cwiseProduct(r);

    const VectorXd da_z = dz.cwiseProduct(z.cwiseProduct((1.0 - z.array()).matrix()));
    const VectorXd da_r = dr.cwiseProduct(r.cwiseProduct((1.0 - r.array()).matrix()));

    VectorXd da(3 * H);
    da << da_z, da_r, da_n;

    g.wx.noalias() += da * x.transpose();
    g.b += da;
    g.wh.topRows(2 * H).noalias() += da.head(2 * H) * h_prev.transpose();
    g.wh.bottomRows(H).noalias() += da_n * rh.transpose();

    dh_prev.noalias() += w.wh.topRows(2 * H).transpose() * da.head(2 * H);
    dx = w.wx.transpose() * da;
}

constexpr std::array<char, 4> kMagic = {'D', 'T', 'S', 'Q'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw std::runtime_error("truncated model file");
    return v;
}

}  // namespace

Seq2SeqGru::Seq2SeqGru(int inputs, int hidden, int horizon, std::uint64_t seed)
    : inputs_(inputs), hidden_(hidden), horizon_(horizon) {
    if (inputs < 1 || hidden < 1 || horizon < 1) throw std::invalid_argument("Seq2SeqGru: sizes must be >= 1");
    const Index H = hidden, F = inputs;
    Index off = 0;
    enc_wx_ = off; off += 3 * H * F;
    enc_wh_ = off; off += 3 * H * H;
    enc_b_ = off; off += 3 * H;
    dec_wx_ = off; off += 3 * H;
    dec_wh_ = off; off += 3 * H * H;
    dec_b_ = off; off += 3 * H;
    out_w_ = off; off += H;
    out_b_ = off; off += 1;
    params_.resize(off);

    std::mt19937_64 rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(H));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Index i = 0; i < off; ++i) params_[i] = u(rng);
    params_[out_b_] = 0.0;
}

Seq2SeqGru::CellView Seq2SeqGru::encoder_view(const VectorXd& p) const {
    const Index H = hidden_;
    return {ConstMat(p.data() + enc_wx_, 3 * H, inputs_), ConstMat(p.data() + enc_wh_, 3 * H, H),
            ConstVec(p.data() + enc_b_, 3 * H)};
}

Seq2SeqGru::CellView Seq2SeqGru::decoder_view(const VectorXd& p) const {
    const Index H = hidden_;
    return {ConstMat(p.data() + dec_wx_, 3 * H, 1), ConstMat(p.data() + dec_wh_, 3 * H, H),
            ConstVec(p.data() + dec_b_, 3 * H)};
}

double Seq2SeqGru::run(const SequenceSample* sample, const MatrixXd& inputs, double decoder_seed,
                       VectorXd* outputs, VectorXd* grad, double scale) const {
    if (inputs.cols() != inputs_) throw std::invalid_argument("Seq2SeqGru: feature count mismatch");
    const Index H = hidden_;
    const Index L = inputs.rows();
    const auto enc = encoder_view(params_);
    const auto dec = decoder_view(params_);
    const ConstVec out_w(params_.data() + out_w_, H);
    const double out_b = params_[out_b_];

    std::vector<StepCache> enc_cache(static_cast<std::size_t>(L));
    VectorXd h = VectorXd::Zero(H);
    for (Index t = 0; t < L; ++t) {
        auto& c = enc_cache[static_cast<std::size_t>(t)];
        c.x = inputs.row(t).transpose();
        c.h_prev = h;
        cell_forward(enc, hidden_, c.x, c.h_prev, c.z, c.r, c.n, c.h);
        h = c.h;
    }

    std::vector<StepCache> dec_cache(static_cast<std::size_t>(horizon_));
    VectorXd y(horizon_);
    double feed = decoder_seed;
    for (Index j = 0; j < horizon_; ++j) {
        auto& c = dec_cache[static_cast<std::size_t>(j)];
        c.x = VectorXd::Constant(1, feed);
        c.h_prev = h;
        cell_forward(dec, hidden_, c.x, c.h_prev, c.z, c.r, c.n, c.h);
        h = c.h;
        y[j] = out_w.dot(h) + out_b;
        feed = y[j];
    }
    if (outputs) *outputs = y;
    if (!sample) return 0.0;

    const VectorXd err = y - sample->targets;
    const double loss = scale * 0.5 * err.squaredNorm();
    if (!grad) return loss;

    grad->setZero(params_.size());
    CellGrad g_enc{Mat(grad->data() + enc_wx_, 3 * H, inputs_), Mat(grad->data() + enc_wh_, 3 * H, H),
                   Vec(grad->data() + enc_b_, 3 * H)};
    CellGrad g_dec{Mat(grad->data() + dec_wx_, 3 * H, 1), Mat(grad->data() + dec_wh_, 3 * H, H),
                   Vec(grad->data() + dec_b_, 3 * H)};
    Vec g_out_w(grad->data() + out_w_, H);
    double& g_out_b = (*grad)[out_b_];

    VectorXd dh_next = VectorXd::Zero(H);
    double dy_from_next = 0.0;  // through the feedback of y_j into step j+1
    VectorXd dh_prev, dx;
    for (Index j = horizon_ - 1; j >= 0; --j) {
        const auto& c = dec_cache[static_cast<std::size_t>(j)];
        const double dy = scale * err[j] + dy_from_next;
        g_out_w += dy * c.h;
        g_out_b += dy;
        const VectorXd dh = out_w * dy + dh_next;
        cell_backward(dec, g_dec, hidden_, c.x, c.h_prev, c.z, c.r, c.n, dh, dh_prev, dx);
        dh_next = dh_prev;
        dy_from_next = dx[0];
    }
    for (Index t = L - 1; t >= 0; --t) {
        const auto& c = enc_cache[static_cast<std::size_t>(t)];
        cell_backward(enc, g_enc, hidden_, c.x, c.h_prev, c.z, c.r, c.n, dh_next, dh_prev, dx);
        dh_next = dh_prev;
    }
    return loss;
}

VectorXd Seq2SeqGru::predict(const MatrixXd& inputs, double decoder_seed) const {
    VectorXd y;
    run(nullptr, inputs, decoder_seed, &y, nullptr, 1.0);
    return y;
}

double Seq2SeqGru::loss(const SequenceSample& sample, double scale) const {
    return run(&sample, sample.inputs, sample.decoder_seed, nullptr, nullptr, scale);
}

double Seq2SeqGru::loss_and_gradient(const SequenceSample& sample, VectorXd& grad, double scale) const {
    return run(&sample, sample.inputs, sample.decoder_seed, nullptr, &grad, scale);
}

void Seq2SeqGru::zero_output_layer() {
    params_.segment(out_w_, hidden_).setZero();
    params_[out_b_] = 0.0;
}

// Layout: magic "DTSQ", u32 version, u32 inputs, u32 hidden, u32 horizon,
// u64 parameter count, then the parameters as native-endian f64.
void Seq2SeqGru::save(std::ostream& out) const {
    out.write(kMagic.data(), kMagic.size());
    write_pod(out, kFormatVersion);
    write_pod(out, static_cast<std::uint32_t>(inputs_));
    write_pod(out, static_cast<std::uint32_t>(hidden_));
    write_pod(out, static_cast<std::uint32_t>(horizon_));
    write_pod(out, static_cast<std::uint64_t>(params_.size()));
    out.write(reinterpret_cast<const char*>(params_.data()),
              static_cast<std::streamsize>(params_.size() * sizeof(double)));
}

Seq2SeqGru Seq2SeqGru::load(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw std::runtime_error("not a model file");
    if (read_pod<std::uint32_t>(in) != kFormatVersion) throw std::runtime_error("unsupported model version");
    const auto inputs = read_pod<std::uint32_t>(in);
    const auto hidden = read_pod<std::uint32_t>(in);
    const auto horizon = read_pod<std::uint32_t>(in);
    const auto count = read_pod<std::uint64_t>(in);
    Seq2SeqGru model(static_cast<int>(inputs), static_cast<int>(hidden), static_cast<int>(horizon), 0);
    if (count != static_cast<std::uint64_t>(model.params_.size())) throw std::runtime_error("parameter count mismatch");
    in.read(reinterpret_cast<char*>(model.params_.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw std::runtime_error("truncated model file");
    return model;
}

AdamOptimizer::AdamOptimizer(Index size, double learning_rate, double clip_norm)
    : lr_(learning_rate), clip_(clip_norm), m_(VectorXd::Zero(size)), v_(VectorXd::Zero(size)) {}

void AdamOptimizer::step(VectorXd& params, const VectorXd& grad) {
    ++t_;
    const double norm = grad.norm();
    const double k = (clip_ > 0.0 && norm > clip_) ? clip_ / norm : 1.0;
    m_ = beta1_ * m_ + (1.0 - beta1_) * k * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * (k * grad).cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

GradientCheckResult gradient_check(const Seq2SeqGru& model, const SequenceSample& sample, int count,
                                   std::uint64_t seed, double step, double floor) {
    VectorXd grad;
    model.loss_and_gradient(sample, grad);
    Seq2SeqGru probe = model;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Index> pick(0, model.parameter_count() - 1);
    GradientCheckResult result;
    for (int i = 0; i < count; ++i) {
        const Index idx = pick(rng);
        const double saved = probe.parameters()[idx];
        probe.parameters()[idx] = saved + step;
        const double plus = probe.loss(sample);
        probe.parameters()[idx] = saved - step;
        const double minus = probe.loss(sample);
        probe.parameters()[idx] = saved;
        const double numeric = (plus - minus) / (2.0 * step);
        const double analytic = grad[idx];
        const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
        result.max_relative_error = std::max(result.max_relative_error, std::abs(analytic - numeric) / denom);
        ++result.parameters_checked;
    }
    return result;
}

}  // namespace dtaas::forecast
