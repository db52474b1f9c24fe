#include "draformer/gradient_suite.hpp"

#include "draformer/gradcheck.hpp"
#include "draformer/model.hpp"

#include <random>

namespace draformer {

namespace {

constexpr double kStep = 1e-6;

Matrix gaussian(std::mt19937_64& rng, Index rows, Index cols, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

GradCheckResult check(const std::string& name, double tol, const ParamLossFn& f, const ParamStore& store,
                      const std::vector<std::string>& only = {}) {
  const ParamGradReport r = grad_check_params(f, store, kStep, only);
  return GradCheckResult{name, r.max_rel_error, tol, r.worst_param};
}

}  // namespace

std::vector<GradCheckResult> run_gradient_suite(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GradCheckResult> out;
  const Index L = 6, N = 3, d = 8;

  const WindowFeatures feats = prepare_features(gaussian(rng, L, N), 0.01);
  // A fixed random projection keeps the losses sensitive to every entry.
  const Matrix probe = gaussian(rng, L, d);
  const auto project = [&probe](Tape& t, Var v) {
    return sum(mul(v, t.constant(probe.topLeftCorner(v.rows(), v.cols()))));
  };

  {
    ParamStore s;
    s.add("w_sigma", gaussian(rng, N, 1, 0.5));
    s.add("w_v", gaussian(rng, d, d, 0.5));
    s.add("x", gaussian(rng, L, d));
    out.push_back(check("ida_forward", 1e-4, [&](Tape& t, const ParamStore& p) {
      IdaParams ip{t.param(p, "w_sigma"), t.param(p, "w_v")};
      return sum(ida_forward(t, t.param(p, "x"), feats.triple.raw, feats.md2, ip).output);
    }, s));
  }
  {
    ParamStore s;
    s.add("w_mu", gaussian(rng, N, 1));
    s.add("w_s", gaussian(rng, N, 1));
    s.add("w_vf", gaussian(rng, N, d, 0.5));
    s.add("w_vb", gaussian(rng, N, d, 0.5));
    out.push_back(check("jsa_forward", 1e-4, [&](Tape& t, const ParamStore& p) {
      JsaParams jp{t.param(p, "w_mu"), t.param(p, "w_s"), t.param(p, "w_vf"), t.param(p, "w_vb")};
      return sum(jsa_forward(t, feats.triple, feats.cov, jp, 1e-3).output);
    }, s));
  }
  {
    ParamStore s;
    ParamInit init(seed + 1);
    EncoderLayerParams::declare(s, "enc.", N, d, 2 * d, true, init);
    s.add("x", gaussian(rng, L, d));
    EncoderOptions opts;
    opts.n_heads = 2;
    out.push_back(check("encoder_layer", 1e-3, [&](Tape& t, const ParamStore& p) {
      const EncoderLayerParams lp = EncoderLayerParams::bind(t, p, "enc.", true);
      return project(t, encoder_layer(t, t.param(p, "x"), feats, lp, opts));
    }, s));
  }
  {
    ParamStore s;
    s.add("g", gaussian(rng, 3 * L, d));
    s.add("conv_w", gaussian(rng, 3 * d, d, 0.3));
    s.add("conv_b", gaussian(rng, 1, d, 0.1));
    s.add("w_g", gaussian(rng, 3, 1));
    out.push_back(check("time_distill", 1e-3, [&](Tape& t, const ParamStore& p) {
      return project(t, time_distill(t.param(p, "g"), t.param(p, "conv_w"), t.param(p, "conv_b"), 4));
    }, s, {"g", "conv_w", "conv_b"}));
    out.push_back(check("dimension_converge", 1e-3, [&](Tape& t, const ParamStore& p) {
      return project(t, dimension_converge(t.param(p, "g"), t.param(p, "w_g")));
    }, s, {"g", "w_g"}));
  }
  {
    const Index pred = 2;
    ParamStore s;
    ParamInit init(seed + 2);
    DecoderParams::declare(s, L + pred, d, 2 * d, 1, N, init);
    s.add("x_rec", gaussian(rng, L + pred, d));
    s.add("enc", gaussian(rng, L, d));
    const Matrix target = gaussian(rng, pred, N);
    out.push_back(check("decode", 1e-3, [&](Tape& t, const ParamStore& p) {
      return mse_loss(decode(t.param(p, "x_rec"), t.param(p, "enc"), DecoderParams::bind(t, p, 1), 2, pred), target);
    }, s));
  }
  {
    TrainConfig c;
    c.input_len = 4;
    c.pred_len = 2;
    c.d_model = 4;
    c.k = 2;
    c.n_enc_layers = 1;
    c.n_dec_layers = 1;
    c.d_ff = 8;
    c.n_heads = 2;
    c.seed = seed;
    const Index n_vars = 2;
    const Matrix x = gaussian(rng, c.input_len, n_vars);
    const Matrix y = gaussian(rng, c.pred_len, n_vars);
    const ParamStore s = DraModel::declare_params(c, n_vars);
    out.push_back(check("end_to_end", 1e-3, [&](Tape& t, const ParamStore& p) {
      return mse_loss(DraModel(c, n_vars, p).forward(t, x), y);
    }, s));
  }
  return out;
}

}  // namespace draformer
