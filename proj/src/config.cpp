#include "draformer/config.hpp"

#include "draformer/errors.hpp"
#include "draformer/log.hpp"

#include <charconv>

namespace draformer {

void TrainConfig::validate(Index n_vars) const {
  auto positive = [](const char* name, double v) {
    if (!(v > 0)) throw ConfigError(std::string(name) + " must be positive");
  };
  positive("input_len", static_cast<double>(input_len));
  positive("pred_len", static_cast<double>(pred_len));
  positive("d_model", static_cast<double>(d_model));
  positive("k", static_cast<double>(k));
  positive("n_enc_layers", static_cast<double>(n_enc_layers));
  positive("n_dec_layers", static_cast<double>(n_dec_layers));
  positive("n_heads", static_cast<double>(n_heads));
  positive("batch_size", static_cast<double>(batch_size));
  positive("lr0", lr0);
  positive("lr_decay", lr_decay);
  positive("lambda", lambda);
  positive("epsilon", epsilon);
  positive("grad_clip", grad_clip);
  positive("train_stride", static_cast<double>(train_stride));
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (d_ff < 0) throw ConfigError("d_ff must be non-negative");
  if (eval_stride < 0) throw ConfigError("eval_stride must be non-negative");
  if (input_len < 2) throw ConfigError("input_len must be at least 2 to form differences");
  if (k > d_model) {
    throw ConfigError("k=" + std::to_string(k) + " exceeds d_model=" + std::to_string(d_model));
  }
  if (d_model % n_heads != 0) {
    throw ConfigError("n_heads=" + std::to_string(n_heads) + " does not divide d_model=" + std::to_string(d_model));
  }
  if (n_vars == 1 && !replace_recon_attention) {
    log::warn("univariate data: distributed difference attention is identically zero, the encoder relies on "
              "integrated distance attention alone");
  }
  if (replace_recon_attention && replace_recon_sequence) {
    log::warn("both ablation toggles are enabled; this combination has no published counterpart");
  }
}

namespace {

// Shortest text that parses back to the same double.
std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Index parse_index(const std::string& key, const std::string& v) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("key '" + key + "' expects an integer, got '" + v + "'");
  }
  return static_cast<Index>(out);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects a number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "' expects a boolean, got '" + v + "'");
}

}  // namespace

std::map<std::string, std::string> TrainConfig::to_map() const {
  return {
      {"input_len", std::to_string(input_len)},
      {"pred_len", std::to_string(pred_len)},
      {"d_model", std::to_string(d_model)},
      {"k", std::to_string(k)},
      {"n_enc_layers", std::to_string(n_enc_layers)},
      {"n_dec_layers", std::to_string(n_dec_layers)},
      {"d_ff", std::to_string(d_ff)},
      {"n_heads", std::to_string(n_heads)},
      {"batch_size", std::to_string(batch_size)},
      {"epochs", std::to_string(epochs)},
      {"lr0", format_double(lr0)},
      {"lr_decay", format_double(lr_decay)},
      {"lambda", format_double(lambda)},
      {"epsilon", format_double(epsilon)},
      {"grad_clip", format_double(grad_clip)},
      {"seed", std::to_string(seed)},
      {"train_stride", std::to_string(train_stride)},
      {"eval_stride", std::to_string(eval_stride)},
      {"replace_recon_attention", replace_recon_attention ? "true" : "false"},
      {"replace_recon_sequence", replace_recon_sequence ? "true" : "false"},
  };
}

TrainConfig TrainConfig::from_map(const std::map<std::string, std::string>& values) {
  TrainConfig c;
  for (const auto& [key, v] : values) {
    if (key == "input_len") c.input_len = parse_index(key, v);
    else if (key == "pred_len") c.pred_len = parse_index(key, v);
    else if (key == "d_model") c.d_model = parse_index(key, v);
    else if (key == "k") c.k = parse_index(key, v);
    else if (key == "n_enc_layers") c.n_enc_layers = parse_index(key, v);
    else if (key == "n_dec_layers") c.n_dec_layers = parse_index(key, v);
    else if (key == "d_ff") c.d_ff = parse_index(key, v);
    else if (key == "n_heads") c.n_heads = parse_index(key, v);
    else if (key == "batch_size") c.batch_size = parse_index(key, v);
    else if (key == "epochs") c.epochs = parse_index(key, v);
    else if (key == "lr0") c.lr0 = parse_double(key, v);
    else if (key == "lr_decay") c.lr_decay = parse_double(key, v);
    else if (key == "lambda") c.lambda = parse_double(key, v);
    else if (key == "epsilon") c.epsilon = parse_double(key, v);
    else if (key == "grad_clip") c.grad_clip = parse_double(key, v);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_index(key, v));
    else if (key == "train_stride") c.train_stride = parse_index(key, v);
    else if (key == "eval_stride") c.eval_stride = parse_index(key, v);
    else if (key == "replace_recon_attention") c.replace_recon_attention = parse_bool(key, v);
    else if (key == "replace_recon_sequence") c.replace_recon_sequence = parse_bool(key, v);
    else throw ConfigError("unknown training key '" + key + "'");
  }
  return c;
}

}  // namespace draformer
