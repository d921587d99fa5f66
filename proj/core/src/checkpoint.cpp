// Text checkpoint: one `key value...` header line per config field, then the
// parameter and momentum vectors as C99 hex-float literals so a save/load
// round trip is bit-exact.

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>

#include "artex/classifier.hpp"
#include "artex/error.hpp"

namespace artex {

namespace {

constexpr const char* kMagic = "artex-classifier";
constexpr int kVersion = 1;

std::string hex(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_hex(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') throw Error(ErrorCode::ParamError, "checkpoint: bad number '" + token + "'");
  return v;
}

void write_vector(std::ostream& out, const char* name, std::span<const double> values) {
  out << name << ' ' << values.size() << '\n';
  for (double v : values) out << hex(v) << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::istringstream line(const std::string& key) {
    std::string text;
    if (!std::getline(in_, text)) throw Error(ErrorCode::ParamError, "checkpoint truncated before '" + key + "'");
    std::istringstream is(text);
    std::string got;
    is >> got;
    if (got != key) throw Error(ErrorCode::ParamError, "checkpoint: expected '" + key + "', found '" + got + "'");
    return is;
  }

  template <typename T>
  T value(const std::string& key) {
    auto is = line(key);
    T v{};
    if (!(is >> v)) throw Error(ErrorCode::ParamError, "checkpoint: bad value for '" + key + "'");
    return v;
  }

  double real(const std::string& key) { return parse_hex(value<std::string>(key)); }

  std::vector<double> vector(const std::string& key, std::size_t expected) {
    const auto n = value<std::size_t>(key);
    if (n != expected) throw Error(ErrorCode::ParamError, "checkpoint: '" + key + "' has wrong length");
    std::vector<double> out(n);
    std::string token;
    for (double& v : out) {
      if (!std::getline(in_, token)) throw Error(ErrorCode::ParamError, "checkpoint truncated in '" + key + "'");
      v = parse_hex(token);
    }
    return out;
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_checkpoint(const Classifier& classifier, std::ostream& out) {
  const ClassifierConfig& c = classifier.config_;
  out << kMagic << ' ' << kVersion << '\n';
  out << "input " << c.input.height << ' ' << c.input.width << ' ' << c.input.channels << '\n';
  out << "conv_channels " << c.conv_channels.size();
  for (int ch : c.conv_channels) out << ' ' << ch;
  out << '\n';
  out << "dense_hidden_units " << c.dense_hidden_units << '\n';
  out << "num_classes " << c.num_classes << '\n';
  out << "dropout_rate " << hex(c.dropout_rate) << '\n';
  out << "learning_rate " << hex(c.learning_rate) << '\n';
  out << "momentum " << hex(c.momentum) << '\n';
  out << "batch_size " << c.batch_size << '\n';
  out << "weight_init_scale " << hex(c.weight_init_scale) << '\n';
  out << "steps " << classifier.steps_ << '\n';
  out << "valid " << (classifier.valid_ ? 1 : 0) << '\n';
  out << "mask_rng " << classifier.mask_rng_.state() << '\n';
  write_vector(out, "parameters", classifier.params_);
  write_vector(out, "velocity", classifier.velocity_);
  out << "end\n";
  if (!out) throw Error(ErrorCode::IoError, "failed writing checkpoint");
}

Classifier load_checkpoint(std::istream& in) {
  Reader r(in);
  if (r.value<int>(kMagic) != kVersion) throw Error(ErrorCode::ParamError, "unsupported checkpoint version");
  ClassifierConfig c;
  {
    auto is = r.line("input");
    is >> c.input.height >> c.input.width >> c.input.channels;
    if (!is) throw Error(ErrorCode::ParamError, "checkpoint: bad input shape");
  }
  {
    auto is = r.line("conv_channels");
    std::size_t n = 0;
    is >> n;
    c.conv_channels.assign(n, 0);
    for (int& ch : c.conv_channels) is >> ch;
    if (!is) throw Error(ErrorCode::ParamError, "checkpoint: bad conv_channels");
  }
  c.dense_hidden_units = r.value<int>("dense_hidden_units");
  c.num_classes = r.value<int>("num_classes");
  c.dropout_rate = r.real("dropout_rate");
  c.learning_rate = r.real("learning_rate");
  c.momentum = r.real("momentum");
  c.batch_size = r.value<int>("batch_size");
  c.weight_init_scale = r.real("weight_init_scale");

  Classifier classifier(c, 0);
  classifier.steps_ = r.value<std::uint64_t>("steps");
  classifier.valid_ = r.value<int>("valid") != 0;
  {
    auto is = r.line("mask_rng");
    std::string state;
    std::getline(is >> std::ws, state);
    classifier.mask_rng_.set_state(state);
  }
  const std::vector<double> params = r.vector("parameters", classifier.params_.size());
  const std::vector<double> velocity = r.vector("velocity", classifier.velocity_.size());
  classifier.params_.assign(params.begin(), params.end());
  classifier.velocity_.assign(velocity.begin(), velocity.end());
  r.line("end");
  return classifier;
}

}  // namespace artex
