// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0

#include "barycoal/checkpoint.hpp"

#include "barycoal/error.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace barycoal {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_matrix_line(std::ostringstream& out, const char* tag, std::size_t l, const Eigen::MatrixXd& m) {
  out << tag << ' ' << l;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ' ' << fmt(m(i, j));
  }
  out << '\n';
}

class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  // Next non-empty line split into tokens.
  std::vector<std::string> next(const char* expected) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      std::istringstream ss(line);
      std::vector<std::string> tok;
      std::string t;
      while (ss >> t) tok.push_back(t);
      if (tok.empty()) continue;
      if (expected != nullptr && tok[0] != expected) {
        fail("expected '" + std::string(expected) + "', found '" + tok[0] + "'");
      }
      return tok;
    }
    fail("unexpected end of checkpoint, expected '" + std::string(expected ? expected : "data") + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("checkpoint line " + std::to_string(line_no_) + ": " + msg);
  }

  double real(const std::string& s) const {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE) fail("invalid number '" + s + "'");
    return v;
  }

  long long integer(const std::string& s) const {
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') fail("invalid integer '" + s + "'");
    return v;
  }

  std::uint64_t unsigned_integer(const std::string& s) const {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0' || s[0] == '-') fail("invalid unsigned integer '" + s + "'");
    return v;
  }

  void arity(const std::vector<std::string>& tok, std::size_t n) const {
    if (tok.size() != n) fail("'" + tok[0] + "' expects " + std::to_string(n - 1) + " fields");
  }

 private:
  std::istringstream in_;
  int line_no_ = 0;
};

}  // namespace

GeneratorModel NamedNetwork::generator() const {
  if (!noise) throw ParseError("network '" + name + "' is not a generator (no noise prior)");
  return {params, *noise};
}

const NamedNetwork& Checkpoint::get(const std::string& name) const {
  for (const auto& n : networks) {
    if (n.name == name) return n;
  }
  throw ParseError("checkpoint has no network named '" + name + "'");
}

void Checkpoint::add_generator(const std::string& name, const GeneratorModel& g) {
  networks.push_back({name, g.params, g.noise, {}});
}

void Checkpoint::add_critic(const std::string& name, const CriticModel& c) {
  networks.push_back({name, c.params, std::nullopt, {}});
}

void Checkpoint::add_ternary_generator(const std::string& name, const TernaryGenerator& g) {
  NamedNetwork n{name, g.net.params, g.noise, {}};
  for (const auto& s : g.net.states()) n.ternary.push_back({s.delta, s.scale});
  networks.push_back(std::move(n));
}

std::string serialize_checkpoint(const Checkpoint& c) {
  std::ostringstream out;
  out << "barycoal-checkpoint v1\n";
  out << "stage " << (c.stage.empty() ? "-" : c.stage) << '\n';
  out << "seed " << c.seed << '\n';
  out << "networks " << c.networks.size() << '\n';
  for (const auto& n : c.networks) {
    out << "network " << n.name << '\n';
    if (n.noise) {
      out << "noise " << (n.noise->kind == NoiseKind::Gaussian ? "gaussian" : "uniform") << ' ' << n.noise->dim
          << '\n';
    } else {
      out << "noise none 0\n";
    }
    out << "layers " << n.params.layers.size() << '\n';
    for (const auto& l : n.params.layers) {
      out << "dense " << l.weight.cols() << ' ' << l.weight.rows() << ' ' << activation_name(l.activation) << '\n';
    }
    for (const auto& t : n.ternary) out << "ternary " << fmt(t.delta) << ' ' << fmt(t.scale) << '\n';
    for (std::size_t l = 0; l < n.params.layers.size(); ++l) {
      write_matrix_line(out, "weight", l, n.params.layers[l].weight.value());
      write_matrix_line(out, "bias", l, n.params.layers[l].bias.value());
    }
    out << "end\n";
  }
  return out.str();
}

Checkpoint parse_checkpoint(const std::string& text) {
  LineReader r(text);
  auto header = r.next("barycoal-checkpoint");
  if (header.size() != 2 || header[1] != "v1") r.fail("unsupported checkpoint version");
  Checkpoint c;
  auto tok = r.next("stage");
  r.arity(tok, 2);
  c.stage = tok[1] == "-" ? "" : tok[1];
  tok = r.next("seed");
  r.arity(tok, 2);
  c.seed = r.unsigned_integer(tok[1]);
  tok = r.next("networks");
  r.arity(tok, 2);
  const long long count = r.integer(tok[1]);
  if (count < 0) r.fail("negative network count");

  for (long long k = 0; k < count; ++k) {
    NamedNetwork n;
    tok = r.next("network");
    r.arity(tok, 2);
    n.name = tok[1];
    tok = r.next("noise");
    r.arity(tok, 3);
    if (tok[1] == "gaussian" || tok[1] == "uniform") {
      const long long dim = r.integer(tok[2]);
      if (dim < 1) r.fail("noise dimension must be >= 1");
      n.noise = NoisePrior{tok[1] == "gaussian" ? NoiseKind::Gaussian : NoiseKind::Uniform, static_cast<int>(dim)};
    } else if (tok[1] != "none") {
      r.fail("unknown noise kind '" + tok[1] + "'");
    }
    tok = r.next("layers");
    r.arity(tok, 2);
    const long long layers = r.integer(tok[1]);
    if (layers < 1) r.fail("a network needs at least one layer");

    std::vector<std::pair<long long, long long>> shapes;
    std::vector<Activation> acts;
    for (long long l = 0; l < layers; ++l) {
      tok = r.next("dense");
      r.arity(tok, 4);
      const long long in = r.integer(tok[1]);
      const long long out = r.integer(tok[2]);
      if (in < 1 || out < 1) r.fail("layer sizes must be positive");
      shapes.emplace_back(in, out);
      try {
        acts.push_back(parse_activation(tok[3]));
      } catch (const std::invalid_argument& e) {
        r.fail(e.what());
      }
    }
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::MatrixXd> biases;
    tok = r.next(nullptr);
    if (tok[0] == "ternary") {
      for (long long l = 0; l < layers; ++l) {
        if (l > 0) tok = r.next("ternary");
        r.arity(tok, 3);
        n.ternary.push_back({r.real(tok[1]), r.real(tok[2])});
      }
      tok = r.next("weight");
    }
    for (long long l = 0; l < layers; ++l) {
      const auto [in, out] = shapes[static_cast<std::size_t>(l)];
      if (l > 0) tok = r.next("weight");
      if (tok[0] != "weight") r.fail("expected 'weight', found '" + tok[0] + "'");
      if (tok.size() < 2 || r.integer(tok[1]) != l) r.fail("weight lines must appear in layer order");
      if (static_cast<long long>(tok.size()) != 2 + in * out) r.fail("weight count does not match layer shape");
      Eigen::MatrixXd w(out, in);
      for (long long i = 0; i < out * in; ++i) w(i / in, i % in) = r.real(tok[static_cast<std::size_t>(2 + i)]);
      tok = r.next("bias");
      if (r.integer(tok[1]) != l) r.fail("bias lines must appear in layer order");
      if (static_cast<long long>(tok.size()) != 2 + out) r.fail("bias count does not match layer shape");
      Eigen::MatrixXd b(1, out);
      for (long long i = 0; i < out; ++i) b(0, i) = r.real(tok[static_cast<std::size_t>(2 + i)]);
      weights.push_back(std::move(w));
      biases.push_back(std::move(b));
    }
    r.next("end");
    try {
      n.params = MLPParams::from_matrices(weights, biases, acts);
    } catch (const std::invalid_argument& e) {
      r.fail(e.what());
    }
    c.networks.push_back(std::move(n));
  }
  return c;
}

void write_checkpoint(const Checkpoint& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << serialize_checkpoint(c);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

TernaryGenerator ternary_generator(const NamedNetwork& n) {
  if (!n.noise) throw ParseError("network '" + n.name + "' is not a generator (no noise prior)");
  if (n.ternary.size() != n.params.layers.size()) {
    throw ParseError("network '" + n.name + "' has no ternary records");
  }
  TernaryGenerator g{TernaryNetwork(n.params, 0.0), *n.noise};
  for (std::size_t l = 0; l < n.ternary.size(); ++l) g.net.deltas[l].mutable_value()(0, 0) = n.ternary[l].delta;
  g.net.refresh();
  return g;
}

}  // namespace barycoal
