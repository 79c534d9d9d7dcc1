#include "tvmpc/net/checkpoint.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "tvmpc/core/errors.hpp"

namespace tvmpc {
namespace {

constexpr const char* kMagic = "tvmpc-checkpoint";
constexpr int kVersion = 1;

std::string format(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename Range>
void write_row(std::ostream& os, const Range& values) {
  bool first = true;
  for (double v : values) {
    if (!first) os << ' ';
    os << format(v);
    first = false;
  }
  os << '\n';
}

/// Line-oriented tokenizer that remembers where it is for error messages.
class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  std::vector<std::string> line() {
    std::string text;
    do {
      if (!std::getline(in_, text)) fail("unexpected end of file");
      ++line_no_;
    } while (text.empty());
    std::istringstream ss(text);
    std::vector<std::string> tokens;
    for (std::string t; ss >> t;) tokens.push_back(t);
    return tokens;
  }

  std::vector<std::string> keyed(const std::string& key, std::size_t values) {
    auto tokens = line();
    if (tokens.empty() || tokens[0] != key) fail("expected '" + key + "'");
    if (values != kAny && tokens.size() != values + 1) {
      fail("'" + key + "' expects " + std::to_string(values) + " values, got " + std::to_string(tokens.size() - 1));
    }
    tokens.erase(tokens.begin());
    return tokens;
  }

  double number(const std::string& token) {
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) fail("invalid number '" + token + "'");
    return v;
  }

  int integer(const std::string& token) {
    int v = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) fail("invalid integer '" + token + "'");
    return v;
  }

  Vec numbers(const std::vector<std::string>& tokens) {
    Vec v(static_cast<Eigen::Index>(tokens.size()));
    for (std::size_t i = 0; i < tokens.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(tokens[i]);
    return v;
  }

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(source_, line_no_, message); }

  static constexpr std::size_t kAny = static_cast<std::size_t>(-1);

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_no_ = 0;
};

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  const Mlp& mlp = checkpoint.mlp;
  const InputNormalization& norm = mlp.normalization();
  os << kMagic << ' ' << kVersion << '\n';
  os << "kind " << checkpoint.kind << '\n';
  os << "activation tanh\n";
  os << "state_dim " << checkpoint.state_dim << '\n';
  os << "output_scale " << format(checkpoint.output_scale) << '\n';
  os << "dims";
  for (int d : mlp.dims()) os << ' ' << d;
  os << '\n';
  os << "input_offset ";
  write_row(os, norm.offset);
  os << "input_scale ";
  write_row(os, norm.scale);
  os << "input_periodic";
  for (bool p : norm.periodic) os << ' ' << (p ? 1 : 0);
  os << '\n';
  for (int l = 0; l < mlp.num_layers(); ++l) {
    const auto W = mlp.weight(l);
    os << "weight " << l << ' ' << W.rows() << ' ' << W.cols() << '\n';
    for (Eigen::Index i = 0; i < W.rows(); ++i) write_row(os, W.row(i));
    const auto b = mlp.bias(l);
    os << "bias " << l << ' ' << b.size() << '\n';
    write_row(os, b);
  }
  os << "end\n";
  if (!os) throw std::runtime_error("failed writing checkpoint: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  Reader r(in, path.string());

  const auto header = r.keyed(kMagic, 1);
  if (r.integer(header[0]) != kVersion) r.fail("unsupported checkpoint version " + header[0]);
  Checkpoint ck;
  ck.kind = r.keyed("kind", 1)[0];
  if (r.keyed("activation", 1)[0] != "tanh") r.fail("unsupported activation");
  ck.state_dim = r.integer(r.keyed("state_dim", 1)[0]);
  ck.output_scale = r.number(r.keyed("output_scale", 1)[0]);
  if (!(ck.output_scale > 0.0) || !std::isfinite(ck.output_scale)) r.fail("output_scale must be positive");

  std::vector<int> dims;
  for (const auto& t : r.keyed("dims", Reader::kAny)) dims.push_back(r.integer(t));
  if (dims.size() < 2) r.fail("need at least two layer dimensions");
  for (int d : dims)
    if (d < 1) r.fail("layer dimensions must be positive");
  const auto in_dim = static_cast<std::size_t>(dims.front());
  if (ck.state_dim < 1 || ck.state_dim > dims.front()) r.fail("state_dim inconsistent with input dimension");

  InputNormalization norm;
  norm.offset = r.numbers(r.keyed("input_offset", in_dim));
  norm.scale = r.numbers(r.keyed("input_scale", in_dim));
  for (const auto& t : r.keyed("input_periodic", in_dim)) norm.periodic.push_back(r.integer(t) != 0);
  if ((norm.scale.array() == 0.0).any()) r.fail("input_scale entries must be nonzero");

  Mlp mlp(dims, std::move(norm));
  for (int l = 0; l < mlp.num_layers(); ++l) {
    const auto w = r.keyed("weight", 3);
    auto W = mlp.weight(l);
    if (r.integer(w[0]) != l || r.integer(w[1]) != W.rows() || r.integer(w[2]) != W.cols()) {
      r.fail("weight block header does not match dims");
    }
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      const auto row = r.line();
      if (row.size() != static_cast<std::size_t>(W.cols())) r.fail("weight row has wrong length");
      for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = r.number(row[static_cast<std::size_t>(j)]);
    }
    const auto b = r.keyed("bias", 2);
    if (r.integer(b[0]) != l || r.integer(b[1]) != dims[l + 1]) r.fail("bias block header does not match dims");
    const auto row = r.line();
    if (row.size() != static_cast<std::size_t>(dims[l + 1])) r.fail("bias row has wrong length");
    mlp.bias(l) = r.numbers(row);
  }
  r.keyed("end", 0);
  ck.mlp = std::move(mlp);
  return ck;
}

void save_checkpoint(const ValueNetwork& net, const std::filesystem::path& path) {
  write_checkpoint(path, Checkpoint{"value", net.state_dim(), net.output_scale(), net.residual()});
}

ValueNetwork load_checkpoint(const std::filesystem::path& path) {
  Checkpoint ck = read_checkpoint(path);
  if (ck.kind != "value") throw ContractViolation(path.string() + ": not a value-network checkpoint");
  return ValueNetwork(std::move(ck.mlp), ck.state_dim, ck.output_scale);
}

ValueNetwork load_checkpoint(const std::filesystem::path& path, int state_dim, int context_dim) {
  ValueNetwork net = load_checkpoint(path);
  if (net.state_dim() != state_dim || net.context_dim() != context_dim) {
    throw ContractViolation(path.string() + ": checkpoint expects state_dim=" + std::to_string(net.state_dim()) +
                            ", context_dim=" + std::to_string(net.context_dim()) + " but the environment has " +
                            std::to_string(state_dim) + ", " + std::to_string(context_dim));
  }
  return net;
}

void save_policy(const PolicyNetwork& policy, const std::filesystem::path& path) {
  write_checkpoint(path, Checkpoint{"policy", policy.state_dim(), 1.0, policy.mlp()});
}

PolicyNetwork load_policy(const std::filesystem::path& path) {
  Checkpoint ck = read_checkpoint(path);
  if (ck.kind != "policy") throw ContractViolation(path.string() + ": not a policy checkpoint");
  return PolicyNetwork(std::move(ck.mlp), ck.state_dim);
}

}  // namespace tvmpc
