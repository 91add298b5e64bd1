#include "asyncts/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "asyncts/error.hpp"

namespace asyncts {
namespace {

constexpr const char* kMagic = "asyncts-checkpoint";
constexpr int kFormatVersion = 1;

template <typename T>
T expect_field(std::istream& in, const std::string& key) {
  std::string k;
  T value{};
  if (!(in >> k) || k != key || !(in >> value)) {
    throw DataError("checkpoint: expected field '" + key + "'");
  }
  return value;
}

}  // namespace

void write_checkpoint(std::ostream& out, const ParameterVector& params, const NetworkConfig& cfg) {
  const auto& layout = params.layout();
  if (!(layout == *ParameterLayout::build(cfg))) {
    throw ContractError("write_checkpoint: parameters do not match the network config");
  }
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "input_dim " << cfg.input_dim << '\n';
  out << "lstm_layers " << cfg.lstm_layers << '\n';
  out << "hidden_dim " << cfg.hidden_dim << '\n';
  out << "fc_dims";
  for (auto d : cfg.fc_dims) out << ' ' << d;
  out << '\n';
  out << "version " << params.version() << '\n';
  out << "segments " << layout.segments().size() << '\n';
  for (const auto& s : layout.segments()) {
    out << s.name() << ' ' << s.offset << ' ' << s.rows << ' ' << s.cols << '\n';
  }
  out << "values " << params.size() << '\n';
  char buf[64];
  for (double v : params.values()) {
    std::snprintf(buf, sizeof buf, "%a", v);
    out << buf << '\n';
  }
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string magic;
  int format = 0;
  if (!(in >> magic >> format) || magic != kMagic) throw DataError("checkpoint: bad magic");
  if (format != kFormatVersion) throw DataError("checkpoint: unsupported format " + std::to_string(format));

  Checkpoint ck;
  ck.network.input_dim = expect_field<std::size_t>(in, "input_dim");
  ck.network.lstm_layers = expect_field<std::size_t>(in, "lstm_layers");
  ck.network.hidden_dim = expect_field<std::size_t>(in, "hidden_dim");
  {
    std::string key;
    in >> key;
    if (key != "fc_dims") throw DataError("checkpoint: expected field 'fc_dims'");
    std::string line;
    std::getline(in, line);
    std::istringstream ls(line);
    ck.network.fc_dims.clear();
    for (std::size_t d; ls >> d;) ck.network.fc_dims.push_back(d);
  }
  const auto version = expect_field<std::uint64_t>(in, "version");
  try {
    ck.params = ParameterVector(ParameterLayout::build(ck.network));
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint: invalid network shape: ") + e.what());
  }
  const auto& layout = ck.params.layout();
  const auto nseg = expect_field<std::size_t>(in, "segments");
  if (nseg != layout.segments().size()) throw DataError("checkpoint: segment count mismatch");
  for (const auto& s : layout.segments()) {
    std::string name;
    std::size_t offset = 0, rows = 0, cols = 0;
    if (!(in >> name >> offset >> rows >> cols) || name != s.name() || offset != s.offset || rows != s.rows ||
        cols != s.cols) {
      throw DataError("checkpoint: layout mismatch at segment " + s.name());
    }
  }
  const auto nvals = expect_field<std::size_t>(in, "values");
  if (nvals != ck.params.size()) throw DataError("checkpoint: value count mismatch");
  std::string token;
  for (double& v : ck.params.values()) {
    if (!(in >> token)) throw DataError("checkpoint: truncated values");
    char* end = nullptr;
    v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') throw DataError("checkpoint: bad value '" + token + "'");
  }
  ck.params.set_version(version);
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const ParameterVector& params, const NetworkConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint '" + path.string() + "'");
  write_checkpoint(out, params, cfg);
  if (!out) throw IoError("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  return read_checkpoint(in);
}

}  // namespace asyncts
