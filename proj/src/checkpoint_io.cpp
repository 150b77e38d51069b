#include "kgscat/checkpoint_io.hpp"

#include <cstring>
#include <fstream>

#include "kgscat/error.hpp"

namespace kgscat {

namespace {

template <typename T>
void put(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
  T value;
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw Error(Errc::IoError, "truncated checkpoint header in " + path);
  }
  return value;
}

void write(const std::string& path, MarchVariable var, double at, const Eigen::VectorXd& grid,
           const Eigen::VectorXd& first, const Eigen::VectorXd& second) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open " + path + " for writing");
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  put(out, kCheckpointVersion);
  put(out, static_cast<std::uint32_t>(var));
  put(out, at);
  put(out, grid(0));
  put(out, grid(grid.size() - 1));
  put(out, static_cast<std::uint64_t>(grid.size()));
  put(out, std::uint64_t{2});
  out.write(reinterpret_cast<const char*>(first.data()), first.size() * sizeof(double));
  out.write(reinterpret_cast<const char*>(second.data()), second.size() * sizeof(double));
  if (!out) throw Error(Errc::IoError, "write failed for " + path);
}

struct Payload {
  CheckpointHeader header;
  Eigen::VectorXd first;
  Eigen::VectorXd second;
};

CheckpointHeader read_header(std::ifstream& in, const std::string& path) {
  char magic[sizeof kCheckpointMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw Error(Errc::IoError, path + " is not a checkpoint file");
  }
  if (get<std::uint32_t>(in, path) != kCheckpointVersion) {
    throw Error(Errc::IoError, "unsupported checkpoint version in " + path);
  }
  CheckpointHeader h;
  const auto var = get<std::uint32_t>(in, path);
  if (var > 1) throw Error(Errc::IoError, "unknown march variable in " + path);
  h.variable = static_cast<MarchVariable>(var);
  h.at = get<double>(in, path);
  h.lo = get<double>(in, path);
  h.hi = get<double>(in, path);
  h.points = get<std::uint64_t>(in, path);
  h.fields = get<std::uint64_t>(in, path);
  if (h.fields != 2 || h.points < 2 || h.points > (std::uint64_t{1} << 32)) {
    throw Error(Errc::IoError, "malformed grid spec in " + path);
  }
  return h;
}

Payload read(const std::string& path, MarchVariable expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  Payload p;
  p.header = read_header(in, path);
  if (p.header.variable != expected) throw Error(Errc::IoError, "wrong march variable in " + path);
  const auto n = static_cast<Eigen::Index>(p.header.points);
  p.first.resize(n);
  p.second.resize(n);
  in.read(reinterpret_cast<char*>(p.first.data()), n * sizeof(double));
  in.read(reinterpret_cast<char*>(p.second.data()), n * sizeof(double));
  if (!in) throw Error(Errc::IoError, "truncated checkpoint payload in " + path);
  return p;
}

}  // namespace

void write_checkpoint(const std::string& path, const FieldGrid& f) {
  write(path, MarchVariable::Rho, f.rho, f.ys, f.V, f.V_rho);
}

void write_checkpoint(const std::string& path, const CartesianState& s) {
  write(path, MarchVariable::T, s.t, s.xs, s.v, s.v_t);
}

CheckpointHeader read_checkpoint_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  return read_header(in, path);
}

FieldGrid read_field_checkpoint(const std::string& path) {
  Payload p = read(path, MarchVariable::Rho);
  FieldGrid f;
  f.rho = p.header.at;
  f.ys = Eigen::VectorXd::LinSpaced(p.first.size(), p.header.lo, p.header.hi);
  f.V = std::move(p.first);
  f.V_rho = std::move(p.second);
  return f;
}

CartesianState read_cartesian_checkpoint(const std::string& path) {
  Payload p = read(path, MarchVariable::T);
  CartesianState s;
  s.t = p.header.at;
  s.xs = Eigen::VectorXd::LinSpaced(p.first.size(), p.header.lo, p.header.hi);
  s.v = std::move(p.first);
  s.v_t = std::move(p.second);
  return s;
}

}  // namespace kgscat
