#include "tarnn/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tarnn {
namespace {

constexpr const char* kMagic = "tarnn-model";
constexpr int kVersion = 1;

void write_matrix(std::ostream& out, const char* name, const DenseMatrix& m) {
  out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  char buf[32];
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", m.data()[i]);
    out << buf << ((i + 1) % 8 == 0 ? '\n' : ' ');
  }
  if (m.size() % 8 != 0) out << '\n';
}

DenseMatrix read_matrix(std::istream& in, const std::string& expect) {
  std::string kw, name;
  std::size_t rows = 0, cols = 0;
  if (!(in >> kw >> name >> rows >> cols) || kw != "matrix" || name != expect)
    throw std::runtime_error("model file: expected matrix block '" + expect + "'");
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i)
    if (!(in >> m.data()[i]))
      throw std::runtime_error("model file: truncated matrix '" + expect + "'");
  return m;
}

void write_header(std::ostream& out, const char* family) {
  out << kMagic << " v" << kVersion << '\n' << "family " << family << '\n';
}

std::stringstream open_checked(const std::string& path, std::string* family) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string magic, version, kw;
  if (!(ss >> magic >> version) || magic != kMagic)
    throw std::runtime_error("not a model file: " + path);
  if (version != "v1")
    throw std::runtime_error("unsupported model version '" + version + "'");
  if (!(ss >> kw >> *family) || kw != "family")
    throw std::runtime_error("model file missing family: " + path);
  return ss;
}

void write_transform(std::ostream& out, const TimeTransform& tf) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", tf.norm);
  out << "transform " << to_string(tf.kind) << ' ' << buf << '\n';
}

TimeTransform read_transform(std::istream& in) {
  std::string kw, kind;
  double norm;
  if (!(in >> kw >> kind >> norm) || kw != "transform")
    throw std::runtime_error("model file: expected transform line");
  return TimeTransform{timescale_from_string(kind), norm};
}

}  // namespace

void save_model(const ReservoirModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  write_header(out, "reservoir");
  out << "variant " << to_string(m.cfg.variant) << '\n';
  out << "dims " << m.cfg.n_units << ' ' << m.cfg.n_in << ' ' << m.cfg.n_out
      << '\n';
  char buf[96];
  std::snprintf(buf, sizeof buf, "params %.17g %.17g %.17g\n", m.cfg.alpha,
                m.cfg.radius, m.cfg.input_scaling);
  out << buf;
  out << "pooling " << (m.cfg.pooling == Pooling::Mean ? "mean" : "last")
      << '\n';
  write_transform(out, m.cfg.transform);
  out << "trained " << (m.trained ? 1 : 0) << '\n';
  write_matrix(out, "w_in", m.w_in);
  write_matrix(out, "u", m.u);
  if (m.trained) write_matrix(out, "w_out", m.w_out);
}

void save_model(const GatedModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  write_header(out, "gated");
  out << "variant " << to_string(m.cfg.variant) << '\n';
  out << "dims " << m.cfg.n_hidden << ' ' << m.cfg.n_in << ' ' << m.cfg.n_out
      << '\n';
  out << "raw_dt " << (m.cfg.raw_dt_input ? 1 : 0) << '\n';
  write_transform(out, m.cfg.transform);
  write_matrix(out, "w_z", m.w_z);
  write_matrix(out, "u_z", m.u_z);
  write_matrix(out, "w_r", m.w_r);
  write_matrix(out, "u_r", m.u_r);
  write_matrix(out, "w_h", m.w_h);
  write_matrix(out, "u_h", m.u_h);
  write_matrix(out, "w_out", m.w_out);
}

ModelFamily peek_model_family(const std::string& path) {
  std::string family;
  open_checked(path, &family);
  if (family == "reservoir") return ModelFamily::Reservoir;
  if (family == "gated") return ModelFamily::Gated;
  throw std::runtime_error("unknown model family '" + family + "'");
}

ReservoirModel load_reservoir(const std::string& path) {
  std::string family;
  std::stringstream in = open_checked(path, &family);
  if (family != "reservoir")
    throw std::runtime_error(path + " is not a reservoir model");
  ReservoirModel m;
  std::string kw, val;
  in >> kw >> val;
  if (kw != "variant") throw std::runtime_error("model file: expected variant");
  m.cfg.variant = reservoir_variant_from_string(val);
  in >> kw >> m.cfg.n_units >> m.cfg.n_in >> m.cfg.n_out;
  if (kw != "dims") throw std::runtime_error("model file: expected dims");
  in >> kw >> m.cfg.alpha >> m.cfg.radius >> m.cfg.input_scaling;
  if (kw != "params") throw std::runtime_error("model file: expected params");
  in >> kw >> val;
  if (kw != "pooling") throw std::runtime_error("model file: expected pooling");
  m.cfg.pooling = val == "mean" ? Pooling::Mean : Pooling::LastState;
  m.cfg.transform = read_transform(in);
  int trained = 0;
  in >> kw >> trained;
  if (kw != "trained") throw std::runtime_error("model file: expected trained");
  m.w_in = read_matrix(in, "w_in");
  m.u = read_matrix(in, "u");
  if (trained) {
    m.w_out = read_matrix(in, "w_out");
    m.trained = true;
  }
  return m;
}

GatedModel load_gated(const std::string& path) {
  std::string family;
  std::stringstream in = open_checked(path, &family);
  if (family != "gated")
    throw std::runtime_error(path + " is not a gated model");
  GatedModel m;
  std::string kw, val;
  in >> kw >> val;
  if (kw != "variant") throw std::runtime_error("model file: expected variant");
  m.cfg.variant = gated_variant_from_string(val);
  in >> kw >> m.cfg.n_hidden >> m.cfg.n_in >> m.cfg.n_out;
  if (kw != "dims") throw std::runtime_error("model file: expected dims");
  int raw = 0;
  in >> kw >> raw;
  if (kw != "raw_dt") throw std::runtime_error("model file: expected raw_dt");
  m.cfg.raw_dt_input = raw != 0;
  m.cfg.transform = read_transform(in);
  m.w_z = read_matrix(in, "w_z");
  m.u_z = read_matrix(in, "u_z");
  m.w_r = read_matrix(in, "w_r");
  m.u_r = read_matrix(in, "u_r");
  m.w_h = read_matrix(in, "w_h");
  m.u_h = read_matrix(in, "u_h");
  m.w_out = read_matrix(in, "w_out");
  return m;
}

}  // namespace tarnn
