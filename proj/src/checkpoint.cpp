#include "ghostdet/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ghostdet::ckpt {

namespace {

[[noreturn]] void bad(const std::string& what) { throw std::runtime_error("checkpoint: " + what); }

double to_double(const std::string& tok) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) bad("bad number '" + tok + "'");
  return v;
}

Container::Array from_matrix(const Eigen::MatrixXd& m) {
  Container::Array a{static_cast<int>(m.rows()), static_cast<int>(m.cols()), {}};
  a.values.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) a.values.push_back(m(i, j));
  return a;
}

Eigen::MatrixXd to_matrix(const Container::Array& a) {
  Eigen::MatrixXd m(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) m(i, j) = a.values[static_cast<std::size_t>(i) * a.cols + j];
  return m;
}

std::vector<int> to_ints(const std::string& s) {
  std::vector<int> out;
  std::istringstream ss(s);
  int v = 0;
  while (ss >> v) out.push_back(v);
  return out;
}

}  // namespace

const Container::Array& Container::array(const std::string& name) const {
  const auto it = arrays.find(name);
  if (it == arrays.end()) bad("missing array '" + name + "'");
  return it->second;
}

const std::string& Container::get(const std::string& key) const {
  const auto it = meta.find(key);
  if (it == meta.end()) bad("missing entry '" + key + "'");
  return it->second;
}

void write(std::ostream& out, const Container& c) {
  out << "ghostdet-checkpoint " << kFormatVersion << '\n';
  out << "kind " << c.kind << '\n';
  for (const auto& [k, v] : c.meta) out << "meta " << k << ' ' << v << '\n';
  for (const auto& [name, a] : c.arrays) {
    out << "array " << name << ' ' << a.rows << ' ' << a.cols << '\n';
    for (int i = 0; i < a.rows; ++i) {
      for (int j = 0; j < a.cols; ++j)
        out << (j ? " " : "") << trace::format_double(a.values[static_cast<std::size_t>(i) * a.cols + j]);
      out << '\n';
    }
  }
  out << "end\n";
}

Container read(std::istream& in) {
  std::string word;
  int version = 0;
  if (!(in >> word >> version) || word != "ghostdet-checkpoint") bad("not a ghostdet checkpoint");
  if (version != kFormatVersion) bad("unsupported version " + std::to_string(version));
  Container c;
  if (!(in >> word) || word != "kind" || !(in >> c.kind)) bad("missing kind");
  while (in >> word) {
    if (word == "end") return c;
    if (word == "meta") {
      std::string key, value;
      in >> key;
      std::getline(in, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      c.meta[key] = value;
    } else if (word == "array") {
      std::string name;
      Container::Array a;
      if (!(in >> name >> a.rows >> a.cols) || a.rows < 0 || a.cols < 0) bad("bad array header");
      a.values.resize(static_cast<std::size_t>(a.rows) * a.cols);
      std::string tok;
      for (double& v : a.values) {
        if (!(in >> tok)) bad("truncated array '" + name + "'");
        v = to_double(tok);
      }
      c.arrays[name] = std::move(a);
    } else {
      bad("unexpected token '" + word + "'");
    }
  }
  bad("missing end marker");
}

Container to_container(const dae::DaeModel& model) {
  Container c;
  c.kind = "dae";
  std::string widths, relu;
  for (int w : model.arch.widths) widths += (widths.empty() ? "" : " ") + std::to_string(w);
  for (bool r : model.arch.relu) relu += (relu.empty() ? "" : " ") + std::string(r ? "1" : "0");
  c.meta["widths"] = widths;
  c.meta["relu"] = relu;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    c.arrays["W" + std::to_string(l)] = from_matrix(model.weights[l]);
    c.arrays["b" + std::to_string(l)] = from_matrix(model.biases[l].transpose());
  }
  return c;
}

dae::DaeModel dae_from(const Container& c) {
  if (c.kind != "dae") bad("expected kind dae, got " + c.kind);
  dae::DaeModel m;
  m.arch.widths = to_ints(c.get("widths"));
  m.arch.relu.clear();
  for (int r : to_ints(c.get("relu"))) m.arch.relu.push_back(r != 0);
  m.arch.validate();
  for (std::size_t l = 0; l < m.arch.layers(); ++l) {
    Eigen::MatrixXd w = to_matrix(c.array("W" + std::to_string(l)));
    Eigen::MatrixXd b = to_matrix(c.array("b" + std::to_string(l)));
    if (w.rows() != m.arch.widths[l] || w.cols() != m.arch.widths[l + 1] || b.rows() != 1 || b.cols() != w.cols())
      bad("layer " + std::to_string(l) + " shape does not match the architecture");
    m.weights.push_back(std::move(w));
    m.biases.push_back(b.row(0).transpose());
  }
  return m;
}

Container to_container(const ocsvm::OcsvmModel& model) {
  Container c;
  c.kind = "ocsvm";
  c.arrays["w"] = {1, 5, {model.w.begin(), model.w.end()}};
  c.arrays["rho"] = {1, 1, {model.rho}};
  c.arrays["nu"] = {1, 1, {model.nu}};
  return c;
}

ocsvm::OcsvmModel ocsvm_from(const Container& c) {
  if (c.kind != "ocsvm") bad("expected kind ocsvm, got " + c.kind);
  ocsvm::OcsvmModel m;
  const auto& w = c.array("w");
  if (w.values.size() != 5) bad("w must have 5 entries");
  std::copy(w.values.begin(), w.values.end(), m.w.begin());
  m.rho = c.array("rho").values.at(0);
  m.nu = c.array("nu").values.at(0);
  return m;
}

void put_scaler(Container& c, const trace::Scaler& s) {
  c.arrays["scaler_min"] = {1, 5, {s.min.begin(), s.min.end()}};
  c.arrays["scaler_max"] = {1, 5, {s.max.begin(), s.max.end()}};
}

trace::Scaler scaler_from(const Container& c) {
  trace::Scaler s;
  const auto& lo = c.array("scaler_min");
  const auto& hi = c.array("scaler_max");
  if (lo.values.size() != 5 || hi.values.size() != 5) bad("scaler arrays must have 5 entries");
  std::copy(lo.values.begin(), lo.values.end(), s.min.begin());
  std::copy(hi.values.begin(), hi.values.end(), s.max.begin());
  return s;
}

void save(const std::filesystem::path& path, const Container& c) {
  std::ofstream out(path);
  if (!out) bad("cannot write " + path.string());
  write(out, c);
  if (!out) bad("write failed for " + path.string());
}

Container load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open " + path.string());
  return read(in);
}

}  // namespace ghostdet::ckpt
