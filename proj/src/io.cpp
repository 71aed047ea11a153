#include "vibrom/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vibrom {

static_assert(std::endian::native == std::endian::little,
              "MXB1 writer assumes a little-endian host");

void mxb1_write(std::ostream& out, const Eigen::MatrixXd& m) {
  out << "MXB1 " << m.rows() << " " << m.cols() << "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double v = m(r, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof(double));
    }
}

Eigen::MatrixXd mxb1_read(std::istream& in) {
  std::string magic;
  long rows = -1, cols = -1;
  in >> magic >> rows >> cols;
  if (magic != "MXB1" || rows < 0 || cols < 0)
    throw std::runtime_error("mxb1_read: bad header");
  char nl;
  in.get(nl);
  if (nl != '\n') throw std::runtime_error("mxb1_read: malformed header terminator");
  Eigen::MatrixXd m(rows, cols);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof(double));
      if (!in) throw std::runtime_error("mxb1_read: truncated payload");
      m(r, c) = v;
    }
  return m;
}

void mxb1_save(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  mxb1_write(f, m);
}

Eigen::MatrixXd mxb1_load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  return mxb1_read(f);
}

std::string format_double(double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string format_double17(double value) {
  char buf[48];
  auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::scientific, 16);
  return std::string(buf, res.ptr);
}

// ---- config ----------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  auto it = sections.find(section);
  return it != sections.end() && it->second.count(key) > 0;
}

std::string ConfigFile::get(const std::string& section, const std::string& key) const {
  auto it = sections.find(section);
  if (it == sections.end() || !it->second.count(key))
    throw std::runtime_error("config: missing [" + section + "] " + key);
  return it->second.at(key);
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
  return std::stod(get(section, key));
}

double ConfigFile::get_double_or(const std::string& section, const std::string& key,
                                 double fallback) const {
  return has(section, key) ? std::stod(get(section, key)) : fallback;
}

long ConfigFile::get_int_or(const std::string& section, const std::string& key,
                            long fallback) const {
  return has(section, key) ? std::stol(get(section, key)) : fallback;
}

std::vector<double> ConfigFile::get_list_or(const std::string& section,
                                            const std::string& key,
                                            const std::vector<double>& fallback) const {
  if (!has(section, key)) return fallback;
  std::vector<double> out;
  std::istringstream in(get(section, key));
  std::string token;
  while (std::getline(in, token, ',')) {
    token = trim(token);
    if (!token.empty()) out.push_back(std::stod(token));
  }
  return out;
}

ConfigFile parse_config(const std::string& text) {
  ConfigFile cfg;
  std::string section;
  std::istringstream in(text);
  std::string line;
  std::ostringstream canonical;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      canonical << "[" << section << "]\n";
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
    cfg.sections[section][key] = value;
    canonical << key << "=" << value << "\n";
  }
  cfg.canonical_text = canonical.str();
  return cfg;
}

ConfigFile load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash_hex(const ConfigFile& cfg) {
  std::uint64_t h = fnv1a_hash(cfg.canonical_text);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- CSV -------------------------------------------------------------------

struct CsvWriter::Impl {
  std::ofstream out;
};

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns,
                     const std::string& config_hash)
    : impl_(new Impl) {
  impl_->out.open(path, std::ios::binary);
  if (!impl_->out) throw std::runtime_error("cannot open for write: " + path);
  impl_->out << "# config_hash=" << config_hash << "\n";
  for (size_t i = 0; i < columns.size(); ++i)
    impl_->out << columns[i] << (i + 1 < columns.size() ? "," : "\n");
}

void CsvWriter::row(const std::vector<double>& values) {
  for (size_t i = 0; i < values.size(); ++i)
    impl_->out << format_double(values[i]) << (i + 1 < values.size() ? "," : "\n");
}

void CsvWriter::row_mixed(const std::vector<std::string>& values) {
  for (size_t i = 0; i < values.size(); ++i)
    impl_->out << values[i] << (i + 1 < values.size() ? "," : "\n");
}

CsvWriter::~CsvWriter() { delete impl_; }

// ---- DPIM model ------------------------------------------------------------

namespace {

void write_vector(std::ostream& out, const std::string& key, const Eigen::VectorXd& v) {
  out << key << " =";
  for (Eigen::Index i = 0; i < v.size(); ++i) out << " " << format_double17(v(i));
  out << "\n";
}

Eigen::VectorXd parse_vector(const std::string& value) {
  std::istringstream in(value);
  std::vector<double> vals;
  double x;
  while (in >> x) vals.push_back(x);
  return Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());
}

}  // namespace

void save_dpim(const std::string& path, const DpimModel& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "VIBROM-DPIM 1\n";
  out << "master_index = " << m.master_index << "\n";
  out << "omega_m = " << format_double17(m.omega_m) << "\n";
  out << "damping = " << format_double17(m.damping) << "\n";
  out << "forcing_scalar = " << format_double17(m.forcing_scalar) << "\n";
  out << "coef_r3 = " << format_double17(m.coef_r3) << "\n";
  out << "coef_rs2 = " << format_double17(m.coef_rs2) << "\n";
  out << "coef_r2s = " << format_double17(m.coef_r2s) << "\n";
  write_vector(out, "phi", m.phi);
  write_vector(out, "map_u_rr", m.map_u_rr);
  write_vector(out, "map_u_ss", m.map_u_ss);
  write_vector(out, "map_u_rs", m.map_u_rs);
  write_vector(out, "map_v_rr", m.map_v_rr);
  write_vector(out, "map_v_ss", m.map_v_ss);
  write_vector(out, "map_v_rs", m.map_v_rs);
}

DpimModel load_dpim(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string header;
  std::getline(in, header);
  if (header != "VIBROM-DPIM 1") throw std::runtime_error("bad DPIM model header");
  DpimModel m;
  std::string line;
  while (std::getline(in, line)) {
    size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    key.erase(key.find_last_not_of(' ') + 1);
    std::string value = line.substr(eq + 1);
    if (key == "master_index") m.master_index = std::stoi(value);
    else if (key == "omega_m") m.omega_m = std::stod(value);
    else if (key == "damping") m.damping = std::stod(value);
    else if (key == "forcing_scalar") m.forcing_scalar = std::stod(value);
    else if (key == "coef_r3") m.coef_r3 = std::stod(value);
    else if (key == "coef_rs2") m.coef_rs2 = std::stod(value);
    else if (key == "coef_r2s") m.coef_r2s = std::stod(value);
    else if (key == "phi") m.phi = parse_vector(value);
    else if (key == "map_u_rr") m.map_u_rr = parse_vector(value);
    else if (key == "map_u_ss") m.map_u_ss = parse_vector(value);
    else if (key == "map_u_rs") m.map_u_rs = parse_vector(value);
    else if (key == "map_v_rr") m.map_v_rr = parse_vector(value);
    else if (key == "map_v_ss") m.map_v_ss = parse_vector(value);
    else if (key == "map_v_rs") m.map_v_rs = parse_vector(value);
    else throw std::runtime_error("unknown DPIM model key: " + key);
  }
  return m;
}

// ---- DL-ROM model ----------------------------------------------------------

namespace {

void write_mlp(std::ostream& out, const Mlp& net) {
  out << "layers " << net.layers.size() << "\n";
  for (const DenseLayer& l : net.layers) {
    out << "layer " << activation_name(l.act) << "\n";
    mxb1_write(out, l.weight);
    mxb1_write(out, Eigen::MatrixXd(l.bias));
  }
}

Mlp read_mlp(std::istream& in) {
  std::string tag;
  size_t count;
  in >> tag >> count;
  if (tag != "layers") throw std::runtime_error("dlrom: expected layers tag");
  in.ignore();
  Mlp net;
  for (size_t i = 0; i < count; ++i) {
    std::string ltag, act;
    in >> ltag >> act;
    if (ltag != "layer") throw std::runtime_error("dlrom: expected layer tag");
    in.ignore();
    DenseLayer l;
    l.act = activation_from_string(act);
    l.weight = mxb1_read(in);
    l.bias = mxb1_read(in);
    net.layers.push_back(std::move(l));
  }
  return net;
}

}  // namespace

void save_dlrom(const std::string& path, const DlRomModel& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "VIBROM-DLROM 1\n";
  out << "latent_dim " << m.latent_dim << "\n";
  mxb1_write(out, m.pod.basis);
  mxb1_write(out, Eigen::MatrixXd(m.pod.singular_values));
  mxb1_write(out, Eigen::MatrixXd(m.scaling.input_shift));
  mxb1_write(out, Eigen::MatrixXd(m.scaling.input_scale));
  mxb1_write(out, Eigen::MatrixXd(m.scaling.output_shift));
  mxb1_write(out, Eigen::MatrixXd(m.scaling.output_scale));
  mxb1_write(out, Eigen::MatrixXd(m.input_lo));
  mxb1_write(out, Eigen::MatrixXd(m.input_hi));
  write_mlp(out, m.encoder);
  write_mlp(out, m.decoder);
  write_mlp(out, m.dfnn);
}

DlRomModel load_dlrom(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string header;
  std::getline(in, header);
  if (header != "VIBROM-DLROM 1") throw std::runtime_error("bad DL-ROM model header");
  DlRomModel m;
  std::string tag;
  in >> tag >> m.latent_dim;
  if (tag != "latent_dim") throw std::runtime_error("dlrom: expected latent_dim");
  in.ignore();
  m.pod.basis = mxb1_read(in);
  m.pod.singular_values = mxb1_read(in);
  m.scaling.input_shift = mxb1_read(in);
  m.scaling.input_scale = mxb1_read(in);
  m.scaling.output_shift = mxb1_read(in);
  m.scaling.output_scale = mxb1_read(in);
  m.input_lo = mxb1_read(in);
  m.input_hi = mxb1_read(in);
  m.encoder = read_mlp(in);
  m.decoder = read_mlp(in);
  m.dfnn = read_mlp(in);
  return m;
}

// ---- snapshot bundle -------------------------------------------------------

void save_snapshots(const std::string& dir, const SnapshotSet& set,
                    const std::string& config_hash) {
  mxb1_save(dir + "/snapshots.mxb", set.matrix);
  mxb1_save(dir + "/params.mxb", set.params);
  std::ofstream manifest(dir + "/manifest.txt", std::ios::binary);
  if (!manifest) throw std::runtime_error("cannot write manifest in " + dir);
  manifest << "VIBROM-SNAPSHOTS 1\n";
  manifest << "config_hash = " << config_hash << "\n";
  manifest << "samples_per_period = " << set.samples_per_period << "\n";
  manifest << "n_snapshots = " << set.matrix.cols() << "\n";
  for (const std::string& line : set.provenance) manifest << "curve: " << line << "\n";
}

SnapshotSet load_snapshots(const std::string& dir, std::string* stored_hash) {
  SnapshotSet set;
  set.matrix = mxb1_load(dir + "/snapshots.mxb");
  set.params = mxb1_load(dir + "/params.mxb");
  std::ifstream manifest(dir + "/manifest.txt");
  if (!manifest) throw std::runtime_error("missing manifest in " + dir);
  std::string line;
  std::getline(manifest, line);
  if (line != "VIBROM-SNAPSHOTS 1") throw std::runtime_error("bad snapshot manifest");
  while (std::getline(manifest, line)) {
    if (line.rfind("config_hash = ", 0) == 0 && stored_hash)
      *stored_hash = line.substr(14);
    else if (line.rfind("samples_per_period = ", 0) == 0)
      set.samples_per_period = std::stoi(line.substr(21));
    else if (line.rfind("curve: ", 0) == 0)
      set.provenance.push_back(line.substr(7));
  }
  return set;
}

}  // namespace vibrom
