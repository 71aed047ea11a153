#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "vibrom/dpim.hpp"
#include "vibrom/romdl.hpp"

namespace vibrom {

// ---- MXB1 matrix container ------------------------------------------------
// One ASCII header line "MXB1 <rows> <cols>\n" followed by rows*cols
// little-endian IEEE-754 doubles, row-major. Round trip is bitwise exact.

void mxb1_write(std::ostream& out, const Eigen::MatrixXd& m);
Eigen::MatrixXd mxb1_read(std::istream& in);

void mxb1_save(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd mxb1_load(const std::string& path);

// ---- numeric formatting ----------------------------------------------------

// shortest decimal that round-trips to the same double
std::string format_double(double value);
// fixed 17 significant digits (DPIM model files)
std::string format_double17(double value);

// ---- config ----------------------------------------------------------------
// Flat sectioned key=value text; '#' starts a comment line.

struct ConfigFile {
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::string canonical_text;  // normalized form used for hashing

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key,
                       double fallback) const;
  long get_int_or(const std::string& section, const std::string& key, long fallback) const;
  std::vector<double> get_list_or(const std::string& section, const std::string& key,
                                  const std::vector<double>& fallback) const;
};

ConfigFile parse_config(const std::string& text);
ConfigFile load_config(const std::string& path);

// FNV-1a over the canonical config text; embedded in every output header.
std::uint64_t fnv1a_hash(const std::string& text);
std::string config_hash_hex(const ConfigFile& cfg);

// ---- CSV -------------------------------------------------------------------

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns,
            const std::string& config_hash);
  void row(const std::vector<double>& values);
  void row_mixed(const std::vector<std::string>& values);
  ~CsvWriter();

 private:
  struct Impl;
  Impl* impl_;
};

// ---- model serialization ---------------------------------------------------

void save_dpim(const std::string& path, const DpimModel& model);
DpimModel load_dpim(const std::string& path);

void save_dlrom(const std::string& path, const DlRomModel& model);
DlRomModel load_dlrom(const std::string& path);

void save_snapshots(const std::string& dir, const SnapshotSet& set,
                    const std::string& config_hash);
SnapshotSet load_snapshots(const std::string& dir, std::string* stored_hash = nullptr);

}  // namespace vibrom
