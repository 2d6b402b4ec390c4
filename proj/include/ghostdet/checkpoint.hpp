#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ghostdet/dae.hpp"
#include "ghostdet/ocsvm.hpp"
#include "ghostdet/trace_io.hpp"

namespace ghostdet::ckpt {

/// Versioned text container of named string entries and named real arrays.
/// Reals are written in shortest round-trip form, so load(save(x)) == x.
///
///   ghostdet-checkpoint 1
///   kind dae
///   meta <key> <value...>
///   array <name> <rows> <cols>
///   <rows*cols values, one row per line>
///   end
struct Container {
  struct Array {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;  ///< row-major
    friend bool operator==(const Array&, const Array&) = default;
  };

  std::string kind;
  std::map<std::string, std::string> meta;
  std::map<std::string, Array> arrays;

  const Array& array(const std::string& name) const;
  const std::string& get(const std::string& key) const;
  friend bool operator==(const Container&, const Container&) = default;
};

inline constexpr int kFormatVersion = 1;

void write(std::ostream& out, const Container& c);
Container read(std::istream& in);

Container to_container(const dae::DaeModel& model);
dae::DaeModel dae_from(const Container& c);

Container to_container(const ocsvm::OcsvmModel& model);
ocsvm::OcsvmModel ocsvm_from(const Container& c);

void put_scaler(Container& c, const trace::Scaler& s);
trace::Scaler scaler_from(const Container& c);

void save(const std::filesystem::path& path, const Container& c);
Container load(const std::filesystem::path& path);

}  // namespace ghostdet::ckpt
