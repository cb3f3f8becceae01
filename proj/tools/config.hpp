#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace raman::cli {

/// Flat key = value configuration. Keys use dotted section names
/// ("beams.perp_power_mw"). Every key must appear in the schema; each value
/// remembers where it came from so errors can point at it.
class Config {
 public:
  struct Entry {
    std::string value;
    std::string origin;  // "default", "path:line" or "env NAME"
  };

  /// Schema with default values, in output order.
  static Config defaults();

  /// Overlays a config file. Unknown keys and malformed lines raise config
  /// errors naming the line.
  void load(std::istream& in, const std::string& source);
  void load_file(const std::string& path);

  /// Overlays RAMAN_<KEY> variables (dots and dashes become underscores).
  void apply_environment(std::string_view prefix = "RAMAN_");

  void set(const std::string& key, const std::string& value, const std::string& origin);

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  const std::string& str(const std::string& key) const;
  double number(const std::string& key) const;
  long integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  /// mJ written as a fraction ("+5/2", "-1/2") returned as 2 mJ.
  int two_m(const std::string& key) const;

  const std::vector<std::string>& keys() const { return order_; }
  static std::string environment_name(std::string_view prefix, const std::string& key);

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  std::map<std::string, Entry> entries_;
  std::vector<std::string> order_;
};

}  // namespace raman::cli
