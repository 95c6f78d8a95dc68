#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

namespace p2pagg {

// Minimal TOML-style experiment config: [section] headers, key = value lines,
// '#' comments, quoted or bare scalar values. Keys are addressed as
// "section.key". Every lookup marks the key consumed; after a module has read
// its keys, require_all_consumed() rejects anything left over, naming its
// line and column (catches typos instead of silently ignoring them).
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text,
                             const std::string& origin = "<string>");

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // CLI overrides (--params section.key=value); line/col report as 0.
  void set(const std::string& key, const std::string& value);

  void require_all_consumed() const;

  // Marks every key of a section consumed; lets a run ignore the protocol
  // sections it did not select without tripping the unknown-key guard.
  void consume_section(const std::string& section) const;

  // Hex SHA-256 over the canonical sorted key=value listing; stamped into
  // result rows so outputs are traceable to exact settings.
  std::string content_hash() const;

 private:
  struct Entry {
    std::string raw;
    int line = 0;
    int col = 0;
  };

  const Entry* lookup(const std::string& key) const;

  std::string origin_;
  std::map<std::string, Entry> values_;
  mutable std::set<std::string> consumed_;
};

}  // namespace p2pagg
