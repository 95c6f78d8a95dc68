#include "p2pagg/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "p2pagg/bytes.hpp"
#include "p2pagg/errors.hpp"
#include "p2pagg/hash.hpp"

namespace p2pagg {

namespace {

bool valid_ident(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
      return false;
  }
  return true;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text,
                            const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip comments; '#' inside a quoted value does not count.
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("unterminated section header", lineno,
                          static_cast<int>(line.find('[')) + 1);
      section = trim(t.substr(1, t.size() - 2));
      if (!valid_ident(section))
        throw ConfigError("bad section name '" + section + "'", lineno,
                          static_cast<int>(line.find('[')) + 1);
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value", lineno, 1);
    std::string key = trim(line.substr(0, eq));
    int key_col = static_cast<int>(line.find_first_not_of(" \t")) + 1;
    if (!valid_ident(key))
      throw ConfigError("bad key '" + key + "'", lineno, key_col);
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (value.empty())
      throw ConfigError("empty value for '" + key + "'", lineno, key_col);
    std::string full = section.empty() ? key : section + "." + key;
    if (cfg.values_.count(full))
      throw ConfigError("duplicate key '" + full + "'", lineno, key_col);
    cfg.values_[full] = Entry{value, lineno, key_col};
  }
  return cfg;
}

const Config::Entry* Config::lookup(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  consumed_.insert(key);
  return &it->second;
}

bool Config::has(const std::string& key) const {
  return lookup(key) != nullptr;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  const Entry* e = lookup(key);
  return e ? e->raw : fallback;
}

int64_t Config::get_int(const std::string& key, int64_t fallback) const {
  const Entry* e = lookup(key);
  if (!e) return fallback;
  try {
    size_t pos = 0;
    int64_t v = std::stoll(e->raw, &pos);
    if (pos != e->raw.size()) throw std::invalid_argument(e->raw);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' wants an integer, got '" + e->raw + "'",
                      e->line, e->col);
  }
}

double Config::get_double(const std::string& key, double fallback) const {
  const Entry* e = lookup(key);
  if (!e) return fallback;
  try {
    size_t pos = 0;
    double v = std::stod(e->raw, &pos);
    if (pos != e->raw.size()) throw std::invalid_argument(e->raw);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' wants a number, got '" + e->raw + "'",
                      e->line, e->col);
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const Entry* e = lookup(key);
  if (!e) return fallback;
  if (e->raw == "true") return true;
  if (e->raw == "false") return false;
  throw ConfigError("'" + key + "' wants true or false, got '" + e->raw + "'",
                    e->line, e->col);
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = Entry{value, 0, 0};
  consumed_.erase(key);
}

void Config::require_all_consumed() const {
  for (const auto& [key, entry] : values_) {
    if (!consumed_.count(key))
      throw ConfigError("unknown key '" + key + "'", entry.line, entry.col);
  }
}

void Config::consume_section(const std::string& section) const {
  const std::string prefix = section + ".";
  for (const auto& [key, entry] : values_) {
    (void)entry;
    if (key.rfind(prefix, 0) == 0) consumed_.insert(key);
  }
}

std::string Config::content_hash() const {
  Sha256 h;
  for (const auto& [key, entry] : values_) {
    h.update(std::string_view(key));
    h.update(std::string_view("="));
    h.update(std::string_view(entry.raw));
    h.update(std::string_view("\n"));
  }
  Digest d = h.finish();
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (size_t i = 0; i < 8; ++i) {
    out[2 * i] = hex[d[i] >> 4];
    out[2 * i + 1] = hex[d[i] & 15];
  }
  return out;
}

}  // namespace p2pagg
