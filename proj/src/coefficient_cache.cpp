#include "idfield/coefficient_cache.hpp"

#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>

#include "idfield/errors.hpp"

namespace idfield {
namespace {

constexpr const char* kMagic = "idfield-coefficients 1";

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

bool parse_double(const std::string& token, double& out) {
  char* end = nullptr;
  out = std::strtod(token.c_str(), &end);
  return end != token.c_str() && *end == '\0';
}

std::string header_key(const std::string& kernel_id, const CoefficientSet& set) {
  std::ostringstream os;
  os << "kernel " << kernel_id << '\n' << "target";
  for (double t : set.target) os << ' ' << hexfloat(t);
  os << '\n'
     << "level " << set.level << '\n'
     << "delta " << hexfloat(set.delta) << '\n'
     << "dim " << set.dim << '\n'
     << "halfwidth " << hexfloat(set.halfwidth) << '\n'
     << "exact " << (set.exact ? 1 : 0) << '\n';
  return os.str();
}

std::string body(const CoefficientSet& set) {
  std::ostringstream os;
  for (std::size_t p = 0; p < set.values.size(); ++p) {
    const HaarIndex idx = index_at(p, set.dim);
    if (idx.father) {
      os << "F " << hexfloat(set.values[p]) << '\n';
      continue;
    }
    os << "D " << idx.e << ' ' << idx.level;
    for (int j : idx.offset) os << ' ' << j;
    os << ' ' << hexfloat(set.values[p]) << '\n';
  }
  return os.str();
}

}  // namespace

void write_coefficients(const std::filesystem::path& path, const std::string& kernel_id,
                        const CoefficientSet& set) {
  if (kernel_id.find('\n') != std::string::npos)
    throw UsageError("coefficient cache: kernel id must be a single line");
  const std::string head = header_key(kernel_id, set);
  const std::string records = body(set);
  const std::uint64_t sum = fnv1a(head + records);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << kMagic << '\n' << head << "records " << set.values.size() << '\n'
        << "checksum " << std::hex << sum << std::dec << '\n' << records;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::optional<CoefficientSet> read_coefficients(const std::filesystem::path& path,
                                                const std::string& kernel_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string line;
  if (!std::getline(in, line) || line != kMagic) return std::nullopt;

  CoefficientSet set;
  std::string head;
  std::size_t records = 0;
  std::uint64_t checksum = 0;
  bool have_checksum = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "records") {
      ls >> records;
      continue;
    }
    if (key == "checksum") {
      ls >> std::hex >> checksum;
      have_checksum = !ls.fail();
      break;
    }
    head += line + '\n';
    if (key == "kernel") {
      if (line.size() < 7 || line.substr(7) != kernel_id) return std::nullopt;
    } else if (key == "target") {
      std::string tok;
      while (ls >> tok) {
        double v;
        if (!parse_double(tok, v)) return std::nullopt;
        set.target.push_back(v);
      }
    } else if (key == "level") {
      ls >> set.level;
    } else if (key == "delta" || key == "halfwidth") {
      std::string tok;
      ls >> tok;
      if (!parse_double(tok, key == "delta" ? set.delta : set.halfwidth)) return std::nullopt;
    } else if (key == "dim") {
      ls >> set.dim;
    } else if (key == "exact") {
      int e = 0;
      ls >> e;
      set.exact = e != 0;
    } else {
      return std::nullopt;
    }
  }
  if (!have_checksum || set.dim < 1 || set.dim > 8 || set.level < 0 || set.level > 30)
    return std::nullopt;
  if (records != coefficient_count(set.level, set.dim)) return std::nullopt;

  std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (fnv1a(head + rest) != checksum) return std::nullopt;

  set.values.assign(records, 0.0);
  std::istringstream rs(rest);
  for (std::size_t p = 0; p < records; ++p) {
    if (!std::getline(rs, line)) return std::nullopt;
    std::istringstream ls(line);
    std::string kind, tok;
    ls >> kind;
    HaarIndex idx;
    if (kind == "D") {
      idx.father = false;
      ls >> idx.e >> idx.level;
      idx.offset.resize(static_cast<std::size_t>(set.dim));
      for (int& j : idx.offset) ls >> j;
    } else if (kind != "F") {
      return std::nullopt;
    }
    ls >> tok;
    double v;
    if (ls.fail() || !parse_double(tok, v)) return std::nullopt;
    try {
      if (flat_position(idx, set.dim) != p) return std::nullopt;
    } catch (const UsageError&) {
      return std::nullopt;
    }
    set.values[p] = v;
  }
  return set;
}

CoefficientCache::CoefficientCache(std::optional<std::filesystem::path> directory)
    : directory_(std::move(directory)) {
  if (directory_) std::filesystem::create_directories(*directory_);
}

std::filesystem::path CoefficientCache::file_for(const std::string& kernel_id, const Point& target,
                                                 int level, double delta) const {
  std::ostringstream key;
  key << kernel_id << '|' << level << '|' << hexfloat(delta);
  for (double t : target) key << '|' << hexfloat(t);
  char name[40];
  std::snprintf(name, sizeof name, "%016llx.coef",
                static_cast<unsigned long long>(fnv1a(key.str())));
  return directory_.value_or(".") / name;
}

std::shared_ptr<const CoefficientSet> CoefficientCache::get_or_compute(
    const std::string& kernel_id, const Point& target, int level, double delta,
    const std::function<CoefficientSet()>& compute) {
  const Key key{kernel_id, target, level, delta};
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
      ++hits_;
      return it->second;
    }
  }
  // Load or compute without holding the lock so distinct keys proceed in
  // parallel; if two threads race on one key the first insert wins.
  std::shared_ptr<const CoefficientSet> entry;
  bool fresh = false;
  if (directory_) {
    const auto path = file_for(kernel_id, target, level, delta);
    if (std::filesystem::exists(path)) {
      auto loaded = read_coefficients(path, kernel_id);
      if (loaded && loaded->target == target && loaded->level == level && loaded->delta == delta) {
        entry = std::make_shared<const CoefficientSet>(std::move(*loaded));
      } else {
        ++rejected_;
      }
    }
  }
  if (!entry) {
    entry = std::make_shared<const CoefficientSet>(compute());
    fresh = true;
  }
  std::unique_lock lock(mutex_);
  auto [it, inserted] = entries_.emplace(key, entry);
  if (!inserted) {
    ++hits_;
    return it->second;
  }
  if (fresh) {
    ++misses_;
    if (directory_) write_coefficients(file_for(kernel_id, target, level, delta), kernel_id, *entry);
  } else {
    ++hits_;
  }
  return entry;
}

std::size_t CoefficientCache::hits() const { return hits_; }
std::size_t CoefficientCache::misses() const { return misses_; }
std::size_t CoefficientCache::rejected_files() const { return rejected_; }

}  // namespace idfield
