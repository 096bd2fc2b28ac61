#pragma once

// Zip and tar.gz extraction (zlib for deflate/gzip).

#include <zlib.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tsprep/error.hpp"
#include "tsprep/tensor_io.hpp"
#include "tsprep/text.hpp"

namespace tsprep::archive {

namespace fs = std::filesystem;

enum class ArchiveKind { zip, tar_gz, file };

inline ArchiveKind parse_kind(std::string_view s) {
  if (s == "zip") return ArchiveKind::zip;
  if (s == "tar-gz" || s == "tar.gz" || s == "tgz") return ArchiveKind::tar_gz;
  if (s == "file") return ArchiveKind::file;
  throw ConfigError("unknown archive kind '" + std::string(s) + "'");
}

/// Relative path for an archive entry; rejects absolute paths and `..`.
inline fs::path safe_entry_path(std::string_view name) {
  std::string norm(name);
  for (auto& ch : norm)
    if (ch == '\\') ch = '/';
  if (norm.empty() || norm.front() == '/' || (norm.size() > 1 && norm[1] == ':'))
    throw ArchiveError("unsafe entry name '" + std::string(name) + "'");
  fs::path out;
  for (auto part : text::split(norm, '/')) {
    if (part.empty() || part == ".") continue;
    if (part == "..") throw ArchiveError("unsafe entry name '" + std::string(name) + "'");
    out /= std::string(part);
  }
  return out;
}

namespace detail {

inline std::uint32_t u16(std::string_view b, std::size_t off) {
  return static_cast<unsigned char>(b[off]) | (static_cast<unsigned char>(b[off + 1]) << 8);
}
inline std::uint32_t u32(std::string_view b, std::size_t off) {
  return u16(b, off) | (u16(b, off + 2) << 16);
}

inline std::string inflate_bytes(std::string_view in, int window_bits, std::size_t size_hint = 0) {
  z_stream zs{};
  if (inflateInit2(&zs, window_bits) != Z_OK) throw ArchiveError("zlib init failed");
  std::string out;
  out.reserve(size_hint ? size_hint : in.size() * 4);
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  char buf[1 << 16];
  for (;;) {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof buf;
    const int rc = inflate(&zs, Z_NO_FLUSH);
    out.append(buf, sizeof buf - zs.avail_out);
    if (rc == Z_STREAM_END) {
      // gzip allows concatenated members
      if (window_bits > MAX_WBITS && zs.avail_in > 0) {
        inflateReset(&zs);
        continue;
      }
      break;
    }
    if (rc != Z_OK) {
      inflateEnd(&zs);
      throw ArchiveError("corrupt compressed data");
    }
    if (zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw ArchiveError("truncated compressed data");
    }
  }
  inflateEnd(&zs);
  return out;
}

inline fs::path write_entry(const fs::path& dest, std::string_view name, std::string_view bytes) {
  const fs::path rel = safe_entry_path(name);
  const fs::path target = dest / rel;
  fs::create_directories(target.parent_path());
  io::write_file(target, bytes);
  return target;
}

}  // namespace detail

/// Extracts a zip archive (stored or deflated entries; no zip64, no encryption).
inline std::vector<fs::path> extract_zip(std::string_view bytes, const fs::path& dest) {
  using namespace detail;
  if (bytes.size() < 22) throw ArchiveError("corrupt zip: too short");
  std::size_t eocd = std::string_view::npos;
  const std::size_t lowest = bytes.size() > 22 + 65535 ? bytes.size() - 22 - 65535 : 0;
  for (std::size_t p = bytes.size() - 22 + 1; p-- > lowest;)
    if (u32(bytes, p) == 0x06054b50) {
      eocd = p;
      break;
    }
  if (eocd == std::string_view::npos) throw ArchiveError("corrupt zip: no end of central directory");
  const std::size_t entries = u16(bytes, eocd + 10);
  std::size_t cd = u32(bytes, eocd + 16);

  // Validate every name before writing anything.
  struct Entry {
    std::string name;
    std::uint32_t method, flags, crc, csize, usize, local;
  };
  std::vector<Entry> list;
  for (std::size_t k = 0; k < entries; ++k) {
    if (cd + 46 > bytes.size() || u32(bytes, cd) != 0x02014b50) throw ArchiveError("corrupt zip: central directory");
    Entry e{};
    e.flags = u16(bytes, cd + 8);
    e.method = u16(bytes, cd + 10);
    e.crc = u32(bytes, cd + 16);
    e.csize = u32(bytes, cd + 20);
    e.usize = u32(bytes, cd + 24);
    const std::size_t n = u16(bytes, cd + 28), x = u16(bytes, cd + 30), c = u16(bytes, cd + 32);
    e.local = u32(bytes, cd + 42);
    if (cd + 46 + n > bytes.size()) throw ArchiveError("corrupt zip: entry name");
    e.name = std::string(bytes.substr(cd + 46, n));
    if (e.csize == 0xffffffffu || e.usize == 0xffffffffu || e.local == 0xffffffffu)
      throw ArchiveError("zip64 archives are not supported");
    if (e.name.empty() || e.name.back() != '/') safe_entry_path(e.name);
    list.push_back(std::move(e));
    cd += 46 + n + x + c;
  }

  std::vector<fs::path> out;
  for (const auto& e : list) {
    if (e.name.back() == '/') {
      fs::create_directories(dest / safe_entry_path(e.name));
      continue;
    }
    if (e.flags & 1) throw ArchiveError("encrypted zip entry " + e.name);
    if (e.local + 30 > bytes.size() || u32(bytes, e.local) != 0x04034b50)
      throw ArchiveError("corrupt zip: local header for " + e.name);
    const std::size_t data = e.local + 30 + u16(bytes, e.local + 26) + u16(bytes, e.local + 28);
    if (data + e.csize > bytes.size()) throw ArchiveError("corrupt zip: truncated " + e.name);
    const auto raw = bytes.substr(data, e.csize);
    std::string content;
    if (e.method == 0) content = std::string(raw);
    else if (e.method == 8) content = inflate_bytes(raw, -MAX_WBITS, e.usize);
    else throw ArchiveError("unsupported zip compression method " + std::to_string(e.method));
    if (content.size() != e.usize ||
        crc32(0L, reinterpret_cast<const Bytef*>(content.data()), static_cast<uInt>(content.size())) != e.crc)
      throw ArchiveError("corrupt zip: CRC mismatch for " + e.name);
    out.push_back(write_entry(dest, e.name, content));
  }
  return out;
}

/// Extracts a gzip-compressed (ustar/GNU/pax) tar archive. Links are skipped.
inline std::vector<fs::path> extract_tar_gz(std::string_view gz, const fs::path& dest) {
  const std::string tar = detail::inflate_bytes(gz, 16 + MAX_WBITS);
  auto field = [&](std::size_t off, std::size_t len) {
    auto f = std::string_view(tar).substr(off, len);
    return f.substr(0, f.find('\0'));
  };
  auto octal = [&](std::size_t off, std::size_t len) {
    std::uint64_t v = 0;
    for (char ch : text::trim(field(off, len))) {
      if (ch < '0' || ch > '7') throw ArchiveError("corrupt tar: bad octal field");
      v = v * 8 + static_cast<std::uint64_t>(ch - '0');
    }
    return v;
  };

  struct Pending {
    std::string name;
    std::string_view content;
  };
  std::vector<Pending> files;
  std::vector<std::string> dirs;
  std::string long_name;
  std::size_t pos = 0;
  while (pos + 512 <= tar.size()) {
    const auto block = std::string_view(tar).substr(pos, 512);
    if (block.find_first_not_of('\0') == std::string_view::npos) break;
    std::uint64_t sum = 0;
    for (std::size_t k = 0; k < 512; ++k)
      sum += (k >= 148 && k < 156) ? ' ' : static_cast<unsigned char>(block[k]);
    if (sum != octal(pos + 148, 8)) throw ArchiveError("corrupt tar: header checksum");
    const std::uint64_t size = octal(pos + 124, 12);
    const char type = tar[pos + 156];
    std::string name(field(pos, 100));
    if (field(pos + 257, 5) == "ustar" && !field(pos + 345, 155).empty())
      name = std::string(field(pos + 345, 155)) + "/" + name;
    if (!long_name.empty()) {
      name = std::move(long_name);
      long_name.clear();
    }
    const std::size_t data = pos + 512;
    if (data + size > tar.size()) throw ArchiveError("corrupt tar: truncated entry " + name);
    const auto content = std::string_view(tar).substr(data, size);
    if (type == 'L') {
      long_name = std::string(content.substr(0, content.find('\0')));
    } else if (type == 'x') {
      // pax records "<len> key=value\n"; only path matters here
      std::size_t p = 0;
      while (p < content.size()) {
        const auto sp = content.find(' ', p);
        auto len = text::parse_int<std::size_t>(content.substr(p, sp - p));
        if (!len || *len == 0) break;
        const auto rec = content.substr(sp + 1, *len - (sp - p) - 2);
        if (rec.substr(0, 5) == "path=") long_name = std::string(rec.substr(5));
        p += *len;
      }
    } else if (type == '0' || type == '\0' || type == '7') {
      safe_entry_path(name);
      files.push_back({name, content});
    } else if (type == '5') {
      safe_entry_path(name);
      dirs.push_back(name);
    }
    pos = data + (size + 511) / 512 * 512;
  }
  for (const auto& d : dirs) fs::create_directories(dest / safe_entry_path(d));
  std::vector<fs::path> out;
  for (const auto& f : files) out.push_back(detail::write_entry(dest, f.name, f.content));
  return out;
}

inline std::vector<fs::path> extract(const fs::path& archive, ArchiveKind kind, const fs::path& dest) {
  if (!fs::exists(archive)) throw IoError("archive not found: " + archive.string());
  fs::create_directories(dest);
  if (kind == ArchiveKind::file) return {archive};
  const std::string bytes = io::read_file(archive);
  return kind == ArchiveKind::zip ? extract_zip(bytes, dest) : extract_tar_gz(bytes, dest);
}

}  // namespace tsprep::archive
