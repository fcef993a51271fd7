#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "semlead/common.hpp"

namespace semlead::binio {

// Little-endian host assumed; files are not meant to travel across
// architectures.

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  template <typename T>
  void put(const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    os_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }

  void put_string(const std::string& s) {
    put<std::uint64_t>(s.size());
    os_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

  template <typename T>
  void put_vector(const std::vector<T>& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    put<std::uint64_t>(v.size());
    os_.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(T)));
  }

  void put_raw(const void* data, std::size_t bytes) {
    os_.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  }

 private:
  std::ostream& os_;
};

class Reader {
 public:
  Reader(std::istream& is, std::string what) : is_(is), what_(std::move(what)) {}

  template <typename T>
  T get() {
    static_assert(std::is_trivially_copyable_v<T>);
    T v;
    read(&v, sizeof(T));
    return v;
  }

  std::string get_string(std::uint64_t max_len = 1ULL << 32) {
    auto n = get<std::uint64_t>();
    if (n > max_len) fail("string length out of range");
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }

  template <typename T>
  std::vector<T> get_vector(std::uint64_t max_len = 1ULL << 36) {
    auto n = get<std::uint64_t>();
    if (n > max_len) fail("vector length out of range");
    std::vector<T> v(n);
    read(v.data(), n * sizeof(T));
    return v;
  }

  void get_raw(void* data, std::size_t bytes) { read(data, bytes); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(what_ + ": " + msg);
  }

 private:
  void read(void* dst, std::size_t bytes) {
    is_.read(static_cast<char*>(dst), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(is_.gcount()) != bytes) fail("truncated file");
  }

  std::istream& is_;
  std::string what_;
};

}  // namespace semlead::binio
