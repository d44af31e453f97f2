// Copyright 2026 The simqppo Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file checkpoint.hpp
 * Versioned binary container for named tensors plus string metadata.
 *
 * Layout (all integers little-endian, doubles in host IEEE-754 binary64):
 *   "SQPPOCKP" | u32 version | u64 n_meta | {str key, str value}* |
 *   u64 n_tensors | {str name, i64 rows, i64 cols, rows*cols f64 column-major}*
 * where str = u32 length followed by raw bytes.
 */
#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

#include "types.hpp"

namespace simqppo {

class CheckpointError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class Checkpoint {
  public:
    static constexpr std::array<char, 8> kMagic{'S', 'Q', 'P', 'P', 'O', 'C', 'K', 'P'};
    static constexpr std::uint32_t kVersion = 1;

    void put(const std::string &name, const RMatrix &tensor) { tensors_[name] = tensor; }

    [[nodiscard]] bool has(const std::string &name) const { return tensors_.contains(name); }

    [[nodiscard]] const RMatrix &get(const std::string &name) const {
        const auto it = tensors_.find(name);
        if (it == tensors_.end()) {
            throw CheckpointError("checkpoint has no tensor '" + name + "'");
        }
        return it->second;
    }

    void set_meta(const std::string &key, const std::string &value) { meta_[key] = value; }

    [[nodiscard]] const std::string &meta(const std::string &key) const {
        const auto it = meta_.find(key);
        if (it == meta_.end()) {
            throw CheckpointError("checkpoint has no metadata '" + key + "'");
        }
        return it->second;
    }

    [[nodiscard]] const std::map<std::string, RMatrix> &tensors() const { return tensors_; }
    [[nodiscard]] const std::map<std::string, std::string> &metadata() const { return meta_; }

    void write(std::ostream &os) const {
        static_assert(std::endian::native == std::endian::little,
                      "checkpoint writer assumes a little-endian host");
        os.write(kMagic.data(), kMagic.size());
        put_pod(os, kVersion);
        put_pod(os, static_cast<std::uint64_t>(meta_.size()));
        for (const auto &[k, v] : meta_) {
            put_str(os, k);
            put_str(os, v);
        }
        put_pod(os, static_cast<std::uint64_t>(tensors_.size()));
        for (const auto &[name, t] : tensors_) {
            put_str(os, name);
            put_pod(os, static_cast<std::int64_t>(t.rows()));
            put_pod(os, static_cast<std::int64_t>(t.cols()));
            os.write(reinterpret_cast<const char *>(t.data()),
                     static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(t.size())));
        }
        if (!os) {
            throw CheckpointError("failed writing checkpoint");
        }
    }

    static Checkpoint read(std::istream &is) {
        std::array<char, 8> magic{};
        is.read(magic.data(), magic.size());
        if (!is || magic != kMagic) {
            throw CheckpointError("not a checkpoint file (bad magic)");
        }
        const auto version = get_pod<std::uint32_t>(is);
        if (version != kVersion) {
            throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
        }
        Checkpoint ck;
        const auto n_meta = get_pod<std::uint64_t>(is);
        for (std::uint64_t i = 0; i < n_meta; ++i) {
            std::string k = get_str(is);
            ck.meta_[k] = get_str(is);
        }
        const auto n_tensors = get_pod<std::uint64_t>(is);
        for (std::uint64_t i = 0; i < n_tensors; ++i) {
            std::string name = get_str(is);
            const auto rows = get_pod<std::int64_t>(is);
            const auto cols = get_pod<std::int64_t>(is);
            if (rows < 0 || cols < 0 || rows * cols > (std::int64_t{1} << 32)) {
                throw CheckpointError("corrupt tensor header for '" + name + "'");
            }
            RMatrix t(rows, cols);
            is.read(reinterpret_cast<char *>(t.data()),
                    static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(t.size())));
            if (!is) {
                throw CheckpointError("truncated tensor '" + name + "'");
            }
            ck.tensors_[name] = std::move(t);
        }
        return ck;
    }

    void save(const std::string &path) const {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os) {
            throw CheckpointError("cannot open '" + path + "' for writing");
        }
        write(os);
    }

    static Checkpoint load(const std::string &path) {
        std::ifstream is(path, std::ios::binary);
        if (!is) {
            throw CheckpointError("cannot open '" + path + "'");
        }
        return read(is);
    }

  private:
    template <class T> static void put_pod(std::ostream &os, T v) {
        os.write(reinterpret_cast<const char *>(&v), sizeof(T));
    }
    template <class T> static T get_pod(std::istream &is) {
        T v{};
        is.read(reinterpret_cast<char *>(&v), sizeof(T));
        if (!is) {
            throw CheckpointError("truncated checkpoint");
        }
        return v;
    }
    static void put_str(std::ostream &os, const std::string &s) {
        put_pod(os, static_cast<std::uint32_t>(s.size()));
        os.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    static std::string get_str(std::istream &is) {
        const auto n = get_pod<std::uint32_t>(is);
        if (n > (1u << 26)) {
            throw CheckpointError("corrupt string length in checkpoint");
        }
        std::string s(n, '\0');
        is.read(s.data(), n);
        if (!is) {
            throw CheckpointError("truncated checkpoint string");
        }
        return s;
    }

    std::map<std::string, RMatrix> tensors_;
    std::map<std::string, std::string> meta_;
};

} // namespace simqppo
