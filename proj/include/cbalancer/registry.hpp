#pragma once

#include <openssl/evp.h>

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cbalancer/error.hpp"

namespace cbalancer {

using Digest = std::string;  // lowercase hex SHA-256
using DigestSet = std::set<Digest>;

inline Digest sha256_hex(std::string_view content) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(content.data(), content.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCategory::IoError, "sha256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  Digest out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

struct Layer {
  Digest digest;
  std::uint64_t size_bytes = 0;
  std::optional<Digest> parent_digest;
};

struct ImageManifest {
  std::string image_ref;
  std::vector<Layer> layers;  // base -> top, read-only
  Layer init;                 // thin writable layer

  std::uint64_t base_bytes() const {
    std::uint64_t s = 0;
    for (const auto& l : layers) s += l.size_bytes;
    return s;
  }
  std::uint64_t total_bytes() const { return base_bytes() + init.size_bytes; }

  bool well_formed() const {
    if (layers.empty()) return false;
    std::optional<Digest> parent;
    for (const auto& l : layers) {
      if (l.parent_digest != parent || l.size_bytes == 0) return false;
      if (l.digest == init.digest) return false;
      parent = l.digest;
    }
    return init.parent_digest == parent && init.size_bytes > 0;
  }
};

inline std::string empty_init_content(const std::string& image_ref) {
  return "init:empty:" + image_ref;
}

/// Builds a manifest from synthetic layer content identifiers.
inline ImageManifest make_image(const std::string& image_ref,
                                const std::vector<std::pair<std::string, std::uint64_t>>& layers,
                                std::uint64_t empty_init_bytes) {
  if (layers.empty()) fail(ErrorCategory::ValidationError, "image " + image_ref + " has no layers");
  ImageManifest m;
  m.image_ref = image_ref;
  std::optional<Digest> parent;
  for (const auto& [content, size] : layers) {
    if (size == 0) fail(ErrorCategory::ValidationError, "layer " + content + " has zero size");
    Layer l{sha256_hex("layer:" + content), size, parent};
    parent = l.digest;
    m.layers.push_back(std::move(l));
  }
  m.init = Layer{sha256_hex(empty_init_content(image_ref)), empty_init_bytes, parent};
  return m;
}

/// State of a container's writable layer at commit time.
struct WritableLayer {
  std::string container_id;
  std::uint64_t bytes_written = 0;
  bool stopped = false;
};

/// Snapshot a stopped container's file system as a new image. Untouched
/// containers keep the image's original init digest.
inline ImageManifest commit(const ImageManifest& image, const WritableLayer& fs) {
  if (!fs.stopped) {
    fail(ErrorCategory::ContainerRunning, "commit: container " + fs.container_id + " is running");
  }
  ImageManifest out = image;
  out.image_ref = image.image_ref + "@" + fs.container_id;
  if (fs.bytes_written > 0) {
    out.init.digest = sha256_hex("init:" + image.image_ref + ":" + fs.container_id + ":" +
                                 std::to_string(fs.bytes_written));
    out.init.size_bytes = image.init.size_bytes + fs.bytes_written;
  }
  return out;
}

struct StoredLayer {
  std::uint64_t size_bytes = 0;
  std::string first_image_ref;
};

/// Single private registry: content-addressed layer store plus manifests.
struct RegistryState {
  std::map<Digest, StoredLayer> stored;
  std::map<std::string, ImageManifest> manifests;

  bool contains(const Digest& d) const { return stored.count(d) != 0; }

  std::uint64_t stored_bytes() const {
    std::uint64_t s = 0;
    for (const auto& [_, l] : stored) s += l.size_bytes;
    return s;
  }
};

namespace detail {
template <typename F>
void for_each_layer(const ImageManifest& m, F&& f) {
  for (const auto& l : m.layers) f(l);
  f(m.init);
}
}  // namespace detail

/// Bytes a push would transfer without changing the registry.
inline std::uint64_t push_bytes(const ImageManifest& manifest, const RegistryState& registry) {
  std::uint64_t bytes = 0;
  DigestSet seen;
  detail::for_each_layer(manifest, [&](const Layer& l) {
    if (!registry.contains(l.digest) && seen.insert(l.digest).second) bytes += l.size_bytes;
  });
  return bytes;
}

/// Uploads missing layers; layers already stored cost nothing.
inline std::uint64_t push(const ImageManifest& manifest, RegistryState& registry) {
  std::uint64_t bytes = 0;
  detail::for_each_layer(manifest, [&](const Layer& l) {
    auto [it, inserted] = registry.stored.try_emplace(l.digest, StoredLayer{l.size_bytes, manifest.image_ref});
    if (inserted) bytes += l.size_bytes;
  });
  registry.manifests[manifest.image_ref] = manifest;
  return bytes;
}

inline std::uint64_t pull_bytes(const ImageManifest& manifest, const DigestSet& node_layers) {
  std::uint64_t bytes = 0;
  DigestSet seen;
  detail::for_each_layer(manifest, [&](const Layer& l) {
    if (!node_layers.count(l.digest) && seen.insert(l.digest).second) bytes += l.size_bytes;
  });
  return bytes;
}

/// Fetches the layers of `image_ref` that the node does not hold yet.
inline std::uint64_t pull(const std::string& image_ref, const RegistryState& registry,
                          DigestSet& node_layers) {
  auto it = registry.manifests.find(image_ref);
  if (it == registry.manifests.end()) {
    fail(ErrorCategory::UnknownImage, "pull: registry has no image " + image_ref);
  }
  std::uint64_t bytes = 0;
  detail::for_each_layer(it->second, [&](const Layer& l) {
    if (node_layers.insert(l.digest).second) bytes += l.size_bytes;
  });
  return bytes;
}

// Dump format, one record per line:
//   layer <digest> <size_bytes> <image_ref>
//   manifest <image_ref> <init_digest>:<init_size> <digest>:<size>[,<digest>:<size>...]
inline void dump_registry(const RegistryState& registry, std::ostream& os) {
  for (const auto& [digest, l] : registry.stored) {
    os << "layer " << digest << ' ' << l.size_bytes << ' ' << l.first_image_ref << '\n';
  }
  for (const auto& [ref, m] : registry.manifests) {
    os << "manifest " << ref << ' ' << m.init.digest << ':' << m.init.size_bytes << ' ';
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
      if (i) os << ',';
      os << m.layers[i].digest << ':' << m.layers[i].size_bytes;
    }
    os << '\n';
  }
}

inline RegistryState load_registry(std::istream& is) {
  RegistryState reg;
  std::string line;
  std::size_t lineno = 0;
  auto bad = [&](const std::string& why) {
    fail(ErrorCategory::ParseError, "registry dump line " + std::to_string(lineno) + ": " + why);
  };
  auto split_layer = [&](const std::string& tok) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos) bad("expected digest:size");
    return std::pair{tok.substr(0, colon), std::stoull(tok.substr(colon + 1))};
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "layer") {
      Digest d;
      StoredLayer l;
      if (!(ls >> d >> l.size_bytes >> l.first_image_ref)) bad("malformed layer record");
      reg.stored[d] = l;
    } else if (kind == "manifest") {
      ImageManifest m;
      std::string init_tok, layers_tok;
      if (!(ls >> m.image_ref >> init_tok >> layers_tok)) bad("malformed manifest record");
      std::optional<Digest> parent;
      std::istringstream lt(layers_tok);
      std::string tok;
      while (std::getline(lt, tok, ',')) {
        auto [d, s] = split_layer(tok);
        m.layers.push_back(Layer{d, s, parent});
        parent = d;
      }
      auto [d, s] = split_layer(init_tok);
      m.init = Layer{d, s, parent};
      reg.manifests[m.image_ref] = std::move(m);
    } else {
      bad("unknown record '" + kind + "'");
    }
  }
  return reg;
}

}  // namespace cbalancer
