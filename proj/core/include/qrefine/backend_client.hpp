#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "qrefine/codec.hpp"
#include "qrefine/enhancer.hpp"
#include "qrefine/image.hpp"
#include "qrefine/quality_field.hpp"

namespace qrefine {

// Wire protocol v1 (HTTP, UTF-8 JSON bodies):
//   GET  /v1/health   -> {"status":"ok","backend":<label>}
//   POST /v1/inpaint  <- {"image","mask","prompt","negative_prompt"?,"strength","steps","seed"}
//   POST /v1/enhance  <- {"image","prompt","strength","steps","seed"}
//   both              -> {"image":<base64 PNG>,"backend":<label>}
//   errors            -> {"error":<message>} with an HTTP status >= 400
// Images are RGB PNG, masks 8-bit grayscale PNG (255 = modify), both in
// RFC 4648 base64. Unknown fields are ignored.

struct BackendEndpoint {
  std::string base_url;  // http://host:port[/prefix]
  std::chrono::milliseconds timeout{std::chrono::seconds(120)};
  int max_retries = 2;  // connection failures only, never HTTP errors
  std::size_t max_payload = 32u << 20;
  int max_concurrency = 2;

  void validate() const;
};

struct HealthStatus {
  std::string status;
  std::string backend;
};

struct InpaintRequest {
  ImageBuffer image;
  InpaintMask mask;
  std::string prompt;
  std::optional<std::string> negative_prompt;
  double strength = 0.75;
  int steps = 30;
  std::uint64_t seed = 0;
};

struct EnhanceRequest {
  ImageBuffer image;
  std::string prompt;
  double strength = 0.30;
  int steps = 30;
  std::uint64_t seed = 0;
};

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws kProtocol on malformed input.
Bytes base64_decode(std::string_view text);

/// Request bodies. Both validate first and throw kValidation on bad
/// strength/steps or mismatched mask dimensions.
std::string to_wire(const InpaintRequest& req);
std::string to_wire(const EnhanceRequest& req);

/// Thread-safe protocol client. At most max_concurrency requests are in
/// flight per client; request bodies are serialized once and resent
/// verbatim on retry.
class BackendClient {
 public:
  explicit BackendClient(BackendEndpoint endpoint);
  ~BackendClient();
  BackendClient(BackendClient&&) noexcept;
  BackendClient& operator=(BackendClient&&) noexcept;

  const BackendEndpoint& endpoint() const noexcept;

  HealthStatus health_check() const;
  ImageBuffer inpaint(const InpaintRequest& req) const;
  ImageBuffer enhance(const EnhanceRequest& req) const;

  /// Total HTTP attempts issued so far, retries included.
  std::size_t attempts() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

HealthStatus health_check(const BackendEndpoint& endpoint);
ImageBuffer inpaint_remote(const BackendEndpoint& endpoint, const InpaintRequest& req);
ImageBuffer enhance_remote(const BackendEndpoint& endpoint, const EnhanceRequest& req);

/// Enhancer adapter over BackendClient: prompt-guided enhancement and
/// inpainting delegated to the remote service.
class RemoteBackend final : public Enhancer {
 public:
  explicit RemoteBackend(BackendEndpoint endpoint);

  std::string label() const override;
  Capabilities capabilities() const override { return {.prompt_guided = true, .inpaint = true}; }
  ImageBuffer enhance(const ImageBuffer& img, const EnhanceParams& params) const override;
  ImageBuffer inpaint(const ImageBuffer& img, const InpaintMask& mask,
                      const InpaintParams& params) const override;

  const BackendClient& client() const noexcept { return client_; }

 private:
  BackendClient client_;
};

}  // namespace qrefine
