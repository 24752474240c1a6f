#include "qrefine/backend_client.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <semaphore>
#include <string>

#include "httplib.h"
#include "json.hpp"
#include "qrefine/error.hpp"

namespace qrefine {
namespace {

using nlohmann::json;

constexpr std::string_view kJson = "application/json";

void validate_request(double strength, int steps, const ImageBuffer& image) {
  if (image.empty()) throw Error(ErrorKind::kValidation, "request image is empty");
  if (!(strength >= 0.0 && strength <= 1.0)) {
    throw Error(ErrorKind::kValidation, "strength " + std::to_string(strength) + " outside [0,1]");
  }
  if (steps <= 0) throw Error(ErrorKind::kValidation, "steps must be positive");
}

struct ParsedUrl {
  std::string origin;  // http://host:port
  std::string prefix;  // path prefix without trailing slash
};

ParsedUrl parse_url(std::string_view url) {
  constexpr std::string_view scheme = "http://";
  if (url.substr(0, scheme.size()) != scheme || url.size() == scheme.size()) {
    throw Error(ErrorKind::kConfig, "backend URL must start with http://, got '" + std::string(url) + "'");
  }
  const auto slash = url.find('/', scheme.size());
  ParsedUrl out;
  out.origin = std::string(url.substr(0, slash));
  if (slash != std::string_view::npos) {
    out.prefix = std::string(url.substr(slash));
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  }
  return out;
}

std::string error_message(const std::string& body) {
  const json parsed = json::parse(body, nullptr, false);
  if (parsed.is_object() && parsed.contains("error") && parsed["error"].is_string()) {
    return parsed["error"].get<std::string>();
  }
  return body;
}

}  // namespace

void BackendEndpoint::validate() const {
  parse_url(base_url);
  if (timeout.count() <= 0) throw Error(ErrorKind::kConfig, "backend timeout must be positive");
  if (max_retries < 0) throw Error(ErrorKind::kConfig, "max_retries must be non-negative");
  if (max_concurrency < 1) throw Error(ErrorKind::kConfig, "max_concurrency must be positive");
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                      static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(written));
  return out;
}

Bytes base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw Error(ErrorKind::kProtocol, "base64 length is not a multiple of 4");
  Bytes out(3 * (text.size() / 4));
  const int written = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                      static_cast<int>(text.size()));
  if (written < 0) throw Error(ErrorKind::kProtocol, "malformed base64 payload");
  // EVP_DecodeBlock counts padding as zero bytes.
  std::size_t size = static_cast<std::size_t>(written);
  if (!text.empty() && text.back() == '=') --size;
  if (text.size() >= 2 && text[text.size() - 2] == '=') --size;
  out.resize(size);
  return out;
}

std::string to_wire(const InpaintRequest& req) {
  validate_request(req.strength, req.steps, req.image);
  if (!req.mask.same_shape(req.image)) {
    throw Error(ErrorKind::kValidation, "mask dimensions differ from image dimensions");
  }
  json body = {
      {"image", base64_encode(encode_png(req.image))},
      {"mask", base64_encode(encode_mask_png(req.mask))},
      {"prompt", req.prompt},
      {"strength", req.strength},
      {"steps", req.steps},
      {"seed", req.seed},
  };
  if (req.negative_prompt) body["negative_prompt"] = *req.negative_prompt;
  return body.dump();
}

std::string to_wire(const EnhanceRequest& req) {
  validate_request(req.strength, req.steps, req.image);
  const json body = {
      {"image", base64_encode(encode_png(req.image))},
      {"prompt", req.prompt},
      {"strength", req.strength},
      {"steps", req.steps},
      {"seed", req.seed},
  };
  return body.dump();
}

struct BackendClient::Impl {
  explicit Impl(BackendEndpoint ep) : endpoint(std::move(ep)), url(parse_url(endpoint.base_url)),
                                      slots(endpoint.max_concurrency) {}

  BackendEndpoint endpoint;
  ParsedUrl url;
  std::counting_semaphore<1024> slots;
  std::atomic<std::size_t> attempts{0};

  // Sends `body` (empty for GET) with retries on transport failures only.
  std::string exchange(const std::string& route, const std::string* body) {
    if (body != nullptr && body->size() > endpoint.max_payload) {
      throw Error(ErrorKind::kRequestTooLarge, std::to_string(body->size()) + " bytes exceeds the " +
                                                   std::to_string(endpoint.max_payload) + "-byte limit");
    }
    slots.acquire();
    struct Release {
      std::counting_semaphore<1024>& s;
      ~Release() { s.release(); }
    } release{slots};

    const std::string path = url.prefix + route;
    std::string transport_error;
    for (int attempt = 0; attempt <= endpoint.max_retries; ++attempt) {
      ++attempts;
      httplib::Client cli(url.origin);
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
      const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
      cli.set_connection_timeout(secs.count(), usecs.count());
      cli.set_read_timeout(secs.count(), usecs.count());
      cli.set_write_timeout(secs.count(), usecs.count());
      httplib::Result res = body == nullptr ? cli.Get(path)
                                            : cli.Post(path, *body, std::string(kJson).c_str());
      if (!res) {
        transport_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 400) {
        throw Error(ErrorKind::kBackend, "HTTP " + std::to_string(res->status) + " from " + path + ": " +
                                             error_message(res->body));
      }
      return res->body;
    }
    throw Error(ErrorKind::kUnavailable, endpoint.base_url + route + " after " +
                                             std::to_string(endpoint.max_retries + 1) +
                                             " attempts: " + transport_error);
  }

  ImageBuffer image_response(const std::string& body, const ImageBuffer& request_image) {
    const json parsed = json::parse(body, nullptr, false);
    if (!parsed.is_object() || !parsed.contains("image") || !parsed["image"].is_string()) {
      throw Error(ErrorKind::kProtocol, "response lacks a string \"image\" field");
    }
    ImageBuffer img;
    try {
      img = decode_image(base64_decode(parsed["image"].get<std::string>()), DecodeOptions{.min_side = 1});
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kProtocol) throw;
      throw Error(ErrorKind::kProtocol, std::string("response image: ") + e.what());
    }
    if (!img.same_shape(request_image)) {
      throw Error(ErrorKind::kIntegrity, "response image is " + std::to_string(img.height()) + "x" +
                                             std::to_string(img.width()) + ", expected " +
                                             std::to_string(request_image.height()) + "x" +
                                             std::to_string(request_image.width()));
    }
    return img;
  }
};

BackendClient::BackendClient(BackendEndpoint endpoint) {
  endpoint.validate();
  impl_ = std::make_unique<Impl>(std::move(endpoint));
}

BackendClient::~BackendClient() = default;
BackendClient::BackendClient(BackendClient&&) noexcept = default;
BackendClient& BackendClient::operator=(BackendClient&&) noexcept = default;

const BackendEndpoint& BackendClient::endpoint() const noexcept { return impl_->endpoint; }

std::size_t BackendClient::attempts() const noexcept { return impl_->attempts.load(); }

HealthStatus BackendClient::health_check() const {
  const std::string body = impl_->exchange("/v1/health", nullptr);
  const json parsed = json::parse(body, nullptr, false);
  if (!parsed.is_object() || !parsed.contains("status") || !parsed["status"].is_string()) {
    throw Error(ErrorKind::kProtocol, "health response lacks a string \"status\" field");
  }
  HealthStatus out;
  out.status = parsed["status"].get<std::string>();
  if (parsed.contains("backend") && parsed["backend"].is_string()) out.backend = parsed["backend"].get<std::string>();
  return out;
}

ImageBuffer BackendClient::inpaint(const InpaintRequest& req) const {
  const std::string body = to_wire(req);
  return impl_->image_response(impl_->exchange("/v1/inpaint", &body), req.image);
}

ImageBuffer BackendClient::enhance(const EnhanceRequest& req) const {
  const std::string body = to_wire(req);
  return impl_->image_response(impl_->exchange("/v1/enhance", &body), req.image);
}

HealthStatus health_check(const BackendEndpoint& endpoint) { return BackendClient(endpoint).health_check(); }

ImageBuffer inpaint_remote(const BackendEndpoint& endpoint, const InpaintRequest& req) {
  return BackendClient(endpoint).inpaint(req);
}

ImageBuffer enhance_remote(const BackendEndpoint& endpoint, const EnhanceRequest& req) {
  return BackendClient(endpoint).enhance(req);
}

RemoteBackend::RemoteBackend(BackendEndpoint endpoint) : client_(std::move(endpoint)) {}

std::string RemoteBackend::label() const { return "remote:" + client_.endpoint().base_url; }

ImageBuffer RemoteBackend::enhance(const ImageBuffer& img, const EnhanceParams& params) const {
  return client_.enhance(EnhanceRequest{img, params.prompt, params.strength, params.steps, params.seed});
}

ImageBuffer RemoteBackend::inpaint(const ImageBuffer& img, const InpaintMask& mask,
                                   const InpaintParams& params) const {
  return client_.inpaint(InpaintRequest{img, mask, params.prompt, params.negative_prompt, params.strength,
                                        params.steps, params.seed});
}

}  // namespace qrefine
