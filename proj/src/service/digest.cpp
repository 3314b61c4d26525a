#include <cstdio>

#include <openssl/evp.h>

#include "geobim/digest.hpp"
#include "geobim/error.hpp"

namespace geobim {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::Io, "SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string parameter_hash(const FootprintParams& p) {
  return sha256_hex("footprint;cut_offset=" + num(p.cut_offset) + ";sample_spacing=" + num(p.sample_spacing) +
                    ";dbscan_eps=" + num(p.dbscan_eps) + ";dbscan_min_pts=" + std::to_string(p.dbscan_min_pts) +
                    ";hull_k=" + std::to_string(p.hull_k));
}

std::string parameter_hash(const RepairParams& p) {
  return sha256_hex("repair;elev_buffer=" + num(p.elev_buffer) + ";min_elements=" + std::to_string(p.min_elements) +
                    ";span_policy=keep");
}

}  // namespace geobim
