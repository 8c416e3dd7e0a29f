#include "tailmeter/protocol.hpp"

#include <charconv>
#include <stdexcept>
#include <vector>

namespace tailmeter::memproto {

namespace {

constexpr size_t kMaxLine = 8192;
constexpr size_t kMaxValueBytes = 64u << 20;
constexpr size_t kMaxKeyLen = 250;
constexpr std::string_view kCrlf = "\r\n";

bool parse_number(std::string_view token, uint64_t& out) {
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc{} && ptr == token.data() + token.size();
}

bool parse_number32(std::string_view token, uint32_t& out) {
  uint64_t wide = 0;
  if (!parse_number(token, wide) || wide > UINT32_MAX) return false;
  out = static_cast<uint32_t>(wide);
  return true;
}

// Splits on single spaces; empty tokens (doubled or leading/trailing spaces)
// make the whole line invalid, mirroring memcached's own strictness.
bool tokenize(std::string_view line, std::vector<std::string_view>& out) {
  out.clear();
  while (!line.empty()) {
    size_t space = line.find(' ');
    std::string_view token = line.substr(0, space);
    if (token.empty()) return false;
    out.push_back(token);
    if (space == std::string_view::npos) break;
    line.remove_prefix(space + 1);
    if (line.empty()) return false;  // trailing space
  }
  return !out.empty();
}

// Locates the first CRLF. Returns npos when the buffer holds no complete
// line yet; sets oversized when no line could ever fit.
size_t find_line_end(std::string_view buffer, bool& oversized) {
  size_t eol = buffer.find(kCrlf);
  oversized = eol == std::string_view::npos ? buffer.size() > kMaxLine : eol > kMaxLine;
  return eol;
}

size_t incomplete(auto& out) {
  out.kind = {};
  return 0;
}

template <typename Message, typename Kind>
size_t malformed(Message& out, Kind kind) {
  out = Message{};
  out.kind = kind;
  return 0;
}

}  // namespace

bool valid_key(std::string_view key) {
  if (key.empty() || key.size() > kMaxKeyLen) return false;
  for (unsigned char c : key) {
    if (c <= 0x20 || c == 0x7F) return false;
  }
  return true;
}

std::string encode_get(std::string_view key) {
  if (!valid_key(key)) throw std::invalid_argument("invalid memcached key");
  std::string out;
  out.reserve(key.size() + 6);
  out.append("get ").append(key).append(kCrlf);
  return out;
}

std::string encode_set(std::string_view key, std::string_view value, uint32_t flags,
                       uint32_t exptime) {
  if (!valid_key(key)) throw std::invalid_argument("invalid memcached key");
  if (value.size() > kMaxValueBytes) throw std::invalid_argument("value too large");
  std::string out;
  out.reserve(key.size() + value.size() + 48);
  out.append("set ").append(key).append(" ").append(std::to_string(flags));
  out.append(" ").append(std::to_string(exptime));
  out.append(" ").append(std::to_string(value.size())).append(kCrlf);
  out.append(value).append(kCrlf);
  return out;
}

size_t parse_response(std::string_view buffer, Response& out) {
  out = Response{};
  bool oversized = false;
  size_t eol = find_line_end(buffer, oversized);
  if (eol == std::string_view::npos) {
    return oversized ? malformed(out, ResponseKind::Malformed) : incomplete(out);
  }
  if (oversized) return malformed(out, ResponseKind::Malformed);

  std::string_view line = buffer.substr(0, eol);
  std::vector<std::string_view> tokens;
  if (!tokenize(line, tokens)) return malformed(out, ResponseKind::Malformed);
  std::string_view verb = tokens[0];
  size_t line_consumed = eol + kCrlf.size();

  auto bare = [&](ResponseKind kind) -> size_t {
    if (tokens.size() != 1) return malformed(out, ResponseKind::Malformed);
    out.kind = kind;
    return line_consumed;
  };

  if (verb == "END") return bare(ResponseKind::Miss);
  if (verb == "STORED") return bare(ResponseKind::Stored);
  if (verb == "NOT_STORED") return bare(ResponseKind::NotStored);
  if (verb == "NOT_FOUND") return bare(ResponseKind::NotFound);
  if (verb == "ERROR") return bare(ResponseKind::Error);

  if (verb == "CLIENT_ERROR" || verb == "SERVER_ERROR") {
    out.kind = verb == "CLIENT_ERROR" ? ResponseKind::ClientError : ResponseKind::ServerError;
    size_t space = line.find(' ');
    if (space != std::string_view::npos) out.message = std::string(line.substr(space + 1));
    return line_consumed;
  }

  if (verb == "VALUE") {
    uint32_t flags = 0;
    uint64_t bytes = 0;
    if ((tokens.size() != 4 && tokens.size() != 5) || !valid_key(tokens[1]) ||
        !parse_number32(tokens[2], flags) || !parse_number(tokens[3], bytes) ||
        bytes > kMaxValueBytes) {
      return malformed(out, ResponseKind::Malformed);
    }
    if (tokens.size() == 5) {
      uint64_t cas = 0;
      if (!parse_number(tokens[4], cas)) return malformed(out, ResponseKind::Malformed);
    }
    size_t data_end = line_consumed + bytes + kCrlf.size();
    size_t frame_end = data_end + 3 + kCrlf.size();  // trailing "END\r\n"
    if (buffer.size() < frame_end) return incomplete(out);
    if (buffer.substr(line_consumed + bytes, 2) != kCrlf) {
      return malformed(out, ResponseKind::Malformed);
    }
    if (buffer.substr(data_end, 5) != "END\r\n") {
      return malformed(out, ResponseKind::Malformed);
    }
    out.kind = ResponseKind::Hit;
    out.key = std::string(tokens[1]);
    out.flags = flags;
    out.value = std::string(buffer.substr(line_consumed, bytes));
    return frame_end;
  }

  // A response stream has a closed vocabulary; an unknown verb means the
  // byte stream is out of sync.
  return malformed(out, ResponseKind::Malformed);
}

size_t parse_request(std::string_view buffer, Request& out) {
  out = Request{};
  bool oversized = false;
  size_t eol = find_line_end(buffer, oversized);
  if (eol == std::string_view::npos) {
    return oversized ? malformed(out, RequestKind::Malformed) : incomplete(out);
  }
  if (oversized) return malformed(out, RequestKind::Malformed);

  std::string_view line = buffer.substr(0, eol);
  size_t line_consumed = eol + kCrlf.size();
  std::vector<std::string_view> tokens;
  if (!tokenize(line, tokens)) {
    // The line framing itself is fine, so answer ERROR and carry on.
    out.kind = RequestKind::Unknown;
    return line_consumed;
  }
  std::string_view verb = tokens[0];

  if (verb == "get") {
    if (tokens.size() != 2 || !valid_key(tokens[1])) {
      out.kind = RequestKind::Unknown;
      return line_consumed;
    }
    out.kind = RequestKind::Get;
    out.key = std::string(tokens[1]);
    return line_consumed;
  }

  if (verb == "set") {
    uint32_t flags = 0;
    uint32_t exptime = 0;
    uint64_t bytes = 0;
    // Without a trustworthy byte count the data block cannot be skipped, so
    // a bad set line poisons the connection rather than answering ERROR.
    if (tokens.size() != 5 || !parse_number32(tokens[2], flags) ||
        !parse_number32(tokens[3], exptime) || !parse_number(tokens[4], bytes) ||
        bytes > kMaxValueBytes) {
      return malformed(out, RequestKind::Malformed);
    }
    size_t frame_end = line_consumed + bytes + kCrlf.size();
    if (buffer.size() < frame_end) return incomplete(out);
    if (buffer.substr(line_consumed + bytes, 2) != kCrlf) {
      return malformed(out, RequestKind::Malformed);
    }
    if (!valid_key(tokens[1])) {
      out.kind = RequestKind::Unknown;
      return frame_end;
    }
    out.kind = RequestKind::Set;
    out.key = std::string(tokens[1]);
    out.flags = flags;
    out.exptime = exptime;
    out.value = std::string(buffer.substr(line_consumed, bytes));
    return frame_end;
  }

  out.kind = RequestKind::Unknown;
  return line_consumed;
}

}  // namespace tailmeter::memproto
