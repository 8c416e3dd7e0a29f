#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace tailmeter::memproto {

/// memcached ASCII framing for the get/set subset, client and server side.
///
/// The parse_* functions are incremental and total: feed them whatever bytes
/// have arrived, and they either consume exactly one complete message from
/// the front of the buffer, report Incomplete (consumed == 0, wait for more
/// bytes), or report Malformed (consumed == 0, the connection is poisoned
/// and must be dropped, since byte boundaries can no longer be trusted).
/// Arbitrary input never makes them read out of bounds or consume past a
/// message boundary.

/// Keys are 1..250 bytes with no whitespace or control characters.
bool valid_key(std::string_view key);

/// "get <key>\r\n". Throws std::invalid_argument on an invalid key.
std::string encode_get(std::string_view key);

/// "set <key> <flags> <exptime> <bytes>\r\n<value>\r\n".
std::string encode_set(std::string_view key, std::string_view value, uint32_t flags = 0,
                       uint32_t exptime = 0);

enum class ResponseKind : uint8_t {
  Incomplete,
  Malformed,
  Hit,        // VALUE ... END
  Miss,       // END with no VALUE
  Stored,
  NotStored,
  NotFound,
  Error,        // ERROR (unknown command)
  ClientError,  // CLIENT_ERROR <message>
  ServerError,  // SERVER_ERROR <message>
};

struct Response {
  ResponseKind kind = ResponseKind::Incomplete;
  std::string key;      // Hit
  std::string value;    // Hit
  uint32_t flags = 0;   // Hit
  std::string message;  // ClientError / ServerError
};

/// Parses one response from the front of buffer. Returns bytes consumed.
size_t parse_response(std::string_view buffer, Response& out);

enum class RequestKind : uint8_t {
  Incomplete,
  Malformed,
  Get,
  Set,
  Unknown,  // recognisably framed line we do not serve; answer ERROR
};

struct Request {
  RequestKind kind = RequestKind::Incomplete;
  std::string key;
  std::string value;  // Set
  uint32_t flags = 0;
  uint32_t exptime = 0;
};

/// Parses one request from the front of buffer. Returns bytes consumed.
size_t parse_request(std::string_view buffer, Request& out);

}  // namespace tailmeter::memproto
