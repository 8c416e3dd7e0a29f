#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "tailmeter/protocol.hpp"
#include "tailmeter/rng.hpp"

using namespace tailmeter;
using namespace tailmeter::memproto;

namespace {

Response parse_r(std::string_view buffer, size_t& consumed) {
  Response out;
  consumed = parse_response(buffer, out);
  return out;
}

Request parse_q(std::string_view buffer, size_t& consumed) {
  Request out;
  consumed = parse_request(buffer, out);
  return out;
}

}  // namespace

TEST_CASE("keys are validated") {
  CHECK(valid_key("a"));
  CHECK(valid_key("user:123_tail-99"));
  CHECK(valid_key(std::string(250, 'k')));
  CHECK_FALSE(valid_key(""));
  CHECK_FALSE(valid_key(std::string(251, 'k')));
  CHECK_FALSE(valid_key("a b"));
  CHECK_FALSE(valid_key("a\tb"));
  CHECK_FALSE(valid_key("a\rb"));
  CHECK_FALSE(valid_key(std::string("a\0b", 3)));
  CHECK_FALSE(valid_key("a\x7f"));
}

TEST_CASE("requests encode to the wire format") {
  CHECK(encode_get("k1") == "get k1\r\n");
  CHECK(encode_set("key", "ab") == "set key 0 0 2\r\nab\r\n");
  CHECK(encode_set("key", "", 7, 60) == "set key 7 60 0\r\n\r\n");
  CHECK_THROWS_AS(encode_get("bad key"), std::invalid_argument);
  CHECK_THROWS_AS(encode_get(""), std::invalid_argument);
  CHECK_THROWS_AS(encode_set("k\x7f", "v"), std::invalid_argument);
}

TEST_CASE("single-line responses parse") {
  size_t consumed = 0;

  auto miss = parse_r("END\r\n", consumed);
  CHECK(miss.kind == ResponseKind::Miss);
  CHECK(consumed == 5);

  auto stored = parse_r("STORED\r\ntrailing bytes", consumed);
  CHECK(stored.kind == ResponseKind::Stored);
  CHECK(consumed == 8);

  CHECK(parse_r("NOT_STORED\r\n", consumed).kind == ResponseKind::NotStored);
  CHECK(parse_r("NOT_FOUND\r\n", consumed).kind == ResponseKind::NotFound);
  CHECK(parse_r("ERROR\r\n", consumed).kind == ResponseKind::Error);

  auto client = parse_r("CLIENT_ERROR bad data chunk\r\n", consumed);
  CHECK(client.kind == ResponseKind::ClientError);
  CHECK(client.message == "bad data chunk");

  auto server = parse_r("SERVER_ERROR out of memory\r\n", consumed);
  CHECK(server.kind == ResponseKind::ServerError);
  CHECK(server.message == "out of memory");
}

TEST_CASE("hits carry key, flags and the exact value bytes") {
  size_t consumed = 0;
  std::string frame = "VALUE k1 13 5\r\nhello\r\nEND\r\n";
  auto hit = parse_r(frame, consumed);
  CHECK(consumed == frame.size());
  CHECK(hit.kind == ResponseKind::Hit);
  CHECK(hit.key == "k1");
  CHECK(hit.flags == 13);
  CHECK(hit.value == "hello");

  // binary-unsafe bytes and an embedded END must not confuse the framing
  std::string tricky = std::string("VALUE k 0 9\r\n") + "END\r\nEND " + "\r\nEND\r\n";
  auto hit2 = parse_r(tricky, consumed);
  CHECK(consumed == tricky.size());
  CHECK(hit2.kind == ResponseKind::Hit);
  CHECK(hit2.value == "END\r\nEND ");

  // optional cas token
  auto hit3 = parse_r("VALUE k 0 2 42\r\nab\r\nEND\r\n", consumed);
  CHECK(hit3.kind == ResponseKind::Hit);
  CHECK(hit3.value == "ab");

  // empty value
  auto hit4 = parse_r("VALUE k 0 0\r\n\r\nEND\r\n", consumed);
  CHECK(hit4.kind == ResponseKind::Hit);
  CHECK(hit4.value.empty());
}

TEST_CASE("partial responses report incomplete without consuming") {
  std::vector<std::string> frames = {
      "END\r\n",
      "STORED\r\n",
      "CLIENT_ERROR bad data chunk\r\n",
      "VALUE k1 13 5\r\nhello\r\nEND\r\n",
      "VALUE k 0 0\r\n\r\nEND\r\n",
  };
  for (const auto& frame : frames) {
    for (size_t cut = 0; cut < frame.size(); ++cut) {
      size_t consumed = 0;
      auto partial = parse_r(frame.substr(0, cut), consumed);
      CHECK(consumed == 0);
      CHECK(partial.kind == ResponseKind::Incomplete);
    }
    size_t consumed = 0;
    CHECK(parse_r(frame, consumed).kind != ResponseKind::Incomplete);
    CHECK(consumed == frame.size());
  }
}

TEST_CASE("broken responses poison the stream") {
  size_t consumed = 0;
  CHECK(parse_r("BOGUS\r\n", consumed).kind == ResponseKind::Malformed);
  CHECK(consumed == 0);
  CHECK(parse_r("\r\n", consumed).kind == ResponseKind::Malformed);
  CHECK(parse_r("END \r\n", consumed).kind == ResponseKind::Malformed);
  CHECK(parse_r("END extra\r\n", consumed).kind == ResponseKind::Malformed);
  CHECK(parse_r("VALUE k 0 nope\r\n", consumed).kind == ResponseKind::Malformed);
  CHECK(parse_r("VALUE k 0 2\r\nabXXEND\r\n", consumed).kind == ResponseKind::Malformed);
  CHECK(parse_r("VALUE k 0 2\r\nab\r\nEND??", consumed).kind == ResponseKind::Malformed);
  CHECK(parse_r("VALUE k 0 99999999999\r\n", consumed).kind == ResponseKind::Malformed);
  CHECK(parse_r("VALUE bad\x01key 0 2\r\n", consumed).kind == ResponseKind::Malformed);
  // a line that can never fit is hopeless even before its CRLF arrives
  CHECK(parse_r(std::string(9000, 'a'), consumed).kind == ResponseKind::Malformed);
  CHECK(parse_r(std::string(9000, 'a') + "\r\n", consumed).kind == ResponseKind::Malformed);
}

TEST_CASE("requests parse, with unknown commands kept in frame") {
  size_t consumed = 0;

  auto get = parse_q("get k1\r\n", consumed);
  CHECK(get.kind == RequestKind::Get);
  CHECK(get.key == "k1");
  CHECK(consumed == 8);

  std::string set_frame = "set key 7 60 2\r\nab\r\n";
  auto set = parse_q(set_frame, consumed);
  CHECK(set.kind == RequestKind::Set);
  CHECK(set.key == "key");
  CHECK(set.flags == 7);
  CHECK(set.exptime == 60);
  CHECK(set.value == "ab");
  CHECK(consumed == set_frame.size());

  // unknown verbs, bad arity and bad keys consume the line; the server
  // answers ERROR and the stream stays in sync
  CHECK(parse_q("delete k1\r\n", consumed).kind == RequestKind::Unknown);
  CHECK(consumed == 11);
  CHECK(parse_q("\r\n", consumed).kind == RequestKind::Unknown);
  CHECK(consumed == 2);
  CHECK(parse_q("get  k1\r\n", consumed).kind == RequestKind::Unknown);
  CHECK(parse_q("get k1 k2\r\n", consumed).kind == RequestKind::Unknown);
  CHECK(parse_q("get bad\x01key\r\n", consumed).kind == RequestKind::Unknown);

  // a set whose only sin is the key still has a trustworthy byte count
  std::string bad_key_set = "set bad\x01key 0 0 2\r\nab\r\n";
  CHECK(parse_q(bad_key_set, consumed).kind == RequestKind::Unknown);
  CHECK(consumed == bad_key_set.size());
}

TEST_CASE("broken set headers poison the stream") {
  size_t consumed = 0;
  CHECK(parse_q("set k 0 0 nope\r\n", consumed).kind == RequestKind::Malformed);
  CHECK(consumed == 0);
  CHECK(parse_q("set k 0 0\r\n", consumed).kind == RequestKind::Malformed);
  CHECK(parse_q("set k 0 0 2 9\r\n", consumed).kind == RequestKind::Malformed);
  CHECK(parse_q("set k 0 0 2\r\nabXX", consumed).kind == RequestKind::Malformed);
  CHECK(parse_q("set k 0 0 99999999999\r\n", consumed).kind == RequestKind::Malformed);
  CHECK(parse_q(std::string(9000, 'x'), consumed).kind == RequestKind::Malformed);
}

TEST_CASE("partial requests report incomplete without consuming") {
  std::vector<std::string> frames = {
      "get k1\r\n",
      "set key 7 60 2\r\nab\r\n",
      "set k 0 0 0\r\n\r\n",
      "delete k1\r\n",
  };
  for (const auto& frame : frames) {
    for (size_t cut = 0; cut < frame.size(); ++cut) {
      size_t consumed = 0;
      auto partial = parse_q(frame.substr(0, cut), consumed);
      CHECK(consumed == 0);
      CHECK(partial.kind == RequestKind::Incomplete);
    }
    size_t consumed = 0;
    CHECK(parse_q(frame, consumed).kind != RequestKind::Incomplete);
    CHECK(consumed == frame.size());
  }
}

TEST_CASE("messages stream back to back") {
  std::string stream =
      "STORED\r\nVALUE a 0 3\r\nxyz\r\nEND\r\nEND\r\nSERVER_ERROR busy\r\n";
  std::vector<ResponseKind> kinds;
  std::string_view rest = stream;
  while (!rest.empty()) {
    Response out;
    size_t consumed = parse_response(rest, out);
    REQUIRE(consumed > 0);
    kinds.push_back(out.kind);
    rest.remove_prefix(consumed);
  }
  CHECK(kinds == std::vector<ResponseKind>{ResponseKind::Stored, ResponseKind::Hit,
                                           ResponseKind::Miss, ResponseKind::ServerError});
}

TEST_CASE("byte-at-a-time delivery matches whole-buffer parsing") {
  std::string stream = "VALUE a 0 3\r\nxyz\r\nEND\r\nSTORED\r\nEND\r\n";
  std::string pending;
  std::vector<Response> seen;
  for (char byte : stream) {
    pending.push_back(byte);
    Response out;
    size_t consumed = parse_response(pending, out);
    if (consumed > 0) {
      seen.push_back(out);
      pending.erase(0, consumed);
    } else {
      CHECK(out.kind == ResponseKind::Incomplete);
    }
  }
  CHECK(pending.empty());
  REQUIRE(seen.size() == 3);
  CHECK(seen[0].kind == ResponseKind::Hit);
  CHECK(seen[0].value == "xyz");
  CHECK(seen[1].kind == ResponseKind::Stored);
  CHECK(seen[2].kind == ResponseKind::Miss);
}

TEST_CASE("random bytes never crash or over-consume the parsers") {
  Rng rng(20260817);
  std::string buffer;
  for (int round = 0; round < 100000; ++round) {
    size_t len = rng.next_u64() % 64;
    buffer.clear();
    for (size_t i = 0; i < len; ++i) {
      buffer.push_back(static_cast<char>(rng.next_u64() & 0xff));
    }
    Response response;
    size_t consumed_r = parse_response(buffer, response);
    CHECK(consumed_r <= buffer.size());
    if (response.kind == ResponseKind::Incomplete ||
        response.kind == ResponseKind::Malformed) {
      CHECK(consumed_r == 0);
    } else {
      CHECK(consumed_r > 0);
    }
    Request request;
    size_t consumed_q = parse_request(buffer, request);
    CHECK(consumed_q <= buffer.size());
    if (request.kind == RequestKind::Incomplete || request.kind == RequestKind::Malformed) {
      CHECK(consumed_q == 0);
    } else {
      CHECK(consumed_q > 0);
    }
  }
}

TEST_CASE("token soup never crashes or over-consumes the parsers") {
  static const char* kPieces[] = {"VALUE",  "END",  "STORED", "get", "set", "k1",
                                  "0",      "2",    "ab",     " ",   "\r\n", "\r",
                                  "\n",     "999",  "CLIENT_ERROR", "-1"};
  Rng rng(99);
  std::string buffer;
  for (int round = 0; round < 20000; ++round) {
    buffer.clear();
    size_t pieces = 1 + rng.next_u64() % 12;
    for (size_t i = 0; i < pieces; ++i) {
      buffer += kPieces[rng.next_u64() % (sizeof(kPieces) / sizeof(kPieces[0]))];
    }
    Response response;
    CHECK(parse_response(buffer, response) <= buffer.size());
    Request request;
    CHECK(parse_request(buffer, request) <= buffer.size());
    // parsing must be a pure function of the buffer
    Response response2;
    CHECK(parse_response(buffer, response2) == parse_response(buffer, response));
    CHECK(response.kind == response2.kind);
  }
}
