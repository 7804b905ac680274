#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <sys/types.h>
#include <vector>

#include "rldf/oracle.hpp"

namespace rldf {

namespace wire {

// Newline-delimited JSON, one object per line.
//   request:  {"id": u64, "prompt": str, "seed": u64}
//   response: {"id": u64, "objects": [str], "scene": str, "embedding": [num]}
// A response carrying {"id": u64, "error": str} reports a backend failure.

struct Request {
  std::uint64_t id = 0;
  std::string prompt;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> options;  // omitted from the line when empty
};

struct Response {
  std::uint64_t id = 0;
  SemanticObservation observation;
};

/// Serialized request line, without the trailing newline.
std::string encode_request(const Request& request);

/// Parses and validates one response line. The embedding must have exactly
/// embedding_dim entries and is re-normalised to unit length.
/// Throws OracleError carrying the raw line on any violation.
Response parse_response(std::string_view line, int embedding_dim);

}  // namespace wire

/// Bidirectional line stream to a backend.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void write_line(std::string_view line) = 0;
  /// Next complete line, or nullopt once the deadline passes.
  virtual std::optional<std::string> read_line(std::chrono::steady_clock::time_point deadline) = 0;
};

/// Channel over a connected stream socket. Child-process backends get one
/// end of a socketpair as their stdin and stdout.
class SocketChannel final : public LineChannel {
 public:
  static std::unique_ptr<SocketChannel> spawn(const std::vector<std::string>& argv);
  static std::unique_ptr<SocketChannel> connect_tcp(const std::string& host, int port);

  ~SocketChannel() override;
  SocketChannel(const SocketChannel&) = delete;
  SocketChannel& operator=(const SocketChannel&) = delete;

  void write_line(std::string_view line) override;
  std::optional<std::string> read_line(std::chrono::steady_clock::time_point deadline) override;

 private:
  SocketChannel(int fd, pid_t child) : fd_(fd), child_(child) {}

  int fd_ = -1;
  pid_t child_ = -1;
  std::string buffer_;
  bool eof_ = false;
};

/// Client for a real diffusion backend speaking the wire protocol. Requests
/// in a batch are written back to back; responses are matched by id and may
/// arrive in any order. One connection per instance; not thread-safe.
class ExternalOracle final : public FeedbackOracle {
 public:
  ExternalOracle(std::shared_ptr<const Grammar> grammar, OracleConfig config);
  ExternalOracle(std::shared_ptr<const Grammar> grammar, OracleConfig config,
                 std::unique_ptr<LineChannel> channel);

  SemanticObservation observe(const EncodedState& state) override;
  std::vector<SemanticObservation> observe_batch(std::span<const EncodedState> states) override;

  /// Objects and scene from the grammar; embedding from the backend's
  /// rendering of the goal prompt.
  SemanticObservation target_semantics(const EncodedState& terminal) override;

 private:
  std::shared_ptr<const Grammar> grammar_;
  OracleConfig config_;
  std::unique_ptr<LineChannel> channel_;
  std::uint64_t next_id_ = 1;
};

}  // namespace rldf
