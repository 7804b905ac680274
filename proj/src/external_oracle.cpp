#include "rldf/external_oracle.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <thread>
#include <unordered_map>

#include "rldf/error.hpp"

extern char** environ;

namespace rldf {

namespace wire {

std::string encode_request(const Request& request) {
  nlohmann::ordered_json j;
  j["id"] = request.id;
  j["prompt"] = request.prompt;
  j["seed"] = request.seed;
  if (!request.options.empty()) j["options"] = request.options;
  return j.dump();
}

Response parse_response(std::string_view line, int embedding_dim) {
  const std::string raw(line);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception& e) {
    throw OracleError(std::string("malformed response: ") + e.what(), raw);
  }
  if (!j.is_object()) throw OracleError("malformed response: not a JSON object", raw);
  if (!j.contains("id") || !j["id"].is_number_unsigned()) {
    throw OracleError("malformed response: missing unsigned 'id'", raw);
  }
  Response r;
  r.id = j["id"].get<std::uint64_t>();
  if (j.contains("error")) {
    throw OracleError("backend reported an error for request " + std::to_string(r.id) + ": " +
                          (j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump()),
                      raw);
  }
  if (!j.contains("objects") || !j["objects"].is_array()) {
    throw OracleError("malformed response: 'objects' must be an array of strings", raw);
  }
  for (const auto& o : j["objects"]) {
    if (!o.is_string()) throw OracleError("malformed response: 'objects' must be an array of strings", raw);
    r.observation.objects.insert(o.get<std::string>());
  }
  if (!j.contains("scene") || !j["scene"].is_string()) {
    throw OracleError("malformed response: 'scene' must be a string", raw);
  }
  r.observation.scene = j["scene"].get<std::string>();
  if (!j.contains("embedding") || !j["embedding"].is_array()) {
    throw OracleError("malformed response: 'embedding' must be an array of numbers", raw);
  }
  const auto& emb = j["embedding"];
  if (static_cast<int>(emb.size()) != embedding_dim) {
    throw OracleError("malformed response: embedding has " + std::to_string(emb.size()) +
                          " entries, expected " + std::to_string(embedding_dim),
                      raw);
  }
  double norm_sq = 0.0;
  r.observation.embedding.reserve(emb.size());
  for (const auto& x : emb) {
    if (!x.is_number()) throw OracleError("malformed response: non-numeric embedding entry", raw);
    const double v = x.get<double>();
    norm_sq += v * v;
    r.observation.embedding.push_back(v);
  }
  const double norm = std::sqrt(norm_sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw OracleError("malformed response: embedding has zero or non-finite norm", raw);
  }
  for (auto& v : r.observation.embedding) v /= norm;
  return r;
}

}  // namespace wire

namespace {

void set_cloexec(int fd) { ::fcntl(fd, F_SETFD, ::fcntl(fd, F_GETFD) | FD_CLOEXEC); }

}  // namespace

std::unique_ptr<SocketChannel> SocketChannel::spawn(const std::vector<std::string>& argv) {
  if (argv.empty()) throw OracleError("backend command is empty");
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
    throw OracleError(std::string("socketpair failed: ") + std::strerror(errno));
  }
  set_cloexec(fds[0]);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, fds[1]);

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_t pid = -1;
  const int rc = ::posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(fds[1]);
  if (rc != 0) {
    ::close(fds[0]);
    throw OracleError("failed to launch backend '" + argv[0] + "': " + std::strerror(rc));
  }
  return std::unique_ptr<SocketChannel>(new SocketChannel(fds[0], pid));
}

std::unique_ptr<SocketChannel> SocketChannel::connect_tcp(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const std::string service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found); rc != 0) {
    throw OracleError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (auto* ai = found; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(found);
  if (fd < 0) throw OracleError("cannot connect to " + host + ":" + service);
  set_cloexec(fd);
  return std::unique_ptr<SocketChannel>(new SocketChannel(fd, -1));
}

SocketChannel::~SocketChannel() {
  if (fd_ >= 0) ::close(fd_);
  if (child_ > 0) {
    // The backend sees EOF on stdin; give it a moment to exit on its own.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(child_, nullptr, WNOHANG) == child_) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(child_, SIGKILL);
    ::waitpid(child_, nullptr, 0);
  }
}

void SocketChannel::write_line(std::string_view line) {
  std::string data(line);
  data.push_back('\n');
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw OracleError(std::string("write to backend failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> SocketChannel::read_line(std::chrono::steady_clock::time_point deadline) {
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (eof_) throw OracleError("backend closed the stream", buffer_);

    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd p{fd_, POLLIN, 0};
    const int ready = ::poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw OracleError(std::string("poll on backend failed: ") + std::strerror(errno));
    }
    if (ready == 0) continue;
    char chunk[4096];
    const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw OracleError(std::string("read from backend failed: ") + std::strerror(errno));
    }
    if (n == 0) {
      eof_ = true;
    } else {
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }
}

ExternalOracle::ExternalOracle(std::shared_ptr<const Grammar> grammar, OracleConfig config)
    : grammar_(std::move(grammar)), config_(std::move(config)) {
  config_.validate();
  if (config_.external.transport == Transport::process) {
    channel_ = SocketChannel::spawn(config_.external.command);
  } else {
    channel_ = SocketChannel::connect_tcp(config_.external.host, config_.external.port);
  }
}

ExternalOracle::ExternalOracle(std::shared_ptr<const Grammar> grammar, OracleConfig config,
                               std::unique_ptr<LineChannel> channel)
    : grammar_(std::move(grammar)), config_(std::move(config)), channel_(std::move(channel)) {
  config_.validate();
}

SemanticObservation ExternalOracle::observe(const EncodedState& state) {
  return std::move(observe_batch(std::span<const EncodedState>(&state, 1)).front());
}

std::vector<SemanticObservation> ExternalOracle::observe_batch(std::span<const EncodedState> states) {
  std::unordered_map<std::uint64_t, std::size_t> pending;
  for (std::size_t i = 0; i < states.size(); ++i) {
    wire::Request req{next_id_++, decode(states[i], *grammar_).text, config_.seed,
                      config_.external.options};
    channel_->write_line(wire::encode_request(req));
    pending.emplace(req.id, i);
  }
  const auto deadline =
      std::chrono::steady_clock::now() +
      std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(config_.external.timeout_seconds));

  std::vector<SemanticObservation> out(states.size());
  while (!pending.empty()) {
    auto line = channel_->read_line(deadline);
    if (!line) {
      throw OracleError("no response for request " + std::to_string(pending.begin()->first) +
                        " within " + std::to_string(config_.external.timeout_seconds) + " s");
    }
    if (line->empty()) continue;
    auto response = wire::parse_response(*line, config_.embedding_dim);
    auto it = pending.find(response.id);
    if (it == pending.end()) {
      throw OracleError("response id " + std::to_string(response.id) +
                            " does not match any outstanding request",
                        *line);
    }
    out[it->second] = std::move(response.observation);
    pending.erase(it);
  }
  return out;
}

SemanticObservation ExternalOracle::target_semantics(const EncodedState& terminal) {
  SemanticObservation gt = noiseless_semantics(*grammar_, terminal);
  gt.embedding = observe(terminal).embedding;
  return gt;
}

}  // namespace rldf
