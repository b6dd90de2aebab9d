#include "gaitforge/policy.hpp"

#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <csignal>
#include <cerrno>
#include <cstring>

#include "gaitforge/error.hpp"

namespace gaitforge {
namespace {

constexpr char kProtoMagic[4] = {'G', 'F', 'P', 'P'};
constexpr std::uint8_t kHello = 0;
constexpr std::uint8_t kObs = 1;
constexpr std::uint8_t kAct = 2;
constexpr std::uint8_t kBye = 3;
constexpr std::uint32_t kMaxFrame = 1u << 24;

template <typename T>
void put(std::string& out, T v) {
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  out.append(raw, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error(ErrorCode::kProtocol, "frame payload too short");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::vector<double> CpgPolicy::act(const Env& env, const std::vector<double>& obs) {
  (void)obs;
  return env.cpg_action();
}

std::vector<double> ZeroPolicy::act(const Env& env, const std::vector<double>& obs) {
  (void)obs;
  return std::vector<double>(env.act_dim(), 0.0);
}

ExternPolicy::ExternPolicy(int fd, int child_pid) : fd_(fd), child_(child_pid) {}

ExternPolicy::~ExternPolicy() {
  try {
    finish();
  } catch (...) {
  }
}

std::unique_ptr<ExternPolicy> ExternPolicy::spawn(const std::string& command) {
  int sv[2];
  if (socketpair(AF_UNIX, SOCK_STREAM, 0, sv) != 0) {
    throw Error(ErrorCode::kIo, std::string("socketpair failed: ") + std::strerror(errno));
  }
  const pid_t pid = fork();
  if (pid < 0) {
    close(sv[0]);
    close(sv[1]);
    throw Error(ErrorCode::kIo, std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    close(sv[0]);
    dup2(sv[1], STDIN_FILENO);
    dup2(sv[1], STDOUT_FILENO);
    if (sv[1] > STDOUT_FILENO) close(sv[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(sv[1]);
  return std::unique_ptr<ExternPolicy>(new ExternPolicy(sv[0], pid));
}

std::unique_ptr<ExternPolicy> ExternPolicy::connect_unix(const std::string& path) {
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  if (path.size() >= sizeof(addr.sun_path)) {
    throw Error(ErrorCode::kInvalidInput, "socket path too long: " + path);
  }
  std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
  const int fd = socket(AF_UNIX, SOCK_STREAM, 0);
  if (fd < 0) throw Error(ErrorCode::kIo, std::string("socket failed: ") + std::strerror(errno));
  if (connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    const int err = errno;
    close(fd);
    throw Error(ErrorCode::kIo, "cannot connect to " + path + ": " + std::strerror(err));
  }
  return std::unique_ptr<ExternPolicy>(new ExternPolicy(fd, -1));
}

void ExternPolicy::send_frame(std::uint8_t type, const std::string& payload) {
  if (fd_ < 0) throw Error(ErrorCode::kProtocol, "policy stream is closed");
  std::string frame;
  put<std::uint32_t>(frame, static_cast<std::uint32_t>(payload.size()));
  frame.push_back(static_cast<char>(type));
  frame += payload;
  std::size_t sent = 0;
  while (sent < frame.size()) {
    const ssize_t n = send(fd_, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(ErrorCode::kProtocol, "policy server closed the stream");
    sent += static_cast<std::size_t>(n);
  }
}

std::pair<std::uint8_t, std::string> ExternPolicy::recv_frame() {
  const auto read_exact = [this](char* dst, std::size_t len) {
    std::size_t got = 0;
    while (got < len) {
      const ssize_t n = recv(fd_, dst + got, len - got, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw Error(ErrorCode::kProtocol, "policy server closed the stream mid-frame");
      got += static_cast<std::size_t>(n);
    }
  };
  if (fd_ < 0) throw Error(ErrorCode::kProtocol, "policy stream is closed");
  char head[5];
  read_exact(head, sizeof(head));
  std::uint32_t len;
  std::memcpy(&len, head, sizeof(len));
  if (len > kMaxFrame) throw Error(ErrorCode::kProtocol, "frame too large");
  std::string payload(len, '\0');
  read_exact(payload.data(), len);
  return {static_cast<std::uint8_t>(head[4]), std::move(payload)};
}

void ExternPolicy::handshake(const Env& env) {
  std::string hello(kProtoMagic, sizeof(kProtoMagic));
  put<std::uint16_t>(hello, kProtocolVersion);
  put<std::uint32_t>(hello, static_cast<std::uint32_t>(env.obs_dim()));
  put<std::uint32_t>(hello, static_cast<std::uint32_t>(env.act_dim()));
  put<std::uint16_t>(hello, static_cast<std::uint16_t>(env.spec().name.size()));
  hello += env.spec().name;
  send_frame(kHello, hello);
  const auto [type, payload] = recv_frame();
  std::size_t pos = 0;
  if (type != kHello || payload.size() < 6 || payload.compare(0, 4, kProtoMagic, 4) != 0) {
    throw Error(ErrorCode::kProtocol, "bad handshake reply");
  }
  pos = 4;
  const auto version = take<std::uint16_t>(payload, pos);
  if (version != kProtocolVersion) {
    throw Error(ErrorCode::kProtocol,
                "policy server speaks protocol version " + std::to_string(version));
  }
  greeted_ = true;
}

void ExternPolicy::begin_episode(int episode, std::uint64_t seed) {
  (void)seed;
  episode_ = static_cast<std::uint32_t>(episode);
  step_ = 0;
}

std::vector<double> ExternPolicy::act(const Env& env, const std::vector<double>& obs) {
  if (!greeted_) handshake(env);
  std::string req;
  put<std::uint32_t>(req, episode_);
  put<std::uint32_t>(req, step_++);
  req.append(reinterpret_cast<const char*>(obs.data()), obs.size() * sizeof(double));
  send_frame(kObs, req);
  const auto [type, payload] = recv_frame();
  if (type != kAct) {
    throw Error(ErrorCode::kProtocol, "expected ACT frame, got type " + std::to_string(type));
  }
  std::size_t pos = 0;
  const auto n = take<std::uint32_t>(payload, pos);
  if (static_cast<int>(n) != env.act_dim()) {
    throw Error(ErrorCode::kProtocol, "policy returned " + std::to_string(n) +
                                          " actions, expected " + std::to_string(env.act_dim()));
  }
  if (payload.size() != pos + n * sizeof(double)) {
    throw Error(ErrorCode::kProtocol, "ACT frame length does not match its count");
  }
  std::vector<double> action(n);
  std::memcpy(action.data(), payload.data() + pos, n * sizeof(double));
  return action;
}

void ExternPolicy::close_stream() {
  if (fd_ >= 0) {
    close(fd_);
    fd_ = -1;
  }
  if (child_ > 0) {
    int status = 0;
    for (int i = 0; i < 200; ++i) {
      if (waitpid(child_, &status, WNOHANG) != 0) {
        child_ = -1;
        return;
      }
      usleep(10000);
    }
    kill(child_, SIGKILL);
    waitpid(child_, &status, 0);
    child_ = -1;
  }
}

void ExternPolicy::finish() {
  if (fd_ >= 0 && greeted_) {
    try {
      send_frame(kBye, {});
    } catch (const Error&) {
    }
  }
  greeted_ = false;
  close_stream();
}

std::unique_ptr<Policy> make_policy(const std::string& source) {
  if (source == "cpg") return std::make_unique<CpgPolicy>();
  if (source == "zero") return std::make_unique<ZeroPolicy>();
  if (source.rfind("spawn:", 0) == 0) return ExternPolicy::spawn(source.substr(6));
  if (source.rfind("unix:", 0) == 0) return ExternPolicy::connect_unix(source.substr(5));
  throw Error(ErrorCode::kInvalidInput, "unknown policy source '" + source +
                                            "' (expected cpg, zero, spawn:<cmd> or unix:<path>)");
}

}  // namespace gaitforge
