#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gaitforge/env.hpp"

namespace gaitforge {

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual void begin_episode(int episode, std::uint64_t seed) {
    (void)episode;
    (void)seed;
  }
  virtual std::vector<double> act(const Env& env, const std::vector<double>& obs) = 0;
  virtual void finish() {}
};

class CpgPolicy : public Policy {
 public:
  std::string name() const override { return "cpg"; }
  std::vector<double> act(const Env& env, const std::vector<double>& obs) override;
};

class ZeroPolicy : public Policy {
 public:
  std::string name() const override { return "zero"; }
  std::vector<double> act(const Env& env, const std::vector<double>& obs) override;
};

// Client side of the external policy protocol. Frames are
//   u32 payload length | u8 type | payload
// little-endian. The client opens with HELLO (type 0: "GFPP", u16 version,
// u32 obs_dim, u32 act_dim, u16 name length, name) and expects HELLO back
// ("GFPP", u16 version). Each step sends OBS (type 1: u32 episode,
// u32 step, f64[obs_dim]) and expects ACT (type 2: u32 n, f64[n]). BYE
// (type 3, empty) ends the session. Any deviation raises kProtocol.
inline constexpr std::uint16_t kProtocolVersion = 1;

class ExternPolicy : public Policy {
 public:
  // Runs `command` through /bin/sh with stdin/stdout connected to the
  // protocol stream.
  static std::unique_ptr<ExternPolicy> spawn(const std::string& command);
  // Connects to a listening Unix-domain socket.
  static std::unique_ptr<ExternPolicy> connect_unix(const std::string& path);

  ~ExternPolicy() override;
  ExternPolicy(const ExternPolicy&) = delete;
  ExternPolicy& operator=(const ExternPolicy&) = delete;

  std::string name() const override { return "extern"; }
  void begin_episode(int episode, std::uint64_t seed) override;
  std::vector<double> act(const Env& env, const std::vector<double>& obs) override;
  void finish() override;

 private:
  ExternPolicy(int fd, int child_pid);
  void handshake(const Env& env);
  void send_frame(std::uint8_t type, const std::string& payload);
  std::pair<std::uint8_t, std::string> recv_frame();
  void close_stream();

  int fd_ = -1;
  int child_ = -1;
  bool greeted_ = false;
  std::uint32_t episode_ = 0;
  std::uint32_t step_ = 0;
};

// "cpg", "zero", "spawn:<command>" or "unix:<path>".
std::unique_ptr<Policy> make_policy(const std::string& source);

}  // namespace gaitforge
