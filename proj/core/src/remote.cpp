#include "qtps/annealer.hpp"

#include "qtps/error.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>

namespace qtps {

RemoteConfig RemoteConfig::from_environment() {
  RemoteConfig cfg;
  if (const char* url = std::getenv("QTPS_SOLVER_URL")) cfg.url = url;
  if (const char* token = std::getenv("QTPS_SOLVER_TOKEN")) cfg.token = token;
  if (cfg.url.empty()) throw ConfigError("remote backend requires QTPS_SOLVER_URL");
  return cfg;
}

RemoteBackend::RemoteBackend(RemoteConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.url.empty()) throw ConfigError("remote backend url is empty");
}

std::chrono::milliseconds RemoteBackend::timeout_for(double budget) {
  return std::chrono::milliseconds(static_cast<long long>(std::ceil((2.0 * budget + 10.0) * 1000.0)));
}

nlohmann::json RemoteBackend::request_body(const AnnealRequest& request) {
  const QuboProblem& q = request.problem;
  nlohmann::json linear = nlohmann::json::object();
  for (std::size_t i = 0; i < q.num_bits(); ++i) {
    if (q.linear()[i] != 0.0) linear[std::to_string(i)] = q.linear()[i];
  }
  nlohmann::json quadratic = nlohmann::json::object();
  for (const auto& [key, c] : q.quadratic()) {
    quadratic[std::to_string(key.first) + "," + std::to_string(key.second)] = c;
  }
  return {{"qubo", {{"num_bits", q.num_bits()}, {"linear", linear}, {"quadratic", quadratic}, {"offset", q.offset()}}},
          {"budget_seconds", request.budget},
          {"num_reads", request.num_reads},
          {"seed", request.seed}};
}

AnnealOutcome RemoteBackend::parse_response(const AnnealRequest& request, const std::string& body) {
  const QuboProblem& q = request.problem;
  AnnealOutcome out;
  try {
    const auto doc = nlohmann::json::parse(body);
    const auto& samples = doc.at("samples");
    if (!samples.is_array() || samples.empty()) throw MalformedResponseError("response has no samples");
    for (const auto& s : samples) {
      const auto& raw = s.at("bits");
      if (!raw.is_array() || raw.size() != q.num_bits()) {
        throw MalformedResponseError("sample has " + std::to_string(raw.size()) + " bits, expected " +
                                     std::to_string(q.num_bits()));
      }
      BinaryAssignment read;
      for (const auto& b : raw) {
        const int v = b.get<int>();
        if (v != 0 && v != 1) throw MalformedResponseError("sample bit is not 0 or 1");
        read.bits.push_back(static_cast<std::uint8_t>(v));
      }
      read.energy = q.energy(read.bits);
      const double reported = s.at("energy").get<double>();
      if (std::abs(reported - read.energy) > 1e-6 * std::max(1.0, std::abs(read.energy))) {
        throw MalformedResponseError("reported energy " + std::to_string(reported) +
                                     " disagrees with re-evaluated " + std::to_string(read.energy));
      }
      out.reads.push_back(std::move(read));
    }
    out.wall_seconds = doc.at("solver_time_seconds").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponseError(std::string("malformed solver response: ") + e.what());
  }
  out.best = *std::min_element(out.reads.begin(), out.reads.end(),
                               [](const auto& a, const auto& b) { return a.energy < b.energy; });
  return out;
}

AnnealOutcome RemoteBackend::anneal(const AnnealRequest& request) const {
  request.validate();
  const auto timeout = timeout_for(request.budget);
  httplib::Client client(cfg_.url);
  if (!client.is_valid()) throw TransportError("cannot use solver url " + cfg_.url);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!cfg_.token.empty()) headers.emplace("Authorization", "Bearer " + cfg_.token);

  const auto start = std::chrono::steady_clock::now();
  const auto res = client.Post("/solve", headers, request_body(request).dump(), "application/json");
  const auto elapsed = std::chrono::steady_clock::now() - start;
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::ConnectionTimeout || (err == httplib::Error::Read && elapsed >= timeout * 9 / 10)) {
      throw TimeoutError("solver did not answer within " + std::to_string(timeout.count()) + " ms");
    }
    throw TransportError("solver request failed: " + httplib::to_string(err));
  }
  if (res->status != 200) {
    throw TransportError("solver returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  }
  AnnealOutcome out = parse_response(request, res->body);
  out.backend = id();
  return out;
}

}  // namespace qtps
