// Copyright 2026 The dialect-forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dforge/mock_backend.hpp"

#include <poll.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "dforge/artext.hpp"
#include "dforge/error.hpp"
#include "dforge/utf8.hpp"

namespace dforge::mock {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double unit_interval(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string corrupt_word(const std::string& word, std::mt19937_64& rng) {
  std::u32string cps = utf8::decode(word);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < cps.size(); ++i)
    for (const auto& [from, to] : confusion_pool())
      if (cps[i] == from) {
        candidates.push_back(i);
        break;
      }
  if (candidates.empty())
    return std::string(word == kFillerWord ? kFillerWord2 : kFillerWord);
  const std::size_t pos = candidates[rng() % candidates.size()];
  for (const auto& [from, to] : confusion_pool())
    if (cps[pos] == from) {
      cps[pos] = to;
      break;
    }
  return utf8::encode(cps);
}

bool write_all(int fd, const std::string& data) {
  const char* p = data.data();
  std::size_t left = data.size();
  while (left > 0) {
    const ssize_t n = ::write(fd, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  return true;
}

class FdLineReader {
 public:
  explicit FdLineReader(int fd) : fd_(fd) {}

  enum class Status { Line, Timeout, Eof };

  // timeout_ms < 0 blocks.
  Status next(std::string& line, int timeout_ms) {
    for (;;) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return Status::Line;
      }
      if (eof_) {
        if (buffer_.empty()) return Status::Eof;
        line = std::move(buffer_);
        buffer_.clear();
        return Status::Line;
      }
      if (timeout_ms >= 0) {
        pollfd pfd{fd_, POLLIN, 0};
        const int r = ::poll(&pfd, 1, timeout_ms);
        if (r == 0) return Status::Timeout;
        if (r < 0 && errno == EINTR) continue;
      }
      char buf[65536];
      const ssize_t n = ::read(fd_, buf, sizeof buf);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        eof_ = true;
        continue;
      }
      buffer_.append(buf, static_cast<std::size_t>(n));
    }
  }

 private:
  int fd_;
  std::string buffer_;
  bool eof_ = false;
};

}  // namespace

const std::vector<std::pair<char32_t, char32_t>>& confusion_pool() {
  static const std::vector<std::pair<char32_t, char32_t>> pool{
      {U'د', U'ض'},  // dal -> dad
      {U'ت', U'ط'},  // teh -> tah
      {U'س', U'ص'},  // seen -> sad
      {U'ذ', U'ز'},  // thal -> zain
      {U'ق', U'غ'},  // qaf -> ghain
      {U'ه', U'ح'},  // heh -> hah
      {U'ك', U'ق'},  // kaf -> qaf
      {U'ث', U'س'},  // theh -> seen
  };
  return pool;
}

AsrTranscript transcribe(const std::string& oracle_text, std::uint64_t seed,
                         const std::string& id, double noise_rate) {
  // Separate streams for "corrupt this word?" and "which character", so the
  // corrupted set at a lower noise rate is a subset of the one at a higher.
  const std::uint64_t base = seed * 0x9E3779B97F4A7C15ULL ^ fnv1a(id);
  std::mt19937_64 decide(base);
  std::mt19937_64 pick(base ^ 0xD1B54A32D192ED03ULL);
  AsrTranscript out;
  double log_sum = 0.0;
  const auto words = tokenize_words(oracle_text);
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out.text.push_back(' ');
    if (unit_interval(decide) < noise_rate) {
      out.text += corrupt_word(words[i], pick);
      ++out.corrupted_words;
      log_sum += std::log(kNoisyWordProb);
    } else {
      out.text += words[i];
      log_sum += std::log(kCleanWordProb);
    }
  }
  // No words: nothing was corrupted, report the clean-word level.
  const double mean = words.empty() ? std::log(kCleanWordProb)
                                    : log_sum / static_cast<double>(words.size());
  out.confidence = std::clamp(std::exp(mean), 0.0, 1.0);
  return out;
}

MockAsr::MockAsr(AsrOptions options, std::unordered_map<std::string, std::string> oracle)
    : options_(std::move(options)), oracle_(std::move(oracle)) {
  if (!(options_.noise_rate >= 0.0 && options_.noise_rate <= 1.0))
    throw DataError("mock noise_rate must lie in [0,1]");
}

protocol::AsrResponse MockAsr::respond(const protocol::AsrRequest& request) const {
  protocol::AsrResponse r;
  r.id = request.id;
  auto it = oracle_.find(request.id);
  if (it == oracle_.end()) {
    r.error = "id not in oracle";
    return r;
  }
  auto t = transcribe(it->second, options_.seed, request.id, options_.noise_rate);
  r.text = std::move(t.text);
  r.confidence = t.confidence;
  r.language = options_.language;
  return r;
}

double tts_duration(const std::string& text, const TtsOptions& options) {
  if (options.seconds_per_clip) return *options.seconds_per_clip;
  return 0.5 + 0.06 * static_cast<double>(utf8::decode(text).size());
}

void write_silent_wav(const std::string& path, double seconds, int sample_rate) {
  const auto samples = static_cast<std::uint32_t>(std::llround(seconds * sample_rate));
  const std::uint32_t data_bytes = samples * 2;
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  auto u32 = [&](std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.put(static_cast<char>((v >> (8 * k)) & 0xFF));
  };
  auto u16 = [&](std::uint16_t v) {
    out.put(static_cast<char>(v & 0xFF));
    out.put(static_cast<char>(v >> 8));
  };
  out.write("RIFF", 4);
  u32(36 + data_bytes);
  out.write("WAVEfmt ", 8);
  u32(16);
  u16(1);  // PCM
  u16(1);  // mono
  u32(static_cast<std::uint32_t>(sample_rate));
  u32(static_cast<std::uint32_t>(sample_rate) * 2);
  u16(2);
  u16(16);
  out.write("data", 4);
  u32(data_bytes);
  const std::string zeros(4096, '\0');
  for (std::uint32_t left = data_bytes; left > 0;) {
    const std::uint32_t chunk = std::min<std::uint32_t>(left, zeros.size());
    out.write(zeros.data(), chunk);
    left -= chunk;
  }
  if (!out) throw DataError("I/O error writing " + path);
}

MockTts::MockTts(TtsOptions options) : options_(std::move(options)) {
  if (options_.seconds_per_clip && !(*options_.seconds_per_clip > 0.0))
    throw DataError("mock seconds_per_clip must be > 0");
}

protocol::TtsResponse MockTts::respond(const protocol::TtsRequest& request) const {
  protocol::TtsResponse r;
  r.id = request.id;
  const double seconds = tts_duration(request.text, options_);
  if (options_.write_audio) {
    try {
      write_silent_wav(request.out_audio, seconds, options_.sample_rate);
    } catch (const std::exception& e) {
      r.error = e.what();
      return r;
    }
  }
  r.out_audio = request.out_audio;
  r.duration_sec = seconds;
  return r;
}

int serve(int in_fd, int out_fd, const ServeOptions& opts, const MockAsr* asr,
          const MockTts* tts) {
  FdLineReader reader(in_fd);
  std::mt19937_64 shuffle_rng(opts.seed ^ 0x5bd1e995ULL);
  std::vector<std::string> pending;
  std::size_t sent = 0;
  bool duplicated = false;

  auto respond = [&](const std::string& line) -> std::optional<std::pair<std::string, std::string>> {
    std::string type;
    try {
      type = protocol::request_type(line);
    } catch (const ProtocolError& e) {
      std::cerr << "mock backend: " << e.what() << '\n';
      return std::nullopt;
    }
    if (type == "asr") {
      auto req = protocol::parse_asr_request(line);
      protocol::AsrResponse r;
      if (opts.fail_ids.contains(req.id)) {
        r.id = req.id;
        r.error = "injected failure";
      } else if (asr == nullptr) {
        r.id = req.id;
        r.error = "asr not served by this backend";
      } else {
        r = asr->respond(req);
      }
      return std::pair{req.id, protocol::serialize(r)};
    }
    auto req = protocol::parse_tts_request(line);
    protocol::TtsResponse r;
    if (opts.fail_ids.contains(req.id)) {
      r.id = req.id;
      r.error = "injected failure";
    } else if (tts == nullptr) {
      r.id = req.id;
      r.error = "tts not served by this backend";
    } else {
      r = tts->respond(req);
    }
    return std::pair{req.id, protocol::serialize(r)};
  };

  // Returns false when the process should stop.
  auto emit = [&](const std::string& line) -> bool {
    std::optional<std::pair<std::string, std::string>> answer;
    try {
      answer = respond(line);
    } catch (const ProtocolError& e) {
      std::cerr << "mock backend: " << e.what() << '\n';
    }
    if (!answer || opts.hang_ids.contains(answer->first)) return true;
    if (!write_all(out_fd, answer->second + "\n")) return false;
    if (opts.duplicate_first && !duplicated) {
      duplicated = true;
      if (!write_all(out_fd, answer->second + "\n")) return false;
    }
    ++sent;
    if (opts.crash_after && sent >= *opts.crash_after) ::_exit(3);
    return true;
  };

  auto flush = [&]() -> bool {
    std::shuffle(pending.begin(), pending.end(), shuffle_rng);
    for (const auto& l : pending)
      if (!emit(l)) return false;
    pending.clear();
    return true;
  };

  std::string line;
  for (;;) {
    const int timeout = opts.jitter_ms > 0 && !pending.empty() ? opts.jitter_ms : -1;
    const auto status = reader.next(line, timeout);
    if (status == FdLineReader::Status::Timeout) {
      if (!flush()) return 1;
      continue;
    }
    if (status == FdLineReader::Status::Eof) {
      return flush() ? 0 : 1;
    }
    if (line.empty()) continue;
    if (protocol::is_end_record(line)) {
      if (!flush()) return 1;
      write_all(out_fd, std::string(protocol::kEndRecord) + "\n");
      return 0;
    }
    if (opts.jitter_ms > 0) {
      pending.push_back(line);
      if (pending.size() >= 8 && !flush()) return 1;
    } else if (!emit(line)) {
      return 1;
    }
  }
}

}  // namespace dforge::mock
